// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "spectrarec/errors.hpp"
#include "spectrarec/nn.hpp"

namespace spectrarec::nn {

Tensor to_tensor(const RgbImage& rgb) {
  Tensor t(rgb.height(), rgb.width(), RgbImage::kChannels);
  std::copy(rgb.data().begin(), rgb.data().end(), t.data().begin());
  return t;
}

Tensor to_tensor(const Hypercube& cube) {
  Tensor t(cube.height(), cube.width(), cube.channels());
  std::copy(cube.data().begin(), cube.data().end(), t.data().begin());
  return t;
}

Hypercube to_cube(const Tensor& t, std::span<const float> wavelengths) {
  if (wavelengths.size() != t.depth()) {
    throw ShapeError("tensor depth " + std::to_string(t.depth()) + " does not match " +
                     std::to_string(wavelengths.size()) + " wavelengths");
  }
  std::vector<float> data(t.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = static_cast<float>(t.data()[i]);
  }
  return {t.height(), t.width(), {wavelengths.begin(), wavelengths.end()}, std::move(data)};
}

const char* to_string(LayerKind kind) noexcept {
  switch (kind) {
    case LayerKind::dense:
      return "dense";
    case LayerKind::conv3:
      return "conv3";
    case LayerKind::conv1:
      return "conv1";
    case LayerKind::relu:
      return "relu";
    case LayerKind::spectral_attention:
      return "spectral_attention";
  }
  return "?";
}

namespace {

constexpr ModelName kAllModels[] = {ModelName::pixel_feature_net, ModelName::local_feature_net,
                                    ModelName::spectral_attention_net};

}  // namespace

const char* to_string(ModelName name) noexcept {
  switch (name) {
    case ModelName::pixel_feature_net:
      return "pixel_feature_net";
    case ModelName::local_feature_net:
      return "local_feature_net";
    case ModelName::spectral_attention_net:
      return "spectral_attention_net";
  }
  return "?";
}

std::optional<ModelName> parse_model_name(std::string_view text) {
  for (ModelName name : kAllModels) {
    if (text == to_string(name)) {
      return name;
    }
  }
  return std::nullopt;
}

std::string model_names() {
  std::string out;
  for (ModelName name : kAllModels) {
    if (!out.empty()) {
      out += ", ";
    }
    out += to_string(name);
  }
  return out;
}

ModelSpec make_model_spec(ModelName name, std::size_t output_channels) {
  if (output_channels == 0) {
    throw SpecError("output channel count must be >= 1");
  }
  ModelSpec spec{name, {}, output_channels};
  auto relu = [](std::size_t d) { return LayerSpec{LayerKind::relu, d, d, 1}; };
  switch (name) {
    case ModelName::pixel_feature_net:
      spec.layers = {{LayerKind::dense, 3, 8}, relu(8),  {LayerKind::dense, 8, 16},
                     relu(16),                 {LayerKind::dense, 16, 32}, relu(32),
                     {LayerKind::dense, 32, output_channels}};
      break;
    case ModelName::local_feature_net:
      spec.layers = {{LayerKind::conv3, 3, 8}, relu(8),  {LayerKind::conv3, 8, 16},
                     relu(16),                 {LayerKind::conv3, 16, 32}, relu(32),
                     {LayerKind::conv1, 32, output_channels}};
      break;
    case ModelName::spectral_attention_net:
      spec.layers = {{LayerKind::conv3, 3, 16},
                     relu(16),
                     {LayerKind::spectral_attention, 16, 16, 2},
                     {LayerKind::conv1, 16, output_channels}};
      break;
  }
  return spec;
}

void validate_spec(const ModelSpec& spec) {
  if (spec.layers.empty()) {
    throw SpecError("model has no layers");
  }
  if (spec.layers.front().in_channels != RgbImage::kChannels) {
    throw SpecError("first layer must take 3 input channels");
  }
  if (spec.layers.back().out_channels != spec.output_channels || spec.output_channels == 0) {
    throw SpecError("last layer does not produce the declared output channels");
  }
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    if (l.in_channels == 0 || l.out_channels == 0) {
      throw SpecError("layer " + std::to_string(i) + " has a zero channel count");
    }
    if ((l.kind == LayerKind::relu || l.kind == LayerKind::spectral_attention) &&
        l.in_channels != l.out_channels) {
      throw SpecError("layer " + std::to_string(i) + " must preserve depth");
    }
    if (l.kind == LayerKind::spectral_attention &&
        (l.heads == 0 || l.in_channels % l.heads != 0)) {
      throw SpecError("layer " + std::to_string(i) + ": depth not divisible by heads");
    }
    if (i > 0 && spec.layers[i - 1].out_channels != l.in_channels) {
      throw SpecError("layer " + std::to_string(i) + " input does not match previous output");
    }
  }
}

std::size_t layer_param_count(const LayerSpec& layer) {
  switch (layer.kind) {
    case LayerKind::dense:
    case LayerKind::conv1:
      return layer.in_channels * layer.out_channels + layer.out_channels;
    case LayerKind::conv3:
      return 9 * layer.in_channels * layer.out_channels + layer.out_channels;
    case LayerKind::relu:
      return 0;
    case LayerKind::spectral_attention:
      return 3 * layer.in_channels * layer.in_channels;
  }
  return 0;
}

std::size_t param_count(const ModelSpec& spec) {
  std::size_t total = 0;
  for (const auto& layer : spec.layers) {
    total += layer_param_count(layer);
  }
  return total;
}

Weights make_weights(const ModelSpec& spec) {
  Weights w;
  std::size_t offset = 0;
  for (const auto& layer : spec.layers) {
    const std::size_t count = layer_param_count(layer);
    w.slots.push_back({offset, count});
    offset += count;
  }
  w.values.assign(offset, 0.0);
  return w;
}

void round_to_f32(std::span<double> values) {
  for (double& v : values) {
    v = static_cast<double>(static_cast<float>(v));
  }
}

namespace {

void init_layer(const LayerSpec& layer, std::span<double> params, std::mt19937_64& rng) {
  std::size_t weight_count = 0;
  double fan_in = 0.0;
  double fan_out = 0.0;
  switch (layer.kind) {
    case LayerKind::dense:
    case LayerKind::conv1:
      weight_count = layer.in_channels * layer.out_channels;
      fan_in = static_cast<double>(layer.in_channels);
      fan_out = static_cast<double>(layer.out_channels);
      break;
    case LayerKind::conv3:
      weight_count = 9 * layer.in_channels * layer.out_channels;
      fan_in = 9.0 * static_cast<double>(layer.in_channels);
      fan_out = 9.0 * static_cast<double>(layer.out_channels);
      break;
    case LayerKind::spectral_attention:
      weight_count = params.size();
      fan_in = fan_out = static_cast<double>(layer.in_channels);
      break;
    case LayerKind::relu:
      return;
  }
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i >= weight_count) {
      params[i] = 0.0;
      continue;
    }
    float v = static_cast<float>(dist(rng));
    if (std::abs(static_cast<double>(v)) > bound) {
      v = std::nextafter(v, 0.0F);
    }
    params[i] = v;
  }
}

}  // namespace

Weights init_weights(const ModelSpec& spec, std::uint64_t seed) {
  validate_spec(spec);
  Weights w = make_weights(spec);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    init_layer(spec.layers[i], w.layer(i), rng);
  }
  return w;
}

void check_weights(const ModelSpec& spec, const Weights& weights) {
  if (weights.slots.size() != spec.layers.size()) {
    throw ShapeError("weights index " + std::to_string(weights.slots.size()) +
                     " layers, spec has " + std::to_string(spec.layers.size()));
  }
  std::size_t offset = 0;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const std::size_t count = layer_param_count(spec.layers[i]);
    if (weights.slots[i].offset != offset || weights.slots[i].count != count) {
      throw ShapeError("weights slot " + std::to_string(i) + " does not match the spec");
    }
    offset += count;
  }
  if (weights.values.size() != offset) {
    throw ShapeError("weights hold " + std::to_string(weights.values.size()) +
                     " parameters, spec needs " + std::to_string(offset));
  }
}

Tensor forward(const ModelSpec& spec, const Weights& weights, const Tensor& input,
               ForwardTrace* trace) {
  check_weights(spec, weights);
  if (input.depth() != spec.layers.front().in_channels) {
    throw ShapeError("model input depth must be " +
                     std::to_string(spec.layers.front().in_channels));
  }
  if (trace != nullptr) {
    trace->activations.clear();
    trace->activations.reserve(spec.layers.size() + 1);
    trace->activations.push_back(input);
  }
  Tensor x = input;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    x = layer_forward(spec.layers[i], weights.layer(i), x);
    if (trace != nullptr) {
      trace->activations.push_back(x);
    }
  }
  return x;
}

Hypercube predict(const ModelSpec& spec, const Weights& weights, const RgbImage& rgb,
                  std::span<const float> wavelengths) {
  return to_cube(forward(spec, weights, to_tensor(rgb)), wavelengths);
}

Gradients backward(const ModelSpec& spec, const Weights& weights, const ForwardTrace& trace,
                   const Tensor& grad_out) {
  check_weights(spec, weights);
  if (trace.activations.size() != spec.layers.size() + 1) {
    throw ShapeError("forward trace does not match the model");
  }
  if (!grad_out.same_shape(trace.activations.back())) {
    throw ShapeError("output gradient shape does not match the model output");
  }
  Gradients grads{std::vector<double>(weights.values.size(), 0.0), grad_out};
  for (std::size_t i = spec.layers.size(); i-- > 0;) {
    LayerGradients lg =
        layer_backward(spec.layers[i], weights.layer(i), trace.activations[i], grads.input);
    std::copy(lg.params.begin(), lg.params.end(),
              grads.weights.begin() + static_cast<std::ptrdiff_t>(weights.slots[i].offset));
    grads.input = std::move(lg.input);
  }
  return grads;
}

Gradients backward(const ModelSpec& spec, const Weights& weights, const Tensor& input,
                   const Tensor& grad_out) {
  ForwardTrace trace;
  forward(spec, weights, input, &trace);
  return backward(spec, weights, trace, grad_out);
}

HeadReplacement replace_head(const ModelSpec& spec, const Weights& weights,
                             std::size_t new_output_channels, std::uint64_t seed) {
  validate_spec(spec);
  check_weights(spec, weights);
  const LayerSpec& head = spec.layers.back();
  if (head.kind != LayerKind::dense && head.kind != LayerKind::conv1) {
    throw SpecError(std::string("cannot replace a ") + to_string(head.kind) + " head");
  }
  if (new_output_channels == 0) {
    throw SpecError("new head needs >= 1 output channel");
  }
  HeadReplacement out;
  out.spec = spec;
  out.spec.layers.back().out_channels = new_output_channels;
  out.spec.output_channels = new_output_channels;
  out.weights = make_weights(out.spec);
  const std::size_t body = weights.slots.back().offset;
  std::copy(weights.values.begin(), weights.values.begin() + static_cast<std::ptrdiff_t>(body),
            out.weights.values.begin());
  std::mt19937_64 rng(seed);
  init_layer(out.spec.layers.back(), out.weights.layer(out.spec.layers.size() - 1), rng);
  return out;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += a[i] * b[i];
  }
  return acc;
}

double rel_error(std::span<const double> analytic, std::span<const double> numeric,
                 double& max_abs) {
  double diff = 0.0;
  double na = 0.0;
  double nn = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double d = analytic[i] - numeric[i];
    max_abs = std::max(max_abs, std::abs(d));
    diff += d * d;
    na += analytic[i] * analytic[i];
    nn += numeric[i] * numeric[i];
  }
  const double denom = std::sqrt(std::max(na, nn));
  if (denom == 0.0) {
    return 0.0;
  }
  return std::sqrt(diff) / denom;
}

// Central differences of f over every coordinate of `values`.
template <typename F>
std::vector<double> numeric_gradient(std::span<double> values, double step, F f) {
  std::vector<double> grad(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + step;
    const double up = f();
    values[i] = saved - step;
    const double down = f();
    values[i] = saved;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

}  // namespace

LayerGradients numeric_layer_gradients(const LayerSpec& layer, std::span<const double> params,
                                       const Tensor& x, const Tensor& probe, double step) {
  std::vector<double> p(params.begin(), params.end());
  Tensor xv = x;
  auto objective = [&] { return dot(probe.data(), layer_forward(layer, p, xv).data()); };
  LayerGradients numeric;
  numeric.params = numeric_gradient(std::span<double>(p), step, objective);
  numeric.input = Tensor(x.height(), x.width(), x.depth());
  const auto nx = numeric_gradient(xv.data(), step, objective);
  std::copy(nx.begin(), nx.end(), numeric.input.data().begin());
  return numeric;
}

GradCheckResult compare_gradients(const LayerGradients& analytic, const LayerGradients& numeric) {
  if (analytic.params.size() != numeric.params.size() ||
      !analytic.input.same_shape(numeric.input)) {
    throw ShapeError("gradient sets differ in shape");
  }
  GradCheckResult result;
  result.param_rel_error = rel_error(analytic.params, numeric.params, result.max_abs_error);
  result.input_rel_error = rel_error(analytic.input.data(), numeric.input.data(),
                                     result.max_abs_error);
  return result;
}

GradCheckResult check_layer_gradients(const LayerSpec& layer, std::span<const double> params,
                                      const Tensor& x, const Tensor& probe, double step) {
  return compare_gradients(layer_backward(layer, params, x, probe),
                           numeric_layer_gradients(layer, params, x, probe, step));
}

GradCheckResult check_model_gradients(const ModelSpec& spec, const Weights& weights,
                                      const Tensor& x, const Tensor& probe, double step) {
  const Gradients analytic = backward(spec, weights, x, probe);
  Weights w = weights;
  Tensor xv = x;
  auto objective = [&] { return dot(probe.data(), forward(spec, w, xv).data()); };
  GradCheckResult result;
  const auto np = numeric_gradient(std::span<double>(w.values), step, objective);
  const auto nx = numeric_gradient(xv.data(), step, objective);
  result.param_rel_error = rel_error(analytic.weights, np, result.max_abs_error);
  result.input_rel_error = rel_error(analytic.input.data(), nx, result.max_abs_error);
  return result;
}

}  // namespace spectrarec::nn
