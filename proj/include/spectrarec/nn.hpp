// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spectrarec/cube.hpp"

namespace spectrarec::nn {

// H x W x D activation map, channel-last, 64-bit.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t height, std::size_t width, std::size_t depth, double fill = 0.0)
      : height_(height), width_(width), depth_(depth), data_(height * width * depth, fill) {}

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t depth() const noexcept { return depth_; }
  std::size_t pixels() const noexcept { return height_ * width_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  double& at(std::size_t h, std::size_t w, std::size_t d) {
    return data_[(h * width_ + w) * depth_ + d];
  }
  const double& at(std::size_t h, std::size_t w, std::size_t d) const {
    return data_[(h * width_ + w) * depth_ + d];
  }

  bool same_shape(const Tensor& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ && depth_ == other.depth_;
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t depth_ = 0;
  std::vector<double> data_;
};

Tensor to_tensor(const RgbImage& rgb);
Tensor to_tensor(const Hypercube& cube);
Hypercube to_cube(const Tensor& t, std::span<const float> wavelengths);

enum class LayerKind : std::uint8_t { dense = 0, conv3 = 1, conv1 = 2, relu = 3, spectral_attention = 4 };

const char* to_string(LayerKind kind) noexcept;

struct LayerSpec {
  LayerKind kind = LayerKind::dense;
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t heads = 1;  // spectral_attention only

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

enum class ModelName : std::uint8_t { pixel_feature_net, local_feature_net, spectral_attention_net };

const char* to_string(ModelName name) noexcept;
std::optional<ModelName> parse_model_name(std::string_view text);
/// Comma-separated list of every model name, for error messages.
std::string model_names();

struct ModelSpec {
  ModelName name = ModelName::pixel_feature_net;
  std::vector<LayerSpec> layers;
  std::size_t output_channels = 0;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Canonical layer stacks:
///   pixel_feature_net       dense 3-8-16-32-C with ReLU between
///   local_feature_net       conv3 3-8-16-32 with ReLU, conv1 head 32-C
///   spectral_attention_net  conv3 3-16, ReLU, spectral attention (2 heads), conv1 16-C
ModelSpec make_model_spec(ModelName name, std::size_t output_channels);

/// Throws SpecError if the layer chain is inconsistent (channel mismatch,
/// input not 3, output not output_channels, bad head count).
void validate_spec(const ModelSpec& spec);

std::size_t layer_param_count(const LayerSpec& layer);
std::size_t param_count(const ModelSpec& spec);

struct ParamSlot {
  std::size_t offset = 0;
  std::size_t count = 0;

  friend bool operator==(const ParamSlot&, const ParamSlot&) = default;
};

// Flat parameter store with a per-layer index. Dense/conv layers hold
// weights [out][ky][kx][in] followed by out biases; attention holds the
// query, key and value projections, each [out][in].
struct Weights {
  std::vector<double> values;
  std::vector<ParamSlot> slots;

  std::span<const double> layer(std::size_t i) const {
    return std::span<const double>(values).subspan(slots[i].offset, slots[i].count);
  }
  std::span<double> layer(std::size_t i) {
    return std::span<double>(values).subspan(slots[i].offset, slots[i].count);
  }

  friend bool operator==(const Weights&, const Weights&) = default;
};

/// Zero weights laid out for `spec`.
Weights make_weights(const ModelSpec& spec);

/// Glorot-uniform weights (bound sqrt(6 / (fan_in + fan_out))), zero
/// biases, drawn deterministically from the seed and rounded to 32-bit.
Weights init_weights(const ModelSpec& spec, std::uint64_t seed);

/// Throws ShapeError if the weights do not fit the spec.
void check_weights(const ModelSpec& spec, const Weights& weights);

/// Rounds every parameter to the nearest 32-bit float.
void round_to_f32(std::span<double> values);

// Single-layer kernels. The backward pass returns the gradient of
// <grad_out, layer(x)> with respect to the parameters and the input.
Tensor layer_forward(const LayerSpec& layer, std::span<const double> params, const Tensor& x);

struct LayerGradients {
  std::vector<double> params;
  Tensor input;
};

LayerGradients layer_backward(const LayerSpec& layer, std::span<const double> params,
                              const Tensor& x, const Tensor& grad_out);

/// Channel-wise self-attention with a residual connection. Tokens are the D
/// channel maps flattened over H * W. Per head, query token j attends over
/// key tokens i with weights softmax_i(<q_j, k_i> / sqrt(H * W)), and the
/// output token is the weighted sum of value tokens. ShapeError if D is not
/// divisible by the head count.
Tensor spectral_attention_forward(const LayerSpec& block, std::span<const double> params,
                                  const Tensor& x);

/// Row-stochastic attention matrices, one d_h x d_h row-major matrix per
/// head (row = query token).
std::vector<std::vector<double>> spectral_attention_maps(const LayerSpec& block,
                                                         std::span<const double> params,
                                                         const Tensor& x);

// activations[0] is the input, activations[i + 1] the output of layer i.
struct ForwardTrace {
  std::vector<Tensor> activations;
};

/// ShapeError on weight-length or input-depth mismatch.
Tensor forward(const ModelSpec& spec, const Weights& weights, const Tensor& input,
               ForwardTrace* trace = nullptr);

Hypercube predict(const ModelSpec& spec, const Weights& weights, const RgbImage& rgb,
                  std::span<const float> wavelengths);

struct Gradients {
  std::vector<double> weights;
  Tensor input;
};

Gradients backward(const ModelSpec& spec, const Weights& weights, const ForwardTrace& trace,
                   const Tensor& grad_out);
Gradients backward(const ModelSpec& spec, const Weights& weights, const Tensor& input,
                   const Tensor& grad_out);

struct HeadReplacement {
  ModelSpec spec;
  Weights weights;
};

/// Swaps the final dense/conv1 layer for a freshly initialized one with
/// `new_output_channels` outputs. Body parameters are copied unchanged.
/// SpecError for any other final layer.
HeadReplacement replace_head(const ModelSpec& spec, const Weights& weights,
                             std::size_t new_output_channels, std::uint64_t seed);

// Central finite-difference verifier.
struct GradCheckResult {
  double param_rel_error = 0.0;  // ||analytic - numeric|| / max(||analytic||, ||numeric||)
  double input_rel_error = 0.0;
  double max_abs_error = 0.0;

  double worst() const noexcept {
    return param_rel_error > input_rel_error ? param_rel_error : input_rel_error;
  }
};

/// Central-difference gradients of <probe, layer(x)>.
LayerGradients numeric_layer_gradients(const LayerSpec& layer, std::span<const double> params,
                                       const Tensor& x, const Tensor& probe, double step = 1e-6);
GradCheckResult compare_gradients(const LayerGradients& analytic, const LayerGradients& numeric);

GradCheckResult check_layer_gradients(const LayerSpec& layer, std::span<const double> params,
                                      const Tensor& x, const Tensor& probe, double step = 1e-6);
GradCheckResult check_model_gradients(const ModelSpec& spec, const Weights& weights,
                                      const Tensor& x, const Tensor& probe, double step = 1e-6);

// HSW1 checkpoint, little-endian:
//   "HSW1" | u8 version=1 | u8 name length | name bytes | u32 C |
//   u32 layer count | per layer: u8 kind, u32 in, u32 out, u32 heads |
//   u32 parameter count | f32 parameters
struct Checkpoint {
  ModelSpec spec;
  Weights weights;
};

std::vector<unsigned char> encode_checkpoint(const ModelSpec& spec, const Weights& weights);
Checkpoint decode_checkpoint(std::span<const unsigned char> bytes);
void save_checkpoint(const ModelSpec& spec, const Weights& weights,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace spectrarec::nn
