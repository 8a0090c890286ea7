// SPDX-License-Identifier: Apache-2.0
#include "spectrarec/check.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <random>
#include <string_view>
#include <tuple>

#include "spectrarec/cube.hpp"
#include "spectrarec/fileio.hpp"
#include "spectrarec/metrics.hpp"
#include "spectrarec/nn.hpp"
#include "spectrarec/train.hpp"

namespace spectrarec {

namespace {

using nn::LayerKind;
using nn::LayerSpec;
using nn::Tensor;

constexpr double kGradTolerance = 1e-5;
constexpr double kOracleTolerance = 1e-10;

bool fault_injected(std::string_view check) {
  const char* env = std::getenv(kInjectFaultEnv);
  return env != nullptr && *env != '\0' && check.starts_with(env);
}

Hypercube random_cube(std::mt19937_64& rng, std::size_t h, std::size_t w, std::size_t c) {
  std::uniform_real_distribution<float> u(0.0F, 1.0F);
  std::vector<float> wl(c);
  std::vector<float> data(h * w * c);
  for (std::size_t i = 0; i < c; ++i) {
    wl[i] = 450.0F + 40.0F * static_cast<float>(i);
  }
  for (float& v : data) {
    v = u(rng);
  }
  return {h, w, std::move(wl), std::move(data)};
}

Tensor random_tensor(std::mt19937_64& rng, std::size_t h, std::size_t w, std::size_t d) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tensor t(h, w, d);
  for (double& v : t.data()) {
    v = u(rng);
  }
  return t;
}

double rel(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

// Plain loops over every element, independent of the library's helpers.
struct Naive {
  double mae = 0.0;
  double mse = 0.0;
  double mrae = 0.0;
  double sam = 0.0;
};

Naive naive_metrics(const Hypercube& y, const Hypercube& yhat) {
  Naive n;
  double angles = 0.0;
  std::size_t pixels = 0;
  for (std::size_t h = 0; h < y.height(); ++h) {
    for (std::size_t w = 0; w < y.width(); ++w) {
      double dot = 0.0;
      double na = 0.0;
      double nb = 0.0;
      for (std::size_t c = 0; c < y.channels(); ++c) {
        const double a = y.at(h, w, c);
        const double b = yhat.at(h, w, c);
        n.mae += std::abs(a - b);
        n.mse += (a - b) * (a - b);
        n.mrae += std::abs(a - b) / std::max(std::abs(a), metrics::kDefaultMraeEpsilon);
        dot += a * b;
        na += a * a;
        nb += b * b;
      }
      if (std::sqrt(na) > metrics::kSamNormEpsilon && std::sqrt(nb) > metrics::kSamNormEpsilon) {
        angles += std::acos(std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0));
        ++pixels;
      }
    }
  }
  const auto count = static_cast<double>(y.size());
  n.mae /= count;
  n.mse /= count;
  n.mrae /= count;
  n.sam = angles / static_cast<double>(pixels);
  return n;
}

class Runner {
 public:
  explicit Runner(const std::function<void(const CheckResult&)>& on_result) : on_result_(on_result) {}

  template <typename F>
  void run(const std::string& name, F body) {
    CheckResult r{name, false, ""};
    try {
      std::tie(r.passed, r.detail) = body();
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    if (on_result_) {
      on_result_(r);
    }
    results_.push_back(std::move(r));
  }

  std::vector<CheckResult> take() { return std::move(results_); }

 private:
  const std::function<void(const CheckResult&)>& on_result_;
  std::vector<CheckResult> results_;
};

std::pair<bool, std::string> layer_gradient(const std::string& name, const LayerSpec& layer,
                                            std::mt19937_64& rng, std::size_t h, std::size_t w) {
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> params(nn::layer_param_count(layer));
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (double& p : params) {
      p = u(rng);
    }
    Tensor x = random_tensor(rng, h, w, layer.in_channels);
    if (layer.kind == LayerKind::relu) {
      for (double& v : x.data()) {
        if (std::abs(v) < 1e-3) {
          v = 0.5;  // keep clear of the kink
        }
      }
    }
    const Tensor probe = random_tensor(rng, h, w, layer.out_channels);
    nn::LayerGradients analytic = nn::layer_backward(layer, params, x, probe);
    if (fault_injected(name)) {
      if (!analytic.params.empty()) {
        analytic.params[0] += 0.1;
      } else {
        analytic.input.data()[0] += 0.1;
      }
    }
    const auto numeric = nn::numeric_layer_gradients(layer, params, x, probe);
    worst = std::max(worst, nn::compare_gradients(analytic, numeric).worst());
  }
  return {worst <= kGradTolerance, "max relative error " + format_double(worst)};
}

template <typename Loss>
std::pair<bool, std::string> loss_gradient(const std::string& name, std::mt19937_64& rng,
                                           Loss loss) {
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const Tensor y = random_tensor(rng, 2, 3, 4);
    Tensor yhat = random_tensor(rng, 2, 3, 4);
    constexpr double kStep = 1e-6;
    for (std::size_t i = 0; i < yhat.size(); ++i) {
      if (std::abs(yhat.data()[i] - y.data()[i]) < 10 * kStep) {
        yhat.data()[i] += 0.1;
      }
    }
    Tensor analytic = loss(y, yhat).grad;
    if (fault_injected(name)) {
      analytic.data()[0] += 0.1;
    }
    double diff = 0.0;
    double norm_a = 0.0;
    double norm_n = 0.0;
    for (std::size_t i = 0; i < yhat.size(); ++i) {
      const double saved = yhat.data()[i];
      yhat.data()[i] = saved + kStep;
      const double up = loss(y, yhat).value;
      yhat.data()[i] = saved - kStep;
      const double down = loss(y, yhat).value;
      yhat.data()[i] = saved;
      const double numeric = (up - down) / (2 * kStep);
      const double a = analytic.data()[i];
      diff += (a - numeric) * (a - numeric);
      norm_a += a * a;
      norm_n += numeric * numeric;
    }
    worst = std::max(worst, std::sqrt(diff) / std::sqrt(std::max(norm_a, norm_n)));
  }
  return {worst <= kGradTolerance, "max relative error " + format_double(worst)};
}

}  // namespace

std::vector<CheckResult> run_checks(const std::function<void(const CheckResult&)>& on_result) {
  Runner runner(on_result);
  std::mt19937_64 rng(20240607);

  for (auto name : {nn::ModelName::pixel_feature_net, nn::ModelName::local_feature_net}) {
    for (std::size_t c : {27U, 100U}) {
      const std::size_t expected = name == nn::ModelName::pixel_feature_net
                                       ? (c == 27 ? 1611 : 4020)
                                       : (c == 27 ? 6923 : 9332);
      const std::size_t got = nn::param_count(nn::make_model_spec(name, c));
      runner.run(std::string("param_count ") + nn::to_string(name) + " C=" + std::to_string(c),
                 [&] { return std::pair{got == expected, std::to_string(got)}; });
    }
  }

  runner.run("metric_oracle", [&] {
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      const Hypercube y = random_cube(rng, 3, 4, 5);
      const Hypercube yhat = random_cube(rng, 3, 4, 5);
      const Naive n = naive_metrics(y, yhat);
      worst = std::max({worst, rel(metrics::mae(y, yhat), n.mae),
                        rel(metrics::rmse(y, yhat), std::sqrt(n.mse)),
                        rel(metrics::psnr(y, yhat), 10.0 * std::log10(1.0 / n.mse)),
                        rel(metrics::sam(y, yhat), n.sam), rel(metrics::mrae(y, yhat), n.mrae)});
    }
    return std::pair{worst <= kOracleTolerance, "max relative error " + format_double(worst)};
  });

  runner.run("ssim_constant", [&] {
    const metrics::SsimParams p;
    const double a = 0.3;
    const double b = 0.6;
    std::vector<float> wl{500.0F};
    Hypercube y(p.window, p.window, wl, std::vector<float>(p.window * p.window, static_cast<float>(a)));
    Hypercube yhat(p.window, p.window, wl,
                   std::vector<float>(p.window * p.window, static_cast<float>(b)));
    const double fa = static_cast<float>(a);
    const double fb = static_cast<float>(b);
    const double expected = (2 * fa * fb + p.c1()) / (fa * fa + fb * fb + p.c1());
    const double got = metrics::ssim(y, yhat, p);
    return std::pair{rel(got, expected) <= 1e-9, format_double(got)};
  });

  runner.run("identity", [&] {
    const Hypercube y = random_cube(rng, 12, 12, 4);
    const auto m = metrics::evaluate_image(y, y);
    const bool ok = m.mae == 0.0 && m.rmse == 0.0 && m.sam == 0.0 && m.mrae == 0.0 &&
                    std::abs(m.ssim - 1.0) <= 1e-12 && m.psnr == metrics::kPsnrCapDb;
    return std::pair{ok, ok ? "exact" : "identity metrics off"};
  });

  const std::pair<std::string, LayerSpec> layers[] = {
      {"gradient_dense", {LayerKind::dense, 3, 4, 1}},
      {"gradient_conv3", {LayerKind::conv3, 2, 3, 1}},
      {"gradient_conv1", {LayerKind::conv1, 3, 2, 1}},
      {"gradient_relu", {LayerKind::relu, 3, 3, 1}},
      {"gradient_spectral_attention", {LayerKind::spectral_attention, 4, 4, 2}},
  };
  for (const auto& [name, layer] : layers) {
    runner.run(name, [&] { return layer_gradient(name, layer, rng, 3, 4); });
  }
  runner.run("gradient_loss_l1", [&] {
    return loss_gradient("gradient_loss_l1", rng, [](const Tensor& y, const Tensor& yhat) {
      return train::loss_l1(y, yhat);
    });
  });
  runner.run("gradient_loss_mrae", [&] {
    return loss_gradient("gradient_loss_mrae", rng, [](const Tensor& y, const Tensor& yhat) {
      return train::loss_mrae(y, yhat, 1e-3);
    });
  });

  runner.run("cosine_lr", [&] {
    constexpr std::size_t kTotal = 1000;
    bool ok = train::cosine_lr(0, kTotal, 1e-4, 1e-6) == 1e-4 &&
              train::cosine_lr(kTotal, kTotal, 1e-4, 1e-6) == 1e-6;
    for (std::size_t t = 1; t <= kTotal; ++t) {
      ok = ok && train::cosine_lr(t, kTotal, 1e-4, 1e-6) <= train::cosine_lr(t - 1, kTotal, 1e-4, 1e-6);
    }
    return std::pair{ok, ok ? "endpoints exact, monotone" : "schedule off"};
  });

  runner.run("hsc1_round_trip", [&] {
    const Hypercube cube = random_cube(rng, 3, 5, 7);
    const bool ok = decode_cube(encode_cube(cube)) == cube;
    return std::pair{ok, std::to_string(encode_cube(cube).size()) + " bytes"};
  });

  runner.run("hsw1_round_trip", [&] {
    const auto spec = nn::make_model_spec(nn::ModelName::spectral_attention_net, 9);
    const auto weights = nn::init_weights(spec, 7);
    const auto back = nn::decode_checkpoint(nn::encode_checkpoint(spec, weights));
    const bool ok = back.spec == spec && back.weights == weights;
    return std::pair{ok, std::to_string(weights.values.size()) + " parameters"};
  });

  return runner.take();
}

}  // namespace spectrarec
