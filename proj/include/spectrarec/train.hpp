// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spectrarec/cube.hpp"
#include "spectrarec/dataset.hpp"
#include "spectrarec/nn.hpp"

namespace spectrarec::train {

// Losses return the value and its gradient with respect to yhat.
struct LossResult {
  double value = 0.0;
  nn::Tensor grad;
};

/// mean |yhat - y|; grad sign(yhat - y) / N, zero at ties. ShapeError on
/// mismatched shapes.
LossResult loss_l1(const nn::Tensor& y, const nn::Tensor& yhat);

/// mean |yhat - y| / max(|y|, epsilon); grad sign(yhat - y) / (N max(|y|, epsilon)).
/// RangeError for epsilon <= 0, ShapeError on mismatched shapes.
LossResult loss_mrae(const nn::Tensor& y, const nn::Tensor& yhat, double epsilon);

enum class LossKind { l1, mrae };

const char* to_string(LossKind kind) noexcept;

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerState {
  std::size_t step = 0;
  std::vector<double> m;
  std::vector<double> v;

  static OptimizerState zeros(std::size_t n) { return {0, std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)}; }
};

/// Bias-corrected Adam update in place. ShapeError on length mismatch,
/// NumericsError on a non-finite gradient (state and weights untouched).
void adam_step(OptimizerState& state, std::span<double> weights, std::span<const double> grad,
               double lr, const AdamParams& params = {});

/// eta_min + (lr0 - eta_min) (1 + cos(pi t / T)) / 2, exact at both ends.
/// RangeError unless 0 <= t <= T and T >= 1.
double cosine_lr(std::size_t iteration, std::size_t total_iterations, double lr0, double eta_min);

struct AugmentConfig {
  bool enabled = true;
  std::size_t target_h = 288;
  std::size_t target_w = 480;
  double flip_prob = 0.5;   // each of horizontal and vertical
  double shift_frac = 0.1;  // of the target size, either direction
  double scale_lo = 0.9;
  double scale_hi = 1.1;
  double rotate_deg = 15.0;  // either direction

  /// ConfigError on out-of-range values.
  void validate() const;
};

// One drawn geometric transform.
struct AugmentDraw {
  bool flip_h = false;
  bool flip_v = false;
  double shift_y = 0.0;  // output pixels
  double shift_x = 0.0;
  double scale = 1.0;
  double angle_rad = 0.0;
};

AugmentDraw draw_augment(const AugmentConfig& config, std::mt19937_64& rng);

struct SourcePoint {
  double y = 0.0;
  double x = 0.0;
};

/// Continuous source coordinate sampled by output pixel (i, j), already
/// reflected into the source frame.
SourcePoint source_point(const AugmentDraw& draw, std::size_t in_h, std::size_t in_w,
                         std::size_t out_h, std::size_t out_w, std::size_t i, std::size_t j);

struct AugmentedPair {
  RgbImage rgb;
  Hypercube cube;
};

/// Resamples both images through the same transform onto out_h x out_w:
/// bilinear for RGB, nearest for the cube. ShapeError if the inputs differ
/// in size.
AugmentedPair apply_augment(const RgbImage& rgb, const Hypercube& cube, const AugmentDraw& draw,
                            std::size_t out_h, std::size_t out_w);

/// draw_augment then apply_augment at the configured target size.
AugmentedPair augment_pair(const RgbImage& rgb, const Hypercube& cube, const AugmentConfig& config,
                           std::mt19937_64& rng);

struct TrainConfig {
  std::size_t epochs = 100;
  double lr0 = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eta_min = 1e-6;
  LossKind loss = LossKind::l1;
  double mrae_epsilon = 1e-8;
  std::size_t batch_size = 1;
  // 0 trains on whole images; otherwise images are cut into tile x tile
  // patches (edge patches may be smaller) and each patch is one sample.
  std::size_t tile_size = 0;
  std::uint64_t seed = 0;
  AugmentConfig augment;
  std::size_t fine_tune_epochs = 50;

  /// ConfigError on invalid values.
  void validate() const;
};

inline constexpr std::size_t kMaxFineTuneEpochs = 50;

/// Flat key = value text with the field names above; augmentation fields
/// are prefixed `augment_` (augment = true|false toggles it).
TrainConfig parse_train_config(std::string_view text);
std::string write_train_config(const TrainConfig& config);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;  // after the epoch's last step
};

struct TrainResult {
  nn::ModelSpec spec;
  nn::Weights weights;  // best validation epoch
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Loss of the configured kind between a prediction and its label, over
/// the whole image.
double image_loss(const TrainConfig& config, const nn::Tensor& y, const nn::Tensor& yhat);

/// Mean image_loss over the samples.
double evaluate_loss(const nn::ModelSpec& spec, const nn::Weights& weights,
                     std::span<const Sample* const> samples, const TrainConfig& config);

/// Trains from `initial` weights. DatasetError on an empty train or val
/// split or a channel mismatch; NumericsError naming the epoch on a
/// non-finite loss.
TrainResult train_model(const nn::ModelSpec& spec, const nn::Weights& initial,
                        const Dataset& dataset, const TrainConfig& config,
                        const EpochCallback& on_epoch = {});

/// Same, from init_weights(spec, config.seed).
TrainResult train_model(const nn::ModelSpec& spec, const Dataset& dataset,
                        const TrainConfig& config, const EpochCallback& on_epoch = {});

/// replace_head to the dataset's channel count (head seeded from
/// config.seed), then fine_tune_epochs epochs of training.
TrainResult fine_tune(const nn::ModelSpec& spec, const nn::Weights& pretrained,
                      const Dataset& dataset, const TrainConfig& config,
                      const EpochCallback& on_epoch = {});

/// `epoch,train_loss,val_loss,lr`
std::string history_csv(std::span<const EpochRecord> history);

}  // namespace spectrarec::train
