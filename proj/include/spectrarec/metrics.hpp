// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "spectrarec/cube.hpp"

namespace spectrarec::metrics {

/// PSNR reported for a perfect reconstruction, so aggregates stay finite.
inline constexpr double kPsnrCapDb = 300.0;
/// Spectra with an L2 norm at or below this are left out of SAM.
inline constexpr double kSamNormEpsilon = 1e-12;
inline constexpr double kDefaultMraeEpsilon = 1e-8;

// Every masked metric averages over the N' = H * W * |mask| selected
// elements with equal weight (micro-average). Inputs must share a shape;
// otherwise ShapeError. An empty mask raises DegenerateError.

double mae(const Hypercube& y, const Hypercube& yhat, const RangeMask& mask);
double mae(const Hypercube& y, const Hypercube& yhat);

double rmse(const Hypercube& y, const Hypercube& yhat, const RangeMask& mask);
double rmse(const Hypercube& y, const Hypercube& yhat);

double mse(const Hypercube& y, const Hypercube& yhat, const RangeMask& mask);

/// 10 log10(max^2 / mse), or kPsnrCapDb when mse == 0. RangeError if
/// max_value <= 0.
double psnr(const Hypercube& y, const Hypercube& yhat, const RangeMask& mask,
            double max_value = 1.0);
double psnr(const Hypercube& y, const Hypercube& yhat, double max_value = 1.0);

/// Converts an MSE into decibels with the same zero-error cap as psnr().
double psnr_from_mse(double mse, double max_value = 1.0);

/// Angle in radians between two spectra, nullopt if either norm is below
/// kSamNormEpsilon.
std::optional<double> spectral_angle(std::span<const double> a, std::span<const double> b);
std::optional<double> spectral_angle(std::span<const float> a, std::span<const float> b);

/// Mean per-pixel spectral angle over the masked channels, in radians.
/// Pixels where either spectrum has zero norm are skipped; DegenerateError
/// when every pixel is skipped.
double sam(const Hypercube& y, const Hypercube& yhat, const RangeMask& mask);
double sam(const Hypercube& y, const Hypercube& yhat);

/// mean of |y - yhat| / max(|y|, epsilon). Not symmetric in its arguments.
double mrae(const Hypercube& y, const Hypercube& yhat, const RangeMask& mask,
            double epsilon = kDefaultMraeEpsilon);
double mrae(const Hypercube& y, const Hypercube& yhat, double epsilon = kDefaultMraeEpsilon);

struct SsimParams {
  std::size_t window = 11;
  double window_sigma = 1.5;
  double data_range = 1.0;
  double k1 = 0.01;
  double k2 = 0.03;

  double c1() const noexcept { return (k1 * data_range) * (k1 * data_range); }
  double c2() const noexcept { return (k2 * data_range) * (k2 * data_range); }
  /// Throws RangeError for an even or < 3 window or non-positive constants.
  void validate() const;
};

/// Normalized separable Gaussian weights, window x window, row-major.
std::vector<double> gaussian_window(const SsimParams& params);

/// Gaussian-weighted SSIM from a single window's moments.
double ssim_from_moments(double mean_y, double mean_yhat, double var_y, double var_yhat,
                         double cov, double c1, double c2);

/// Sliding-window SSIM (valid positions only) averaged over every window
/// position and channel. ShapeError if H or W is smaller than the window.
double ssim(const Hypercube& y, const Hypercube& yhat, const SsimParams& params = {});

struct ChannelCurves {
  std::vector<double> mae;
  std::vector<double> psnr;
};

/// MAE and PSNR of each channel over its H * W elements.
ChannelCurves per_channel_curves(const Hypercube& y, const Hypercube& yhat,
                                 double max_value = 1.0);

struct EvalOptions {
  double psnr_max = 1.0;
  double mrae_epsilon = kDefaultMraeEpsilon;
  SsimParams ssim;
};

inline constexpr std::array<RangeKind, 3> kRangeKinds{RangeKind::full, RangeKind::visible,
                                                     RangeKind::extended};

// Metrics of one reconstructed image.
struct ImageMetrics {
  double mae = 0.0;
  double rmse = 0.0;
  double psnr = 0.0;
  double sam = 0.0;
  double ssim = 0.0;
  double mrae = 0.0;
  // MAE over full / visible / extended; NaN when that range has no channels.
  std::array<double, 3> range_mae{};
  ChannelCurves channels;
};

/// SSIM is skipped (NaN) for images smaller than the SSIM window.
ImageMetrics evaluate_image(const Hypercube& y, const Hypercube& yhat, const EvalOptions& options = {});

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // population
};

Summary summarize(std::span<const double> values);

struct MetricReport {
  std::size_t image_count = 0;
  Summary mae, rmse, psnr, sam, ssim, mrae;
  std::array<Summary, 3> range_mae{};
  std::vector<Summary> channel_mae;
  std::vector<Summary> channel_psnr;
};

/// Unweighted mean and population std over images. DegenerateError on an
/// empty list; ShapeError when channel counts differ.
MetricReport aggregate_reports(std::span<const ImageMetrics> per_image);

}  // namespace spectrarec::metrics
