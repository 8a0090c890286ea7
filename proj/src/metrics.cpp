// SPDX-License-Identifier: Apache-2.0
#include "spectrarec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "spectrarec/errors.hpp"

namespace spectrarec::metrics {

namespace {

void check_pair(const Hypercube& y, const Hypercube& yhat) {
  if (!y.same_shape(yhat)) {
    throw ShapeError("cube shapes differ: " + std::to_string(y.height()) + "x" +
                     std::to_string(y.width()) + "x" + std::to_string(y.channels()) + " vs " +
                     std::to_string(yhat.height()) + "x" + std::to_string(yhat.width()) + "x" +
                     std::to_string(yhat.channels()));
  }
}

void check_mask(const Hypercube& y, const RangeMask& mask) {
  if (mask.indices.empty()) {
    throw DegenerateError(std::string(to_string(mask.kind)) + " range selects no channels");
  }
  for (std::size_t c : mask.indices) {
    if (c >= y.channels()) {
      throw ShapeError("mask channel " + std::to_string(c) + " out of range for C=" +
                       std::to_string(y.channels()));
    }
  }
}

// Mean of f(y_i, yhat_i) over the masked elements.
template <typename F>
double masked_mean(const Hypercube& y, const Hypercube& yhat, const RangeMask& mask, F f) {
  check_pair(y, yhat);
  check_mask(y, mask);
  const std::size_t channels = y.channels();
  const auto a = y.data();
  const auto b = yhat.data();
  double acc = 0.0;
  for (std::size_t p = 0; p < y.pixel_count(); ++p) {
    const std::size_t base = p * channels;
    for (std::size_t c : mask.indices) {
      acc += f(static_cast<double>(a[base + c]), static_cast<double>(b[base + c]));
    }
  }
  return acc / static_cast<double>(y.pixel_count() * mask.indices.size());
}

}  // namespace

double mae(const Hypercube& y, const Hypercube& yhat, const RangeMask& mask) {
  return masked_mean(y, yhat, mask, [](double a, double b) { return std::abs(a - b); });
}

double mae(const Hypercube& y, const Hypercube& yhat) {
  return mae(y, yhat, full_mask(y.channels()));
}

double mse(const Hypercube& y, const Hypercube& yhat, const RangeMask& mask) {
  return masked_mean(y, yhat, mask, [](double a, double b) { return (a - b) * (a - b); });
}

double rmse(const Hypercube& y, const Hypercube& yhat, const RangeMask& mask) {
  return std::sqrt(mse(y, yhat, mask));
}

double rmse(const Hypercube& y, const Hypercube& yhat) {
  return rmse(y, yhat, full_mask(y.channels()));
}

double psnr_from_mse(double mse_value, double max_value) {
  if (!(max_value > 0.0)) {
    throw RangeError("psnr max_value must be > 0");
  }
  if (mse_value <= 0.0) {
    return kPsnrCapDb;
  }
  return std::min(kPsnrCapDb, 10.0 * std::log10(max_value * max_value / mse_value));
}

double psnr(const Hypercube& y, const Hypercube& yhat, const RangeMask& mask, double max_value) {
  if (!(max_value > 0.0)) {
    throw RangeError("psnr max_value must be > 0");
  }
  return psnr_from_mse(mse(y, yhat, mask), max_value);
}

double psnr(const Hypercube& y, const Hypercube& yhat, double max_value) {
  return psnr(y, yhat, full_mask(y.channels()), max_value);
}

namespace {

template <typename T>
std::optional<double> angle_impl(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size()) {
    throw ShapeError("spectra differ in length");
  }
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i];
    const double z = b[i];
    na += x * x;
    nb += z * z;
  }
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  if (na <= kSamNormEpsilon || nb <= kSamNormEpsilon) {
    return std::nullopt;
  }
  // 2 atan2(|u - v|, |u + v|) on the unit vectors; unlike acos of the
  // cosine it is exact for parallel spectra and accurate near 0 and pi.
  double diff = 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double u = a[i] / na;
    const double v = b[i] / nb;
    diff += (u - v) * (u - v);
    sum += (u + v) * (u + v);
  }
  return 2.0 * std::atan2(std::sqrt(diff), std::sqrt(sum));
}

}  // namespace

std::optional<double> spectral_angle(std::span<const double> a, std::span<const double> b) {
  return angle_impl(a, b);
}

std::optional<double> spectral_angle(std::span<const float> a, std::span<const float> b) {
  return angle_impl(a, b);
}

double sam(const Hypercube& y, const Hypercube& yhat, const RangeMask& mask) {
  check_pair(y, yhat);
  check_mask(y, mask);
  std::vector<double> a(mask.indices.size());
  std::vector<double> b(mask.indices.size());
  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t h = 0; h < y.height(); ++h) {
    for (std::size_t w = 0; w < y.width(); ++w) {
      const auto sy = y.spectrum(h, w);
      const auto sh = yhat.spectrum(h, w);
      for (std::size_t i = 0; i < mask.indices.size(); ++i) {
        a[i] = sy[mask.indices[i]];
        b[i] = sh[mask.indices[i]];
      }
      if (const auto angle = spectral_angle(std::span<const double>(a), std::span<const double>(b))) {
        total += *angle;
        ++counted;
      }
    }
  }
  if (counted == 0) {
    throw DegenerateError("SAM undefined: every pixel has a zero-norm spectrum");
  }
  return total / static_cast<double>(counted);
}

double sam(const Hypercube& y, const Hypercube& yhat) {
  return sam(y, yhat, full_mask(y.channels()));
}

double mrae(const Hypercube& y, const Hypercube& yhat, const RangeMask& mask, double epsilon) {
  if (!(epsilon > 0.0)) {
    throw RangeError("mrae epsilon must be > 0");
  }
  return masked_mean(y, yhat, mask, [epsilon](double a, double b) {
    return std::abs(a - b) / std::max(std::abs(a), epsilon);
  });
}

double mrae(const Hypercube& y, const Hypercube& yhat, double epsilon) {
  return mrae(y, yhat, full_mask(y.channels()), epsilon);
}

void SsimParams::validate() const {
  if (window < 3 || window % 2 == 0) {
    throw RangeError("ssim window must be odd and >= 3");
  }
  if (!(window_sigma > 0.0) || !(data_range > 0.0) || !(k1 > 0.0) || !(k2 > 0.0)) {
    throw RangeError("ssim sigma, data range and constants must be > 0");
  }
}

std::vector<double> gaussian_window(const SsimParams& params) {
  params.validate();
  const std::size_t n = params.window;
  const double center = static_cast<double>(n / 2);
  std::vector<double> g(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(i) - center;
    g[i] = std::exp(-d * d / (2.0 * params.window_sigma * params.window_sigma));
    sum += g[i];
  }
  std::vector<double> window(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      window[i * n + j] = (g[i] / sum) * (g[j] / sum);
    }
  }
  return window;
}

double ssim_from_moments(double mean_y, double mean_yhat, double var_y, double var_yhat,
                         double cov, double c1, double c2) {
  return ((2.0 * mean_y * mean_yhat + c1) * (2.0 * cov + c2)) /
         ((mean_y * mean_y + mean_yhat * mean_yhat + c1) * (var_y + var_yhat + c2));
}

double ssim(const Hypercube& y, const Hypercube& yhat, const SsimParams& params) {
  check_pair(y, yhat);
  params.validate();
  const std::size_t n = params.window;
  if (y.height() < n || y.width() < n) {
    throw ShapeError("image " + std::to_string(y.height()) + "x" + std::to_string(y.width()) +
                     " smaller than the " + std::to_string(n) + "x" + std::to_string(n) +
                     " SSIM window");
  }
  const auto window = gaussian_window(params);
  const double c1 = params.c1();
  const double c2 = params.c2();
  const std::size_t rows = y.height() - n + 1;
  const std::size_t cols = y.width() - n + 1;
  double total = 0.0;
  for (std::size_t c = 0; c < y.channels(); ++c) {
    for (std::size_t r0 = 0; r0 < rows; ++r0) {
      for (std::size_t q0 = 0; q0 < cols; ++q0) {
        double my = 0.0;
        double mh = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            const double wgt = window[i * n + j];
            my += wgt * y.at(r0 + i, q0 + j, c);
            mh += wgt * yhat.at(r0 + i, q0 + j, c);
          }
        }
        double vy = 0.0;
        double vh = 0.0;
        double cov = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            const double wgt = window[i * n + j];
            const double dy = y.at(r0 + i, q0 + j, c) - my;
            const double dh = yhat.at(r0 + i, q0 + j, c) - mh;
            vy += wgt * dy * dy;
            vh += wgt * dh * dh;
            cov += wgt * dy * dh;
          }
        }
        total += ssim_from_moments(my, mh, vy, vh, cov, c1, c2);
      }
    }
  }
  return total / static_cast<double>(rows * cols * y.channels());
}

ChannelCurves per_channel_curves(const Hypercube& y, const Hypercube& yhat, double max_value) {
  check_pair(y, yhat);
  const std::size_t channels = y.channels();
  std::vector<double> abs_sum(channels, 0.0);
  std::vector<double> sq_sum(channels, 0.0);
  const auto a = y.data();
  const auto b = yhat.data();
  for (std::size_t p = 0; p < y.pixel_count(); ++p) {
    for (std::size_t c = 0; c < channels; ++c) {
      const double d = static_cast<double>(a[p * channels + c]) - b[p * channels + c];
      abs_sum[c] += std::abs(d);
      sq_sum[c] += d * d;
    }
  }
  ChannelCurves curves{std::vector<double>(channels), std::vector<double>(channels)};
  const auto n = static_cast<double>(y.pixel_count());
  for (std::size_t c = 0; c < channels; ++c) {
    curves.mae[c] = abs_sum[c] / n;
    curves.psnr[c] = psnr_from_mse(sq_sum[c] / n, max_value);
  }
  return curves;
}

ImageMetrics evaluate_image(const Hypercube& y, const Hypercube& yhat, const EvalOptions& options) {
  check_pair(y, yhat);
  const RangeMasks masks = make_range_masks(y.wavelengths());
  ImageMetrics m;
  m.mae = mae(y, yhat, masks.full);
  m.rmse = rmse(y, yhat, masks.full);
  m.psnr = psnr(y, yhat, masks.full, options.psnr_max);
  m.sam = sam(y, yhat, masks.full);
  m.mrae = mrae(y, yhat, masks.full, options.mrae_epsilon);
  if (y.height() >= options.ssim.window && y.width() >= options.ssim.window) {
    m.ssim = ssim(y, yhat, options.ssim);
  } else {
    m.ssim = std::numeric_limits<double>::quiet_NaN();
  }
  for (std::size_t r = 0; r < kRangeKinds.size(); ++r) {
    const RangeMask& mask = masks.get(kRangeKinds[r]);
    m.range_mae[r] =
        mask.indices.empty() ? std::numeric_limits<double>::quiet_NaN() : mae(y, yhat, mask);
  }
  m.channels = per_channel_curves(y, yhat, options.psnr_max);
  return m;
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) {
    throw DegenerateError("cannot summarize an empty list");
  }
  // Summing in sorted order makes the result independent of image order.
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double v : sorted) {
    sum += v;
  }
  const double mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : sorted) {
    sq += (v - mean) * (v - mean);
  }
  return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

MetricReport aggregate_reports(std::span<const ImageMetrics> per_image) {
  if (per_image.empty()) {
    throw DegenerateError("no images to aggregate");
  }
  const std::size_t channels = per_image.front().channels.mae.size();
  for (const auto& m : per_image) {
    if (m.channels.mae.size() != channels || m.channels.psnr.size() != channels) {
      throw ShapeError("images disagree on channel count");
    }
  }
  std::vector<double> buf(per_image.size());
  auto collect = [&](auto field) {
    for (std::size_t i = 0; i < per_image.size(); ++i) {
      buf[i] = field(per_image[i]);
    }
    return summarize(buf);
  };
  MetricReport report;
  report.image_count = per_image.size();
  report.mae = collect([](const ImageMetrics& m) { return m.mae; });
  report.rmse = collect([](const ImageMetrics& m) { return m.rmse; });
  report.psnr = collect([](const ImageMetrics& m) { return m.psnr; });
  report.sam = collect([](const ImageMetrics& m) { return m.sam; });
  report.ssim = collect([](const ImageMetrics& m) { return m.ssim; });
  report.mrae = collect([](const ImageMetrics& m) { return m.mrae; });
  for (std::size_t r = 0; r < 3; ++r) {
    report.range_mae[r] = collect([r](const ImageMetrics& m) { return m.range_mae[r]; });
  }
  report.channel_mae.resize(channels);
  report.channel_psnr.resize(channels);
  for (std::size_t c = 0; c < channels; ++c) {
    report.channel_mae[c] = collect([c](const ImageMetrics& m) { return m.channels.mae[c]; });
    report.channel_psnr[c] = collect([c](const ImageMetrics& m) { return m.channels.psnr[c]; });
  }
  return report;
}

}  // namespace spectrarec::metrics
