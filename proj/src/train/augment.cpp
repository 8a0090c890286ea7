// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numbers>

#include "spectrarec/errors.hpp"
#include "spectrarec/train.hpp"

namespace spectrarec::train {

void AugmentConfig::validate() const {
  if (target_h == 0 || target_w == 0) {
    throw ConfigError("augment target size must be >= 1");
  }
  if (!(flip_prob >= 0.0 && flip_prob <= 1.0)) {
    throw ConfigError("augment flip_prob must be in [0, 1]");
  }
  if (!(shift_frac >= 0.0 && shift_frac <= 1.0)) {
    throw ConfigError("augment shift_frac must be in [0, 1]");
  }
  if (!(scale_lo > 0.0 && scale_lo <= scale_hi && std::isfinite(scale_hi))) {
    throw ConfigError("augment scale range must satisfy 0 < lo <= hi");
  }
  if (!(rotate_deg >= 0.0 && rotate_deg <= 180.0)) {
    throw ConfigError("augment rotate_deg must be in [0, 180]");
  }
}

AugmentDraw draw_augment(const AugmentConfig& config, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  AugmentDraw d;
  d.flip_h = unit(rng) < config.flip_prob;
  d.flip_v = unit(rng) < config.flip_prob;
  d.shift_y = (2.0 * unit(rng) - 1.0) * config.shift_frac * static_cast<double>(config.target_h);
  d.shift_x = (2.0 * unit(rng) - 1.0) * config.shift_frac * static_cast<double>(config.target_w);
  d.scale = config.scale_lo + unit(rng) * (config.scale_hi - config.scale_lo);
  d.angle_rad = (2.0 * unit(rng) - 1.0) * config.rotate_deg * std::numbers::pi / 180.0;
  return d;
}

namespace {

// Mirror about the edge pixels (edge not repeated) into [0, n - 1].
double reflect(double x, std::size_t n) {
  if (n == 1) {
    return 0.0;
  }
  const double last = static_cast<double>(n - 1);
  if (x >= 0.0 && x <= last) {
    return x;
  }
  const double period = 2.0 * last;
  x = std::fmod(x, period);
  if (x < 0.0) {
    x += period;
  }
  return x > last ? period - x : x;
}

}  // namespace

SourcePoint source_point(const AugmentDraw& draw, std::size_t in_h, std::size_t in_w,
                         std::size_t out_h, std::size_t out_w, std::size_t i, std::size_t j) {
  double u = static_cast<double>(j) + 0.5 - static_cast<double>(out_w) / 2.0 - draw.shift_x;
  double v = static_cast<double>(i) + 0.5 - static_cast<double>(out_h) / 2.0 - draw.shift_y;
  const double c = std::cos(draw.angle_rad);
  const double s = std::sin(draw.angle_rad);
  const double ur = c * u + s * v;
  const double vr = -s * u + c * v;
  u = ur / draw.scale;
  v = vr / draw.scale;
  if (draw.flip_h) {
    u = -u;
  }
  if (draw.flip_v) {
    v = -v;
  }
  const double x = u * (static_cast<double>(in_w) / static_cast<double>(out_w)) +
                   static_cast<double>(in_w) / 2.0 - 0.5;
  const double y = v * (static_cast<double>(in_h) / static_cast<double>(out_h)) +
                   static_cast<double>(in_h) / 2.0 - 0.5;
  return {reflect(y, in_h), reflect(x, in_w)};
}

AugmentedPair apply_augment(const RgbImage& rgb, const Hypercube& cube, const AugmentDraw& draw,
                            std::size_t out_h, std::size_t out_w) {
  if (rgb.height() != cube.height() || rgb.width() != cube.width()) {
    throw ShapeError("augment: RGB and cube sizes differ");
  }
  if (out_h == 0 || out_w == 0) {
    throw ShapeError("augment: empty output size");
  }
  const std::size_t in_h = rgb.height();
  const std::size_t in_w = rgb.width();
  AugmentedPair out{RgbImage(out_h, out_w),
                    Hypercube(out_h, out_w, {cube.wavelengths().begin(), cube.wavelengths().end()})};
  for (std::size_t i = 0; i < out_h; ++i) {
    for (std::size_t j = 0; j < out_w; ++j) {
      const SourcePoint p = source_point(draw, in_h, in_w, out_h, out_w, i, j);
      const auto nh = static_cast<std::size_t>(std::lround(p.y));
      const auto nw = static_cast<std::size_t>(std::lround(p.x));
      const auto src = cube.spectrum(nh, nw);
      std::copy(src.begin(), src.end(), out.cube.spectrum(i, j).begin());

      const auto y0 = static_cast<std::size_t>(std::floor(p.y));
      const auto x0 = static_cast<std::size_t>(std::floor(p.x));
      const std::size_t y1 = std::min(y0 + 1, in_h - 1);
      const std::size_t x1 = std::min(x0 + 1, in_w - 1);
      const double fy = p.y - static_cast<double>(y0);
      const double fx = p.x - static_cast<double>(x0);
      for (std::size_t k = 0; k < RgbImage::kChannels; ++k) {
        const double top = (1.0 - fx) * rgb.at(y0, x0, k) + fx * rgb.at(y0, x1, k);
        const double bottom = (1.0 - fx) * rgb.at(y1, x0, k) + fx * rgb.at(y1, x1, k);
        out.rgb.at(i, j, k) = static_cast<float>((1.0 - fy) * top + fy * bottom);
      }
    }
  }
  return out;
}

AugmentedPair augment_pair(const RgbImage& rgb, const Hypercube& cube, const AugmentConfig& config,
                           std::mt19937_64& rng) {
  return apply_augment(rgb, cube, draw_augment(config, rng), config.target_h, config.target_w);
}

}  // namespace spectrarec::train
