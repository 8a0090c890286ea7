// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "../oracles.hpp"
#include "spectrarec/errors.hpp"
#include "spectrarec/metrics.hpp"

using namespace spectrarec;

namespace {

Hypercube row(std::vector<float> values) {
  std::vector<float> wl(values.size());
  for (std::size_t i = 0; i < wl.size(); ++i) {
    wl[i] = 500.0F + 10.0F * static_cast<float>(i);
  }
  return {1, 1, std::move(wl), std::move(values)};
}

Hypercube constant(std::size_t h, std::size_t w, std::size_t c, float v) {
  std::vector<float> wl(c);
  for (std::size_t i = 0; i < c; ++i) {
    wl[i] = 500.0F + static_cast<float>(i);
  }
  return {h, w, wl, std::vector<float>(h * w * c, v)};
}

Hypercube scaled(const Hypercube& cube, float alpha) {
  Hypercube out = cube;
  for (float& v : out.data()) {
    v *= alpha;
  }
  return out;
}

}  // namespace

TEST(Metrics, HandExamples) {
  EXPECT_DOUBLE_EQ(metrics::mae(row({0, 1}), row({1, 1})), 0.5);
  EXPECT_NEAR(metrics::rmse(row({0, 0}), row({3, 4})), std::sqrt(12.5), 1e-12);
  EXPECT_NEAR(metrics::mrae(row({1, 2}), row({1.1F, 1.8F})), 0.1, 1e-7);
  EXPECT_NEAR(metrics::psnr_from_mse(0.01), 20.0, 1e-12);
  EXPECT_EQ(metrics::psnr_from_mse(0.0), metrics::kPsnrCapDb);
  EXPECT_NEAR(metrics::sam(row({1, 0}), row({0, 1})), std::numbers::pi / 2, 1e-15);
}

TEST(Metrics, SamScaleInvariance) {
  std::mt19937_64 rng(21);
  const Hypercube y = oracle::random_cube(rng, 3, 3, 6, 0.1F, 1.0F);
  EXPECT_EQ(metrics::sam(y, scaled(y, 2.0F)), 0.0);
  const Hypercube yhat = oracle::random_cube(rng, 3, 3, 6, 0.1F, 1.0F);
  const double base = metrics::sam(y, yhat);
  for (float alpha : {0.5F, 2.0F, 4.0F}) {
    EXPECT_NEAR(metrics::sam(y, scaled(yhat, alpha)), base, 1e-12);
  }
}

TEST(Metrics, SamSkipsZeroPixelsAndRejectsAllZero) {
  const Hypercube zero = constant(2, 2, 3, 0.0F);
  EXPECT_THROW(metrics::sam(zero, zero), DegenerateError);
  Hypercube y = constant(1, 2, 2, 0.0F);
  Hypercube yhat = y;
  y.at(0, 1, 0) = 1.0F;
  yhat.at(0, 1, 1) = 1.0F;
  EXPECT_NEAR(metrics::sam(y, yhat), std::numbers::pi / 2, 1e-15);
}

TEST(Metrics, MatchesOracleOnRandomPairs) {
  std::mt19937_64 rng(33);
  for (int i = 0; i < 30; ++i) {
    const Hypercube y = oracle::random_cube(rng, 3, 3, 4, 0.05F, 1.0F);
    const Hypercube yhat = oracle::random_cube(rng, 3, 3, 4, 0.05F, 1.0F);
    const auto idx = oracle::all_channels(y);
    EXPECT_NEAR(metrics::mae(y, yhat), oracle::mae(y, yhat, idx), 1e-12);
    EXPECT_NEAR(metrics::rmse(y, yhat), oracle::rmse(y, yhat, idx), 1e-12);
    EXPECT_NEAR(metrics::psnr(y, yhat), oracle::psnr(y, yhat, idx, 1.0), 1e-9);
    EXPECT_NEAR(metrics::mrae(y, yhat), oracle::mrae(y, yhat, idx, 1e-8), 1e-10);
    const Hypercube a = oracle::random_cube(rng, 2, 2, 5, 0.05F, 1.0F);
    const Hypercube b = oracle::random_cube(rng, 2, 2, 5, 0.05F, 1.0F);
    EXPECT_NEAR(metrics::sam(a, b), oracle::sam(a, b, oracle::all_channels(a)), 1e-12);
  }
}

TEST(Metrics, SsimMatchesOracle) {
  std::mt19937_64 rng(4);
  const Hypercube y = oracle::random_cube(rng, 13, 14, 2);
  const Hypercube yhat = oracle::random_cube(rng, 13, 14, 2);
  EXPECT_NEAR(metrics::ssim(y, yhat), oracle::ssim(y, yhat), 1e-10);
  EXPECT_NEAR(metrics::ssim(y, y), 1.0, 1e-12);
}

TEST(Metrics, SsimOfConstants) {
  const metrics::SsimParams p;
  EXPECT_DOUBLE_EQ(metrics::ssim(constant(11, 11, 1, 0.0F), constant(11, 11, 1, 0.0F)), 1.0);
  const double a = 0.25F;
  const double b = 0.75F;
  const double expected = (2 * a * b + p.c1()) / (a * a + b * b + p.c1());
  EXPECT_NEAR(metrics::ssim(constant(11, 11, 1, 0.25F), constant(11, 11, 1, 0.75F)), expected, 1e-12);
  EXPECT_THROW(metrics::ssim(constant(10, 11, 1, 0.0F), constant(10, 11, 1, 0.0F)), ShapeError);
}

TEST(Metrics, SsimParamsValidation) {
  metrics::SsimParams p;
  p.window = 4;
  EXPECT_THROW(p.validate(), RangeError);
  p.window = 1;
  EXPECT_THROW(p.validate(), RangeError);
  const auto g = metrics::gaussian_window({});
  double s = 0.0;
  for (double v : g) {
    s += v;
  }
  EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(Metrics, IdentitySuite) {
  std::mt19937_64 rng(9);
  const Hypercube y = oracle::random_cube(rng, 12, 12, 5, 0.1F, 1.0F);
  EXPECT_EQ(metrics::mae(y, y), 0.0);
  EXPECT_EQ(metrics::rmse(y, y), 0.0);
  EXPECT_EQ(metrics::sam(y, y), 0.0);
  EXPECT_EQ(metrics::mrae(y, y), 0.0);
  EXPECT_EQ(metrics::psnr(y, y), metrics::kPsnrCapDb);
  EXPECT_NEAR(metrics::ssim(y, y), 1.0, 1e-12);
}

TEST(Metrics, RmseAtLeastMae) {
  std::mt19937_64 rng(10);
  for (int i = 0; i < 100; ++i) {
    const Hypercube y = oracle::random_cube(rng, 2, 3, 4, -1.0F, 1.0F);
    const Hypercube yhat = oracle::random_cube(rng, 2, 3, 4, -1.0F, 1.0F);
    EXPECT_GE(metrics::rmse(y, yhat), metrics::mae(y, yhat));
  }
}

TEST(Metrics, Symmetry) {
  std::mt19937_64 rng(12);
  const Hypercube y = oracle::random_cube(rng, 11, 12, 3, 0.1F, 1.0F);
  const Hypercube yhat = oracle::random_cube(rng, 11, 12, 3, 0.1F, 1.0F);
  EXPECT_EQ(metrics::mae(y, yhat), metrics::mae(yhat, y));
  EXPECT_EQ(metrics::rmse(y, yhat), metrics::rmse(yhat, y));
  EXPECT_NEAR(metrics::sam(y, yhat), metrics::sam(yhat, y), 1e-15);
  EXPECT_NEAR(metrics::ssim(y, yhat), metrics::ssim(yhat, y), 1e-14);
  EXPECT_NE(metrics::mrae(y, yhat), metrics::mrae(yhat, y));
  EXPECT_NEAR(metrics::psnr(y, yhat, 1.0), metrics::psnr(yhat, y, 1.0), 1e-12);
  // psnr with a data-dependent peak is not symmetric
  const auto peak = [](const Hypercube& c) {
    return static_cast<double>(*std::max_element(c.data().begin(), c.data().end()));
  };
  EXPECT_NE(metrics::psnr(y, yhat, peak(y)), metrics::psnr(yhat, y, peak(yhat)));
}

TEST(Metrics, MaskConsistency) {
  std::mt19937_64 rng(13);
  const Hypercube y = oracle::random_cube(rng, 4, 4, 20, 0.0F, 1.0F, 600.0F, 10.0F);
  const Hypercube yhat = oracle::random_cube(rng, 4, 4, 20, 0.0F, 1.0F, 600.0F, 10.0F);
  const RangeMasks m = make_range_masks(y.wavelengths());
  const double nv = static_cast<double>(m.visible.indices.size());
  const double ne = static_cast<double>(m.extended.indices.size());
  const double combined =
      (nv * metrics::mae(y, yhat, m.visible) + ne * metrics::mae(y, yhat, m.extended)) / (nv + ne);
  EXPECT_NEAR(metrics::mae(y, yhat, m.full), combined, 1e-12);
  EXPECT_NEAR(metrics::mae(y, yhat, m.visible), oracle::mae(y, yhat, m.visible.indices), 1e-12);
}

TEST(Metrics, ErrorsOnShapeAndEmptyMask) {
  EXPECT_THROW(metrics::mae(row({0, 1}), row({0, 1, 2})), ShapeError);
  EXPECT_THROW(metrics::psnr(row({0, 1}), row({0, 2}), 0.0), RangeError);
  RangeMask empty{RangeKind::extended, {}};
  EXPECT_THROW(metrics::mae(row({0, 1}), row({0, 2}), empty), DegenerateError);
}

TEST(Metrics, PerChannelCurves) {
  std::mt19937_64 rng(14);
  const Hypercube y = oracle::random_cube(rng, 3, 4, 5);
  const auto same = metrics::per_channel_curves(y, y);
  for (double v : same.mae) {
    EXPECT_EQ(v, 0.0);
  }
  Hypercube yhat = y;
  yhat.at(1, 2, 0) += 0.5F;
  const auto local = metrics::per_channel_curves(y, yhat);
  EXPECT_GT(local.mae[0], 0.0);
  for (std::size_t c = 1; c < 5; ++c) {
    EXPECT_EQ(local.mae[c], 0.0);
    EXPECT_EQ(local.psnr[c], metrics::kPsnrCapDb);
  }
  const Hypercube other = oracle::random_cube(rng, 3, 4, 5);
  const auto curves = metrics::per_channel_curves(y, other);
  double mean = 0.0;
  for (double v : curves.mae) {
    mean += v / 5.0;
  }
  EXPECT_NEAR(mean, metrics::mae(y, other), 1e-12);
}

TEST(Metrics, Summaries) {
  const std::vector<double> one{4.0};
  EXPECT_EQ(metrics::summarize(one).std, 0.0);
  const std::vector<double> two{1.0, 3.0};
  EXPECT_DOUBLE_EQ(metrics::summarize(two).mean, 2.0);
  EXPECT_DOUBLE_EQ(metrics::summarize(two).std, 1.0);
}

TEST(Metrics, AggregateIsOrderIndependent) {
  std::mt19937_64 rng(15);
  std::vector<metrics::ImageMetrics> images;
  for (int i = 0; i < 4; ++i) {
    const Hypercube y = oracle::random_cube(rng, 11, 11, 3, 0.1F, 1.0F);
    const Hypercube yhat = oracle::random_cube(rng, 11, 11, 3, 0.1F, 1.0F);
    images.push_back(metrics::evaluate_image(y, yhat));
  }
  const auto a = metrics::aggregate_reports(images);
  std::reverse(images.begin(), images.end());
  const auto b = metrics::aggregate_reports(images);
  EXPECT_EQ(a.image_count, 4U);
  EXPECT_NEAR(a.mae.mean, b.mae.mean, 1e-15);
  EXPECT_NEAR(a.mae.std, b.mae.std, 1e-15);
  EXPECT_NEAR(a.ssim.mean, b.ssim.mean, 1e-15);
  EXPECT_THROW(metrics::aggregate_reports(std::span<const metrics::ImageMetrics>{}), DegenerateError);
}

TEST(Metrics, SmallImageSkipsSsim) {
  std::mt19937_64 rng(16);
  const Hypercube y = oracle::random_cube(rng, 4, 4, 3);
  const auto m = metrics::evaluate_image(y, y);
  EXPECT_TRUE(std::isnan(m.ssim));
  EXPECT_EQ(m.mae, 0.0);
}
