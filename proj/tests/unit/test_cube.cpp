// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <random>

#include "../oracles.hpp"
#include "spectrarec/cube.hpp"
#include "spectrarec/errors.hpp"
#include "spectrarec/fileio.hpp"

using namespace spectrarec;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("spectrarec_cube_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Hypercube pixel(std::vector<float> spectrum) {
  std::vector<float> wl(spectrum.size());
  for (std::size_t i = 0; i < wl.size(); ++i) {
    wl[i] = 500.0F + 10.0F * static_cast<float>(i);
  }
  return {1, 1, std::move(wl), std::move(spectrum)};
}

}  // namespace

TEST(Hypercube, RejectsBadAxisAndShape) {
  EXPECT_THROW(Hypercube(1, 1, {500.0F, 500.0F}), AxisError);
  EXPECT_THROW(Hypercube(1, 1, {600.0F, 500.0F}), AxisError);
  EXPECT_THROW(Hypercube(1, 1, {}), AxisError);
  EXPECT_THROW(Hypercube(0, 1, {500.0F}), ShapeError);
  EXPECT_THROW(Hypercube(1, 1, {500.0F}, {1.0F, 2.0F}), ShapeError);
}

TEST(Hypercube, ValidateFlagsNonFinite) {
  Hypercube c = pixel({0.1F, 0.2F});
  EXPECT_NO_THROW(c.validate());
  c.at(0, 0, 1) = std::numeric_limits<float>::quiet_NaN();
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(CubeIo, RoundTripSmallFile) {
  const fs::path dir = temp_dir("rt");
  std::mt19937_64 rng(1);
  const Hypercube cube = oracle::random_cube(rng, 2, 2, 3);
  save_cube(cube, dir / "a.hsc");
  const Hypercube back = load_cube(dir / "a.hsc");
  EXPECT_EQ(back.height(), 2U);
  EXPECT_EQ(back.width(), 2U);
  EXPECT_EQ(back.channels(), 3U);
  EXPECT_EQ(back, cube);
}

TEST(CubeIo, RoundTripPropertyOverRandomCubes) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> side(1, 6);
  for (int i = 0; i < 50; ++i) {
    const Hypercube cube = oracle::random_cube(rng, side(rng), side(rng), side(rng), -3.0F, 3.0F);
    EXPECT_EQ(decode_cube(encode_cube(cube)), cube);
  }
}

TEST(CubeIo, OnePixelFileSizeFollowsLayout) {
  // 4 magic + 1 version + 3 x u32 dims = 17, then one f32 wavelength and one f32 value.
  EXPECT_EQ(kHsc1HeaderBytes, 4U + 1U + 3U * 4U);
  const fs::path dir = temp_dir("size");
  save_cube(pixel({0.5F}), dir / "p.hsc");
  EXPECT_EQ(fs::file_size(dir / "p.hsc"), 17U + 4U + 4U);
  EXPECT_EQ(hsc1_file_size(1, 1, 1), 25U);
}

TEST(CubeIo, BadMagicIsFormatError) {
  auto bytes = encode_cube(pixel({0.1F, 0.2F}));
  std::memcpy(bytes.data(), "XXXX", 4);
  EXPECT_THROW(decode_cube(bytes), FormatError);
}

TEST(CubeIo, MissingWavelengthIsTruncation) {
  // Header says C = 5 but only four wavelengths follow.
  std::vector<unsigned char> bytes = {'H', 'S', 'C', '1', 1, 1, 0, 0, 0, 1, 0, 0, 0, 5, 0, 0, 0};
  for (int i = 0; i < 4; ++i) {
    const float wl = 500.0F + static_cast<float>(i);
    unsigned char raw[4];
    std::memcpy(raw, &wl, 4);
    bytes.insert(bytes.end(), raw, raw + 4);
  }
  EXPECT_THROW(decode_cube(bytes), TruncationError);
}

TEST(CubeIo, NonIncreasingAxisIsAxisError) {
  auto bytes = encode_cube(pixel({0.1F, 0.2F}));
  const float same = 500.0F;
  std::memcpy(bytes.data() + 17 + 4, &same, 4);
  EXPECT_THROW(decode_cube(bytes), AxisError);
}

TEST(CubeIo, NanIsRejectedBeforeWrite) {
  const fs::path dir = temp_dir("nan");
  Hypercube c = pixel({0.1F});
  c.at(0, 0, 0) = std::numeric_limits<float>::infinity();
  EXPECT_THROW(save_cube(c, dir / "bad.hsc"), ValidationError);
  EXPECT_FALSE(fs::exists(dir / "bad.hsc"));
}

TEST(CubeIo, UnwritablePathIsIoError) {
  EXPECT_THROW(save_cube(pixel({0.1F}), "/nonexistent_dir_xyz/a.hsc"), IoError);
}

TEST(CubeIo, RgbStoredAsThreeChannelCube) {
  const fs::path dir = temp_dir("rgb");
  RgbImage rgb(1, 2, {0.1F, 0.2F, 0.3F, 0.4F, 0.5F, 0.6F});
  save_rgb(rgb, dir / "x_rgb.hsc");
  const Hypercube raw = load_cube(dir / "x_rgb.hsc");
  ASSERT_EQ(raw.channels(), 3U);
  EXPECT_FLOAT_EQ(raw.at(0, 0, 0), 0.3F);  // blue first on disk (460 nm)
  EXPECT_FLOAT_EQ(raw.at(0, 0, 2), 0.1F);
  EXPECT_EQ(load_rgb(dir / "x_rgb.hsc"), rgb);
}

TEST(L1Normalize, Examples) {
  const auto a = l1_normalize(pixel({2.0F, 2.0F}));
  EXPECT_FLOAT_EQ(a.at(0, 0, 0), 0.5F);
  EXPECT_FLOAT_EQ(a.at(0, 0, 1), 0.5F);
  const auto z = l1_normalize(pixel({0.0F, 0.0F, 0.0F}));
  EXPECT_EQ(z, pixel({0.0F, 0.0F, 0.0F}));
  const auto m = l1_normalize(pixel({-1.0F, 3.0F}));
  EXPECT_FLOAT_EQ(m.at(0, 0, 0), -0.25F);
  EXPECT_FLOAT_EQ(m.at(0, 0, 1), 0.75F);
}

TEST(L1Normalize, UnitSumAndIdempotence) {
  std::mt19937_64 rng(5);
  const Hypercube cube = oracle::random_cube(rng, 4, 5, 9, 0.0F, 2.0F);
  const Hypercube once = l1_normalize(cube);
  const Hypercube twice = l1_normalize(once);
  for (std::size_t h = 0; h < 4; ++h) {
    for (std::size_t w = 0; w < 5; ++w) {
      double s = 0.0;
      for (std::size_t c = 0; c < 9; ++c) {
        s += std::fabs(once.at(h, w, c));
        EXPECT_NEAR(once.at(h, w, c), twice.at(h, w, c), 1e-7);
      }
      EXPECT_NEAR(s, 1.0, 1e-6);
    }
  }
  const Spectrum sp = extract_spectrum(once, 1, 2);
  double s = 0.0;
  for (float v : sp.values) {
    s += std::fabs(v);
  }
  EXPECT_NEAR(s, 1.0, 1e-6);
}

TEST(SynthesizeRgb, ConstantCubeMapsToItsValue) {
  std::vector<float> wl{450.0F, 550.0F, 650.0F, 750.0F};
  const Hypercube cube(2, 2, wl, std::vector<float>(16, 0.37F));
  CameraResponse r{wl, {std::vector<double>{0, 0, 1, 0.5}, {0, 2, 0, 0}, {3, 0, 0, 0}}};
  const RgbImage rgb = synthesize_rgb(cube, r);
  for (float v : rgb.data()) {
    EXPECT_FLOAT_EQ(v, 0.37F);
  }
}

TEST(SynthesizeRgb, BoxAveragesItsChannels) {
  const Hypercube cube = pixel({0.2F, 0.4F, 0.9F});
  const auto wl = cube.wavelengths();
  const CameraResponse r = boxcar_response(wl, {WavelengthBand{500, 510}, {520, 520}, {500, 520}});
  const RgbImage rgb = synthesize_rgb(cube, r);
  EXPECT_NEAR(rgb.at(0, 0, 0), 0.3, 1e-7);
  EXPECT_NEAR(rgb.at(0, 0, 1), 0.9, 1e-7);
  EXPECT_NEAR(rgb.at(0, 0, 2), 0.5, 1e-7);
}

TEST(SynthesizeRgb, ZeroCurveAndGridMismatchAreAxisErrors) {
  const Hypercube cube = pixel({0.2F, 0.4F, 0.9F});
  const auto wl = cube.wavelengths();
  CameraResponse r = boxcar_response(wl, {WavelengthBand{500, 510}, {520, 520}, {900, 950}});
  EXPECT_THROW(synthesize_rgb(cube, r), AxisError);
  CameraResponse shifted = boxcar_response(std::vector<float>{501, 511, 521},
                                           {WavelengthBand{0, 1000}, {0, 1000}, {0, 1000}});
  EXPECT_THROW(synthesize_rgb(cube, shifted), AxisError);
  r.curves[2] = {1.0, -0.5, 1.0};
  EXPECT_THROW(validate_response(r), AxisError);
}

TEST(SynthesizeRgb, LinearBeforeClamping) {
  std::mt19937_64 rng(8);
  const Hypercube cube = oracle::random_cube(rng, 3, 3, 12, 0.0F, 1.0F, 420.0F, 20.0F);
  const CameraResponse r = default_response(cube.wavelengths());
  const RgbImage base = synthesize_rgb(cube, r);
  for (float alpha : {0.0F, 0.25F, 0.5F, 1.0F}) {
    Hypercube scaled = cube;
    for (float& v : scaled.data()) {
      v *= alpha;
    }
    const RgbImage out = synthesize_rgb(scaled, r);
    for (std::size_t i = 0; i < out.data().size(); ++i) {
      EXPECT_NEAR(out.data()[i], alpha * base.data()[i], 1e-6);
    }
  }
}

TEST(SynthesizeRgb, ClampsToUnitInterval) {
  const Hypercube cube = pixel({3.0F, -2.0F, 3.0F});
  const auto r = boxcar_response(cube.wavelengths(), {WavelengthBand{500, 500}, {510, 510}, {520, 520}});
  const RgbImage rgb = synthesize_rgb(cube, r);
  EXPECT_EQ(rgb.at(0, 0, 0), 1.0F);
  EXPECT_EQ(rgb.at(0, 0, 1), 0.0F);
}

TEST(DefaultResponse, SplitsVisibleChannelsBlueLowest) {
  std::vector<float> wl;
  for (int nm = 460; nm <= 720; nm += 10) {
    wl.push_back(static_cast<float>(nm));
  }
  const CameraResponse r = default_response(wl);
  // 23 visible channels (460..680): blue 7, green 8, red 8.
  auto count = [](const std::vector<double>& c) {
    return std::count_if(c.begin(), c.end(), [](double v) { return v > 0; });
  };
  EXPECT_EQ(count(r.curves[2]), 7);
  EXPECT_EQ(count(r.curves[1]), 8);
  EXPECT_EQ(count(r.curves[0]), 8);
  EXPECT_GT(r.curves[2][0], 0.0);
  EXPECT_GT(r.curves[0][22], 0.0);
  for (std::size_t c = 23; c < wl.size(); ++c) {
    EXPECT_EQ(r.curves[0][c] + r.curves[1][c] + r.curves[2][c], 0.0);
  }
  EXPECT_THROW(default_response(std::vector<float>{700, 710, 720}), AxisError);
}

namespace {

std::vector<float> grid(int lo, int hi, int step) {
  std::vector<float> wl;
  for (int nm = lo; nm <= hi; nm += step) {
    wl.push_back(static_cast<float>(nm));
  }
  return wl;
}

}  // namespace

TEST(RangeMasks, WideGrid) {
  const auto wl = grid(500, 1000, 5);
  const RangeMasks m = make_range_masks(wl);
  ASSERT_EQ(m.visible.indices.size(), 37U);  // 500..680
  EXPECT_EQ(wl[m.visible.indices.back()], 680.0F);
  EXPECT_EQ(wl[m.extended.indices.front()], 685.0F);
  EXPECT_EQ(wl[m.extended.indices.back()], 1000.0F);
}

TEST(RangeMasks, NarrowGrid) {
  const auto wl = grid(460, 720, 10);
  const RangeMasks m = make_range_masks(wl);
  EXPECT_EQ(m.visible.indices.size(), 23U);  // 460..680
  ASSERT_EQ(m.extended.indices.size(), 4U);  // 690..720
  EXPECT_EQ(wl[m.extended.indices.front()], 690.0F);
}

TEST(RangeMasks, AllAboveVisible) {
  const RangeMasks m = make_range_masks(grid(700, 900, 50));
  EXPECT_TRUE(m.visible.indices.empty());
  EXPECT_EQ(m.extended.indices, m.full.indices);
  EXPECT_THROW(make_range_masks(std::vector<float>{}), AxisError);
}

TEST(RangeMasks, BoundariesAreInclusive) {
  const RangeMasks m = make_range_masks(std::vector<float>{399.5F, 400.0F, 680.0F, 680.5F});
  EXPECT_EQ(m.visible.indices, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(m.extended.indices, (std::vector<std::size_t>{0, 3}));
}

TEST(RangeMasks, PartitionProperty) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> start(250.0F, 900.0F);
  std::uniform_real_distribution<float> step(0.5F, 60.0F);
  for (int i = 0; i < 200; ++i) {
    std::vector<float> wl(1 + rng() % 40);
    wl[0] = start(rng);
    for (std::size_t c = 1; c < wl.size(); ++c) {
      wl[c] = wl[c - 1] + step(rng);
    }
    const RangeMasks m = make_range_masks(wl);
    std::vector<std::size_t> merged = m.visible.indices;
    merged.insert(merged.end(), m.extended.indices.begin(), m.extended.indices.end());
    std::sort(merged.begin(), merged.end());
    EXPECT_EQ(merged, m.full.indices);
    EXPECT_EQ(m.full.indices.size(), wl.size());
  }
}

TEST(HistogramEqualize, Examples) {
  const Hypercube flat(2, 2, {500.0F}, {0.3F, 0.3F, 0.3F, 0.3F});
  const Hypercube flat_eq = histogram_equalize(flat);
  for (float v : flat_eq.data()) {
    EXPECT_EQ(v, 1.0F);
  }
  const Hypercube ramp(2, 2, {500.0F}, {0.3F, 0.1F, 0.4F, 0.2F});
  const Hypercube eq = histogram_equalize(ramp);
  EXPECT_EQ(eq.data()[0], 0.75F);
  EXPECT_EQ(eq.data()[1], 0.25F);
  EXPECT_EQ(eq.data()[2], 1.0F);
  EXPECT_EQ(eq.data()[3], 0.5F);
}

TEST(HistogramEqualize, UniformRampNearlyFixed) {
  constexpr std::size_t n = 64;
  std::vector<float> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    data[i] = static_cast<float>(i + 1) / n;
  }
  const Hypercube ramp(8, 8, {500.0F}, data);
  const Hypercube eq = histogram_equalize(ramp);
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_LE(std::fabs(eq.data()[i] - ramp.data()[i]), 1.0 / n + 1e-7);
  }
}

TEST(HistogramEqualize, PreservesOrderWithinChannel) {
  std::mt19937_64 rng(4);
  Hypercube cube = oracle::random_cube(rng, 5, 6, 3);
  for (std::size_t i = 0; i < cube.size(); i += 4) {
    cube.data()[i] = 0.5F;  // ties
  }
  const Hypercube eq = histogram_equalize(cube);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t p = 0; p < 30; ++p) {
      for (std::size_t q = 0; q < 30; ++q) {
        const float a = cube.data()[p * 3 + c];
        const float b = cube.data()[q * 3 + c];
        if (a <= b) {
          EXPECT_LE(eq.data()[p * 3 + c], eq.data()[q * 3 + c]);
        }
      }
    }
  }
}

TEST(ExtractSpectrum, ValuesBoundsAndCsv) {
  const Hypercube c = pixel({0.1F, 0.2F});
  const Spectrum s = extract_spectrum(c, 0, 0);
  EXPECT_EQ(s.values, (std::vector<float>{0.1F, 0.2F}));
  EXPECT_EQ(s.wavelengths, (std::vector<float>{500.0F, 510.0F}));
  EXPECT_THROW(extract_spectrum(c, 1, 0), IndexError);
  EXPECT_THROW(extract_spectrum(c, 0, 1), IndexError);
  const CsvTable t = parse_csv(spectrum_csv(s));
  EXPECT_EQ(t.header, (CsvRow{"wavelength_nm", "value"}));
  ASSERT_EQ(t.rows.size(), 2U);
  EXPECT_EQ(static_cast<float>(parse_double(t.rows[1][1])), 0.2F);
}
