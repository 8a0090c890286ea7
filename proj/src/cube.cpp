// SPDX-License-Identifier: Apache-2.0
#include "spectrarec/cube.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spectrarec/errors.hpp"
#include "spectrarec/fileio.hpp"

namespace spectrarec {

namespace {

void check_axis(std::span<const float> wavelengths) {
  if (wavelengths.empty()) {
    throw AxisError("wavelength axis is empty");
  }
  for (std::size_t i = 0; i < wavelengths.size(); ++i) {
    if (!std::isfinite(wavelengths[i])) {
      throw AxisError("wavelength " + std::to_string(i) + " is not finite");
    }
    if (i > 0 && !(wavelengths[i] > wavelengths[i - 1])) {
      throw AxisError("wavelengths not strictly increasing at index " + std::to_string(i));
    }
  }
}

}  // namespace

Hypercube::Hypercube(std::size_t height, std::size_t width, std::vector<float> wavelengths)
    : Hypercube(height, width, wavelengths,
                std::vector<float>(height * width * wavelengths.size(), 0.0F)) {}

Hypercube::Hypercube(std::size_t height, std::size_t width, std::vector<float> wavelengths,
                     std::vector<float> data)
    : height_(height), width_(width), wavelengths_(std::move(wavelengths)), data_(std::move(data)) {
  if (height_ == 0 || width_ == 0) {
    throw ShapeError("cube height and width must be >= 1");
  }
  check_axis(wavelengths_);
  if (data_.size() != height_ * width_ * wavelengths_.size()) {
    throw ShapeError("cube data has " + std::to_string(data_.size()) + " values, expected " +
                     std::to_string(height_ * width_ * wavelengths_.size()));
  }
}

void Hypercube::validate() const {
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw ValidationError("cube value at flat index " + std::to_string(i) + " is not finite");
    }
  }
}

RgbImage::RgbImage(std::size_t height, std::size_t width)
    : RgbImage(height, width, std::vector<float>(height * width * kChannels, 0.0F)) {}

RgbImage::RgbImage(std::size_t height, std::size_t width, std::vector<float> data)
    : height_(height), width_(width), data_(std::move(data)) {
  if (height_ == 0 || width_ == 0) {
    throw ShapeError("rgb height and width must be >= 1");
  }
  if (data_.size() != height_ * width_ * kChannels) {
    throw ShapeError("rgb data size does not match " + std::to_string(height_) + "x" +
                     std::to_string(width_) + "x3");
  }
}

const char* to_string(RangeKind kind) noexcept {
  switch (kind) {
    case RangeKind::full:
      return "full";
    case RangeKind::visible:
      return "visible";
    case RangeKind::extended:
      return "extended";
  }
  return "?";
}

const RangeMask& RangeMasks::get(RangeKind kind) const noexcept {
  switch (kind) {
    case RangeKind::visible:
      return visible;
    case RangeKind::extended:
      return extended;
    case RangeKind::full:
      break;
  }
  return full;
}

RangeMask full_mask(std::size_t channels) {
  RangeMask mask{RangeKind::full, std::vector<std::size_t>(channels)};
  for (std::size_t c = 0; c < channels; ++c) {
    mask.indices[c] = c;
  }
  return mask;
}

RangeMasks make_range_masks(std::span<const float> wavelengths) {
  check_axis(wavelengths);
  RangeMasks masks{full_mask(wavelengths.size()), {RangeKind::visible, {}},
                   {RangeKind::extended, {}}};
  for (std::size_t c = 0; c < wavelengths.size(); ++c) {
    const double nm = wavelengths[c];
    if (nm >= kVisibleMinNm && nm <= kVisibleMaxNm) {
      masks.visible.indices.push_back(c);
    } else {
      masks.extended.indices.push_back(c);
    }
  }
  return masks;
}

CameraResponse boxcar_response(std::span<const float> wavelengths,
                               const std::array<WavelengthBand, 3>& rgb_bands) {
  check_axis(wavelengths);
  CameraResponse response;
  response.wavelengths.assign(wavelengths.begin(), wavelengths.end());
  for (std::size_t k = 0; k < 3; ++k) {
    auto& curve = response.curves[k];
    curve.assign(wavelengths.size(), 0.0);
    for (std::size_t c = 0; c < wavelengths.size(); ++c) {
      if (wavelengths[c] >= rgb_bands[k].lo_nm && wavelengths[c] <= rgb_bands[k].hi_nm) {
        curve[c] = 1.0;
      }
    }
  }
  return response;
}

CameraResponse default_response(std::span<const float> wavelengths) {
  const RangeMasks masks = make_range_masks(wavelengths);
  const auto& vis = masks.visible.indices;
  if (vis.size() < 3) {
    throw AxisError("default camera response needs >= 3 visible channels, grid has " +
                    std::to_string(vis.size()));
  }
  CameraResponse response;
  response.wavelengths.assign(wavelengths.begin(), wavelengths.end());
  for (auto& curve : response.curves) {
    curve.assign(wavelengths.size(), 0.0);
  }
  // Group g (0 = blue) gets visible channels [g*n/3, (g+1)*n/3).
  const std::size_t n = vis.size();
  for (std::size_t g = 0; g < 3; ++g) {
    const std::size_t begin = g * n / 3;
    const std::size_t end = (g + 1) * n / 3;
    auto& curve = response.curves[2 - g];
    for (std::size_t i = begin; i < end; ++i) {
      curve[vis[i]] = 1.0;
    }
  }
  return response;
}

void validate_response(const CameraResponse& response) {
  static constexpr const char* kNames[] = {"red", "green", "blue"};
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& curve = response.curves[k];
    if (curve.size() != response.wavelengths.size()) {
      throw AxisError(std::string(kNames[k]) + " response length does not match its grid");
    }
    double mass = 0.0;
    for (double s : curve) {
      if (!(s >= 0.0) || !std::isfinite(s)) {
        throw AxisError(std::string(kNames[k]) + " response has a negative or non-finite value");
      }
      mass += s;
    }
    if (!(mass > 0.0)) {
      throw AxisError(std::string(kNames[k]) + " response has zero mass");
    }
  }
}

RgbImage synthesize_rgb(const Hypercube& cube, const CameraResponse& response) {
  validate_response(response);
  const auto grid = cube.wavelengths();
  if (!std::equal(grid.begin(), grid.end(), response.wavelengths.begin(),
                  response.wavelengths.end())) {
    throw AxisError("camera response grid does not match the cube's wavelength axis");
  }
  std::array<double, 3> mass{};
  for (std::size_t k = 0; k < 3; ++k) {
    for (double s : response.curves[k]) {
      mass[k] += s;
    }
  }
  RgbImage rgb(cube.height(), cube.width());
  for (std::size_t h = 0; h < cube.height(); ++h) {
    for (std::size_t w = 0; w < cube.width(); ++w) {
      const auto spec = cube.spectrum(h, w);
      for (std::size_t k = 0; k < 3; ++k) {
        double acc = 0.0;
        for (std::size_t c = 0; c < spec.size(); ++c) {
          acc += response.curves[k][c] * spec[c];
        }
        rgb.at(h, w, k) = static_cast<float>(std::clamp(acc / mass[k], 0.0, 1.0));
      }
    }
  }
  return rgb;
}

Hypercube l1_normalize(const Hypercube& cube) {
  Hypercube out = cube;
  for (std::size_t h = 0; h < cube.height(); ++h) {
    for (std::size_t w = 0; w < cube.width(); ++w) {
      auto spec = out.spectrum(h, w);
      double norm = 0.0;
      for (float v : spec) {
        norm += std::abs(static_cast<double>(v));
      }
      if (norm == 0.0) {
        continue;
      }
      for (float& v : spec) {
        v = static_cast<float>(v / norm);
      }
    }
  }
  return out;
}

Hypercube histogram_equalize(const Hypercube& cube) {
  Hypercube out = cube;
  const std::size_t n = cube.pixel_count();
  const std::size_t channels = cube.channels();
  std::vector<float> sorted(n);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t p = 0; p < n; ++p) {
      sorted[p] = cube.data()[p * channels + c];
    }
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t p = 0; p < n; ++p) {
      const float v = cube.data()[p * channels + c];
      const auto rank = static_cast<std::size_t>(
          std::upper_bound(sorted.begin(), sorted.end(), v) - sorted.begin());
      out.data()[p * channels + c] =
          static_cast<float>(static_cast<double>(rank) / static_cast<double>(n));
    }
  }
  return out;
}

Spectrum extract_spectrum(const Hypercube& cube, std::size_t h, std::size_t w) {
  if (h >= cube.height() || w >= cube.width()) {
    throw IndexError("pixel (" + std::to_string(h) + "," + std::to_string(w) +
                     ") outside " + std::to_string(cube.height()) + "x" +
                     std::to_string(cube.width()));
  }
  const auto spec = cube.spectrum(h, w);
  return {{cube.wavelengths().begin(), cube.wavelengths().end()}, {spec.begin(), spec.end()}};
}

std::string spectrum_csv(const Spectrum& spectrum) {
  CsvWriter csv({"wavelength_nm", "value"});
  for (std::size_t c = 0; c < spectrum.values.size(); ++c) {
    csv.add_row({format_float(spectrum.wavelengths[c]), format_float(spectrum.values[c])});
  }
  return csv.str();
}

}  // namespace spectrarec
