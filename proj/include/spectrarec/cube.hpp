// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace spectrarec {

// Hyperspectral reflectance volume, channel-last row-major: the spectrum of
// pixel (h, w) is contiguous at offset (h * width + w) * channels.
class Hypercube {
 public:
  Hypercube() = default;

  /// Zero-filled cube. Throws AxisError on a bad wavelength axis, ShapeError
  /// on zero dimensions.
  Hypercube(std::size_t height, std::size_t width, std::vector<float> wavelengths);
  Hypercube(std::size_t height, std::size_t width, std::vector<float> wavelengths,
            std::vector<float> data);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t channels() const noexcept { return wavelengths_.size(); }
  std::size_t pixel_count() const noexcept { return height_ * width_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<const float> wavelengths() const noexcept { return wavelengths_; }
  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }

  float& at(std::size_t h, std::size_t w, std::size_t c) {
    return data_[(h * width_ + w) * channels() + c];
  }
  float at(std::size_t h, std::size_t w, std::size_t c) const {
    return data_[(h * width_ + w) * channels() + c];
  }

  std::span<float> spectrum(std::size_t h, std::size_t w) {
    return {data_.data() + (h * width_ + w) * channels(), channels()};
  }
  std::span<const float> spectrum(std::size_t h, std::size_t w) const {
    return {data_.data() + (h * width_ + w) * channels(), channels()};
  }

  /// Throws ValidationError if any value is NaN or infinite.
  void validate() const;

  bool same_shape(const Hypercube& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ &&
           channels() == other.channels();
  }

  friend bool operator==(const Hypercube&, const Hypercube&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<float> wavelengths_;
  std::vector<float> data_;
};

// RGB input image, channel order (r, g, b), values in [0, 1].
class RgbImage {
 public:
  static constexpr std::size_t kChannels = 3;

  RgbImage() = default;
  RgbImage(std::size_t height, std::size_t width);
  RgbImage(std::size_t height, std::size_t width, std::vector<float> data);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }

  float& at(std::size_t h, std::size_t w, std::size_t k) {
    return data_[(h * width_ + w) * kChannels + k];
  }
  float at(std::size_t h, std::size_t w, std::size_t k) const {
    return data_[(h * width_ + w) * kChannels + k];
  }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<float> data_;
};

enum class RangeKind { full, visible, extended };

const char* to_string(RangeKind kind) noexcept;

struct RangeMask {
  RangeKind kind = RangeKind::full;
  std::vector<std::size_t> indices;  // sorted channel indices
};

struct RangeMasks {
  RangeMask full;
  RangeMask visible;
  RangeMask extended;

  const RangeMask& get(RangeKind kind) const noexcept;
};

inline constexpr double kVisibleMinNm = 400.0;
inline constexpr double kVisibleMaxNm = 680.0;

/// Splits a wavelength axis into full / visible [400, 680] nm inclusive /
/// extended (the complement). Throws AxisError on an empty or
/// non-increasing axis.
RangeMasks make_range_masks(std::span<const float> wavelengths);

RangeMask full_mask(std::size_t channels);

// Per-channel sensitivities of the three camera channels (r, g, b), sampled
// on a wavelength grid.
struct CameraResponse {
  std::vector<float> wavelengths;
  std::array<std::vector<double>, 3> curves;
};

struct WavelengthBand {
  double lo_nm = 0.0;
  double hi_nm = 0.0;  // inclusive
};

/// Unit boxcar on each channel whose wavelength lies in the given band.
CameraResponse boxcar_response(std::span<const float> wavelengths,
                               const std::array<WavelengthBand, 3>& rgb_bands);

/// Boxcar response that splits the visible channels of the grid into three
/// contiguous groups of near-equal size: blue lowest, red highest. Throws
/// AxisError when fewer than three channels are visible.
CameraResponse default_response(std::span<const float> wavelengths);

/// Throws AxisError for negative sensitivities or a zero-mass curve.
void validate_response(const CameraResponse& response);

/// rgb[k] = sum_c resp_k(c) * cube[c] / sum_c resp_k(c), clamped to [0, 1].
RgbImage synthesize_rgb(const Hypercube& cube, const CameraResponse& response);

/// Scales each pixel spectrum to unit L1 norm. All-zero spectra pass through.
Hypercube l1_normalize(const Hypercube& cube);

/// Per-channel empirical-CDF remap: v -> #{x <= v} / (H * W).
Hypercube histogram_equalize(const Hypercube& cube);

struct Spectrum {
  std::vector<float> wavelengths;
  std::vector<float> values;
};

/// Throws IndexError when (h, w) is out of bounds.
Spectrum extract_spectrum(const Hypercube& cube, std::size_t h, std::size_t w);

/// `wavelength_nm,value` header then one row per channel.
std::string spectrum_csv(const Spectrum& spectrum);

// HSC1 binary container, little-endian:
//   "HSC1" | u8 version=1 | u32 H | u32 W | u32 C | C x f32 wavelengths |
//   H*W*C x f32 data (channel-last, row-major)
inline constexpr std::size_t kHsc1HeaderBytes = 17;

std::size_t hsc1_file_size(std::size_t height, std::size_t width, std::size_t channels);

std::vector<unsigned char> encode_cube(const Hypercube& cube);
Hypercube decode_cube(std::span<const unsigned char> bytes);

/// Validates then writes atomically. ValidationError on non-finite data,
/// IoError if the path cannot be written.
void save_cube(const Hypercube& cube, const std::filesystem::path& path);

/// FormatError on bad magic/version, TruncationError on a short payload,
/// AxisError on a non-increasing wavelength axis.
Hypercube load_cube(const std::filesystem::path& path);

// RGB images are stored as HSC1 with C = 3 and the nominal labels
// (460, 540, 620) nm, i.e. channels in b, g, r order on disk.
inline constexpr std::array<float, 3> kRgbFileWavelengths{460.0F, 540.0F, 620.0F};

Hypercube rgb_to_cube(const RgbImage& rgb);
RgbImage cube_to_rgb(const Hypercube& cube);
void save_rgb(const RgbImage& rgb, const std::filesystem::path& path);
RgbImage load_rgb(const std::filesystem::path& path);

}  // namespace spectrarec
