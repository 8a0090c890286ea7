// SPDX-License-Identifier: Apache-2.0
#include <bit>
#include <cstdint>
#include <cstring>
#include <string>

#include "spectrarec/cube.hpp"
#include "spectrarec/errors.hpp"
#include "spectrarec/fileio.hpp"
#include "spectrarec/detail/le_bytes.hpp"

namespace spectrarec {

using detail::ByteReader;
using detail::ByteWriter;
using detail::checked_u32;

namespace {

constexpr char kMagic[4] = {'H', 'S', 'C', '1'};
constexpr std::uint8_t kVersion = 1;

}  // namespace

std::size_t hsc1_file_size(std::size_t height, std::size_t width, std::size_t channels) {
  return kHsc1HeaderBytes + 4 * channels + 4 * height * width * channels;
}

std::vector<unsigned char> encode_cube(const Hypercube& cube) {
  ByteWriter out;
  out.reserve(hsc1_file_size(cube.height(), cube.width(), cube.channels()));
  out.bytes(kMagic, sizeof(kMagic));
  out.u8(kVersion);
  out.u32(checked_u32(cube.height(), "height"));
  out.u32(checked_u32(cube.width(), "width"));
  out.u32(checked_u32(cube.channels(), "channels"));
  for (float nm : cube.wavelengths()) {
    out.f32(nm);
  }
  for (float v : cube.data()) {
    out.f32(v);
  }
  return out.take();
}

Hypercube decode_cube(std::span<const unsigned char> bytes) {
  ByteReader in(bytes, "HSC1");
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw FormatError("not an HSC1 file (bad magic)");
  }
  in.skip(sizeof(kMagic));
  const std::uint8_t version = in.u8();
  if (version != kVersion) {
    throw FormatError("unsupported HSC1 version " + std::to_string(version));
  }
  const std::size_t height = in.u32();
  const std::size_t width = in.u32();
  const std::size_t channels = in.u32();
  if (height == 0 || width == 0 || channels == 0) {
    throw FormatError("HSC1 header declares a zero dimension");
  }
  std::vector<float> wavelengths(channels);
  for (auto& nm : wavelengths) {
    nm = in.f32();
  }
  const std::size_t count = height * width * channels;
  if (in.remaining() / 4 < count) {
    throw TruncationError("HSC1 payload truncated: expected " + std::to_string(count) +
                          " values, file holds " + std::to_string(in.remaining() / 4));
  }
  std::vector<float> data(count);
  for (auto& v : data) {
    v = in.f32();
  }
  if (in.remaining() != 0) {
    throw FormatError("HSC1 file has " + std::to_string(in.remaining()) + " trailing bytes");
  }
  Hypercube cube(height, width, std::move(wavelengths), std::move(data));
  cube.validate();
  return cube;
}

void save_cube(const Hypercube& cube, const std::filesystem::path& path) {
  cube.validate();
  write_file_atomic(path, encode_cube(cube));
}

Hypercube load_cube(const std::filesystem::path& path) {
  return decode_cube(read_file_bytes(path));
}

Hypercube rgb_to_cube(const RgbImage& rgb) {
  std::vector<float> data(rgb.data().size());
  const std::size_t pixels = rgb.height() * rgb.width();
  for (std::size_t p = 0; p < pixels; ++p) {
    for (std::size_t k = 0; k < 3; ++k) {
      data[p * 3 + (2 - k)] = rgb.data()[p * 3 + k];
    }
  }
  return {rgb.height(), rgb.width(), {kRgbFileWavelengths.begin(), kRgbFileWavelengths.end()},
          std::move(data)};
}

RgbImage cube_to_rgb(const Hypercube& cube) {
  if (cube.channels() != 3) {
    throw FormatError("RGB file must hold 3 channels, found " + std::to_string(cube.channels()));
  }
  RgbImage rgb(cube.height(), cube.width());
  const std::size_t pixels = cube.pixel_count();
  for (std::size_t p = 0; p < pixels; ++p) {
    for (std::size_t k = 0; k < 3; ++k) {
      rgb.data()[p * 3 + k] = cube.data()[p * 3 + (2 - k)];
    }
  }
  return rgb;
}

void save_rgb(const RgbImage& rgb, const std::filesystem::path& path) {
  save_cube(rgb_to_cube(rgb), path);
}

RgbImage load_rgb(const std::filesystem::path& path) { return cube_to_rgb(load_cube(path)); }

}  // namespace spectrarec
