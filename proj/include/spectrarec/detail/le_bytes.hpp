// SPDX-License-Identifier: Apache-2.0
#pragma once

// Little-endian byte packing shared by the HSC1 and HSW1 codecs.

#include <bit>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "spectrarec/errors.hpp"

namespace spectrarec::detail {

inline std::uint32_t checked_u32(std::size_t value, const char* what) {
  if (value > std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError(std::string(what) + " does not fit in u32");
  }
  return static_cast<std::uint32_t>(value);
}

class ByteWriter {
 public:
  void reserve(std::size_t n) { buf_.reserve(n); }
  void bytes(const void* src, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(src);
    buf_.insert(buf_.end(), p, p + n);
  }
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
      buf_.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  std::vector<unsigned char> take() { return std::move(buf_); }

 private:
  std::vector<unsigned char> buf_;
};

// Reads past the end raise TruncationError.
class ByteReader {
 public:
  ByteReader(std::span<const unsigned char> data, const char* format)
      : data_(data), format_(format) {}

  std::size_t remaining() const noexcept { return data_.size() - pos_; }

  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }
  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(data_[pos_++]) << (8 * i);
    }
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
  }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) {
      throw TruncationError(std::string(format_) + " file truncated at byte " +
                            std::to_string(pos_));
    }
  }

  std::span<const unsigned char> data_;
  std::size_t pos_ = 0;
  const char* format_;
};

}  // namespace spectrarec::detail
