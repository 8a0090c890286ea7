// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace spectrarec {

/// Root of every exception thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SPECTRAREC_DEFINE_ERROR(Name)      \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  }

SPECTRAREC_DEFINE_ERROR(FormatError);
SPECTRAREC_DEFINE_ERROR(TruncationError);
SPECTRAREC_DEFINE_ERROR(AxisError);
SPECTRAREC_DEFINE_ERROR(IoError);
SPECTRAREC_DEFINE_ERROR(ValidationError);
SPECTRAREC_DEFINE_ERROR(IndexError);
SPECTRAREC_DEFINE_ERROR(ShapeError);
SPECTRAREC_DEFINE_ERROR(DegenerateError);
SPECTRAREC_DEFINE_ERROR(SpecError);
SPECTRAREC_DEFINE_ERROR(RangeError);
SPECTRAREC_DEFINE_ERROR(DatasetError);
SPECTRAREC_DEFINE_ERROR(GenerationError);
SPECTRAREC_DEFINE_ERROR(ConfigError);

#undef SPECTRAREC_DEFINE_ERROR

/// Raised when a non-finite value shows up in gradients or losses.
class NumericsError : public Error {
 public:
  explicit NumericsError(const std::string& what,
                         std::optional<std::size_t> epoch = std::nullopt)
      : Error(epoch ? what + " (epoch " + std::to_string(*epoch) + ")" : what),
        epoch_(epoch) {}

  std::optional<std::size_t> epoch() const noexcept { return epoch_; }

 private:
  std::optional<std::size_t> epoch_;
};

}  // namespace spectrarec
