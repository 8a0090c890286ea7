// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <string>

#include "spectrarec/errors.hpp"
#include "spectrarec/train.hpp"

namespace spectrarec::train {

namespace {

void check_pair(const nn::Tensor& y, const nn::Tensor& yhat) {
  if (!y.same_shape(yhat)) {
    throw ShapeError("loss inputs differ in shape");
  }
  if (y.size() == 0) {
    throw ShapeError("loss of an empty tensor");
  }
}

double sign(double d) { return d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0); }

}  // namespace

const char* to_string(LossKind kind) noexcept {
  return kind == LossKind::l1 ? "l1" : "mrae";
}

LossResult loss_l1(const nn::Tensor& y, const nn::Tensor& yhat) {
  check_pair(y, yhat);
  const auto n = static_cast<double>(y.size());
  LossResult out{0.0, nn::Tensor(y.height(), y.width(), y.depth())};
  const auto a = y.data();
  const auto b = yhat.data();
  auto g = out.grad.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = b[i] - a[i];
    out.value += std::abs(d);
    g[i] = sign(d) / n;
  }
  out.value /= n;
  return out;
}

LossResult loss_mrae(const nn::Tensor& y, const nn::Tensor& yhat, double epsilon) {
  if (!(epsilon > 0.0)) {
    throw RangeError("mrae epsilon must be > 0");
  }
  check_pair(y, yhat);
  const auto n = static_cast<double>(y.size());
  LossResult out{0.0, nn::Tensor(y.height(), y.width(), y.depth())};
  const auto a = y.data();
  const auto b = yhat.data();
  auto g = out.grad.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = b[i] - a[i];
    const double denom = std::max(std::abs(a[i]), epsilon);
    out.value += std::abs(d) / denom;
    g[i] = sign(d) / (n * denom);
  }
  out.value /= n;
  return out;
}

}  // namespace spectrarec::train
