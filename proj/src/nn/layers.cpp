// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <string>

#include "spectrarec/errors.hpp"
#include "spectrarec/nn.hpp"

namespace spectrarec::nn {

namespace {

void check_input(const LayerSpec& layer, std::span<const double> params, const Tensor& x) {
  if (x.depth() != layer.in_channels) {
    throw ShapeError(std::string(to_string(layer.kind)) + " layer expects depth " +
                     std::to_string(layer.in_channels) + ", got " + std::to_string(x.depth()));
  }
  if (params.size() != layer_param_count(layer)) {
    throw ShapeError(std::string(to_string(layer.kind)) + " layer expects " +
                     std::to_string(layer_param_count(layer)) + " parameters, got " +
                     std::to_string(params.size()));
  }
}

// dense and conv1 are the same per-pixel affine map.
Tensor pointwise_forward(const LayerSpec& layer, std::span<const double> params, const Tensor& x) {
  const std::size_t in = layer.in_channels;
  const std::size_t out = layer.out_channels;
  const double* weight = params.data();
  const double* bias = params.data() + in * out;
  Tensor y(x.height(), x.width(), out);
  const double* src = x.data().data();
  double* dst = y.data().data();
  for (std::size_t p = 0; p < x.pixels(); ++p) {
    const double* xp = src + p * in;
    double* yp = dst + p * out;
    for (std::size_t o = 0; o < out; ++o) {
      const double* wo = weight + o * in;
      double acc = bias[o];
      for (std::size_t i = 0; i < in; ++i) {
        acc += wo[i] * xp[i];
      }
      yp[o] = acc;
    }
  }
  return y;
}

LayerGradients pointwise_backward(const LayerSpec& layer, std::span<const double> params,
                                  const Tensor& x, const Tensor& g) {
  const std::size_t in = layer.in_channels;
  const std::size_t out = layer.out_channels;
  LayerGradients grads{std::vector<double>(params.size(), 0.0),
                       Tensor(x.height(), x.width(), in)};
  double* dw = grads.params.data();
  double* db = grads.params.data() + in * out;
  const double* weight = params.data();
  for (std::size_t p = 0; p < x.pixels(); ++p) {
    const double* xp = x.data().data() + p * in;
    const double* gp = g.data().data() + p * out;
    double* dxp = grads.input.data().data() + p * in;
    for (std::size_t o = 0; o < out; ++o) {
      const double go = gp[o];
      if (go == 0.0) {
        continue;
      }
      db[o] += go;
      double* dwo = dw + o * in;
      const double* wo = weight + o * in;
      for (std::size_t i = 0; i < in; ++i) {
        dwo[i] += go * xp[i];
        dxp[i] += go * wo[i];
      }
    }
  }
  return grads;
}

// 3x3 kernel, stride 1, zero padding 1.
Tensor conv3_forward(const LayerSpec& layer, std::span<const double> params, const Tensor& x) {
  const std::size_t in = layer.in_channels;
  const std::size_t out = layer.out_channels;
  const std::size_t height = x.height();
  const std::size_t width = x.width();
  const double* weight = params.data();
  const double* bias = params.data() + 9 * in * out;
  Tensor y(height, width, out);
  for (std::size_t h = 0; h < height; ++h) {
    for (std::size_t w = 0; w < width; ++w) {
      double* yp = &y.at(h, w, 0);
      for (std::size_t o = 0; o < out; ++o) {
        yp[o] = bias[o];
      }
      for (std::size_t ky = 0; ky < 3; ++ky) {
        const std::ptrdiff_t sh = static_cast<std::ptrdiff_t>(h + ky) - 1;
        if (sh < 0 || sh >= static_cast<std::ptrdiff_t>(height)) {
          continue;
        }
        for (std::size_t kx = 0; kx < 3; ++kx) {
          const std::ptrdiff_t sw = static_cast<std::ptrdiff_t>(w + kx) - 1;
          if (sw < 0 || sw >= static_cast<std::ptrdiff_t>(width)) {
            continue;
          }
          const double* xp = &x.at(static_cast<std::size_t>(sh), static_cast<std::size_t>(sw), 0);
          for (std::size_t o = 0; o < out; ++o) {
            const double* wk = weight + ((o * 3 + ky) * 3 + kx) * in;
            double acc = 0.0;
            for (std::size_t i = 0; i < in; ++i) {
              acc += wk[i] * xp[i];
            }
            yp[o] += acc;
          }
        }
      }
    }
  }
  return y;
}

LayerGradients conv3_backward(const LayerSpec& layer, std::span<const double> params,
                              const Tensor& x, const Tensor& g) {
  const std::size_t in = layer.in_channels;
  const std::size_t out = layer.out_channels;
  const std::size_t height = x.height();
  const std::size_t width = x.width();
  LayerGradients grads{std::vector<double>(params.size(), 0.0), Tensor(height, width, in)};
  double* dw = grads.params.data();
  double* db = grads.params.data() + 9 * in * out;
  const double* weight = params.data();
  for (std::size_t h = 0; h < height; ++h) {
    for (std::size_t w = 0; w < width; ++w) {
      const double* gp = &g.at(h, w, 0);
      for (std::size_t o = 0; o < out; ++o) {
        db[o] += gp[o];
      }
      for (std::size_t ky = 0; ky < 3; ++ky) {
        const std::ptrdiff_t sh = static_cast<std::ptrdiff_t>(h + ky) - 1;
        if (sh < 0 || sh >= static_cast<std::ptrdiff_t>(height)) {
          continue;
        }
        for (std::size_t kx = 0; kx < 3; ++kx) {
          const std::ptrdiff_t sw = static_cast<std::ptrdiff_t>(w + kx) - 1;
          if (sw < 0 || sw >= static_cast<std::ptrdiff_t>(width)) {
            continue;
          }
          const auto uh = static_cast<std::size_t>(sh);
          const auto uw = static_cast<std::size_t>(sw);
          const double* xp = &x.at(uh, uw, 0);
          double* dxp = &grads.input.at(uh, uw, 0);
          for (std::size_t o = 0; o < out; ++o) {
            const double go = gp[o];
            if (go == 0.0) {
              continue;
            }
            const std::size_t k = ((o * 3 + ky) * 3 + kx) * in;
            for (std::size_t i = 0; i < in; ++i) {
              dw[k + i] += go * xp[i];
              dxp[i] += go * weight[k + i];
            }
          }
        }
      }
    }
  }
  return grads;
}

Tensor relu_forward(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.data()) {
    v = v > 0.0 ? v : 0.0;
  }
  return y;
}

LayerGradients relu_backward(const Tensor& x, const Tensor& g) {
  LayerGradients grads{{}, g};
  auto dx = grads.input.data();
  const auto xs = x.data();
  for (std::size_t i = 0; i < dx.size(); ++i) {
    if (!(xs[i] > 0.0)) {
      dx[i] = 0.0;
    }
  }
  return grads;
}

// ---- spectral attention ---------------------------------------------------

struct AttentionCache {
  Tensor q, k, v;
  std::vector<std::vector<double>> maps;  // per head, d x d, row = query
  double scale = 1.0;
};

// y[n, a] = sum_b x[n, b] * w[a, b]
Tensor project(const Tensor& x, const double* w) {
  const std::size_t d = x.depth();
  Tensor y(x.height(), x.width(), d);
  for (std::size_t n = 0; n < x.pixels(); ++n) {
    const double* xp = x.data().data() + n * d;
    double* yp = y.data().data() + n * d;
    for (std::size_t a = 0; a < d; ++a) {
      double acc = 0.0;
      for (std::size_t b = 0; b < d; ++b) {
        acc += w[a * d + b] * xp[b];
      }
      yp[a] = acc;
    }
  }
  return y;
}

// Accumulates dW += dY^T X and dX += dY W for y = project(x, w).
void project_backward(const Tensor& x, const double* w, const Tensor& dy, double* dw, Tensor& dx) {
  const std::size_t d = x.depth();
  for (std::size_t n = 0; n < x.pixels(); ++n) {
    const double* xp = x.data().data() + n * d;
    const double* gp = dy.data().data() + n * d;
    double* dxp = dx.data().data() + n * d;
    for (std::size_t a = 0; a < d; ++a) {
      const double ga = gp[a];
      for (std::size_t b = 0; b < d; ++b) {
        dw[a * d + b] += ga * xp[b];
        dxp[b] += ga * w[a * d + b];
      }
    }
  }
}

void check_heads(const LayerSpec& block) {
  if (block.heads == 0 || block.in_channels % block.heads != 0) {
    throw ShapeError("attention depth " + std::to_string(block.in_channels) +
                     " is not divisible by " + std::to_string(block.heads) + " heads");
  }
}

AttentionCache attention_cache(const LayerSpec& block, std::span<const double> params,
                               const Tensor& x) {
  check_heads(block);
  check_input(block, params, x);
  const std::size_t depth = block.in_channels;
  const std::size_t hd = depth / block.heads;
  const std::size_t n_pix = x.pixels();
  AttentionCache cache;
  cache.q = project(x, params.data());
  cache.k = project(x, params.data() + depth * depth);
  cache.v = project(x, params.data() + 2 * depth * depth);
  cache.scale = 1.0 / std::sqrt(static_cast<double>(n_pix));
  cache.maps.assign(block.heads, std::vector<double>(hd * hd));
  for (std::size_t head = 0; head < block.heads; ++head) {
    const std::size_t off = head * hd;
    auto& p = cache.maps[head];
    for (std::size_t j = 0; j < hd; ++j) {
      for (std::size_t i = 0; i < hd; ++i) {
        double acc = 0.0;
        for (std::size_t n = 0; n < n_pix; ++n) {
          acc += cache.q.data()[n * depth + off + j] * cache.k.data()[n * depth + off + i];
        }
        p[j * hd + i] = cache.scale * acc;
      }
      double* row = p.data() + j * hd;
      const double mx = *std::max_element(row, row + hd);
      double sum = 0.0;
      for (std::size_t i = 0; i < hd; ++i) {
        row[i] = std::exp(row[i] - mx);
        sum += row[i];
      }
      for (std::size_t i = 0; i < hd; ++i) {
        row[i] /= sum;
      }
    }
  }
  return cache;
}

LayerGradients attention_backward(const LayerSpec& block, std::span<const double> params,
                                  const Tensor& x, const Tensor& g) {
  const AttentionCache cache = attention_cache(block, params, x);
  const std::size_t depth = block.in_channels;
  const std::size_t hd = depth / block.heads;
  const std::size_t n_pix = x.pixels();
  Tensor dq(x.height(), x.width(), depth);
  Tensor dk(x.height(), x.width(), depth);
  Tensor dv(x.height(), x.width(), depth);
  const double* gd = g.data().data();
  const double* qd = cache.q.data().data();
  const double* kd = cache.k.data().data();
  const double* vd = cache.v.data().data();
  std::vector<double> dp(hd * hd);
  std::vector<double> ds(hd * hd);
  for (std::size_t head = 0; head < block.heads; ++head) {
    const std::size_t off = head * hd;
    const auto& p = cache.maps[head];
    for (std::size_t j = 0; j < hd; ++j) {
      for (std::size_t i = 0; i < hd; ++i) {
        double acc = 0.0;
        for (std::size_t n = 0; n < n_pix; ++n) {
          acc += gd[n * depth + off + j] * vd[n * depth + off + i];
        }
        dp[j * hd + i] = acc;
      }
    }
    for (std::size_t j = 0; j < hd; ++j) {
      double dot = 0.0;
      for (std::size_t l = 0; l < hd; ++l) {
        dot += p[j * hd + l] * dp[j * hd + l];
      }
      for (std::size_t i = 0; i < hd; ++i) {
        ds[j * hd + i] = p[j * hd + i] * (dp[j * hd + i] - dot);
      }
    }
    for (std::size_t n = 0; n < n_pix; ++n) {
      const double* gn = gd + n * depth + off;
      const double* qn = qd + n * depth + off;
      const double* kn = kd + n * depth + off;
      double* dqn = dq.data().data() + n * depth + off;
      double* dkn = dk.data().data() + n * depth + off;
      double* dvn = dv.data().data() + n * depth + off;
      for (std::size_t j = 0; j < hd; ++j) {
        for (std::size_t i = 0; i < hd; ++i) {
          dvn[i] += p[j * hd + i] * gn[j];
          dqn[j] += cache.scale * ds[j * hd + i] * kn[i];
          dkn[i] += cache.scale * ds[j * hd + i] * qn[j];
        }
      }
    }
  }
  LayerGradients grads{std::vector<double>(params.size(), 0.0), g};  // residual path
  const std::size_t dd = depth * depth;
  project_backward(x, params.data(), dq, grads.params.data(), grads.input);
  project_backward(x, params.data() + dd, dk, grads.params.data() + dd, grads.input);
  project_backward(x, params.data() + 2 * dd, dv, grads.params.data() + 2 * dd, grads.input);
  return grads;
}

}  // namespace

Tensor spectral_attention_forward(const LayerSpec& block, std::span<const double> params,
                                  const Tensor& x) {
  const AttentionCache cache = attention_cache(block, params, x);
  const std::size_t depth = block.in_channels;
  const std::size_t hd = depth / block.heads;
  Tensor y = x;
  for (std::size_t head = 0; head < block.heads; ++head) {
    const std::size_t off = head * hd;
    const auto& p = cache.maps[head];
    for (std::size_t n = 0; n < x.pixels(); ++n) {
      const double* vn = cache.v.data().data() + n * depth + off;
      double* yn = y.data().data() + n * depth + off;
      for (std::size_t j = 0; j < hd; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < hd; ++i) {
          acc += p[j * hd + i] * vn[i];
        }
        yn[j] += acc;
      }
    }
  }
  return y;
}

std::vector<std::vector<double>> spectral_attention_maps(const LayerSpec& block,
                                                         std::span<const double> params,
                                                         const Tensor& x) {
  return attention_cache(block, params, x).maps;
}

Tensor layer_forward(const LayerSpec& layer, std::span<const double> params, const Tensor& x) {
  check_input(layer, params, x);
  switch (layer.kind) {
    case LayerKind::dense:
    case LayerKind::conv1:
      return pointwise_forward(layer, params, x);
    case LayerKind::conv3:
      return conv3_forward(layer, params, x);
    case LayerKind::relu:
      return relu_forward(x);
    case LayerKind::spectral_attention:
      return spectral_attention_forward(layer, params, x);
  }
  throw SpecError("unknown layer kind");
}

LayerGradients layer_backward(const LayerSpec& layer, std::span<const double> params,
                              const Tensor& x, const Tensor& grad_out) {
  check_input(layer, params, x);
  if (grad_out.height() != x.height() || grad_out.width() != x.width() ||
      grad_out.depth() != layer.out_channels) {
    throw ShapeError(std::string(to_string(layer.kind)) + " layer: output gradient shape mismatch");
  }
  switch (layer.kind) {
    case LayerKind::dense:
    case LayerKind::conv1:
      return pointwise_backward(layer, params, x, grad_out);
    case LayerKind::conv3:
      return conv3_backward(layer, params, x, grad_out);
    case LayerKind::relu:
      return relu_backward(x, grad_out);
    case LayerKind::spectral_attention:
      return attention_backward(layer, params, x, grad_out);
  }
  throw SpecError("unknown layer kind");
}

}  // namespace spectrarec::nn
