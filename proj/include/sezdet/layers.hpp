// Copyright 2026 The sezdet Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Forward and backward kernels for the network's building blocks. Feature
// maps are (maps, H, W, D) row-major tensors; 2D layers are the D = 1 case.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/CXX11/Tensor>

#include "sezdet/errors.hpp"

namespace sezdet {

template <typename Scalar>
using FeatureMaps = Eigen::Tensor<Scalar, 4, Eigen::RowMajor>;

struct Extent3 {
  Eigen::Index h = 1, w = 1, d = 1;
  Eigen::Index volume() const { return h * w * d; }
  friend bool operator==(const Extent3&, const Extent3&) = default;
};

/// Odd kernel sizes; "same" zero padding of k/2 on each side.
struct Kernel3 {
  int h = 3, w = 3, d = 1;
  Eigen::Index volume() const { return Eigen::Index{h} * w * d; }
};

/// Pool sizes; clipped per dimension to the input extent.
struct Pool3 {
  int h = 2, w = 2, d = 1;
};

/// Output extent of a clipped floor-mode max pool. Never zero.
inline Extent3 pooled_extent(const Extent3& in, const Pool3& p) {
  auto one = [](Eigen::Index extent, int pool) {
    const Eigen::Index eff = std::min<Eigen::Index>(pool, extent);
    return extent / eff;
  };
  return {one(in.h, p.h), one(in.w, p.w), one(in.d, p.d)};
}

inline Pool3 effective_pool(const Extent3& in, const Pool3& p) {
  return {static_cast<int>(std::min<Eigen::Index>(p.h, in.h)),
          static_cast<int>(std::min<Eigen::Index>(p.w, in.w)),
          static_cast<int>(std::min<Eigen::Index>(p.d, in.d))};
}

inline Extent3 extent_of(const auto& maps) {
  return {maps.dimension(1), maps.dimension(2), maps.dimension(3)};
}

namespace detail {

// Valid output range [lo, hi) for a kernel tap at `offset` (= tap - pad).
inline void tap_range(Eigen::Index extent, Eigen::Index offset, Eigen::Index& lo,
                      Eigen::Index& hi) {
  lo = std::max<Eigen::Index>(0, -offset);
  hi = std::min<Eigen::Index>(extent, extent - offset);
}

}  // namespace detail

/// Same-padded 3D convolution. `kernel` is (out, in, kh, kw, kd) row-major,
/// `bias` has `out_maps` entries.
template <typename Scalar>
void conv3d_forward(const FeatureMaps<Scalar>& in, const Scalar* kernel, const Scalar* bias,
                    Eigen::Index out_maps, const Kernel3& k, FeatureMaps<Scalar>& out) {
  const Eigen::Index cin = in.dimension(0);
  const Extent3 e = extent_of(in);
  out.resize(out_maps, e.h, e.w, e.d);
  const Scalar* x = in.data();
  Scalar* y = out.data();
  const Eigen::Index plane = e.w * e.d, vol = e.volume();
  const int ph = k.h / 2, pw = k.w / 2, pd = k.d / 2;

  for (Eigen::Index co = 0; co < out_maps; ++co) {
    Scalar* yo = y + co * vol;
    std::fill(yo, yo + vol, bias[co]);
    for (Eigen::Index ci = 0; ci < cin; ++ci) {
      const Scalar* xi = x + ci * vol;
      const Scalar* kk = kernel + (co * cin + ci) * k.volume();
      for (int i = 0; i < k.h; ++i) {
        Eigen::Index h0, h1;
        detail::tap_range(e.h, i - ph, h0, h1);
        for (int j = 0; j < k.w; ++j) {
          Eigen::Index w0, w1;
          detail::tap_range(e.w, j - pw, w0, w1);
          for (int l = 0; l < k.d; ++l) {
            Eigen::Index d0, d1;
            detail::tap_range(e.d, l - pd, d0, d1);
            const Scalar kv = kk[(i * k.w + j) * k.d + l];
            const Eigen::Index shift = (i - ph) * plane + (j - pw) * e.d + (l - pd);
            for (Eigen::Index h = h0; h < h1; ++h) {
              for (Eigen::Index w = w0; w < w1; ++w) {
                const Eigen::Index row = h * plane + w * e.d;
                Scalar* yr = yo + row;
                const Scalar* xr = xi + row + shift;
                for (Eigen::Index d = d0; d < d1; ++d) yr[d] += kv * xr[d];
              }
            }
          }
        }
      }
    }
  }
}

/// Accumulates kernel/bias gradients into `d_kernel`/`d_bias`; writes the
/// input gradient into `d_in` unless it is null.
template <typename Scalar>
void conv3d_backward(const FeatureMaps<Scalar>& in, const Scalar* kernel,
                     const FeatureMaps<Scalar>& d_out, const Kernel3& k, Scalar* d_kernel,
                     Scalar* d_bias, FeatureMaps<Scalar>* d_in) {
  const Eigen::Index cin = in.dimension(0), cout = d_out.dimension(0);
  const Extent3 e = extent_of(in);
  const Eigen::Index plane = e.w * e.d, vol = e.volume();
  const int ph = k.h / 2, pw = k.w / 2, pd = k.d / 2;
  const Scalar* x = in.data();
  const Scalar* g = d_out.data();
  Scalar* dx = nullptr;
  if (d_in) {
    d_in->resize(cin, e.h, e.w, e.d);
    d_in->setZero();
    dx = d_in->data();
  }

  for (Eigen::Index co = 0; co < cout; ++co) {
    const Scalar* go = g + co * vol;
    Scalar sum = 0;
    for (Eigen::Index t = 0; t < vol; ++t) sum += go[t];
    d_bias[co] += sum;
    for (Eigen::Index ci = 0; ci < cin; ++ci) {
      const Scalar* xi = x + ci * vol;
      Scalar* dxi = dx ? dx + ci * vol : nullptr;
      const Eigen::Index koff = (co * cin + ci) * k.volume();
      for (int i = 0; i < k.h; ++i) {
        Eigen::Index h0, h1;
        detail::tap_range(e.h, i - ph, h0, h1);
        for (int j = 0; j < k.w; ++j) {
          Eigen::Index w0, w1;
          detail::tap_range(e.w, j - pw, w0, w1);
          for (int l = 0; l < k.d; ++l) {
            Eigen::Index d0, d1;
            detail::tap_range(e.d, l - pd, d0, d1);
            const Eigen::Index tap = koff + (i * k.w + j) * k.d + l;
            const Scalar kv = kernel[tap];
            const Eigen::Index shift = (i - ph) * plane + (j - pw) * e.d + (l - pd);
            Scalar acc = 0;
            for (Eigen::Index h = h0; h < h1; ++h) {
              for (Eigen::Index w = w0; w < w1; ++w) {
                const Eigen::Index row = h * plane + w * e.d;
                const Scalar* gr = go + row;
                const Scalar* xr = xi + row + shift;
                for (Eigen::Index d = d0; d < d1; ++d) acc += gr[d] * xr[d];
                if (dxi) {
                  Scalar* dxr = dxi + row + shift;
                  for (Eigen::Index d = d0; d < d1; ++d) dxr[d] += kv * gr[d];
                }
              }
            }
            d_kernel[tap] += acc;
          }
        }
      }
    }
  }
}

/// Clipped max pool; `argmax` receives the flat input index of each output.
template <typename Scalar>
void maxpool3d_forward(const FeatureMaps<Scalar>& in, const Pool3& pool, FeatureMaps<Scalar>& out,
                       std::vector<Eigen::Index>& argmax) {
  const Eigen::Index maps = in.dimension(0);
  const Extent3 e = extent_of(in);
  const Pool3 p = effective_pool(e, pool);
  const Extent3 o = pooled_extent(e, pool);
  out.resize(maps, o.h, o.w, o.d);
  argmax.resize(static_cast<std::size_t>(out.size()));
  const Scalar* x = in.data();
  Scalar* y = out.data();
  Eigen::Index t = 0;
  for (Eigen::Index c = 0; c < maps; ++c) {
    for (Eigen::Index h = 0; h < o.h; ++h) {
      for (Eigen::Index w = 0; w < o.w; ++w) {
        for (Eigen::Index d = 0; d < o.d; ++d, ++t) {
          Eigen::Index best = -1;
          Scalar best_v = 0;
          for (int i = 0; i < p.h; ++i)
            for (int j = 0; j < p.w; ++j)
              for (int l = 0; l < p.d; ++l) {
                const Eigen::Index idx =
                    ((c * e.h + h * p.h + i) * e.w + w * p.w + j) * e.d + d * p.d + l;
                if (best < 0 || x[idx] > best_v) {
                  best = idx;
                  best_v = x[idx];
                }
              }
          y[t] = best_v;
          argmax[static_cast<std::size_t>(t)] = best;
        }
      }
    }
  }
}

template <typename Scalar>
void maxpool3d_backward(const FeatureMaps<Scalar>& d_out, const std::vector<Eigen::Index>& argmax,
                        const Eigen::array<Eigen::Index, 4>& in_dims, FeatureMaps<Scalar>& d_in) {
  d_in.resize(in_dims);
  d_in.setZero();
  const Scalar* g = d_out.data();
  Scalar* dx = d_in.data();
  for (std::size_t t = 0; t < argmax.size(); ++t) dx[argmax[t]] += g[t];
}

template <typename Scalar>
void relu_inplace(Scalar* x, Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i) x[i] = std::max(x[i], Scalar(0));
}

/// Masks `grad` by the ReLU output `activated` (> 0 means the unit was live).
template <typename Scalar>
void relu_backward_inplace(const Scalar* activated, Scalar* grad, Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(activated[i] > Scalar(0))) grad[i] = Scalar(0);
}

template <typename Scalar>
Scalar sigmoid(Scalar z) {
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-z));
  const Scalar ez = std::exp(z);
  return ez / (Scalar(1) + ez);
}

/// Row-major (out x in) weight matrix view over a flat parameter block.
template <typename Scalar>
using DenseWeights = Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename Scalar>
using DenseWeightsMut = Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
Vec<Scalar> dense_forward(const Vec<Scalar>& x, const Scalar* weights, const Scalar* bias,
                          Eigen::Index out) {
  const DenseWeights<Scalar> W(weights, out, x.size());
  return W * x + Eigen::Map<const Vec<Scalar>>(bias, out);
}

/// Accumulates dW += dy x^T and db += dy; returns dx = W^T dy.
template <typename Scalar>
Vec<Scalar> dense_backward(const Vec<Scalar>& x, const Scalar* weights, const Vec<Scalar>& dy,
                           Scalar* d_weights, Scalar* d_bias) {
  const Eigen::Index out = dy.size(), in = x.size();
  DenseWeightsMut<Scalar>(d_weights, out, in).noalias() += dy * x.transpose();
  Eigen::Map<Vec<Scalar>>(d_bias, out) += dy;
  return DenseWeights<Scalar>(weights, out, in).transpose() * dy;
}

}  // namespace sezdet
