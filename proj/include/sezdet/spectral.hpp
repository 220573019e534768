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

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/CXX11/Tensor>

#include "sezdet/errors.hpp"

namespace sezdet {

enum class WindowFunction { kHann, kRectangular };

struct SpectralConfig {
  std::vector<int> scales{1, 2, 3, 4, 5};
  int nfft = 64;
  int kept_bins = 32;
  WindowFunction window = WindowFunction::kHann;

  void validate() const {
    if (scales.empty()) throw ConfigError("spectral: at least one scale required");
    if (!std::is_sorted(scales.begin(), scales.end()) ||
        std::adjacent_find(scales.begin(), scales.end()) != scales.end())
      throw ConfigError("spectral: scales must be strictly ascending");
    if (scales.front() < 1 || scales.back() > 20)
      throw ConfigError("spectral: scales must lie in 1..20");
    if (nfft < 2 || !std::has_single_bit(static_cast<unsigned>(nfft)))
      throw ConfigError("spectral: nfft must be a power of two");
    if (kept_bins != nfft / 2) throw ConfigError("spectral: kept_bins must equal nfft/2");
  }

  int max_scale() const { return scales.back(); }
};

/// Channel x frequency x time, time innermost.
template <typename Scalar>
using Tensor3 = Eigen::Tensor<Scalar, 3, Eigen::RowMajor>;

template <typename Scalar>
struct MultiscaleSpectrogramT {
  std::vector<int> scales;
  std::vector<Tensor3<Scalar>> per_scale;
};
using MultiscaleSpectrogram = MultiscaleSpectrogramT<double>;

/// Number of STFT windows at scale n: 2^n - 1.
constexpr Eigen::Index window_count(int scale) { return (Eigen::Index{1} << scale) - 1; }

/// Right-padded signal length: the next multiple of 2^max_scale.
inline Eigen::Index padded_length(Eigen::Index length, int max_scale) {
  const Eigen::Index block = Eigen::Index{1} << max_scale;
  return (length + block - 1) / block * block;
}

/// Window length at scale n for a padded signal of `length` samples. Halving
/// the window per scale with a half-window hop yields 2^n - 1 frames.
inline Eigen::Index window_length(Eigen::Index length, int scale) {
  return length >> (scale - 1);
}

template <typename Scalar>
Scalar taper(WindowFunction fn, Eigen::Index k, Eigen::Index length) {
  if (fn == WindowFunction::kRectangular) return Scalar(1);
  // Periodic Hann.
  const Scalar phase = Scalar(2) * std::numbers::pi_v<Scalar> * Scalar(k) / Scalar(length);
  return Scalar(0.5) - Scalar(0.5) * std::cos(phase);
}

/// In-place iterative radix-2 decimation-in-time FFT.
template <typename Scalar>
void fft_inplace(std::span<std::complex<Scalar>> x) {
  const std::size_t n = x.size();
  if (n == 0 || !std::has_single_bit(n)) throw ConfigError("fft: length must be a power of two");

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const Scalar angle = -Scalar(2) * std::numbers::pi_v<Scalar> / Scalar(len);
    const std::size_t half = len / 2;
    for (std::size_t k = 0; k < half; ++k) {
      // Twiddles straight from cos/sin; a running product drifts by ~1e-14 at n=64.
      const std::complex<Scalar> w(std::cos(angle * Scalar(k)), std::sin(angle * Scalar(k)));
      for (std::size_t i = k; i < n; i += len) {
        const auto t = w * x[i + half];
        x[i + half] = x[i] - t;
        x[i] += t;
      }
    }
  }
}

/// |DFT| of a real frame, bins 0 .. n/2 - 1.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> fft_magnitude(
    const Eigen::MatrixBase<Derived>& signal) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = signal.size();
  std::vector<std::complex<Scalar>> buf(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) buf[i] = signal(i);
  fft_inplace<Scalar>(buf);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> mag(n / 2);
  for (Eigen::Index i = 0; i < n / 2; ++i) mag(i) = std::abs(buf[i]);
  return mag;
}

/// Multiscale STFT magnitudes of a channels x samples segment (before FreqNorm).
///
/// Each frame is tapered, folded onto nfft samples by summing consecutive
/// nfft-sample blocks (frames shorter than nfft are zero-padded), then
/// transformed. The result is the frame's DFT sampled at nfft equispaced
/// frequencies; the first kept_bins magnitudes are retained.
template <typename Derived>
MultiscaleSpectrogramT<typename Derived::Scalar> multiscale_stft(
    const Eigen::MatrixBase<Derived>& segment, const SpectralConfig& cfg) {
  using Scalar = typename Derived::Scalar;
  cfg.validate();
  const Eigen::Index channels = segment.rows();
  const Eigen::Index length = padded_length(segment.cols(), cfg.max_scale());
  if (window_length(length, cfg.max_scale()) < 2)
    throw ConfigError("multiscale_stft: segment too short for the largest scale");

  MultiscaleSpectrogramT<Scalar> out;
  out.scales = cfg.scales;
  const auto nfft = static_cast<std::size_t>(cfg.nfft);
  std::vector<std::complex<Scalar>> frame(nfft);
  std::vector<Scalar> weights;

  for (int scale : cfg.scales) {
    const Eigen::Index wl = window_length(length, scale);
    const Eigen::Index hop = wl / 2;
    const Eigen::Index frames = window_count(scale);
    weights.resize(static_cast<std::size_t>(wl));
    for (Eigen::Index k = 0; k < wl; ++k) weights[k] = taper<Scalar>(cfg.window, k, wl);

    Tensor3<Scalar> spec(channels, cfg.kept_bins, frames);
    for (Eigen::Index c = 0; c < channels; ++c) {
      for (Eigen::Index m = 0; m < frames; ++m) {
        std::fill(frame.begin(), frame.end(), std::complex<Scalar>{});
        const Eigen::Index begin = m * hop;
        for (Eigen::Index k = 0; k < wl; ++k) {
          const Eigen::Index idx = begin + k;
          if (idx >= segment.cols()) break;  // zero padding
          frame[static_cast<std::size_t>(k) % nfft] += weights[k] * segment(c, idx);
        }
        fft_inplace<Scalar>(frame);
        for (Eigen::Index b = 0; b < cfg.kept_bins; ++b) spec(c, b, m) = std::abs(frame[b]);
      }
    }
    out.per_scale.push_back(std::move(spec));
  }
  return out;
}

/// Min-max normalizes every frequency vector (fixed channel and time step) to
/// [0, 1]; constant vectors become zero.
template <typename Scalar>
MultiscaleSpectrogramT<Scalar> freq_norm(MultiscaleSpectrogramT<Scalar> spec) {
  for (auto& t : spec.per_scale) {
    const Eigen::Index channels = t.dimension(0), bins = t.dimension(1), frames = t.dimension(2);
    for (Eigen::Index c = 0; c < channels; ++c) {
      for (Eigen::Index m = 0; m < frames; ++m) {
        Scalar lo = t(c, 0, m), hi = t(c, 0, m);
        for (Eigen::Index b = 1; b < bins; ++b) {
          lo = std::min(lo, t(c, b, m));
          hi = std::max(hi, t(c, b, m));
        }
        const Scalar range = hi - lo;
        for (Eigen::Index b = 0; b < bins; ++b)
          t(c, b, m) = range > Scalar(0) ? (t(c, b, m) - lo) / range : Scalar(0);
      }
    }
  }
  return spec;
}

/// FreqNorm'd multiscale features of one segment: the model input.
template <typename Derived>
MultiscaleSpectrogramT<typename Derived::Scalar> segment_features(
    const Eigen::MatrixBase<Derived>& segment, const SpectralConfig& cfg) {
  return freq_norm(multiscale_stft(segment, cfg));
}

}  // namespace sezdet
