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

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "sezdet/errors.hpp"
#include "sezdet/spectral.hpp"

using namespace sezdet;

namespace {

Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// Frame m of scale `scale` for one channel, tapered by the oracle's Hann.
std::vector<double> oracle_frame(const Eigen::VectorXd& x, Eigen::Index padded, int scale,
                                 Eigen::Index m, bool hann) {
  const Eigen::Index wl = padded >> (scale - 1), hop = wl / 2;
  std::vector<double> frame(static_cast<std::size_t>(wl), 0.0);
  for (Eigen::Index k = 0; k < wl; ++k) {
    const Eigen::Index idx = m * hop + k;
    const double v = idx < x.size() ? x(idx) : 0.0;
    frame[static_cast<std::size_t>(k)] = (hann ? oracle::hann(k, wl) : 1.0) * v;
  }
  return frame;
}

}  // namespace

TEST_CASE("fft_magnitude of zeros is zero") {
  const auto mag = fft_magnitude(Eigen::VectorXd::Zero(64));
  CHECK(mag.size() == 32);
  CHECK(mag.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("a cosine at bin 5 concentrates in bin 5") {
  Eigen::VectorXd x(64);
  for (int j = 0; j < 64; ++j) x(j) = std::cos(2.0 * std::numbers::pi * 5.0 * j / 64.0);
  const auto mag = fft_magnitude(x);
  CHECK(mag(5) == doctest::Approx(32.0).epsilon(1e-12));
  for (int k = 0; k < 32; ++k)
    if (k != 5) CHECK(mag(k) < 1e-9);
}

TEST_CASE("fft_magnitude matches direct summation") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    for (int n : {2, 4, 8, 64, 128}) {
      const auto x = random_vector(n, rng);
      const auto mag = fft_magnitude(x);
      const auto ref = oracle::dft_magnitude(to_std(x), n, n / 2);
      for (int k = 0; k < n / 2; ++k) REQUIRE(std::abs(mag(k) - ref[static_cast<std::size_t>(k)]) < 1e-9);
    }
  }
}

TEST_CASE("non-power-of-two lengths are rejected") {
  CHECK_THROWS_AS(fft_magnitude(Eigen::VectorXd::Zero(48)), ConfigError);
  CHECK_THROWS_AS(fft_magnitude(Eigen::VectorXd::Zero(0)), ConfigError);
}

TEST_CASE("magnitude is positively homogeneous") {
  std::mt19937_64 rng(12);
  const auto x = random_vector(64, rng);
  const auto base = fft_magnitude(x);
  for (double a : {0.0, 0.5, 3.0, 1e6}) {
    const auto scaled = fft_magnitude(Eigen::VectorXd(a * x));
    CHECK((scaled - a * base).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, a));
  }
}

TEST_CASE("Parseval on the full transform") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = random_vector(64, rng);
    std::vector<std::complex<double>> buf(x.data(), x.data() + 64);
    fft_inplace<double>(buf);
    double lhs = x.squaredNorm(), rhs = 0.0;
    for (const auto& c : buf) rhs += std::norm(c);
    rhs /= 64.0;
    CHECK(std::abs(lhs - rhs) <= 1e-9 * lhs);
  }
}

TEST_CASE("window-count law for scales 1..8") {
  std::mt19937_64 rng(14);
  for (int scale = 1; scale <= 8; ++scale) {
    SpectralConfig cfg;
    cfg.scales = {scale};
    for (Eigen::Index mult : {1, 2, 3, 5}) {
      const Eigen::Index length = 2 * scale * mult * (Eigen::Index{1} << scale);
      Eigen::MatrixXd seg = random_vector(length, rng).transpose();
      const auto spec = multiscale_stft(seg, cfg);
      REQUIRE(spec.per_scale.size() == 1);
      CHECK(spec.per_scale[0].dimension(0) == 1);
      CHECK(spec.per_scale[0].dimension(1) == 32);
      CHECK(spec.per_scale[0].dimension(2) == (Eigen::Index{1} << scale) - 1);
    }
  }
}

TEST_CASE("scale 3 has seven time steps") {
  Eigen::MatrixXd seg = Eigen::MatrixXd::Ones(4, 1280);
  SpectralConfig cfg;
  const auto spec = multiscale_stft(seg, cfg);
  CHECK(spec.per_scale[2].dimension(2) == 7);
}

TEST_CASE("zero segment gives zero tensors") {
  const auto spec = segment_features(Eigen::MatrixXd::Zero(3, 640), SpectralConfig{});
  for (const auto& t : spec.per_scale) {
    const Eigen::Tensor<double, 0, Eigen::RowMajor> m = t.abs().maximum();
    CHECK(m() == 0.0);
  }
}

TEST_CASE("scale 1 equals the full-length DFT sampled every 20th bin") {
  // A 1280-sample frame folded onto 64 points evaluates the length-1280 DFT
  // at k = 20 q.
  std::mt19937_64 rng(15);
  for (bool hann : {false, true}) {
    const auto x = random_vector(1280, rng);
    SpectralConfig cfg;
    cfg.scales = {1};
    cfg.window = hann ? WindowFunction::kHann : WindowFunction::kRectangular;
    const auto spec = multiscale_stft(Eigen::MatrixXd(x.transpose()), cfg);
    const auto frame = oracle_frame(x, 1280, 1, 0, hann);
    const auto full = oracle::dft(frame, 1280, 1280);
    for (int q = 0; q < 32; ++q)
      CHECK(std::abs(spec.per_scale[0](0, q, 0) - std::abs(full[static_cast<std::size_t>(20 * q)])) <
            1e-9);
  }
}

TEST_CASE("multiscale STFT matches the direct oracle for every frame") {
  std::mt19937_64 rng(16);
  for (Eigen::Index len : {64, 320, 1000, 1280}) {
    Eigen::MatrixXd seg(2, len);
    for (int c = 0; c < 2; ++c) seg.row(c) = random_vector(len, rng).transpose();
    const SpectralConfig cfg;
    const auto spec = multiscale_stft(seg, cfg);
    const Eigen::Index padded = (len + 31) / 32 * 32;
    for (std::size_t s = 0; s < cfg.scales.size(); ++s) {
      const int scale = cfg.scales[s];
      for (int c = 0; c < 2; ++c) {
        const Eigen::VectorXd x = seg.row(c).transpose();
        for (Eigen::Index m = 0; m < (Eigen::Index{1} << scale) - 1; ++m) {
          const auto frame = oracle_frame(x, padded, scale, m, true);
          const auto ref = oracle::dft_magnitude(frame, 64, 32);
          for (int b = 0; b < 32; ++b)
            REQUIRE(std::abs(spec.per_scale[s](c, b, m) - ref[static_cast<std::size_t>(b)]) < 1e-9);
        }
      }
    }
  }
}

TEST_CASE("short segments are padded up to the largest scale; empty ones are rejected") {
  SpectralConfig cfg;
  cfg.scales = {1, 2, 3, 4, 5};
  CHECK_THROWS_AS(multiscale_stft(Eigen::MatrixXd::Zero(1, 0), cfg), ConfigError);
  const auto spec = multiscale_stft(Eigen::MatrixXd::Ones(1, 16), cfg);
  CHECK(spec.per_scale.back().dimension(2) == 31);
}

TEST_CASE("spectral config validation") {
  SpectralConfig cfg;
  cfg.nfft = 48;
  cfg.kept_bins = 24;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.kept_bins = 16;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.scales = {2, 1};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("freq_norm on single vectors") {
  MultiscaleSpectrogram spec;
  spec.scales = {1};
  Tensor3<double> t(2, 3, 1);
  t(0, 0, 0) = 2;
  t(0, 1, 0) = 4;
  t(0, 2, 0) = 6;
  t(1, 0, 0) = 3;
  t(1, 1, 0) = 3;
  t(1, 2, 0) = 3;
  spec.per_scale.push_back(t);
  const auto out = freq_norm(spec);
  CHECK(out.per_scale[0](0, 0, 0) == 0.0);
  CHECK(out.per_scale[0](0, 1, 0) == 0.5);
  CHECK(out.per_scale[0](0, 2, 0) == 1.0);
  for (int b = 0; b < 3; ++b) CHECK(out.per_scale[0](1, b, 0) == 0.0);
}

TEST_CASE("freq_norm equals a naive per-slice oracle, is bounded and idempotent") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  MultiscaleSpectrogram spec;
  spec.scales = {1, 2};
  for (int frames : {1, 3}) {
    Tensor3<double> t(3, 32, frames);
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = u(rng);
    spec.per_scale.push_back(t);
  }
  const auto out = freq_norm(spec);
  for (std::size_t s = 0; s < 2; ++s) {
    const auto& in = spec.per_scale[s];
    for (Eigen::Index c = 0; c < 3; ++c)
      for (Eigen::Index m = 0; m < in.dimension(2); ++m) {
        std::vector<double> v;
        for (Eigen::Index b = 0; b < 32; ++b) v.push_back(in(c, b, m));
        const double lo = *std::min_element(v.begin(), v.end());
        const double hi = *std::max_element(v.begin(), v.end());
        for (Eigen::Index b = 0; b < 32; ++b) {
          const double got = out.per_scale[s](c, b, m);
          CHECK(got == (v[static_cast<std::size_t>(b)] - lo) / (hi - lo));
          CHECK(got >= 0.0);
          CHECK(got <= 1.0);
        }
      }
  }
  const auto twice = freq_norm(out);
  for (std::size_t s = 0; s < 2; ++s)
    for (Eigen::Index i = 0; i < out.per_scale[s].size(); ++i)
      CHECK(std::abs(twice.per_scale[s].data()[i] - out.per_scale[s].data()[i]) < 1e-15);
}
