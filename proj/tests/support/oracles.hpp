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

// Slow reference computations used only by tests. Nothing here calls into
// the code paths it checks.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// Direct-summation DFT X[k] = sum_j x[j] exp(-2 pi i k j / n_freq) for
/// k = 0..n_bins-1. The signal may be longer or shorter than n_freq.
inline std::vector<std::complex<double>> dft(const std::vector<double>& x, int n_freq,
                                             int n_bins) {
  std::vector<std::complex<double>> out(static_cast<std::size_t>(n_bins));
  for (int k = 0; k < n_bins; ++k) {
    std::complex<double> acc{};
    for (std::size_t j = 0; j < x.size(); ++j) {
      // Reduce k*j mod n_freq in integers to keep the phase exact.
      const auto kj = (static_cast<long long>(k) * static_cast<long long>(j)) % n_freq;
      const double phase = -2.0 * std::numbers::pi * static_cast<double>(kj) / n_freq;
      acc += x[j] * std::complex<double>(std::cos(phase), std::sin(phase));
    }
    out[static_cast<std::size_t>(k)] = acc;
  }
  return out;
}

inline std::vector<double> dft_magnitude(const std::vector<double>& x, int n_freq, int n_bins) {
  const auto X = dft(x, n_freq, n_bins);
  std::vector<double> m;
  for (const auto& v : X) m.push_back(std::abs(v));
  return m;
}

inline double hann(long k, long n) {
  return 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
}

/// Least squares through (x, y) by the 2x2 normal equations, evaluated at x0.
inline double ols_at(const std::vector<double>& x, const std::vector<double>& y, double x0) {
  Eigen::Matrix2d ata = Eigen::Matrix2d::Zero();
  Eigen::Vector2d aty = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Eigen::Vector2d row(x[i], 1.0);
    ata += row * row.transpose();
    aty += row * y[i];
  }
  const Eigen::Vector2d coef = ata.fullPivLu().solve(aty);
  return coef(0) * x0 + coef(1);
}

/// Step-by-step replay of the rectify + accumulate + alarm rule with plain
/// vectors: PIP history of `hist` steps, RPIP window of `win + 1` entries.
struct DecisionSim {
  double r = 10.0, thr = 0.5;
  std::vector<double> lambdas{0.2, 0.3, 0.3, 0.2};
  std::vector<int> lookbacks{50, 30, 10};
  int hist = 50, win = 50;

  std::vector<double> pips, rpips;
  DecisionSim() { reset(); }
  void reset() {
    pips.assign(static_cast<std::size_t>(hist), 0.0);
    rpips.assign(static_cast<std::size_t>(win + 1), 0.0);
  }
  double rectify(double pip) {
    double out = lambdas[3] * pip;
    for (std::size_t i = 0; i < 3; ++i) {
      const int n = lookbacks[i];
      std::vector<double> x, y;
      for (int j = 0; j < n; ++j) {
        x.push_back(static_cast<double>(j - n));
        y.push_back(pips[pips.size() - static_cast<std::size_t>(n) + static_cast<std::size_t>(j)]);
      }
      out += lambdas[i] * ols_at(x, y, 0.0);
    }
    pips.erase(pips.begin());
    pips.push_back(pip);
    return std::min(1.0, std::max(0.0, out));
  }
  double accumulate(double rpip) {
    rpips.erase(rpips.begin());
    rpips.push_back(rpip);
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < rpips.size(); ++i)
      if (rpips[i + 1] > rpips[i]) s += rpips[i + 1];
    return s / r;
  }
  /// Returns the AP and whether the rule alarmed.
  std::pair<double, bool> feed_pip(double pip) {
    const double ap = accumulate(rectify(pip));
    if (ap >= thr) {
      reset();
      return {ap, true};
    }
    return {ap, false};
  }
  std::pair<double, bool> feed_rpip(double rpip) {
    const double ap = accumulate(rpip);
    if (ap >= thr) {
      reset();
      return {ap, true};
    }
    return {ap, false};
  }
};

/// Valid window starts by exhaustive scan: every s with [s, s+len) inside
/// [lo, hi) and s = lo + k*stride.
inline long count_windows(long lo, long hi, long len, long stride) {
  long count = 0;
  for (long s = lo; s < hi; ++s)
    if ((s - lo) % stride == 0 && s + len <= hi) ++count;
  return count;
}

}  // namespace oracle
