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

#include "sezdet/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "sezdet/errors.hpp"

namespace sezdet {
namespace {

constexpr int kBurnIn = 2048;

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Box-Muller on the engine's raw output, so streams do not depend on the
// standard library's distribution implementation.
double standard_normal(std::mt19937_64& rng) {
  double u1 = unit_uniform(rng);
  while (u1 <= 0.0) u1 = unit_uniform(rng);
  const double u2 = unit_uniform(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

// Stationary variance of AR(2) driven by unit-variance innovations.
double ar2_variance(double a1, double a2) {
  return (1.0 - a2) / ((1.0 + a2) * ((1.0 - a2) * (1.0 - a2) - a1 * a1));
}

}  // namespace

void SynthConfig::validate() const {
  if (channels < 1) throw ConfigError("synth: channels must be >= 1");
  if (!(rate_hz > 0.0)) throw ConfigError("synth: rate must be positive");
  if (!(duration_s > 0.0)) throw ConfigError("synth: duration must be positive");
  // AR(2) stationarity triangle.
  if (!(std::abs(ar2) < 1.0 && ar2 + ar1 < 1.0 && ar2 - ar1 < 1.0))
    throw ConfigError("synth: AR(2) coefficients are not stationary");
  if (!(noise_amplitude > 0.0)) throw ConfigError("synth: noise amplitude must be positive");
  if (!(band_lo_hz > 0.0 && band_hi_hz >= band_lo_hz && band_hi_hz < rate_hz / 2))
    throw ConfigError("synth: ictal band must lie in (0, Nyquist)");
  if (ramp_s < 0.0) throw ConfigError("synth: ramp duration must be >= 0");
  double previous_end = 0.0;
  for (const auto& s : seizures) {
    if (!(s.duration_s > 0.0)) throw ConfigError("synth: seizure duration must be positive");
    if (s.onset_s < previous_end) throw ConfigError("synth: seizures overlap or are unsorted");
    if (s.onset_s + s.duration_s > duration_s)
      throw ConfigError("synth: seizure extends past the recording end");
    if (ramp_s > s.duration_s) throw ConfigError("synth: ramp longer than a seizure");
    previous_end = s.onset_s + s.duration_s;
  }
}

Recording generate(const SynthConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<Eigen::Index>(std::llround(cfg.duration_s * cfg.rate_hz));
  Recording rec;
  rec.rate_hz = cfg.rate_hz;
  rec.samples.resize(cfg.channels, n);
  const double innovation = cfg.noise_amplitude / std::sqrt(ar2_variance(cfg.ar1, cfg.ar2));

  for (int c = 0; c < cfg.channels; ++c) {
    auto rng = substream(cfg.seed, static_cast<std::uint64_t>(c));
    double x1 = 0.0, x2 = 0.0;
    for (int i = 0; i < kBurnIn; ++i) {
      const double x = cfg.ar1 * x1 + cfg.ar2 * x2 + innovation * standard_normal(rng);
      x2 = x1;
      x1 = x;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = cfg.ar1 * x1 + cfg.ar2 * x2 + innovation * standard_normal(rng);
      x2 = x1;
      x1 = x;
      rec.samples(c, i) = x;
    }
  }

  const double peak = cfg.ictal_gain * cfg.noise_amplitude;
  for (std::size_t k = 0; k < cfg.seizures.size(); ++k) {
    const auto& s = cfg.seizures[k];
    rec.annotations.push_back({s.onset_s, s.onset_s + s.duration_s});
    auto rng = substream(cfg.seed, 0x5E12000000ull + k);
    const auto first = static_cast<Eigen::Index>(std::ceil(s.onset_s * cfg.rate_hz));
    const auto last = std::min<Eigen::Index>(
        n, static_cast<Eigen::Index>(std::ceil((s.onset_s + s.duration_s) * cfg.rate_hz)));
    for (int c = 0; c < cfg.channels; ++c) {
      const double freq = cfg.band_lo_hz + (cfg.band_hi_hz - cfg.band_lo_hz) * unit_uniform(rng);
      const double phase = 2.0 * std::numbers::pi * unit_uniform(rng);
      for (Eigen::Index i = first; i < last; ++i) {
        const double t = static_cast<double>(i) / cfg.rate_hz - s.onset_s;
        const double ramp = cfg.ramp_s > 0.0 ? std::min(1.0, t / cfg.ramp_s) : 1.0;
        rec.samples(c, i) += peak * ramp * std::sin(2.0 * std::numbers::pi * freq * t + phase);
      }
    }
  }
  return rec;
}

SynthConfig patient_schedule(SynthConfig base, int n_seizures, double interictal_s,
                             double seizure_s, double postictal_s) {
  if (n_seizures < 0) throw ConfigError("synth: seizure count must be >= 0");
  if (!(interictal_s > 0.0)) throw ConfigError("synth: interictal duration must be positive");
  base.seizures.clear();
  const int gaps = n_seizures + 1;
  auto rng = substream(base.seed, 0x5C4ED000ull);
  std::vector<double> weights(static_cast<std::size_t>(gaps));
  double total = 0.0;
  for (auto& w : weights) {
    w = 0.75 + 0.5 * unit_uniform(rng);
    total += w;
  }
  // Work on a whole-sample grid so the annotations land on sample boundaries.
  auto snap = [&](double t) { return std::round(t * base.rate_hz) / base.rate_hz; };
  double t = 0.0;
  for (int k = 0; k < n_seizures; ++k) {
    t = snap(t + interictal_s * weights[static_cast<std::size_t>(k)] / total);
    base.seizures.push_back({t, seizure_s});
    t += seizure_s + postictal_s;
  }
  // The last gap absorbs the rounding so the interictal total is exact.
  double used = 0.0, cursor = 0.0;
  for (const auto& s : base.seizures) {
    used += s.onset_s - cursor;
    cursor = s.onset_s + seizure_s + postictal_s;
  }
  base.duration_s = cursor + (interictal_s - used);
  return base;
}

}  // namespace sezdet
