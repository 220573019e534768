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

#include <cstdint>
#include <vector>

#include "sezdet/signal_io.hpp"

namespace sezdet {

struct ScheduledSeizure {
  double onset_s = 0.0;
  double duration_s = 0.0;
};

/// Interictal background: per-channel AR(2) noise
///   x[n] = a1 x[n-1] + a2 x[n-2] + e[n],
/// scaled to stationary standard deviation `noise_amplitude`. Seizures add a
/// per-channel sinusoid with a random frequency in [band_lo_hz, band_hi_hz]
/// whose amplitude ramps linearly from zero at onset to
/// ictal_gain * noise_amplitude over ramp_s seconds.
struct SynthConfig {
  std::uint64_t seed = 0;
  int channels = 4;
  double rate_hz = 256.0;
  double duration_s = 600.0;
  double ar1 = 1.45;  // poles at 0.95 and 0.5
  double ar2 = -0.475;
  double noise_amplitude = 1.0;
  double band_lo_hz = 3.0;
  double band_hi_hz = 8.0;
  double ramp_s = 2.0;
  double ictal_gain = 3.0;
  std::vector<ScheduledSeizure> seizures;

  void validate() const;
};

Recording generate(const SynthConfig& cfg);

/// Lays out `n_seizures` seizures so that, after removing each seizure and
/// its post-ictal window, exactly `interictal_s` seconds of interictal signal
/// remain. Gaps between seizures are jittered around an even split.
SynthConfig patient_schedule(SynthConfig base, int n_seizures, double interictal_s,
                             double seizure_s, double postictal_s);

}  // namespace sezdet
