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

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace sezdet {

/// Which seizure-related period a segment belongs to. For crossing segments
/// `fraction` is the ictal share of the window, (end - onset) / len, in [0, 1].
struct PeriodTag {
  enum class Kind { kInterictal, kIctal, kCrossing, kExcluded };

  Kind kind = Kind::kInterictal;
  double fraction = 0.0;

  static PeriodTag interictal() { return {Kind::kInterictal, 0.0}; }
  static PeriodTag ictal() { return {Kind::kIctal, 1.0}; }
  static PeriodTag excluded() { return {Kind::kExcluded, 0.0}; }
  static PeriodTag crossing(double fraction);

  friend bool operator==(const PeriodTag&, const PeriodTag&) = default;
};

/// Crossing tag for a window ending at `segment_end_s`; the fraction is clamped to [0, 1].
PeriodTag crossing_tag(double segment_end_s, double onset_s, double len_s);

std::string_view to_string(PeriodTag::Kind kind);
PeriodTag::Kind parse_period_kind(std::string_view name);

/// Probability pair [P_interictal, P_ictal]; the two always sum to one.
struct SoftLabel {
  double p_interictal = 1.0;
  double p_ictal = 0.0;

  static SoftLabel from_ictal(double p_ictal) { return {1.0 - p_ictal, p_ictal}; }
};

/// Number of grid steps for crossing labels: p_ictal = 0.05 * p, p = 0..19.
inline constexpr int kCrossingLevels = 20;
inline constexpr double kCrossingStep = 0.05;

/// Grid index p* of a crossing fraction: the smallest p in 0..19 with
/// fraction <= 0.05 p, capped at 19.
int crossing_level(double fraction);

/// Interictal -> [1, 0], ictal -> [0, 1], crossing -> quantized soft label.
/// Throws ConfigError for excluded segments.
SoftLabel label_segment(const PeriodTag& tag);

/// One line of the labeled-dataset manifest (JSON lines).
struct ManifestRecord {
  std::string recording_id;
  double start_s = 0.0;
  PeriodTag::Kind tag = PeriodTag::Kind::kInterictal;
  double p_ictal = 0.0;
};

void write_manifest(const std::filesystem::path& path,
                    const std::vector<ManifestRecord>& records);
std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path);

}  // namespace sezdet
