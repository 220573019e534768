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
#include <vector>

#include <Eigen/Dense>

#include "sezdet/labeling.hpp"

namespace sezdet {

/// Annotated seizure, in seconds from the start of the recording.
struct SeizureSpan {
  double onset_s = 0.0;
  double offset_s = 0.0;
};

/// Multichannel recording. `samples` is channels x n_samples.
struct Recording {
  double rate_hz = 0.0;
  Eigen::MatrixXd samples;
  std::vector<SeizureSpan> annotations;

  Eigen::Index channels() const { return samples.rows(); }
  Eigen::Index n_samples() const { return samples.cols(); }
  double duration_s() const { return static_cast<double>(n_samples()) / rate_hz; }
};

/// Throws DataError if any Recording invariant is violated.
void validate(const Recording& rec);

/// Companion payload of a header file: same stem, ".f32" extension.
std::filesystem::path payload_path(const std::filesystem::path& header);

/// Reads the JSON header plus its float32 little-endian, frame-interleaved payload.
Recording load_recording(const std::filesystem::path& header);
void save_recording(const Recording& rec, const std::filesystem::path& header);

/// Window of a recording: `length` samples starting at `start`.
struct SegmentSpan {
  Eigen::Index start = 0;
  Eigen::Index length = 0;
  double start_s = 0.0;
  double len_s = 0.0;
};

struct TaggedSegment {
  SegmentSpan span;
  PeriodTag tag;
};

/// Materialized segment (channels x L_signal).
struct Segment {
  Eigen::MatrixXd data;
  double start_s = 0.0;
  double len_s = 0.0;
};

inline auto segment_view(const Recording& rec, const SegmentSpan& span) {
  return rec.samples.middleCols(span.start, span.length);
}

Segment materialize(const Recording& rec, const SegmentSpan& span);

/// Step between consecutive window starts, resolved against a segment length.
struct Stride {
  enum class Kind {
    kNoOverlap,   // stride = segment length
    kOverlap80,   // stride = 20% of the segment length
    kPointwise,   // stride = one sample
    kSamples,     // explicit sample count
  };
  Kind kind = Kind::kNoOverlap;
  Eigen::Index samples = 0;

  static Stride no_overlap() { return {Kind::kNoOverlap, 0}; }
  static Stride overlap80() { return {Kind::kOverlap80, 0}; }
  static Stride pointwise() { return {Kind::kPointwise, 0}; }
  static Stride of_samples(Eigen::Index n) { return {Kind::kSamples, n}; }

  Eigen::Index resolve(Eigen::Index segment_len) const;
};

struct OverlapPolicy {
  Stride interictal = Stride::no_overlap();
  Stride ictal = Stride::overlap80();
  Stride crossing = Stride::pointwise();
  double postictal_exclusion_s = 1800.0;

  /// Interictal without overlap, ictal at 80% overlap, crossing point-wise, 30 min exclusion.
  static OverlapPolicy chb() { return {}; }
  /// All periods at 80% overlap, 3 min exclusion.
  static OverlapPolicy swec() {
    return {Stride::overlap80(), Stride::overlap80(), Stride::overlap80(), 180.0};
  }
};

/// Window length in samples for `len_s`; throws if it is not a whole number >= 2.
Eigen::Index segment_samples(double rate_hz, double len_s);

/// Cuts a recording into tagged windows, sorted by start sample.
///
/// Interictal windows tile [previous exclusion end, next onset); ictal windows
/// start at or after onset and end by the offset; crossing windows start in
/// [onset - L, onset) so their end lies in [onset, onset + L). The exclusion
/// window after each offset is tiled with the interictal stride and tagged
/// `excluded`. Windows straddling an offset are dropped.
std::vector<TaggedSegment> extract_segments(const Recording& rec, double len_s,
                                            const OverlapPolicy& policy);

/// Interictal time intervals (seconds): the recording minus every
/// [onset, offset + exclusion).
struct Interval {
  double begin_s = 0.0;
  double end_s = 0.0;
  double length() const { return end_s - begin_s; }
};
std::vector<Interval> interictal_intervals(const Recording& rec, double postictal_exclusion_s);

}  // namespace sezdet
