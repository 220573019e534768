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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sezdet/detector.hpp"
#include "sezdet/signal_io.hpp"

namespace sezdet {

/// Outcome for one seizure. `latency_s` is empty when no alarm fired between
/// onset and offset.
struct SeizureScore {
  bool detected_in_crossing = false;
  std::optional<double> latency_s;
};

/// First alarm at or after onset decides: inside [onset, onset + len] it is
/// a crossing detection with latency t_d - onset; later but before the
/// offset it is a crossing miss charged a latency of len_s. Throws DataError
/// unless the trace covers the crossing window.
SeizureScore score_seizure(std::span<const TraceRow> trace, const SeizureSpan& span,
                           double len_s);

/// Trace rows inside the crossing window [onset, onset + len) paired with the
/// soft label of a window ending at that time.
struct CrossingAlignment {
  std::vector<double> rpip;
  std::vector<double> p_ictal;
};
CrossingAlignment align_crossing(std::span<const TraceRow> trace, const SeizureSpan& span,
                                 double len_s);

/// Mean |P_ictal - RPIP| in percent. Throws DataError on length mismatch or empty input.
double rpip_error(std::span<const double> rpip, std::span<const double> p_ictal);

struct FdrResult {
  std::size_t false_alarms = 0;
  double interictal_hours = 0.0;
  double per_hour = 0.0;
};

/// Alarms per interictal hour. Throws DataError when `hours` is not positive.
FdrResult fdr(std::size_t false_alarms, double hours);
/// Counts trace alarms falling inside the interictal intervals; hours are the
/// total interval length.
FdrResult fdr(std::span<const TraceRow> trace, std::span<const Interval> interictal);

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // population (ddof = 0)
};
/// Empty input yields nullopt.
std::optional<MeanSd> mean_sd(std::span<const double> values);

struct FoldReport {
  std::size_t held_out = 0;
  SeizureSpan span;
  SeizureScore score;
  double rpip_error_pct = 0.0;
  FdrResult fdr;
  int best_epoch = 0;
};

/// Per-patient summary in the layout of the usual results table.
struct EvalReport {
  std::string patient;
  std::size_t n_detected_crossing = 0;
  std::size_t n_total = 0;
  std::size_t n_false = 0;
  double interictal_hours = 0.0;
  std::optional<MeanSd> rpip_error;
  std::vector<std::optional<double>> latencies_s;
  std::optional<MeanSd> latency;  // over seizures with an alarm after onset
  std::optional<MeanSd> fdr_per_h;
  std::size_t n_undetected = 0;
  std::vector<FoldReport> folds;

  /// N_DC / N_Total, or nullopt when there are no seizures.
  std::optional<double> sensitivity() const;
};

/// Aggregates per-seizure results. Order of `folds` does not affect the statistics.
EvalReport aggregate(std::string patient, std::vector<FoldReport> folds);

/// Scores a single trace against a recording's annotations: one fold per
/// seizure, all sharing the trace's interictal false alarms.
EvalReport evaluate_trace(std::string patient, const Recording& rec,
                          std::span<const TraceRow> trace, double len_s,
                          double postictal_exclusion_s);

/// Report object: patient, sensitivity "N_DC/N_T", rpip_err_mean/sd,
/// latency_mean_s/sd_s, fdr_mean/sd, plus per-fold details.
nlohmann::ordered_json to_json(const EvalReport& report);

}  // namespace sezdet
