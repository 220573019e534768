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

#include "sezdet/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "sezdet/errors.hpp"
#include "sezdet/labeling.hpp"

namespace sezdet {
namespace {

constexpr double kTimeTolerance = 1e-9;

nlohmann::ordered_json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

SeizureScore score_seizure(std::span<const TraceRow> trace, const SeizureSpan& span,
                           double len_s) {
  const double cross_end = span.onset_s + len_s;
  if (trace.empty() || trace.front().t_s > span.onset_s + kTimeTolerance ||
      trace.back().t_s < cross_end - kTimeTolerance)
    throw DataError("score_seizure: trace does not cover the crossing window");

  for (const auto& row : trace) {
    if (!row.alarm || row.t_s < span.onset_s - kTimeTolerance) continue;
    if (row.t_s <= cross_end + kTimeTolerance)
      return {true, std::max(0.0, row.t_s - span.onset_s)};
    if (row.t_s <= span.offset_s + kTimeTolerance) return {false, len_s};
    break;
  }
  return {false, std::nullopt};
}

CrossingAlignment align_crossing(std::span<const TraceRow> trace, const SeizureSpan& span,
                                 double len_s) {
  CrossingAlignment out;
  for (const auto& row : trace) {
    if (row.t_s < span.onset_s - kTimeTolerance) continue;
    if (row.t_s >= span.onset_s + len_s - kTimeTolerance) break;
    out.rpip.push_back(row.rpip);
    out.p_ictal.push_back(label_segment(crossing_tag(row.t_s, span.onset_s, len_s)).p_ictal);
  }
  return out;
}

double rpip_error(std::span<const double> rpip, std::span<const double> p_ictal) {
  if (rpip.size() != p_ictal.size())
    throw DataError("rpip_error: trace and labels are not aligned");
  if (rpip.empty()) throw DataError("rpip_error: empty crossing window");
  double sum = 0.0;
  for (std::size_t i = 0; i < rpip.size(); ++i) sum += std::abs(p_ictal[i] - rpip[i]);
  return 100.0 * sum / static_cast<double>(rpip.size());
}

FdrResult fdr(std::size_t false_alarms, double hours) {
  if (!(hours > 0.0)) throw DataError("fdr: interictal duration must be positive");
  return {false_alarms, hours, static_cast<double>(false_alarms) / hours};
}

FdrResult fdr(std::span<const TraceRow> trace, std::span<const Interval> interictal) {
  double seconds = 0.0;
  for (const auto& iv : interictal) seconds += std::max(0.0, iv.length());
  std::size_t alarms = 0;
  for (const auto& row : trace) {
    if (!row.alarm) continue;
    const bool inside = std::any_of(interictal.begin(), interictal.end(), [&](const Interval& iv) {
      return row.t_s >= iv.begin_s && row.t_s < iv.end_s;
    });
    if (inside) ++alarms;
  }
  return fdr(alarms, seconds / 3600.0);
}

std::optional<MeanSd> mean_sd(std::span<const double> values) {
  if (values.empty()) return std::nullopt;
  // Sorted summation keeps the result independent of input order.
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  std::vector<double> sq;
  sq.reserve(v.size());
  for (double x : v) sq.push_back((x - mean) * (x - mean));
  std::sort(sq.begin(), sq.end());
  double ss = 0.0;
  for (double x : sq) ss += x;
  return MeanSd{mean, std::sqrt(ss / static_cast<double>(v.size()))};
}

std::optional<double> EvalReport::sensitivity() const {
  if (n_total == 0) return std::nullopt;
  return static_cast<double>(n_detected_crossing) / static_cast<double>(n_total);
}

EvalReport aggregate(std::string patient, std::vector<FoldReport> folds) {
  std::sort(folds.begin(), folds.end(),
            [](const FoldReport& a, const FoldReport& b) { return a.held_out < b.held_out; });
  EvalReport r;
  r.patient = std::move(patient);
  r.n_total = folds.size();
  std::vector<double> errors, latencies, rates;
  for (const auto& f : folds) {
    if (f.score.detected_in_crossing) ++r.n_detected_crossing;
    r.latencies_s.push_back(f.score.latency_s);
    if (f.score.latency_s)
      latencies.push_back(*f.score.latency_s);
    else
      ++r.n_undetected;
    errors.push_back(f.rpip_error_pct);
    rates.push_back(f.fdr.per_hour);
    r.n_false += f.fdr.false_alarms;
    r.interictal_hours += f.fdr.interictal_hours;
  }
  r.rpip_error = mean_sd(errors);
  r.latency = mean_sd(latencies);
  r.fdr_per_h = mean_sd(rates);
  r.folds = std::move(folds);
  return r;
}

EvalReport evaluate_trace(std::string patient, const Recording& rec,
                          std::span<const TraceRow> trace, double len_s,
                          double postictal_exclusion_s) {
  const auto interictal = interictal_intervals(rec, postictal_exclusion_s);
  std::vector<FoldReport> folds;
  if (rec.annotations.empty()) {
    EvalReport r = aggregate(std::move(patient), {});
    const FdrResult f = fdr(trace, interictal);
    r.n_false = f.false_alarms;
    r.interictal_hours = f.interictal_hours;
    r.fdr_per_h = MeanSd{f.per_hour, 0.0};
    return r;
  }
  const FdrResult shared = fdr(trace, interictal);
  for (std::size_t i = 0; i < rec.annotations.size(); ++i) {
    FoldReport f;
    f.held_out = i;
    f.span = rec.annotations[i];
    f.score = score_seizure(trace, f.span, len_s);
    const auto aligned = align_crossing(trace, f.span, len_s);
    f.rpip_error_pct = rpip_error(aligned.rpip, aligned.p_ictal);
    f.fdr = shared;
    folds.push_back(f);
  }
  EvalReport r = aggregate(std::move(patient), std::move(folds));
  r.n_false = shared.false_alarms;
  r.interictal_hours = shared.interictal_hours;
  return r;
}

nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["patient"] = r.patient;
  j["sensitivity"] = std::to_string(r.n_detected_crossing) + "/" + std::to_string(r.n_total);
  j["sensitivity_defined"] = r.sensitivity().has_value();
  j["rpip_err_mean"] = optional_number(r.rpip_error ? std::optional(r.rpip_error->mean) : std::nullopt);
  j["rpip_err_sd"] = optional_number(r.rpip_error ? std::optional(r.rpip_error->sd) : std::nullopt);
  j["latency_mean_s"] = optional_number(r.latency ? std::optional(r.latency->mean) : std::nullopt);
  j["latency_sd_s"] = optional_number(r.latency ? std::optional(r.latency->sd) : std::nullopt);
  j["fdr_mean"] = optional_number(r.fdr_per_h ? std::optional(r.fdr_per_h->mean) : std::nullopt);
  j["fdr_sd"] = optional_number(r.fdr_per_h ? std::optional(r.fdr_per_h->sd) : std::nullopt);
  j["n_false"] = r.n_false;
  j["interictal_hours"] = r.interictal_hours;
  j["n_undetected"] = r.n_undetected;
  j["folds"] = nlohmann::ordered_json::array();
  for (const auto& f : r.folds) {
    nlohmann::ordered_json fj;
    fj["seizure"] = f.held_out;
    fj["onset_s"] = f.span.onset_s;
    fj["offset_s"] = f.span.offset_s;
    fj["detected_in_crossing"] = f.score.detected_in_crossing;
    fj["latency_s"] = optional_number(f.score.latency_s);
    fj["rpip_err"] = f.rpip_error_pct;
    fj["false_alarms"] = f.fdr.false_alarms;
    fj["fdr"] = f.fdr.per_hour;
    fj["best_epoch"] = f.best_epoch;
    j["folds"].push_back(fj);
  }
  return j;
}

}  // namespace sezdet
