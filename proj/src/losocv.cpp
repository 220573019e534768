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

#include "sezdet/losocv.hpp"

#include <sstream>

#include "sezdet/errors.hpp"

namespace sezdet {

std::vector<Fold> make_folds(std::size_t n_seizures) {
  if (n_seizures < 2) throw DataError("losocv: at least two seizures required");
  std::vector<Fold> folds;
  for (std::size_t held = 0; held < n_seizures; ++held) {
    Fold f{held, {}};
    for (std::size_t i = 0; i < n_seizures; ++i)
      if (i != held) f.training.push_back(i);
    folds.push_back(std::move(f));
  }
  return folds;
}

std::optional<std::size_t> owning_seizure(const Recording& rec, const TaggedSegment& seg) {
  if (seg.tag.kind == PeriodTag::Kind::kInterictal) return std::nullopt;
  const double start = seg.span.start_s, end = seg.span.start_s + seg.span.len_s;
  std::optional<std::size_t> owner;
  for (std::size_t i = 0; i < rec.annotations.size(); ++i) {
    // Crossing windows end after onset; ictal/excluded windows start at or after it.
    if (end > rec.annotations[i].onset_s - 1e-9) owner = i;
    if (start < rec.annotations[i].onset_s) break;
  }
  return owner;
}

EvalReport losocv(const Recording& rec, const LosocvConfig& cfg, std::string patient,
                  TrainFn train_fn, ProgressFn progress) {
  const auto folds = make_folds(rec.annotations.size());
  auto log = [&](const std::string& msg) {
    if (progress) progress(msg);
  };
  if (!train_fn) {
    train_fn = [&cfg](std::span<const Example* const> examples, const ValidationFn& validation) {
      return train(examples, cfg.model, cfg.train, validation);
    };
  }

  const auto segments = extract_segments(rec, cfg.len_s, cfg.policy);
  std::vector<Example> examples;
  std::vector<std::optional<std::size_t>> owners;
  for (const auto& seg : segments) {
    if (seg.tag.kind == PeriodTag::Kind::kExcluded) continue;
    examples.push_back({segment_features(segment_view(rec, seg.span), cfg.spectral),
                        label_segment(seg.tag), seg.tag.kind});
    owners.push_back(owning_seizure(rec, seg));
  }
  log("extracted " + std::to_string(examples.size()) + " training segments");

  const auto interictal = interictal_intervals(rec, cfg.policy.postictal_exclusion_s);
  std::vector<FoldReport> reports;
  for (const auto& fold : folds) {
    const SeizureSpan span = rec.annotations[fold.held_out];
    std::vector<const Example*> subset;
    for (std::size_t i = 0; i < examples.size(); ++i)
      if (owners[i] != fold.held_out) subset.push_back(&examples[i]);

    // Stream the held-out crossing window with a horizon of lead-in history.
    const ValidationFn validation = [&](const Eigen::VectorXd& weights) {
      Predictor predictor(cfg.model, cfg.spectral, weights);
      const auto trace = run_detector(rec, predictor, cfg.detector, cfg.len_s,
                                      span.onset_s - cfg.detector.horizon_s,
                                      span.onset_s + cfg.len_s);
      const auto aligned = align_crossing(trace, span, cfg.len_s);
      return rpip_error(aligned.rpip, aligned.p_ictal);
    };
    const TrainResult trained = train_fn(subset, validation);

    Predictor predictor(cfg.model, cfg.spectral, trained.best.weights);
    const auto trace = run_detector(rec, predictor, cfg.detector, cfg.len_s);
    FoldReport report;
    report.held_out = fold.held_out;
    report.span = span;
    report.score = score_seizure(trace, span, cfg.len_s);
    const auto aligned = align_crossing(trace, span, cfg.len_s);
    report.rpip_error_pct = rpip_error(aligned.rpip, aligned.p_ictal);
    report.fdr = fdr(trace, interictal);
    report.best_epoch = trained.best_epoch;
    reports.push_back(report);

    std::ostringstream msg;
    msg << "fold " << fold.held_out << ": crossing=" << report.score.detected_in_crossing
        << " latency=" << (report.score.latency_s ? std::to_string(*report.score.latency_s) : "none")
        << " rpip_err=" << report.rpip_error_pct << "% false_alarms=" << report.fdr.false_alarms
        << " best_epoch=" << report.best_epoch;
    log(msg.str());
  }
  return aggregate(std::move(patient), std::move(reports));
}

}  // namespace sezdet
