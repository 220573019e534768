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

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "sezdet/errors.hpp"
#include "sezdet/evaluation.hpp"
#include "sezdet/losocv.hpp"
#include "sezdet/synth.hpp"

using namespace sezdet;

namespace {

std::vector<TraceRow> grid(double t0, double t1, double r = 10.0) {
  std::vector<TraceRow> rows;
  const auto k0 = static_cast<long>(std::llround(t0 * r));
  const auto k1 = static_cast<long>(std::llround(t1 * r));
  for (long k = k0; k <= k1; ++k) rows.push_back({static_cast<double>(k) / r, 0, 0, 0, false});
  return rows;
}

void alarm_at(std::vector<TraceRow>& rows, double t) {
  for (auto& r : rows)
    if (std::abs(r.t_s - t) < 1e-9) r.alarm = true;
}

// Straight transcription of the scoring rule, one pass per question.
SeizureScore naive_score(const std::vector<TraceRow>& rows, const SeizureSpan& s, double len) {
  std::vector<double> after;
  for (const auto& r : rows)
    if (r.alarm && r.t_s >= s.onset_s - 1e-9) after.push_back(r.t_s);
  if (after.empty()) return {false, std::nullopt};
  const double td = after.front();
  if (td <= s.onset_s + len + 1e-9) return {true, td - s.onset_s};
  if (td <= s.offset_s + 1e-9) return {false, len};
  return {false, std::nullopt};
}

double naive_rpip_error(const std::vector<double>& rpip, const std::vector<double>& p) {
  double total = 0.0;
  for (std::size_t i = 0; i < rpip.size(); ++i) total += std::sqrt((p[i] - rpip[i]) * (p[i] - rpip[i]));
  return total / static_cast<double>(rpip.size()) * 100.0;
}

FoldReport fold(std::size_t i, bool in_cross, std::optional<double> latency, double err,
                std::size_t fa, double hours) {
  FoldReport f;
  f.held_out = i;
  f.score = {in_cross, latency};
  f.rpip_error_pct = err;
  f.fdr = fdr(fa, hours);
  return f;
}

}  // namespace

TEST_CASE("score: alarm inside the crossing window") {
  auto rows = grid(0.0, 30.0);
  alarm_at(rows, 12.3);
  const auto s = score_seizure(rows, {10.0, 25.0}, 5.0);
  CHECK(s.detected_in_crossing);
  REQUIRE(s.latency_s);
  CHECK(*s.latency_s == doctest::Approx(2.3).epsilon(1e-12));
}

TEST_CASE("score: alarm after the crossing window is charged the segment length") {
  auto rows = grid(0.0, 30.0);
  alarm_at(rows, 17.0);
  const auto s = score_seizure(rows, {10.0, 25.0}, 5.0);
  CHECK_FALSE(s.detected_in_crossing);
  REQUIRE(s.latency_s);
  CHECK(*s.latency_s == 5.0);

  const auto s10 = score_seizure(rows, {2.0, 25.0}, 10.0);
  CHECK_FALSE(s10.detected_in_crossing);
  CHECK(*s10.latency_s == 10.0);
}

TEST_CASE("score: no alarm, or only before onset, is undetected") {
  auto rows = grid(0.0, 30.0);
  CHECK_FALSE(score_seizure(rows, {10.0, 25.0}, 5.0).latency_s);
  alarm_at(rows, 9.9);
  alarm_at(rows, 26.0);
  const auto s = score_seizure(rows, {10.0, 25.0}, 5.0);
  CHECK_FALSE(s.detected_in_crossing);
  CHECK_FALSE(s.latency_s);
}

TEST_CASE("score: window edges are inclusive") {
  auto rows = grid(0.0, 30.0);
  alarm_at(rows, 10.0);
  CHECK(*score_seizure(rows, {10.0, 25.0}, 5.0).latency_s == 0.0);
  auto late = grid(0.0, 30.0);
  alarm_at(late, 15.0);
  CHECK(score_seizure(late, {10.0, 25.0}, 5.0).detected_in_crossing);
}

TEST_CASE("score: trace must cover the crossing window") {
  CHECK_THROWS_AS(score_seizure(grid(11.0, 30.0), {10.0, 25.0}, 5.0), DataError);
  CHECK_THROWS_AS(score_seizure(grid(0.0, 14.0), {10.0, 25.0}, 5.0), DataError);
}

TEST_CASE("rpip error examples") {
  std::vector<double> labels{0.05, 0.1, 0.45, 0.9};
  CHECK(rpip_error(labels, labels) == 0.0);
  std::vector<double> shifted;
  for (double p : labels) shifted.push_back(p + 0.1);
  CHECK(rpip_error(shifted, labels) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK_THROWS_AS(rpip_error(std::vector<double>{0.1}, labels), DataError);
  CHECK_THROWS_AS(rpip_error(std::vector<double>{}, std::vector<double>{}), DataError);
}

TEST_CASE("crossing alignment pairs each step with its window label") {
  auto rows = grid(0.0, 20.0);
  for (auto& r : rows) r.rpip = r.t_s / 20.0;
  const auto a = align_crossing(rows, {10.0, 18.0}, 5.0);
  REQUIRE(a.rpip.size() == 50);
  CHECK(a.p_ictal.front() == 0.0);
  CHECK(a.p_ictal[21] == doctest::Approx(0.45));  // t = 12.1 s, f = 0.42
  CHECK(a.p_ictal.back() == doctest::Approx(0.95));
}

TEST_CASE("fdr examples") {
  CHECK(fdr(2, 25.0).per_hour == doctest::Approx(0.08).epsilon(1e-15));
  CHECK(fdr(0, 3.0).per_hour == 0.0);
  CHECK_THROWS_AS(fdr(1, 0.0), DataError);

  // Ten hours at r = 1 with three injected alarms, one outside the intervals.
  auto rows = grid(0.0, 36000.0, 1.0);
  alarm_at(rows, 100.0);
  alarm_at(rows, 20000.0);
  alarm_at(rows, 35999.0);
  std::vector<Interval> iv{{0.0, 36000.0}};
  const auto f = fdr(rows, iv);
  CHECK(f.false_alarms == 3);
  CHECK(f.per_hour == doctest::Approx(0.3).epsilon(1e-15));

  std::vector<Interval> split{{0.0, 18000.0}, {21600.0, 39600.0}};
  CHECK(fdr(rows, split).false_alarms == 2);
  CHECK(fdr(rows, split).interictal_hours == doctest::Approx(10.0));
}

TEST_CASE("metrics agree with naive loops on random traces") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    auto rows = grid(0.0, 60.0);
    for (auto& r : rows) {
      r.rpip = u(rng);
      r.alarm = u(rng) < 0.01;
    }
    const double onset = 5.0 + std::floor(u(rng) * 300.0) / 10.0;
    const SeizureSpan span{onset, onset + 5.0 + std::floor(u(rng) * 150.0) / 10.0};
    if (span.offset_s > 60.0) continue;
    const double len = u(rng) < 0.5 ? 5.0 : 10.0;
    if (onset + len > 60.0) continue;
    const auto got = score_seizure(rows, span, len);
    const auto want = naive_score(rows, span, len);
    CHECK(got.detected_in_crossing == want.detected_in_crossing);
    CHECK(got.latency_s.has_value() == want.latency_s.has_value());
    if (got.latency_s) CHECK(std::abs(*got.latency_s - *want.latency_s) < 1e-12);

    const auto a = align_crossing(rows, span, len);
    CHECK(std::abs(rpip_error(a.rpip, a.p_ictal) - naive_rpip_error(a.rpip, a.p_ictal)) < 1e-12);
  }
}

TEST_CASE("folds partition the seizures") {
  const auto folds = make_folds(4);
  REQUIRE(folds.size() == 4);
  std::multiset<std::size_t> held;
  for (const auto& f : folds) {
    held.insert(f.held_out);
    CHECK(f.training.size() == 3);
    CHECK(std::find(f.training.begin(), f.training.end(), f.held_out) == f.training.end());
  }
  CHECK(held == std::multiset<std::size_t>{0, 1, 2, 3});
  CHECK_THROWS_AS(make_folds(1), DataError);
}

TEST_CASE("aggregate statistics match hand computation") {
  std::vector<FoldReport> folds{
      fold(0, true, 2.0, 10.0, 1, 2.0),
      fold(1, true, 3.0, 20.0, 0, 2.0),
      fold(2, false, 5.0, 30.0, 2, 2.0),
      fold(3, false, std::nullopt, 40.0, 0, 2.0),
  };
  const auto r = aggregate("p", folds);
  CHECK(r.n_detected_crossing == 2);
  CHECK(r.n_total == 4);
  CHECK(*r.sensitivity() == 0.5);
  CHECK(r.n_undetected == 1);
  CHECK(r.n_false == 3);
  // errors 10,20,30,40: mean 25, population sd sqrt(125)
  CHECK(r.rpip_error->mean == 25.0);
  CHECK(r.rpip_error->sd == doctest::Approx(std::sqrt(125.0)).epsilon(1e-15));
  // latencies 2,3,5: mean 10/3, sd sqrt(((2-10/3)^2+(3-10/3)^2+(5-10/3)^2)/3)
  const double m = 10.0 / 3.0;
  CHECK(r.latency->mean == doctest::Approx(m).epsilon(1e-15));
  CHECK(r.latency->sd ==
        doctest::Approx(std::sqrt(((2 - m) * (2 - m) + (3 - m) * (3 - m) + (5 - m) * (5 - m)) / 3))
            .epsilon(1e-15));
  // fdr per fold 0.5, 0, 1, 0
  CHECK(r.fdr_per_h->mean == 0.375);

  std::mt19937_64 rng(32);
  for (int i = 0; i < 10; ++i) {
    std::shuffle(folds.begin(), folds.end(), rng);
    const auto p = aggregate("p", folds);
    CHECK(p.rpip_error->mean == r.rpip_error->mean);
    CHECK(p.rpip_error->sd == r.rpip_error->sd);
    CHECK(p.latency->sd == r.latency->sd);
    CHECK(p.fdr_per_h->sd == r.fdr_per_h->sd);
    CHECK(to_json(p) == to_json(r));
  }
}

TEST_CASE("no seizures and no alarms: sensitivity undefined, FDR zero") {
  SynthConfig sc;
  sc.rate_hz = 32;
  sc.channels = 1;
  sc.duration_s = 120;
  const Recording rec = generate(sc);
  const auto rows = grid(5.0, 120.0);
  const auto r = evaluate_trace("quiet", rec, rows, 5.0, 180.0);
  CHECK_FALSE(r.sensitivity());
  CHECK(r.fdr_per_h->mean == 0.0);
  const auto j = to_json(r);
  CHECK(j["sensitivity"] == "0/0");
  CHECK(j["sensitivity_defined"] == false);
  CHECK(j["rpip_err_mean"].is_null());
}

TEST_CASE("evaluate_trace on a constructed trace") {
  SynthConfig sc;
  sc.rate_hz = 32;
  sc.channels = 1;
  sc.duration_s = 1000;
  sc.seizures = {{100.0, 30.0}, {500.0, 30.0}};
  const Recording rec = generate(sc);
  auto rows = grid(5.0, 1000.0);
  for (auto& r : rows) {
    for (const auto& a : rec.annotations)
      if (r.t_s >= a.onset_s && r.t_s < a.onset_s + 5.0)
        r.rpip = label_segment(crossing_tag(r.t_s, a.onset_s, 5.0)).p_ictal;
  }
  alarm_at(rows, 102.0);  // seizure 0 in crossing, latency 2
  alarm_at(rows, 520.0);  // seizure 1 late: latency 5
  alarm_at(rows, 50.0);   // false
  alarm_at(rows, 900.0);  // false
  const auto r = evaluate_trace("built", rec, rows, 5.0, 180.0);
  CHECK(r.n_detected_crossing == 1);
  CHECK(r.n_total == 2);
  CHECK(r.rpip_error->mean == 0.0);
  CHECK(r.latency->mean == doctest::Approx(3.5));
  CHECK(r.latency->sd == doctest::Approx(1.5));
  // Interictal: [0,100) + [310,500) + [710,1000) = 580 s.
  CHECK(r.folds[0].fdr.false_alarms == 2);
  CHECK(r.folds[0].fdr.interictal_hours == doctest::Approx(580.0 / 3600.0));
  CHECK(r.fdr_per_h->mean == doctest::Approx(2.0 / (580.0 / 3600.0)));
  CHECK(r.n_false == 2);
  CHECK(r.interictal_hours == doctest::Approx(580.0 / 3600.0));
}

TEST_CASE("losocv trains each fold without its held-out seizure") {
  SynthConfig sc;
  sc.seed = 3;
  sc.channels = 2;
  sc.rate_hz = 32;
  sc = patient_schedule(sc, 4, 400.0, 20.0, 20.0);
  const Recording rec = generate(sc);

  LosocvConfig cfg;
  cfg.len_s = 2.0;
  cfg.policy = {Stride::no_overlap(), Stride::overlap80(), Stride::of_samples(8), 20.0};
  cfg.spectral.scales = {1, 2};
  cfg.model = ModelConfig::tiny(2, {1, 2});

  std::vector<std::size_t> crossing_counts;
  const Network net(cfg.model);
  const TrainFn stub = [&](std::span<const Example* const> ex, const ValidationFn& validation) {
    std::size_t crossing = 0;
    for (const Example* e : ex) crossing += e->kind == PeriodTag::Kind::kCrossing;
    crossing_counts.push_back(crossing);
    TrainResult r;
    r.best = ModelParams::from_weights(net.initialize(1));
    r.last = r.best;
    r.best_epoch = 1;
    CHECK(validation(r.best.weights) >= 0.0);
    return r;
  };
  const auto report = losocv(rec, cfg, "stub", stub);
  REQUIRE(report.folds.size() == 4);
  REQUIRE(crossing_counts.size() == 4);
  // 64-sample windows, crossing stride 8: 8 crossing segments per seizure.
  for (std::size_t c : crossing_counts) CHECK(c == 3 * 8);
  std::set<std::size_t> held;
  for (const auto& f : report.folds) {
    held.insert(f.held_out);
    CHECK(f.fdr.interictal_hours == doctest::Approx(400.0 / 3600.0));
  }
  CHECK(held.size() == 4);
  CHECK(report.interictal_hours == doctest::Approx(4 * 400.0 / 3600.0));
}
