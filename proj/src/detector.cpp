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

#include "sezdet/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sezdet/errors.hpp"

namespace sezdet {
namespace {

constexpr double kTimeTolerance = 1e-6;

}  // namespace

void DetectorConfig::validate() const {
  if (!(rate_hz > 0.0)) throw ConfigError("detector: rate must be positive");
  if (!std::isfinite(thr)) throw ConfigError("detector: threshold must be finite");
  double sum = 0.0;
  for (double l : lambdas) {
    if (!std::isfinite(l)) throw ConfigError("detector: lambdas must be finite");
    sum += l;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("detector: lambdas must sum to 1");
  for (double s : lookbacks_s) steps(s);
  steps(horizon_s);
  if (lockout_s < 0.0) throw ConfigError("detector: lockout must be >= 0");
}

Eigen::Index DetectorConfig::steps(double seconds) const {
  const double exact = seconds * rate_hz;
  const auto n = static_cast<Eigen::Index>(std::llround(exact));
  if (n < 1 || std::abs(exact - static_cast<double>(n)) > 1e-9)
    throw ConfigError("detector: window lengths must be positive whole numbers of steps");
  return n;
}

std::vector<double> RingBuffer::tail(Eigen::Index n) const {
  n = std::min(n, size());
  std::vector<double> out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) out[i] = (*this)[size() - n + i];
  return out;
}

DetectorState::DetectorState(const DetectorConfig& cfg) {
  cfg.validate();
  Eigen::Index longest = 0;
  for (double s : cfg.lookbacks_s) longest = std::max(longest, cfg.steps(s));
  pips = RingBuffer(longest);
  rpips = RingBuffer(cfg.steps(cfg.horizon_s) + 1);
}

void DetectorState::refresh() {
  pips.fill(0.0);
  rpips.fill(0.0);
}

double extrapolate_line(std::span<const double> y) {
  const std::size_t n = y.size();
  if (n == 0) return 0.0;
  double mean_y = 0.0;
  for (double v : y) mean_y += v;
  mean_y /= static_cast<double>(n);
  if (n < 2) return mean_y;

  // x_j = j - n has mean -(n + 1) / 2.
  const double mean_x = -(static_cast<double>(n) + 1.0) / 2.0;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double dx = static_cast<double>(j) - static_cast<double>(n) - mean_x;
    sxx += dx * dx;
    sxy += dx * (y[j] - mean_y);
  }
  return mean_y + (sxy / sxx) * (0.0 - mean_x);
}

double rectify(double pip_t, DetectorState& state, const DetectorConfig& cfg) {
  double rpip = cfg.lambdas[3] * pip_t;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto history = state.pips.tail(cfg.steps(cfg.lookbacks_s[i]));
    rpip += cfg.lambdas[i] * extrapolate_line(history);
  }
  state.pips.push(pip_t);
  return std::clamp(rpip, 0.0, 1.0);
}

double accumulate(double rpip_t, DetectorState& state, const DetectorConfig& cfg) {
  state.rpips.push(rpip_t);
  double sum = 0.0;
  for (Eigen::Index i = 0; i + 1 < state.rpips.size(); ++i) {
    const double next = state.rpips[i + 1];
    if (next > state.rpips[i]) sum += next;
  }
  return sum / cfg.rate_hz;
}

TraceRow decide(double t_s, double pip_t, DetectorState& state, const DetectorConfig& cfg) {
  if (state.steps > 0 && std::abs(t_s - (state.last_t + 1.0 / cfg.rate_hz)) > kTimeTolerance)
    throw ConfigError("detector: steps must advance by exactly 1/r seconds");
  TraceRow row;
  row.t_s = t_s;
  row.pip = pip_t;
  row.rpip = rectify(pip_t, state, cfg);
  row.ap = accumulate(row.rpip, state, cfg);
  if (row.ap >= cfg.thr) {
    const bool locked = state.lockout_until && t_s < *state.lockout_until - kTimeTolerance;
    if (!locked) {
      row.alarm = true;
      state.alarms.push_back(t_s);
      if (cfg.lockout_s > 0.0) state.lockout_until = t_s + cfg.lockout_s;
    }
    state.refresh();
  }
  state.last_t = t_s;
  ++state.steps;
  return row;
}

std::vector<TraceRow> run_detector(const Recording& rec, Predictor& model,
                                   const DetectorConfig& cfg, double len_s,
                                   std::optional<double> from_s, std::optional<double> to_s) {
  cfg.validate();
  const Eigen::Index L = segment_samples(rec.rate_hz, len_s);
  const Eigen::Index n = rec.n_samples();
  const auto k_last = static_cast<std::int64_t>(std::floor(rec.duration_s() * cfg.rate_hz + 1e-9));
  auto end_sample = [&](std::int64_t k) {
    return static_cast<Eigen::Index>(
        std::llround(static_cast<double>(k) * rec.rate_hz / cfg.rate_hz));
  };

  std::int64_t k = 1;
  while (k <= k_last && end_sample(k) < L) ++k;
  if (from_s) k = std::max(k, static_cast<std::int64_t>(std::ceil(*from_s * cfg.rate_hz - 1e-9)));
  std::int64_t k_end = k_last;
  if (to_s) k_end = std::min(k_end, static_cast<std::int64_t>(std::floor(*to_s * cfg.rate_hz + 1e-9)));

  DetectorState state(cfg);
  std::vector<TraceRow> rows;
  rows.reserve(static_cast<std::size_t>(std::max<std::int64_t>(0, k_end - k + 1)));
  for (; k <= k_end; ++k) {
    const Eigen::Index end = std::min(n, end_sample(k));
    const double t = static_cast<double>(k) / cfg.rate_hz;
    rows.push_back(step(rec.samples.middleCols(end - L, L), t, model, state, cfg));
  }
  return rows;
}

std::vector<TraceRow> replay(std::span<const double> times_s, std::span<const double> pips,
                             const DetectorConfig& cfg) {
  if (times_s.size() != pips.size()) throw DataError("replay: times and PIPs differ in length");
  DetectorState state(cfg);
  std::vector<TraceRow> rows;
  rows.reserve(pips.size());
  for (std::size_t i = 0; i < pips.size(); ++i) rows.push_back(decide(times_s[i], pips[i], state, cfg));
  return rows;
}

void write_trace_csv(const std::filesystem::path& path, std::span<const TraceRow> rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write trace " + path.string());
  out << "t_s,pip,rpip,ap,alarm_flag\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%d\n", r.t_s, r.pip, r.rpip, r.ap,
                  r.alarm ? 1 : 0);
    out << buf;
  }
  if (!out) throw DataError("failed writing trace " + path.string());
}

std::vector<TraceRow> read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open trace " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("t_s,pip,rpip,ap,alarm_flag", 0) != 0)
    throw DataError("trace " + path.string() + ": missing header");
  std::vector<TraceRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    TraceRow r;
    char c1, c2, c3, c4;
    int flag = 0;
    if (!(ss >> r.t_s >> c1 >> r.pip >> c2 >> r.rpip >> c3 >> r.ap >> c4 >> flag) || c1 != ',' ||
        c2 != ',' || c3 != ',' || c4 != ',')
      throw DataError("trace " + path.string() + ": malformed row '" + line + "'");
    r.alarm = flag != 0;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace sezdet
