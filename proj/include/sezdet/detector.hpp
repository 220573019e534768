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

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "sezdet/model.hpp"
#include "sezdet/signal_io.hpp"

namespace sezdet {

struct DetectorConfig {
  double rate_hz = 10.0;  // decisions per second
  double thr = 0.5;
  std::array<double, 4> lambdas{0.2, 0.3, 0.3, 0.2};  // LR5s, LR3s, LR1s, current
  std::array<double, 3> lookbacks_s{5.0, 3.0, 1.0};
  double horizon_s = 5.0;  // accumulation window
  double lockout_s = 0.0;  // alarm suppression after an alarm; 0 = buffer refresh only

  void validate() const;
  /// Steps in `seconds` at the decision rate; throws unless it is a whole number.
  Eigen::Index steps(double seconds) const;
};

/// Fixed-capacity FIFO, zero-filled at construction; index 0 is the oldest entry.
class RingBuffer {
 public:
  explicit RingBuffer(Eigen::Index capacity = 0) : data_(capacity, 0.0) {}

  Eigen::Index size() const { return static_cast<Eigen::Index>(data_.size()); }
  double operator[](Eigen::Index i) const {
    return data_[static_cast<std::size_t>((head_ + i) % size())];
  }
  void push(double v) {
    data_[static_cast<std::size_t>(head_)] = v;
    head_ = (head_ + 1) % size();
  }
  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
  /// The newest `n` entries, oldest first.
  std::vector<double> tail(Eigen::Index n) const;

 private:
  std::vector<double> data_;
  Eigen::Index head_ = 0;
};

/// Per-stream detector memory.
struct DetectorState {
  explicit DetectorState(const DetectorConfig& cfg);

  RingBuffer pips;   // previous PIPs (longest lookback)
  RingBuffer rpips;  // RPIPs over the accumulation window, including its left edge
  std::int64_t steps = 0;
  double last_t = 0.0;
  std::optional<double> lockout_until;
  std::vector<double> alarms;

  /// Zeroes both histories (after an alarm).
  void refresh();
};

/// Least-squares line through (x_j, y_j), x_j = j - n for j = 0..n-1,
/// evaluated at x = 0: a one-step extrapolation of equally spaced history.
/// Fewer than two points fall back to the mean (zero when empty).
double extrapolate_line(std::span<const double> history);

/// RPIP_t = lambda . [LR5s, LR3s, LR1s, PIP_t], clamped to [0, 1]. The
/// regressions use only previous PIPs; pip_t is appended afterwards.
double rectify(double pip_t, DetectorState& state, const DetectorConfig& cfg);

/// AP_t = (1/r) * sum of RPIP_{i+1} over consecutive pairs of the window with
/// RPIP_{i+1} > RPIP_i. Appends rpip_t first.
double accumulate(double rpip_t, DetectorState& state, const DetectorConfig& cfg);

struct TraceRow {
  double t_s = 0.0;
  double pip = 0.0;
  double rpip = 0.0;
  double ap = 0.0;
  bool alarm = false;
};

/// One decision from an already computed PIP: rectify, accumulate, and alarm
/// when AP_t >= thr (refreshing both histories). `t_s` must advance by exactly 1/r.
TraceRow decide(double t_s, double pip_t, DetectorState& state, const DetectorConfig& cfg);

/// One streaming step on the trailing window ending at `t_s`.
template <typename Derived>
TraceRow step(const Eigen::MatrixBase<Derived>& window, double t_s, Predictor& model,
              DetectorState& state, const DetectorConfig& cfg) {
  return decide(t_s, model.pip(window), state, cfg);
}

/// Streams a recording at the decision rate. Steps run at t = k/r for every
/// k with a full trailing window of `len_s` seconds, restricted to
/// [from_s, to_s] when given; the state starts zeroed at the first step.
std::vector<TraceRow> run_detector(const Recording& rec, Predictor& model,
                                   const DetectorConfig& cfg, double len_s,
                                   std::optional<double> from_s = std::nullopt,
                                   std::optional<double> to_s = std::nullopt);

/// Runs the decision rule over a PIP stream sampled at 1/r spacing.
std::vector<TraceRow> replay(std::span<const double> times_s, std::span<const double> pips,
                             const DetectorConfig& cfg);

/// CSV with header t_s,pip,rpip,ap,alarm_flag; values printed round-trip exact.
void write_trace_csv(const std::filesystem::path& path, std::span<const TraceRow> rows);
std::vector<TraceRow> read_trace_csv(const std::filesystem::path& path);

}  // namespace sezdet
