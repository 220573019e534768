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
#include <functional>
#include <span>
#include <vector>

#include "sezdet/labeling.hpp"
#include "sezdet/model.hpp"
#include "sezdet/nadam.hpp"
#include "sezdet/signal_io.hpp"
#include "sezdet/spectral.hpp"

namespace sezdet {

/// A model input with its soft label.
struct Example {
  MultiscaleSpectrogram features;
  SoftLabel label;
  PeriodTag::Kind kind = PeriodTag::Kind::kInterictal;
};

/// Features and labels for every non-excluded segment.
std::vector<Example> build_examples(const Recording& rec, std::span<const TaggedSegment> segments,
                                    const SpectralConfig& spectral);

struct TrainConfig {
  int epochs = 20;
  int batch_size = 32;
  NadamConfig optimizer;
  std::uint64_t seed = 0;
  /// Subsample interictal examples each epoch to the ictal + crossing count.
  bool balance_interictal = true;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double validation_error = 0.0;
};

/// Lower is better. Receives the weights after each epoch.
using ValidationFn = std::function<double(const Eigen::VectorXd& weights)>;

struct TrainResult {
  ModelParams best;
  ModelParams last;
  int best_epoch = 0;
  std::vector<EpochStats> history;
};

/// Mean |P_ictal - PIP| over the crossing examples.
double crossing_error(const Network& net, const Eigen::VectorXd& weights,
                      std::span<const Example* const> examples);

/// Mini-batch Nadam training. Deterministic for a given seed: initialization,
/// interictal subsampling and shuffle order all derive from it. Keeps the
/// epoch with the lowest validation error (training-set crossing error when
/// `validation` is empty).
TrainResult train(std::span<const Example> dataset, const ModelConfig& cfg,
                  const TrainConfig& train_cfg, const ValidationFn& validation = {});

/// Same, over a subset referenced by pointer (no feature copies).
TrainResult train(std::span<const Example* const> dataset, const ModelConfig& cfg,
                  const TrainConfig& train_cfg, const ValidationFn& validation = {});

}  // namespace sezdet
