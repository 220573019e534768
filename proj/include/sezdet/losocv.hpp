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

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sezdet/detector.hpp"
#include "sezdet/evaluation.hpp"
#include "sezdet/model.hpp"
#include "sezdet/signal_io.hpp"
#include "sezdet/spectral.hpp"
#include "sezdet/train.hpp"

namespace sezdet {

struct LosocvConfig {
  double len_s = 5.0;
  OverlapPolicy policy = OverlapPolicy::chb();
  SpectralConfig spectral;
  ModelConfig model;
  TrainConfig train;
  DetectorConfig detector;
};

struct Fold {
  std::size_t held_out = 0;
  std::vector<std::size_t> training;
};

/// Leave-one-seizure-out folds; throws DataError for fewer than two seizures.
std::vector<Fold> make_folds(std::size_t n_seizures);

/// Index of the annotation a crossing/ictal/excluded segment belongs to.
std::optional<std::size_t> owning_seizure(const Recording& rec, const TaggedSegment& seg);

/// Trains on the given examples, selecting epochs with `validation`.
using TrainFn = std::function<TrainResult(std::span<const Example* const> examples,
                                          const ValidationFn& validation)>;

using ProgressFn = std::function<void(const std::string&)>;

/// Runs every fold: train on the other seizures plus all interictal
/// segments (checkpoint chosen by the held-out seizure's crossing RPIP
/// error), stream the whole recording, then score the held-out seizure.
/// Each fold is charged the full interictal record for its FDR.
EvalReport losocv(const Recording& rec, const LosocvConfig& cfg, std::string patient,
                  TrainFn train_fn = {}, ProgressFn progress = {});

}  // namespace sezdet
