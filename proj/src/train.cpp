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

#include "sezdet/train.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "sezdet/errors.hpp"

namespace sezdet {
namespace {

// Fisher-Yates on a 64-bit engine; the modulo bias is far below anything observable.
void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
}

}  // namespace

std::vector<Example> build_examples(const Recording& rec, std::span<const TaggedSegment> segments,
                                    const SpectralConfig& spectral) {
  std::vector<Example> out;
  out.reserve(segments.size());
  for (const auto& seg : segments) {
    if (seg.tag.kind == PeriodTag::Kind::kExcluded) continue;
    out.push_back({segment_features(segment_view(rec, seg.span), spectral),
                   label_segment(seg.tag), seg.tag.kind});
  }
  return out;
}

double crossing_error(const Network& net, const Eigen::VectorXd& weights,
                      std::span<const Example* const> examples) {
  Workspace ws;
  double total = 0.0;
  std::size_t n = 0;
  for (const Example* ex : examples) {
    if (ex->kind != PeriodTag::Kind::kCrossing) continue;
    total += std::abs(ex->label.p_ictal - net.forward(ex->features, weights, ws).ictal);
    ++n;
  }
  if (n == 0) throw DataError("crossing_error: no crossing examples");
  return total / static_cast<double>(n);
}

TrainResult train(std::span<const Example> dataset, const ModelConfig& cfg,
                  const TrainConfig& train_cfg, const ValidationFn& validation) {
  std::vector<const Example*> refs;
  refs.reserve(dataset.size());
  for (const auto& ex : dataset) refs.push_back(&ex);
  return train(std::span<const Example* const>(refs), cfg, train_cfg, validation);
}

TrainResult train(std::span<const Example* const> dataset, const ModelConfig& cfg,
                  const TrainConfig& train_cfg, const ValidationFn& validation) {
  if (dataset.empty()) throw DataError("train: empty dataset");
  if (train_cfg.epochs < 1 || train_cfg.batch_size < 1)
    throw ConfigError("train: epochs and batch size must be >= 1");

  std::vector<std::size_t> interictal, others;
  bool has_ictal = false, has_crossing = false;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    switch (dataset[i]->kind) {
      case PeriodTag::Kind::kInterictal: interictal.push_back(i); break;
      case PeriodTag::Kind::kIctal: has_ictal = true; others.push_back(i); break;
      case PeriodTag::Kind::kCrossing: has_crossing = true; others.push_back(i); break;
      case PeriodTag::Kind::kExcluded: throw DataError("train: excluded segment in dataset");
    }
  }
  if (interictal.empty() || !has_ictal || !has_crossing)
    throw DataError("train: dataset must contain interictal, ictal and crossing segments");

  const Network net(cfg);
  std::mt19937_64 rng(train_cfg.seed);
  ModelParams params = ModelParams::from_weights(net.initialize(rng()));

  ValidationFn validate = validation;
  if (!validate) {
    validate = [&](const Eigen::VectorXd& w) { return crossing_error(net, w, dataset); };
  }

  TrainResult result;
  double best_error = std::numeric_limits<double>::infinity();
  Workspace ws;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(net.parameter_count());

  for (int epoch = 1; epoch <= train_cfg.epochs; ++epoch) {
    std::vector<std::size_t> order = others;
    if (train_cfg.balance_interictal && interictal.size() > others.size()) {
      shuffle(interictal, rng);
      order.insert(order.end(), interictal.begin(),
                   interictal.begin() + static_cast<std::ptrdiff_t>(others.size()));
    } else {
      order.insert(order.end(), interictal.begin(), interictal.end());
    }
    shuffle(order, rng);

    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(train_cfg.batch_size)) {
      const std::size_t end =
          std::min(order.size(), begin + static_cast<std::size_t>(train_cfg.batch_size));
      grad.setZero();
      for (std::size_t k = begin; k < end; ++k) {
        const Example& ex = *dataset[order[k]];
        epoch_loss += net.backward(ex.features, params.weights, ex.label, ws, grad);
      }
      grad /= static_cast<double>(end - begin);
      nadam_step(params, grad, train_cfg.optimizer);
    }

    EpochStats stats{epoch, epoch_loss / static_cast<double>(order.size()),
                     validate(params.weights)};
    result.history.push_back(stats);
    if (stats.validation_error < best_error) {
      best_error = stats.validation_error;
      result.best = params;
      result.best_epoch = epoch;
    }
  }
  result.last = params;
  if (result.best_epoch == 0) {  // every validation error was NaN
    result.best = params;
    result.best_epoch = train_cfg.epochs;
  }
  return result;
}

}  // namespace sezdet
