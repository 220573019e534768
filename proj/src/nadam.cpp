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

#include "sezdet/nadam.hpp"

#include <cmath>

#include "sezdet/errors.hpp"

namespace sezdet {

double nadam_momentum(const NadamConfig& cfg, std::int64_t t) {
  return cfg.beta1 * (1.0 - 0.5 * std::pow(0.96, static_cast<double>(t) * cfg.momentum_decay));
}

void nadam_step(ModelParams& params, const Eigen::VectorXd& grads, const NadamConfig& cfg) {
  if (grads.size() != params.weights.size())
    throw DataError("nadam: gradient length does not match parameters");
  if (!grads.allFinite()) throw DataError("nadam: non-finite gradient");
  if (params.step < 0) throw ConfigError("nadam: negative step counter");
  if (params.m.size() != params.weights.size()) params.m = Eigen::VectorXd::Zero(grads.size());
  if (params.v.size() != params.weights.size()) params.v = Eigen::VectorXd::Zero(grads.size());

  const std::int64_t t = params.step + 1;
  const double mu = nadam_momentum(cfg, t);
  const double mu_next = nadam_momentum(cfg, t + 1);
  const double mu_product = params.mu_product * mu;
  const double mu_product_next = mu_product * mu_next;
  const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));

  params.m = cfg.beta1 * params.m + (1.0 - cfg.beta1) * grads;
  params.v = cfg.beta2 * params.v + (1.0 - cfg.beta2) * grads.cwiseProduct(grads);
  const Eigen::ArrayXd denom = (params.v.array() / bias2).sqrt() + cfg.eps;
  params.weights.array() -=
      cfg.learning_rate * ((mu_next / (1.0 - mu_product_next)) * params.m.array() +
                           ((1.0 - mu) / (1.0 - mu_product)) * grads.array()) /
      denom;
  params.mu_product = mu_product;
  params.step = t;
}

}  // namespace sezdet
