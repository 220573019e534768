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

#include <Eigen/Dense>

#include "sezdet/model.hpp"

namespace sezdet {

/// Nadam hyperparameters. `momentum_decay` drives the momentum schedule
/// mu_t = beta1 * (1 - 0.5 * 0.96^(t * momentum_decay)).
struct NadamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double momentum_decay = 4e-3;
};

/// Momentum coefficient mu_t for step t (1-based).
double nadam_momentum(const NadamConfig& cfg, std::int64_t t);

/// One Nesterov-accelerated Adam update:
///
///   m_t   = beta1 m + (1 - beta1) g
///   v_t   = beta2 v + (1 - beta2) g^2
///   m_hat = mu_{t+1} m_t / (1 - prod_{i<=t+1} mu_i) + (1 - mu_t) g / (1 - prod_{i<=t} mu_i)
///   v_hat = v_t / (1 - beta2^t)
///   w    -= lr m_hat / (sqrt(v_hat) + eps)
///
/// Throws DataError on non-finite gradients, leaving `params` untouched.
void nadam_step(ModelParams& params, const Eigen::VectorXd& grads, const NadamConfig& cfg);

}  // namespace sezdet
