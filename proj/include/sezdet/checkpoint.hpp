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
#include <filesystem>

#include <json.hpp>

#include "sezdet/model.hpp"
#include "sezdet/spectral.hpp"

namespace sezdet {

/// On disk: one line of JSON (configs, step counter, seed, layout) followed
/// by raw little-endian float64 payload: weights, then Nadam m, then Nadam v,
/// each in layout order.
struct Checkpoint {
  ModelConfig model;
  SpectralConfig spectral;
  ModelParams params;
  std::uint64_t seed = 0;
};

nlohmann::ordered_json to_json(const ModelConfig& cfg);
nlohmann::ordered_json to_json(const SpectralConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j);
SpectralConfig spectral_config_from_json(const nlohmann::json& j);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace sezdet
