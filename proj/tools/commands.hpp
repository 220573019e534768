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
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sezdet/detector.hpp"
#include "sezdet/model.hpp"
#include "sezdet/signal_io.hpp"

namespace sezdet::cli {

namespace fs = std::filesystem;

struct SegmentOptions {
  double segment_s = 5.0;
  std::string policy = "chb";  // chb | swec
  std::optional<long> crossing_stride;  // samples; overrides the policy
  std::optional<double> postictal_s;    // overrides the policy

  OverlapPolicy resolve() const;
};

struct ModelOptions {
  std::string preset = "paper";  // paper | tiny
  std::optional<int> fc_width;
  std::optional<std::vector<int>> scales;

  ModelConfig resolve(int channels) const;
};

struct SynthOptions {
  std::uint64_t seed = 0;
  int channels = 4;
  double rate_hz = 256.0;
  double hours = 2.0;  // interictal hours
  int seizures = 4;
  double seizure_s = 40.0;
  double ramp_s = 2.0;
  double ictal_gain = 3.0;
  std::string name = "synth";
  SegmentOptions segments;
  fs::path out_dir = ".";
};

struct TrainOptions {
  fs::path manifest;
  std::uint64_t seed = 0;
  int epochs = 20;
  int batch_size = 32;
  double learning_rate = 1e-4;
  double segment_s = 5.0;
  ModelOptions model;
  fs::path out_dir = ".";
};

struct DetectOptions {
  fs::path recording;
  fs::path checkpoint;
  double segment_s = 5.0;
  DetectorConfig detector;
  fs::path out_dir = ".";
};

struct EvalOptions {
  std::optional<fs::path> trace;
  fs::path recording;
  std::string patient = "patient";
  bool losocv = false;
  std::uint64_t seed = 0;
  SegmentOptions segments;
  // LOSOCV mode only.
  int epochs = 20;
  int batch_size = 32;
  double learning_rate = 1e-4;
  ModelOptions model;
  DetectorConfig detector;
  fs::path out_dir = ".";
};

struct ExportTraceOptions {
  fs::path pips;
  DetectorConfig detector;
  fs::path out_dir = ".";
};

/// Each command writes its outputs plus `run_<command>.json` into out_dir.
/// `config` is the resolved configuration snapshot recorded in the manifest.
void cmd_synth(const SynthOptions& opt, const nlohmann::ordered_json& config);
void cmd_train(const TrainOptions& opt, const nlohmann::ordered_json& config);
void cmd_detect(const DetectOptions& opt, const nlohmann::ordered_json& config);
void cmd_eval(const EvalOptions& opt, const nlohmann::ordered_json& config);
void cmd_export_trace(const ExportTraceOptions& opt, const nlohmann::ordered_json& config);

}  // namespace sezdet::cli
