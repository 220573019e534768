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

// Command-line front end. Settings resolve as: flag, then TOML config file,
// then built-in default.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <toml.hpp>

#include "commands.hpp"
#include "sezdet/errors.hpp"

namespace {

using namespace sezdet;
using namespace sezdet::cli;
using nlohmann::ordered_json;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

class ConfigFile {
 public:
  void load(const std::optional<fs::path>& path) {
    if (!path) return;
    try {
      table_ = toml::parse_file(path->string());
    } catch (const toml::parse_error& e) {
      throw ConfigError("config " + path->string() + ": " + std::string(e.description()));
    }
  }

  template <typename T>
  std::optional<T> get(std::string_view section, std::string_view key) const {
    const auto node = section.empty() ? table_[key] : table_[section][key];
    if (!node) return std::nullopt;
    if constexpr (std::is_same_v<T, std::string>) {
      if (auto v = node.template value<std::string>()) return *v;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (auto v = node.template value<bool>()) return *v;
    } else if constexpr (std::is_integral_v<T>) {
      if (auto v = node.template value<std::int64_t>()) return static_cast<T>(*v);
    } else {
      if (auto v = node.template value<double>()) return static_cast<T>(*v);
    }
    throw ConfigError("config: [" + std::string(section) + "] " + std::string(key) + " has the wrong type");
  }

  template <typename T>
  std::optional<std::vector<T>> get_list(std::string_view section, std::string_view key) const {
    const auto node = table_[section][key];
    if (!node) return std::nullopt;
    const auto* arr = node.as_array();
    if (!arr) throw ConfigError("config: [" + std::string(section) + "] " + std::string(key) + " must be an array");
    std::vector<T> out;
    for (const auto& el : *arr) {
      std::optional<T> v;
      if constexpr (std::is_integral_v<T>) {
        if (auto x = el.template value<std::int64_t>()) v = static_cast<T>(*x);
      } else {
        if (auto x = el.template value<double>()) v = *x;
      }
      if (!v) throw ConfigError("config: [" + std::string(section) + "] " + std::string(key) + " has a non-numeric entry");
      out.push_back(*v);
    }
    return out;
  }

 private:
  toml::table table_;
};

std::optional<fs::path> file_path(const ConfigFile& f, std::string_view key) {
  if (auto s = f.get<std::string>("", key)) return fs::path(*s);
  return std::nullopt;
}

template <typename T>
T pick(const std::optional<T>& flag, const std::optional<T>& file, T fallback) {
  if (flag) return *flag;
  if (file) return *file;
  return fallback;
}

// Shared flags of every subcommand.
struct Common {
  std::optional<fs::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> out_dir;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "TOML configuration file")->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "Seed for every random choice");
    app->add_option("--out-dir", out_dir, "Output directory");
  }
};

struct SegmentFlags {
  std::optional<double> segment_s;
  std::optional<std::string> policy;
  std::optional<long> crossing_stride;
  std::optional<double> postictal_s;

  void attach(CLI::App* app) {
    app->add_option("--segment-s", segment_s, "Segment length in seconds (default 5)");
    app->add_option("--policy", policy, "Overlap policy: chb or swec (default chb)");
    app->add_option("--crossing-stride", crossing_stride, "Crossing stride in samples");
    app->add_option("--postictal-s", postictal_s, "Post-ictal exclusion in seconds");
  }
  SegmentOptions resolve(const ConfigFile& f) const {
    SegmentOptions o;
    o.segment_s = pick(segment_s, f.get<double>("segments", "segment_s"), o.segment_s);
    o.policy = pick(policy, f.get<std::string>("segments", "policy"), o.policy);
    if (auto v = crossing_stride ? crossing_stride : f.get<long>("segments", "crossing_stride"))
      o.crossing_stride = v;
    if (auto v = postictal_s ? postictal_s : f.get<double>("segments", "postictal_s"))
      o.postictal_s = v;
    return o;
  }
};

struct ModelFlags {
  std::optional<std::string> preset;
  std::optional<int> fc_width;
  std::vector<int> scales;
  CLI::Option* scales_opt = nullptr;

  void attach(CLI::App* app) {
    app->add_option("--model", preset, "Architecture preset: paper or tiny (default paper)");
    app->add_option("--fc-width", fc_width, "Per-scale fully connected width");
    scales_opt = app->add_option("--scales", scales, "Comma-separated STFT scales")->delimiter(',');
  }
  ModelOptions resolve(const ConfigFile& f) const {
    ModelOptions o;
    o.preset = pick(preset, f.get<std::string>("model", "preset"), o.preset);
    if (auto v = fc_width ? fc_width : f.get<int>("model", "fc_width")) o.fc_width = v;
    if (scales_opt->count() > 0)
      o.scales = scales;
    else if (auto v = f.get_list<int>("model", "scales"))
      o.scales = v;
    return o;
  }
};

struct TrainFlags {
  std::optional<int> epochs, batch;
  std::optional<double> lr;

  void attach(CLI::App* app) {
    app->add_option("--epochs", epochs, "Training epochs (default 20)");
    app->add_option("--batch", batch, "Mini-batch size (default 32)");
    app->add_option("--lr", lr, "Nadam learning rate (default 1e-4)");
  }
};

struct DetectorFlags {
  std::optional<double> rate, thr, lockout;
  std::vector<double> lambdas;
  CLI::Option* lambdas_opt = nullptr;

  void attach(CLI::App* app) {
    app->add_option("--rate", rate, "Decisions per second (default 10)");
    app->add_option("--thr", thr, "Alarm threshold on the accumulated probability (default 0.5)");
    lambdas_opt = app->add_option("--lambdas", lambdas, "Four comma-separated rectification weights")
                      ->delimiter(',')
                      ->expected(4);
    app->add_option("--lockout-s", lockout, "Alarm lockout in seconds (default 0)");
  }
  DetectorConfig resolve(const ConfigFile& f) const {
    DetectorConfig d;
    d.rate_hz = pick(rate, f.get<double>("detector", "rate"), d.rate_hz);
    d.thr = pick(thr, f.get<double>("detector", "thr"), d.thr);
    d.lockout_s = pick(lockout, f.get<double>("detector", "lockout_s"), d.lockout_s);
    std::optional<std::vector<double>> l;
    if (lambdas_opt->count() > 0)
      l = lambdas;
    else
      l = f.get_list<double>("detector", "lambdas");
    if (l) {
      if (l->size() != 4) throw ConfigError("detector: exactly four lambdas required");
      std::copy(l->begin(), l->end(), d.lambdas.begin());
    }
    d.validate();
    return d;
  }
};

ordered_json to_json(const SegmentOptions& s) {
  ordered_json j{{"segment_s", s.segment_s}, {"policy", s.policy}};
  j["crossing_stride"] = s.crossing_stride ? ordered_json(*s.crossing_stride) : ordered_json(nullptr);
  j["postictal_s"] = s.postictal_s ? ordered_json(*s.postictal_s) : ordered_json(nullptr);
  return j;
}

ordered_json to_json(const ModelOptions& m) {
  ordered_json j{{"preset", m.preset}};
  j["fc_width"] = m.fc_width ? ordered_json(*m.fc_width) : ordered_json(nullptr);
  j["scales"] = m.scales ? ordered_json(*m.scales) : ordered_json(nullptr);
  return j;
}

ordered_json to_json(const DetectorConfig& d) {
  return {{"rate", d.rate_hz}, {"thr", d.thr}, {"lambdas", d.lambdas}, {"lockout_s", d.lockout_s}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming seizure-onset detection: synthesis, training, detection and evaluation"};
  app.require_subcommand(1);

  Common c_synth, c_train, c_detect, c_eval, c_export;
  SegmentFlags seg_synth, seg_eval;
  ModelFlags model_train, model_eval;
  TrainFlags tf_train, tf_eval;
  DetectorFlags det_detect, det_eval, det_export;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic annotated recording");
  c_synth.attach(synth);
  seg_synth.attach(synth);
  std::optional<int> channels, seizures;
  std::optional<double> rate_hz, hours, seizure_s, ramp_s, gain;
  std::optional<std::string> name;
  synth->add_option("--channels", channels, "Channel count (default 4)");
  synth->add_option("--rate-hz", rate_hz, "Sampling rate (default 256)");
  synth->add_option("--hours", hours, "Interictal hours")->required();
  synth->add_option("--seizures", seizures, "Number of seizures")->required();
  synth->add_option("--seizure-s", seizure_s, "Seizure duration in seconds (default 40)");
  synth->add_option("--ramp-s", ramp_s, "Ictal amplitude ramp in seconds (default 2)");
  synth->add_option("--ictal-gain", gain, "Ictal amplitude relative to the noise (default 3)");
  synth->add_option("--name", name, "Recording file stem (default synth)");

  auto* train = app.add_subcommand("train", "Train a model from a labeled segment manifest");
  c_train.attach(train);
  model_train.attach(train);
  tf_train.attach(train);
  fs::path manifest;
  std::optional<double> train_segment_s;
  train->add_option("--manifest", manifest, "Labeled segment manifest (JSON lines)")->required();
  train->add_option("--segment-s", train_segment_s, "Segment length in seconds (default 5)");

  auto* detect = app.add_subcommand("detect", "Stream a recording through a trained model");
  c_detect.attach(detect);
  det_detect.attach(detect);
  fs::path det_recording, det_checkpoint;
  std::optional<double> det_segment_s;
  detect->add_option("--recording", det_recording, "Recording header")->required();
  detect->add_option("--checkpoint", det_checkpoint, "Model checkpoint")->required();
  detect->add_option("--segment-s", det_segment_s, "Segment length in seconds (default 5)");

  auto* eval = app.add_subcommand("eval", "Score a trace, or run leave-one-seizure-out evaluation");
  c_eval.attach(eval);
  seg_eval.attach(eval);
  model_eval.attach(eval);
  tf_eval.attach(eval);
  det_eval.attach(eval);
  std::optional<fs::path> eval_trace;
  fs::path eval_recording;
  std::optional<std::string> patient;
  bool losocv = false;
  eval->add_option("--trace", eval_trace, "Detector trace CSV");
  eval->add_option("--recording", eval_recording, "Recording header with annotations")->required();
  eval->add_option("--patient", patient, "Patient label for the report");
  eval->add_flag("--losocv", losocv, "Train and evaluate one fold per seizure");

  auto* export_trace = app.add_subcommand("export-trace", "Replay a PIP stream through the decision rule");
  c_export.attach(export_trace);
  det_export.attach(export_trace);
  fs::path pips;
  export_trace->add_option("--pips", pips, "CSV with columns t_s,pip")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    ConfigFile file;
    if (synth->parsed()) {
      file.load(c_synth.config);
      SynthOptions o;
      o.seed = pick(c_synth.seed, file.get<std::uint64_t>("", "seed"), o.seed);
      o.channels = pick(channels, file.get<int>("synth", "channels"), o.channels);
      o.rate_hz = pick(rate_hz, file.get<double>("synth", "rate_hz"), o.rate_hz);
      o.hours = *hours;
      o.seizures = *seizures;
      o.seizure_s = pick(seizure_s, file.get<double>("synth", "seizure_s"), o.seizure_s);
      o.ramp_s = pick(ramp_s, file.get<double>("synth", "ramp_s"), o.ramp_s);
      o.ictal_gain = pick(gain, file.get<double>("synth", "ictal_gain"), o.ictal_gain);
      o.name = pick(name, file.get<std::string>("synth", "name"), o.name);
      o.segments = seg_synth.resolve(file);
      o.out_dir = pick(c_synth.out_dir, file_path(file, "out_dir"), o.out_dir);
      const ordered_json cfg{{"seed", o.seed},         {"channels", o.channels}, {"rate_hz", o.rate_hz},
                             {"hours", o.hours},       {"seizures", o.seizures}, {"seizure_s", o.seizure_s},
                             {"ramp_s", o.ramp_s},     {"ictal_gain", o.ictal_gain}, {"name", o.name},
                             {"segments", to_json(o.segments)}};
      cmd_synth(o, cfg);
    } else if (train->parsed()) {
      file.load(c_train.config);
      TrainOptions o;
      o.manifest = manifest;
      o.seed = pick(c_train.seed, file.get<std::uint64_t>("", "seed"), o.seed);
      o.epochs = pick(tf_train.epochs, file.get<int>("train", "epochs"), o.epochs);
      o.batch_size = pick(tf_train.batch, file.get<int>("train", "batch"), o.batch_size);
      o.learning_rate = pick(tf_train.lr, file.get<double>("train", "lr"), o.learning_rate);
      o.segment_s = pick(train_segment_s, file.get<double>("segments", "segment_s"), o.segment_s);
      o.model = model_train.resolve(file);
      o.out_dir = pick(c_train.out_dir, file_path(file, "out_dir"), o.out_dir);
      const ordered_json cfg{{"seed", o.seed}, {"epochs", o.epochs}, {"batch", o.batch_size},
                             {"lr", o.learning_rate}, {"segment_s", o.segment_s},
                             {"model", to_json(o.model)}};
      cmd_train(o, cfg);
    } else if (detect->parsed()) {
      file.load(c_detect.config);
      DetectOptions o;
      o.recording = det_recording;
      o.checkpoint = det_checkpoint;
      o.segment_s = pick(det_segment_s, file.get<double>("segments", "segment_s"), o.segment_s);
      o.detector = det_detect.resolve(file);
      o.out_dir = pick(c_detect.out_dir, file_path(file, "out_dir"), o.out_dir);
      const ordered_json cfg{{"segment_s", o.segment_s}, {"detector", to_json(o.detector)}};
      cmd_detect(o, cfg);
    } else if (eval->parsed()) {
      file.load(c_eval.config);
      EvalOptions o;
      o.trace = eval_trace;
      o.recording = eval_recording;
      o.losocv = losocv;
      o.patient = pick(patient, file.get<std::string>("eval", "patient"), o.patient);
      o.seed = pick(c_eval.seed, file.get<std::uint64_t>("", "seed"), o.seed);
      o.segments = seg_eval.resolve(file);
      o.epochs = pick(tf_eval.epochs, file.get<int>("train", "epochs"), o.epochs);
      o.batch_size = pick(tf_eval.batch, file.get<int>("train", "batch"), o.batch_size);
      o.learning_rate = pick(tf_eval.lr, file.get<double>("train", "lr"), o.learning_rate);
      o.model = model_eval.resolve(file);
      o.detector = det_eval.resolve(file);
      o.out_dir = pick(c_eval.out_dir, file_path(file, "out_dir"), o.out_dir);
      ordered_json cfg{{"patient", o.patient}, {"losocv", o.losocv}, {"seed", o.seed},
                       {"segments", to_json(o.segments)}, {"detector", to_json(o.detector)}};
      if (o.losocv) {
        cfg["epochs"] = o.epochs;
        cfg["batch"] = o.batch_size;
        cfg["lr"] = o.learning_rate;
        cfg["model"] = to_json(o.model);
      }
      cmd_eval(o, cfg);
    } else if (export_trace->parsed()) {
      file.load(c_export.config);
      ExportTraceOptions o;
      o.pips = pips;
      o.detector = det_export.resolve(file);
      o.out_dir = pick(c_export.out_dir, file_path(file, "out_dir"), o.out_dir);
      cmd_export_trace(o, {{"detector", to_json(o.detector)}});
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
