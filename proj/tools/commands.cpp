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

#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "run_manifest.hpp"
#include "sezdet/checkpoint.hpp"
#include "sezdet/errors.hpp"
#include "sezdet/evaluation.hpp"
#include "sezdet/losocv.hpp"
#include "sezdet/synth.hpp"
#include "sezdet/train.hpp"

namespace sezdet::cli {
namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw DataError("cannot create output directory " + dir.string());
}

SpectralConfig spectral_for(const ModelConfig& model) {
  SpectralConfig s;
  s.scales = model.scales;
  return s;
}

void write_alarms(const fs::path& path, std::span<const TraceRow> rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "t_s\n";
  char buf[64];
  for (const auto& r : rows) {
    if (!r.alarm) continue;
    std::snprintf(buf, sizeof buf, "%.17g\n", r.t_s);
    out << buf;
  }
}

void write_report(const fs::path& path, const EvalReport& report) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json(report).dump(2) << '\n';
}

// Reads "t_s,pip[,...]" rows.
void read_pip_csv(const fs::path& path, std::vector<double>& times, std::vector<double>& pips) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("t_s,pip", 0) != 0)
    throw DataError(path.string() + ": expected a header starting with t_s,pip");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    double t = 0.0, p = 0.0;
    char comma = 0;
    if (!(ss >> t >> comma >> p) || comma != ',')
      throw DataError(path.string() + ": malformed row '" + line + "'");
    if (!(p >= 0.0 && p <= 1.0)) throw DataError(path.string() + ": PIP outside [0, 1]");
    times.push_back(t);
    pips.push_back(p);
  }
}

}  // namespace

OverlapPolicy SegmentOptions::resolve() const {
  OverlapPolicy p;
  if (policy == "chb") {
    p = OverlapPolicy::chb();
  } else if (policy == "swec") {
    p = OverlapPolicy::swec();
  } else {
    throw ConfigError("unknown overlap policy '" + policy + "' (expected chb or swec)");
  }
  if (crossing_stride) p.crossing = Stride::of_samples(*crossing_stride);
  if (postictal_s) p.postictal_exclusion_s = *postictal_s;
  return p;
}

ModelConfig ModelOptions::resolve(int channels) const {
  std::vector<int> s = scales.value_or(std::vector<int>{1, 2, 3, 4, 5});
  ModelConfig cfg;
  if (preset == "tiny") {
    cfg = ModelConfig::tiny(channels, s);
  } else if (preset == "paper") {
    cfg.channels = channels;
    cfg.scales = s;
  } else {
    throw ConfigError("unknown model preset '" + preset + "' (expected paper or tiny)");
  }
  if (fc_width) cfg.fc_width = *fc_width;
  cfg.validate();
  return cfg;
}

void cmd_synth(const SynthOptions& opt, const nlohmann::ordered_json& config) {
  ensure_dir(opt.out_dir);
  const OverlapPolicy policy = opt.segments.resolve();
  SynthConfig base;
  base.seed = opt.seed;
  base.channels = opt.channels;
  base.rate_hz = opt.rate_hz;
  base.ramp_s = opt.ramp_s;
  base.ictal_gain = opt.ictal_gain;
  if (!(opt.hours > 0.0)) throw ConfigError("synth: --hours must be positive");
  const SynthConfig cfg =
      patient_schedule(base, opt.seizures, opt.hours * 3600.0, opt.seizure_s, policy.postictal_exclusion_s);
  const Recording rec = generate(cfg);

  const fs::path header = opt.out_dir / (opt.name + ".json");
  save_recording(rec, header);

  std::vector<ManifestRecord> records;
  for (const auto& seg : extract_segments(rec, opt.segments.segment_s, policy)) {
    if (seg.tag.kind == PeriodTag::Kind::kExcluded) continue;
    records.push_back({header.filename().string(), seg.span.start_s, seg.tag.kind,
                       label_segment(seg.tag).p_ictal});
  }
  const fs::path manifest = opt.out_dir / (opt.name + ".segments.jsonl");
  write_manifest(manifest, records);

  RunManifest run{"synth", config, opt.seed, {}, {header, payload_path(header), manifest}};
  run.write(opt.out_dir / "run_synth.json");
  std::cout << "wrote " << header.string() << " (" << rec.annotations.size() << " seizures, "
            << records.size() << " labeled segments)\n";
}

void cmd_train(const TrainOptions& opt, const nlohmann::ordered_json& config) {
  ensure_dir(opt.out_dir);
  const auto records = read_manifest(opt.manifest);
  if (records.empty()) throw DataError("train: manifest " + opt.manifest.string() + " is empty");

  // Recordings referenced by the manifest, loaded once each.
  std::map<std::string, Recording> recordings;
  std::vector<fs::path> inputs{opt.manifest};
  for (const auto& r : records) {
    if (recordings.count(r.recording_id)) continue;
    const fs::path header = opt.manifest.parent_path() / r.recording_id;
    recordings.emplace(r.recording_id, load_recording(header));
    inputs.push_back(header);
    inputs.push_back(payload_path(header));
  }
  const int channels = static_cast<int>(recordings.begin()->second.channels());
  for (const auto& [id, rec] : recordings)
    if (rec.channels() != channels) throw DataError("train: recordings differ in channel count");

  const ModelConfig model = opt.model.resolve(channels);
  const SpectralConfig spectral = spectral_for(model);
  std::vector<Example> examples;
  examples.reserve(records.size());
  for (const auto& r : records) {
    if (r.tag == PeriodTag::Kind::kExcluded) continue;
    const Recording& rec = recordings.at(r.recording_id);
    const Eigen::Index L = segment_samples(rec.rate_hz, opt.segment_s);
    const auto start = static_cast<Eigen::Index>(std::llround(r.start_s * rec.rate_hz));
    if (start < 0 || start + L > rec.n_samples())
      throw DataError("train: segment at " + std::to_string(r.start_s) + " s lies outside its recording");
    if (!(r.p_ictal >= 0.0 && r.p_ictal <= 1.0)) throw DataError("train: p_ictal outside [0, 1]");
    examples.push_back({segment_features(rec.samples.middleCols(start, L), spectral),
                        SoftLabel::from_ictal(r.p_ictal), r.tag});
  }

  TrainConfig tc;
  tc.epochs = opt.epochs;
  tc.batch_size = opt.batch_size;
  tc.seed = opt.seed;
  tc.optimizer.learning_rate = opt.learning_rate;
  const TrainResult result = train(examples, model, tc);

  const fs::path ckpt = opt.out_dir / "model.ckpt";
  save_checkpoint({model, spectral, result.best, opt.seed}, ckpt);
  const fs::path curve = opt.out_dir / "training_curve.csv";
  {
    std::ofstream out(curve);
    if (!out) throw DataError("cannot write " + curve.string());
    out << "epoch,train_loss,validation_error\n";
    char buf[96];
    for (const auto& e : result.history) {
      std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", e.epoch, e.train_loss, e.validation_error);
      out << buf;
    }
  }
  RunManifest run{"train", config, opt.seed, inputs, {ckpt, curve}};
  run.write(opt.out_dir / "run_train.json");
  std::cout << "trained " << examples.size() << " examples, best epoch " << result.best_epoch
            << "; wrote " << ckpt.string() << '\n';
}

void cmd_detect(const DetectOptions& opt, const nlohmann::ordered_json& config) {
  ensure_dir(opt.out_dir);
  const Recording rec = load_recording(opt.recording);
  const Checkpoint ckpt = load_checkpoint(opt.checkpoint);
  if (ckpt.model.channels != rec.channels())
    throw DataError("detect: checkpoint expects " + std::to_string(ckpt.model.channels) +
                    " channels, recording has " + std::to_string(rec.channels()));
  Predictor predictor(ckpt.model, ckpt.spectral, ckpt.params.weights);
  const auto rows = run_detector(rec, predictor, opt.detector, opt.segment_s);

  const fs::path trace = opt.out_dir / "trace.csv";
  const fs::path alarms = opt.out_dir / "alarms.csv";
  write_trace_csv(trace, rows);
  write_alarms(alarms, rows);
  RunManifest run{"detect", config, ckpt.seed,
                  {opt.recording, payload_path(opt.recording), opt.checkpoint}, {trace, alarms}};
  run.write(opt.out_dir / "run_detect.json");
  const auto n = std::count_if(rows.begin(), rows.end(), [](const TraceRow& r) { return r.alarm; });
  std::cout << "detected " << n << " alarms over " << rows.size() << " steps; wrote " << trace.string()
            << '\n';
}

void cmd_eval(const EvalOptions& opt, const nlohmann::ordered_json& config) {
  ensure_dir(opt.out_dir);
  const Recording rec = load_recording(opt.recording);
  const OverlapPolicy policy = opt.segments.resolve();
  std::vector<fs::path> inputs{opt.recording, payload_path(opt.recording)};
  EvalReport report;
  if (opt.losocv) {
    LosocvConfig cfg;
    cfg.len_s = opt.segments.segment_s;
    cfg.policy = policy;
    cfg.model = opt.model.resolve(static_cast<int>(rec.channels()));
    cfg.spectral = spectral_for(cfg.model);
    cfg.train.epochs = opt.epochs;
    cfg.train.batch_size = opt.batch_size;
    cfg.train.seed = opt.seed;
    cfg.train.optimizer.learning_rate = opt.learning_rate;
    cfg.detector = opt.detector;
    report = losocv(rec, cfg, opt.patient, {}, [](const std::string& m) { std::cerr << m << '\n'; });
  } else {
    if (!opt.trace) throw ConfigError("eval: --trace is required unless --losocv is given");
    const auto rows = read_trace_csv(*opt.trace);
    inputs.push_back(*opt.trace);
    report = evaluate_trace(opt.patient, rec, rows, opt.segments.segment_s, policy.postictal_exclusion_s);
  }
  const fs::path out = opt.out_dir / "report.json";
  write_report(out, report);
  RunManifest run{"eval", config, opt.seed, inputs, {out}};
  run.write(opt.out_dir / "run_eval.json");
  std::cout << "sensitivity " << report.n_detected_crossing << "/" << report.n_total << "; wrote "
            << out.string() << '\n';
}

void cmd_export_trace(const ExportTraceOptions& opt, const nlohmann::ordered_json& config) {
  ensure_dir(opt.out_dir);
  std::vector<double> times, pips;
  read_pip_csv(opt.pips, times, pips);
  const auto rows = replay(times, pips, opt.detector);
  const fs::path trace = opt.out_dir / "trace.csv";
  const fs::path alarms = opt.out_dir / "alarms.csv";
  write_trace_csv(trace, rows);
  write_alarms(alarms, rows);
  RunManifest run{"export-trace", config, 0, {opt.pips}, {trace, alarms}};
  run.write(opt.out_dir / "run_export-trace.json");
  std::cout << "replayed " << rows.size() << " steps; wrote " << trace.string() << '\n';
}

}  // namespace sezdet::cli
