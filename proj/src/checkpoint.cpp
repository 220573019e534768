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

#include "sezdet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "sezdet/errors.hpp"

namespace sezdet {
namespace {

void write_f64(std::ostream& out, const Eigen::VectorXd& v) {
  static_assert(std::endian::native == std::endian::little,
                "checkpoint payload assumes a little-endian host");
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

Eigen::VectorXd read_f64(std::istream& in, Eigen::Index n) {
  Eigen::VectorXd v(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw DataError("checkpoint: truncated payload");
  return v;
}

const char* window_name(WindowFunction w) {
  return w == WindowFunction::kHann ? "hann" : "rectangular";
}

}  // namespace

nlohmann::ordered_json to_json(const ModelConfig& cfg) {
  nlohmann::ordered_json j;
  j["channels"] = cfg.channels;
  j["kept_bins"] = cfg.kept_bins;
  j["scales"] = cfg.scales;
  j["conv3d_filters"] = cfg.conv3d_filters;
  j["fc_width"] = cfg.fc_width;
  j["conv2d_filters"] = cfg.conv2d_filters;
  j["head_widths"] = cfg.head_widths;
  j["channel_width_multiplier"] = cfg.channel_width_multiplier;
  return j;
}

nlohmann::ordered_json to_json(const SpectralConfig& cfg) {
  nlohmann::ordered_json j;
  j["scales"] = cfg.scales;
  j["nfft"] = cfg.nfft;
  j["kept_bins"] = cfg.kept_bins;
  j["window"] = window_name(cfg.window);
  return j;
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig cfg;
  cfg.channels = j.at("channels").get<int>();
  cfg.kept_bins = j.at("kept_bins").get<int>();
  cfg.scales = j.at("scales").get<std::vector<int>>();
  cfg.conv3d_filters = j.at("conv3d_filters").get<std::array<int, 3>>();
  cfg.fc_width = j.at("fc_width").get<int>();
  cfg.conv2d_filters = j.at("conv2d_filters").get<std::array<int, 3>>();
  cfg.head_widths = j.at("head_widths").get<std::vector<int>>();
  cfg.channel_width_multiplier = j.at("channel_width_multiplier").get<double>();
  cfg.validate();
  return cfg;
}

SpectralConfig spectral_config_from_json(const nlohmann::json& j) {
  SpectralConfig cfg;
  cfg.scales = j.at("scales").get<std::vector<int>>();
  cfg.nfft = j.at("nfft").get<int>();
  cfg.kept_bins = j.at("kept_bins").get<int>();
  const auto window = j.at("window").get<std::string>();
  if (window == "hann")
    cfg.window = WindowFunction::kHann;
  else if (window == "rectangular")
    cfg.window = WindowFunction::kRectangular;
  else
    throw DataError("unknown window function '" + window + "'");
  cfg.validate();
  return cfg;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const Network net(ckpt.model);
  const auto n = net.parameter_count();
  if (ckpt.params.weights.size() != n || ckpt.params.m.size() != n || ckpt.params.v.size() != n)
    throw DataError("checkpoint: parameter vectors do not match the model layout");

  nlohmann::ordered_json header;
  header["format"] = "sezdet-checkpoint";
  header["version"] = 1;
  header["model"] = to_json(ckpt.model);
  header["spectral"] = to_json(ckpt.spectral);
  header["step"] = ckpt.params.step;
  header["mu_product"] = ckpt.params.mu_product;
  header["seed"] = ckpt.seed;
  header["n_params"] = n;
  header["dtype"] = "f64le";
  header["layout"] = nlohmann::ordered_json::array();
  for (const auto& b : net.layout())
    header["layout"].push_back({{"name", b.name}, {"offset", b.offset}, {"size", b.size}});

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out << header.dump() << '\n';
  write_f64(out, ckpt.params.weights);
  write_f64(out, ckpt.params.m);
  write_f64(out, ckpt.params.v);
  if (!out) throw DataError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("checkpoint: missing header");
  Checkpoint ckpt;
  Eigen::Index n = 0;
  try {
    const auto header = nlohmann::json::parse(line);
    if (header.at("format").get<std::string>() != "sezdet-checkpoint")
      throw DataError("checkpoint: unrecognized format");
    ckpt.model = model_config_from_json(header.at("model"));
    ckpt.spectral = spectral_config_from_json(header.at("spectral"));
    ckpt.params.step = header.at("step").get<std::int64_t>();
    ckpt.params.mu_product = header.at("mu_product").get<double>();
    ckpt.seed = header.at("seed").get<std::uint64_t>();
    n = header.at("n_params").get<Eigen::Index>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint: malformed header: " + std::string(e.what()));
  }
  if (n != parameter_count(ckpt.model))
    throw DataError("checkpoint: parameter count disagrees with the model configuration");
  ckpt.params.weights = read_f64(in, n);
  ckpt.params.m = read_f64(in, n);
  ckpt.params.v = read_f64(in, n);
  if (in.peek() != std::char_traits<char>::eof())
    throw DataError("checkpoint: trailing bytes after payload");
  return ckpt;
}

}  // namespace sezdet
