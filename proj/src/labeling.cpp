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

#include "sezdet/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "sezdet/errors.hpp"

namespace sezdet {

PeriodTag PeriodTag::crossing(double fraction) {
  return {Kind::kCrossing, std::clamp(fraction, 0.0, 1.0)};
}

PeriodTag crossing_tag(double segment_end_s, double onset_s, double len_s) {
  if (!(len_s > 0.0)) throw ConfigError("crossing_tag: segment length must be positive");
  return PeriodTag::crossing((segment_end_s - onset_s) / len_s);
}

std::string_view to_string(PeriodTag::Kind kind) {
  switch (kind) {
    case PeriodTag::Kind::kInterictal: return "interictal";
    case PeriodTag::Kind::kIctal: return "ictal";
    case PeriodTag::Kind::kCrossing: return "crossing";
    case PeriodTag::Kind::kExcluded: return "excluded";
  }
  return "unknown";
}

PeriodTag::Kind parse_period_kind(std::string_view name) {
  if (name == "interictal") return PeriodTag::Kind::kInterictal;
  if (name == "ictal") return PeriodTag::Kind::kIctal;
  if (name == "crossing") return PeriodTag::Kind::kCrossing;
  if (name == "excluded") return PeriodTag::Kind::kExcluded;
  throw DataError("unknown period tag '" + std::string(name) + "'");
}

int crossing_level(double fraction) {
  if (std::isnan(fraction)) throw ConfigError("crossing_level: fraction is NaN");
  // fraction <= 0.05 p  <=>  p >= fraction / 0.05. The division is not exact
  // in binary, so confirm the candidate against the inequality itself.
  int p = static_cast<int>(std::ceil(fraction / kCrossingStep));
  p = std::clamp(p, 0, kCrossingLevels - 1);
  while (p > 0 && fraction <= kCrossingStep * (p - 1)) --p;
  while (p < kCrossingLevels - 1 && fraction > kCrossingStep * p) ++p;
  return p;
}

SoftLabel label_segment(const PeriodTag& tag) {
  switch (tag.kind) {
    case PeriodTag::Kind::kInterictal: return {1.0, 0.0};
    case PeriodTag::Kind::kIctal: return {0.0, 1.0};
    case PeriodTag::Kind::kCrossing: {
      const double p_ictal = kCrossingStep * crossing_level(tag.fraction);
      return SoftLabel::from_ictal(p_ictal);
    }
    case PeriodTag::Kind::kExcluded: break;
  }
  throw ConfigError("label_segment: excluded segments carry no label");
}

void write_manifest(const std::filesystem::path& path,
                    const std::vector<ManifestRecord>& records) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest " + path.string());
  for (const auto& r : records) {
    nlohmann::json line = {{"recording_id", r.recording_id},
                           {"start_s", r.start_s},
                           {"tag", std::string(to_string(r.tag))},
                           {"p_ictal", r.p_ictal}};
    out << line.dump() << '\n';
  }
  if (!out) throw DataError("failed writing manifest " + path.string());
}

std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  std::vector<ManifestRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ManifestRecord r;
      r.recording_id = j.at("recording_id").get<std::string>();
      r.start_s = j.at("start_s").get<double>();
      r.tag = parse_period_kind(j.at("tag").get<std::string>());
      r.p_ictal = j.at("p_ictal").get<double>();
      records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

}  // namespace sezdet
