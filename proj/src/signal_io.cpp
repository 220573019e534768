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

#include "sezdet/signal_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sezdet/errors.hpp"

namespace sezdet {
namespace {

using Index = Eigen::Index;

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0xFF) << 24) | ((v & 0xFF00) << 8) | ((v >> 8) & 0xFF00) | (v >> 24);
  }
  return v;
}

Index seconds_to_sample(double t_s, double rate_hz) {
  return static_cast<Index>(std::llround(t_s * rate_hz));
}

}  // namespace

void validate(const Recording& rec) {
  if (!(rec.rate_hz > 0.0) || !std::isfinite(rec.rate_hz))
    throw DataError("recording: rate_hz must be a positive finite number");
  if (rec.channels() < 1) throw DataError("recording: at least one channel required");
  const double duration = rec.duration_s();
  double previous_offset = -1.0;
  for (const auto& a : rec.annotations) {
    if (!std::isfinite(a.onset_s) || !std::isfinite(a.offset_s))
      throw DataError("annotation: non-finite time");
    if (a.onset_s < 0.0) throw DataError("annotation: onset before recording start");
    if (a.offset_s <= a.onset_s) throw DataError("annotation: offset before onset");
    if (a.offset_s > duration) throw DataError("annotation: offset past recording end");
    if (a.onset_s < previous_offset)
      throw DataError("annotations must be sorted and non-overlapping");
    previous_offset = a.offset_s;
  }
}

std::filesystem::path payload_path(const std::filesystem::path& header) {
  auto p = header;
  p.replace_extension(".f32");
  return p;
}

Recording load_recording(const std::filesystem::path& header) {
  std::ifstream in(header);
  if (!in) throw DataError("cannot open header " + header.string());
  Recording rec;
  Index n_samples = 0;
  try {
    const auto j = nlohmann::json::parse(in);
    const auto channels = j.at("channels").get<std::int64_t>();
    rec.rate_hz = j.at("rate_hz").get<double>();
    n_samples = j.at("n_samples").get<std::int64_t>();
    if (j.at("dtype").get<std::string>() != "f32le")
      throw DataError("header: unsupported dtype " + j.at("dtype").dump());
    if (j.at("layout").get<std::string>() != "channel_interleaved")
      throw DataError("header: unsupported layout " + j.at("layout").dump());
    if (channels < 1 || n_samples < 0) throw DataError("header: bad channel or sample count");
    for (const auto& a : j.at("annotations"))
      rec.annotations.push_back({a.at("onset_s").get<double>(), a.at("offset_s").get<double>()});
    rec.samples.resize(channels, n_samples);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed header " + header.string() + ": " + e.what());
  }

  const auto payload = payload_path(header);
  std::ifstream raw(payload, std::ios::binary | std::ios::ate);
  if (!raw) throw DataError("cannot open payload " + payload.string());
  const auto expected = static_cast<std::uintmax_t>(rec.channels() * n_samples) * 4u;
  const auto actual = static_cast<std::uintmax_t>(raw.tellg());
  if (actual != expected) {
    std::ostringstream msg;
    msg << "payload length mismatch: header implies " << expected << " bytes, file has "
        << actual;
    throw DataError(msg.str());
  }
  raw.seekg(0);
  std::vector<std::uint32_t> words(static_cast<std::size_t>(rec.channels() * n_samples));
  raw.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(expected));
  if (!raw) throw DataError("short read on payload " + payload.string());

  std::size_t k = 0;
  for (Index i = 0; i < n_samples; ++i) {
    for (Index c = 0; c < rec.channels(); ++c) {
      const auto bits = to_little_endian(words[k++]);
      rec.samples(c, i) = static_cast<double>(std::bit_cast<float>(bits));
    }
  }
  validate(rec);
  return rec;
}

void save_recording(const Recording& rec, const std::filesystem::path& header) {
  validate(rec);
  nlohmann::ordered_json j;
  j["channels"] = rec.channels();
  j["rate_hz"] = rec.rate_hz;
  j["n_samples"] = rec.n_samples();
  j["dtype"] = "f32le";
  j["layout"] = "channel_interleaved";
  j["annotations"] = nlohmann::ordered_json::array();
  for (const auto& a : rec.annotations)
    j["annotations"].push_back({{"onset_s", a.onset_s}, {"offset_s", a.offset_s}});
  {
    std::ofstream out(header);
    if (!out) throw DataError("cannot write header " + header.string());
    out << j.dump(2) << '\n';
  }

  std::vector<std::uint32_t> words;
  words.reserve(static_cast<std::size_t>(rec.channels() * rec.n_samples()));
  for (Index i = 0; i < rec.n_samples(); ++i)
    for (Index c = 0; c < rec.channels(); ++c)
      words.push_back(to_little_endian(std::bit_cast<std::uint32_t>(
          static_cast<float>(rec.samples(c, i)))));
  const auto payload = payload_path(header);
  std::ofstream raw(payload, std::ios::binary);
  if (!raw) throw DataError("cannot write payload " + payload.string());
  raw.write(reinterpret_cast<const char*>(words.data()),
            static_cast<std::streamsize>(words.size() * 4));
  if (!raw) throw DataError("failed writing payload " + payload.string());
}

Segment materialize(const Recording& rec, const SegmentSpan& span) {
  return {segment_view(rec, span), span.start_s, span.len_s};
}

Index Stride::resolve(Index segment_len) const {
  switch (kind) {
    case Kind::kNoOverlap: return segment_len;
    case Kind::kOverlap80: return std::max<Index>(1, segment_len / 5);
    case Kind::kPointwise: return 1;
    case Kind::kSamples:
      if (samples < 1) throw ConfigError("stride: sample count must be >= 1");
      return samples;
  }
  return segment_len;
}

Index segment_samples(double rate_hz, double len_s) {
  const double exact = len_s * rate_hz;
  const auto n = static_cast<Index>(std::llround(exact));
  if (std::abs(exact - static_cast<double>(n)) > 1e-9)
    throw ConfigError("segment length must be a whole number of samples");
  if (n < 2) throw ConfigError("segment must span at least 2 samples");
  return n;
}

std::vector<TaggedSegment> extract_segments(const Recording& rec, double len_s,
                                            const OverlapPolicy& policy) {
  validate(rec);
  const Index L = segment_samples(rec.rate_hz, len_s);
  const Index n = rec.n_samples();
  if (L >= n) throw DataError("segment length exceeds recording duration");

  const Index inter_stride = policy.interictal.resolve(L);
  const Index ictal_stride = policy.ictal.resolve(L);
  const Index cross_stride = policy.crossing.resolve(L);
  const Index exclusion = seconds_to_sample(policy.postictal_exclusion_s, rec.rate_hz);

  std::vector<TaggedSegment> out;
  auto emit = [&](Index start, PeriodTag tag) {
    SegmentSpan span{start, L, static_cast<double>(start) / rec.rate_hz, len_s};
    out.push_back({span, tag});
  };
  auto tile = [&](Index begin, Index end, Index stride, PeriodTag tag) {
    for (Index s = begin; s + L <= end; s += stride) emit(s, tag);
  };

  Index free_from = 0;
  for (const auto& a : rec.annotations) {
    const Index onset = seconds_to_sample(a.onset_s, rec.rate_hz);
    const Index offset = std::min(n, seconds_to_sample(a.offset_s, rec.rate_hz));
    const Index excl_end = std::min(n, offset + exclusion);

    tile(free_from, onset, inter_stride, PeriodTag::interictal());
    for (Index s = onset - L; s < onset; s += cross_stride) {
      if (s < 0 || s + L > n) continue;
      const double end_s = static_cast<double>(s + L) / rec.rate_hz;
      emit(s, crossing_tag(end_s, static_cast<double>(onset) / rec.rate_hz, len_s));
    }
    tile(onset, offset, ictal_stride, PeriodTag::ictal());
    tile(offset, excl_end, inter_stride, PeriodTag::excluded());
    free_from = std::max(free_from, excl_end);
  }
  tile(free_from, n, inter_stride, PeriodTag::interictal());

  std::stable_sort(out.begin(), out.end(), [](const TaggedSegment& a, const TaggedSegment& b) {
    return a.span.start < b.span.start;
  });
  return out;
}

std::vector<Interval> interictal_intervals(const Recording& rec, double postictal_exclusion_s) {
  std::vector<Interval> out;
  const double end = rec.duration_s();
  double from = 0.0;
  for (const auto& a : rec.annotations) {
    if (a.onset_s > from) out.push_back({from, a.onset_s});
    from = std::max(from, std::min(end, a.offset_s + postictal_exclusion_s));
  }
  if (end > from) out.push_back({from, end});
  return out;
}

}  // namespace sezdet
