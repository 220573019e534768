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

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>

#include "gradcheck.hpp"
#include "sezdet/checkpoint.hpp"
#include "sezdet/errors.hpp"
#include "sezdet/model.hpp"

using namespace sezdet;

namespace {

MultiscaleSpectrogram zeros_like(const Network& net) {
  MultiscaleSpectrogram spec;
  spec.scales = net.config().scales;
  for (const auto& ext : net.scale_extents()) {
    Tensor3<double> t(ext[0].h, ext[0].w, ext[0].d);
    t.setZero();
    spec.per_scale.push_back(t);
  }
  return spec;
}

const ParamBlock& block(const Network& net, const std::string& name) {
  for (const auto& b : net.layout())
    if (b.name == name) return b;
  FAIL("no block " << name);
  return net.layout().front();
}

double slow_bce(double y, double p) {
  const double c = std::min(std::max(p, 1e-7), 1.0 - 1e-7);
  return -(y * std::log(c) + (1.0 - y) * std::log(1.0 - c));
}

}  // namespace

TEST_CASE("zero input and zero parameters give one half") {
  const Network net(ModelConfig::tiny(3, {1, 2, 3}));
  Workspace ws;
  const auto p = net.forward(zeros_like(net), Eigen::VectorXd::Zero(net.parameter_count()), ws);
  CHECK(p.interictal == 0.5);
  CHECK(p.ictal == 0.5);
}

TEST_CASE("shape trace for 8 channels, 32 bins, scale 3") {
  ModelConfig cfg = ModelConfig::tiny(8, {3});
  cfg.fc_width = 12;
  const Network net(cfg);
  const auto& ext = net.scale_extents()[0];
  CHECK(ext[0] == Extent3{8, 32, 7});
  CHECK(ext[1] == Extent3{4, 16, 3});
  CHECK(ext[2] == Extent3{2, 8, 1});
  CHECK(ext[3] == Extent3{1, 4, 1});
  Workspace ws;
  const auto p = gradcheck::random_problem(net, 1, 640);
  net.forward(p.features, p.weights, ws);
  CHECK(ws.scales[0].fc.size() == 12);
}

TEST_CASE("no pooled extent collapses to zero for scales 1..5") {
  const Network net(ModelConfig::tiny(1, {1, 2, 3, 4, 5}));
  for (const auto& ext : net.scale_extents())
    for (const auto& e : ext) {
      CHECK(e.h >= 1);
      CHECK(e.w >= 1);
      CHECK(e.d >= 1);
    }
  const ModelConfig full;
  const Network big(full);
  for (const auto& ext : big.scale_extents()) CHECK(ext[3].volume() >= 1);
  CHECK(big.fusion_extents()[3].volume() >= 1);
}

TEST_CASE("parameter count: closed form, layout and hand count agree") {
  for (const auto& cfg : {ModelConfig::tiny(2, {1, 2}), ModelConfig::tiny(4, {1, 2, 3, 4, 5}),
                          ModelConfig{}}) {
    const Network net(cfg);
    Eigen::Index sum = 0, expected_offset = 0;
    for (const auto& b : net.layout()) {
      CHECK(b.offset == expected_offset);
      expected_offset += b.size;
      sum += b.size;
    }
    CHECK(sum == net.parameter_count());
    CHECK(parameter_count(cfg) == net.parameter_count());
  }
  // Scale 1: 20 + 57 + 84 + fc 104; scale 2: 161 + fc 296; fusion 52 + 102 + 102;
  // head 48 + 136 + 36; out 10.
  CHECK(parameter_count(ModelConfig::tiny(2, {1, 2})) == 1208);
}

TEST_CASE("outputs lie strictly inside (0, 1) and are deterministic") {
  const Network net(ModelConfig::tiny(2, {1, 2, 3}));
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto p = gradcheck::random_problem(net, seed, 256);
    Workspace a, b;
    const auto pa = net.forward(p.features, p.weights, a);
    const auto pb = net.forward(p.features, p.weights, b);
    CHECK(pa.ictal > 0.0);
    CHECK(pa.ictal < 1.0);
    CHECK(pa.interictal > 0.0);
    CHECK(pa.interictal < 1.0);
    CHECK(std::memcmp(&pa, &pb, sizeof pa) == 0);
  }
}

TEST_CASE("initialization is seeded, within the Glorot bound, with constant biases") {
  const Network net(ModelConfig::tiny(2, {1, 2}));
  const auto w1 = net.initialize(9), w2 = net.initialize(9), w3 = net.initialize(10);
  CHECK(w1 == w2);
  CHECK(w1 != w3);
  for (const auto& b : net.layout()) {
    const auto seg = w1.segment(b.offset, b.size);
    if (b.is_bias) {
      const double expected = b.name == "out.bias" ? 0.0 : kReluBiasInit;
      CHECK((seg.array() == expected).all());
    } else {
      CHECK(seg.cwiseAbs().maxCoeff() <= std::sqrt(6.0 / static_cast<double>(b.fan_in + b.fan_out)));
    }
  }
}

TEST_CASE("loss examples") {
  CHECK(loss({0.5, 0.5}, SoftLabel::from_ictal(0.5)) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-15));
  const double at_min = loss({1.0, 0.0}, SoftLabel{1.0, 0.0});
  CHECK(at_min == doctest::Approx(-2.0 * std::log(1.0 - 1e-7)).epsilon(1e-12));
  CHECK(at_min == doctest::Approx(2e-7).epsilon(1e-6));

  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const ProbabilityPair p{u(rng), u(rng)};
    const SoftLabel y = SoftLabel::from_ictal(u(rng));
    CHECK(std::abs(loss(p, y) - (slow_bce(y.p_interictal, p.interictal) + slow_bce(y.p_ictal, p.ictal))) <
          1e-12);
  }
  CHECK(std::isfinite(loss({0.0, 1.0}, SoftLabel{1.0, 0.0})));
}

TEST_CASE("full tiny network gradient matches finite differences") {
  const Network net(ModelConfig::tiny(2, {1, 2}));
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto p = gradcheck::random_problem(net, seed, 640);
    const auto r = gradcheck::check_network(net, p.features, p.weights, p.label, 1e-3);
    CHECK(r.max_rel < 1e-4);
    CHECK(r.checked > 10 * r.skipped);
  }
}

TEST_CASE("gradient check with 3D kernels at scales 3..5") {
  const Network net(ModelConfig::tiny(2, {3, 4, 5}));
  const auto p = gradcheck::random_problem(net, 7, 640);
  const auto r = gradcheck::check_network(net, p.features, p.weights, p.label, 1e-3);
  CHECK(r.max_rel < 1e-4);
  CHECK(r.checked > 10 * r.skipped);
}

TEST_CASE("free-function forward/backward agree with the network") {
  const ModelConfig cfg = ModelConfig::tiny(2, {1, 2});
  const Network net(cfg);
  const auto p = gradcheck::random_problem(net, 3, 320);
  const ModelParams params = ModelParams::from_weights(p.weights);
  Workspace ws;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(net.parameter_count());
  net.backward(p.features, p.weights, p.label, ws, g);
  CHECK(forward(p.features, params, cfg).ictal == ws.out.ictal);
  CHECK(backward(p.features, params, p.label, cfg) == g);
}

TEST_CASE("gradient vanishes at an exact-match prediction") {
  const Network net(ModelConfig::tiny(2, {1, 2}));
  auto p = gradcheck::random_problem(net, 4, 320);
  const auto& ow = block(net, "out.weight");
  const auto& ob = block(net, "out.bias");
  p.weights.segment(ow.offset, ow.size).setZero();
  const SoftLabel y = SoftLabel::from_ictal(0.7);
  p.weights(ob.offset) = std::log(y.p_interictal / (1.0 - y.p_interictal));
  p.weights(ob.offset + 1) = std::log(y.p_ictal / (1.0 - y.p_ictal));
  Workspace ws;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(net.parameter_count());
  net.backward(p.features, p.weights, y, ws, g);
  CHECK(g.segment(ob.offset, ob.size).norm() < 1e-6);
  CHECK(g.norm() < 1e-6);
}

TEST_CASE("a dead ReLU unit passes no gradient") {
  const Network net(ModelConfig::tiny(2, {1, 2}));
  auto p = gradcheck::random_problem(net, 5, 320);
  const auto& hw = block(net, "head1.weight");
  const auto& hb = block(net, "head1.bias");
  const Eigen::Index unit = 3, in = hw.size / hb.size;
  p.weights(hb.offset + unit) = -1e3;  // pre-activation far below zero
  Workspace ws;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(net.parameter_count());
  net.backward(p.features, p.weights, p.label, ws, g);
  CHECK(ws.head[1](unit) == 0.0);
  CHECK(g(hb.offset + unit) == 0.0);
  CHECK(g.segment(hw.offset + unit * in, in).isZero(0.0));
  CHECK(g.norm() > 0.0);
}

TEST_CASE("shape mismatches are reported") {
  const Network net(ModelConfig::tiny(2, {1, 2}));
  Workspace ws;
  auto spec = zeros_like(net);
  spec.per_scale[1] = Tensor3<double>(2, 32, 7);
  CHECK_THROWS_AS(net.forward(spec, net.initialize(1), ws), DataError);
  spec = zeros_like(net);
  spec.scales = {1, 3};
  CHECK_THROWS_AS(net.forward(spec, net.initialize(1), ws), DataError);
  CHECK_THROWS_AS(net.forward(zeros_like(net), Eigen::VectorXd::Zero(3), ws), DataError);

  SpectralConfig s;
  s.scales = {1, 2, 3};
  CHECK_THROWS_AS(Predictor(ModelConfig::tiny(2, {1, 2}), s, net.initialize(1)), DataError);
  ModelConfig bad = ModelConfig::tiny(2, {1, 2});
  bad.fc_width = 0;
  CHECK_THROWS_AS(Network{bad}, ConfigError);
}

TEST_CASE("checkpoint round trip is bit-exact") {
  Checkpoint c;
  c.model = ModelConfig::tiny(2, {1, 2});
  c.spectral.scales = {1, 2};
  c.seed = 77;
  const Network net(c.model);
  c.params = ModelParams::from_weights(net.initialize(3));
  c.params.m = Eigen::VectorXd::Constant(net.parameter_count(), 1.0 / 3.0);
  c.params.v = Eigen::VectorXd::Constant(net.parameter_count(), 1e-300);
  c.params.step = 123;
  c.params.mu_product = 0.123456789012345678;
  const auto path = std::filesystem::temp_directory_path() / "sezdet_model_test.ckpt";
  save_checkpoint(c, path);
  const Checkpoint back = load_checkpoint(path);
  CHECK(back.model == c.model);
  CHECK(back.spectral.scales == c.spectral.scales);
  CHECK(back.seed == 77);
  CHECK(back.params.step == 123);
  CHECK(back.params.mu_product == c.params.mu_product);
  CHECK(back.params.weights == c.params.weights);
  CHECK(back.params.m == c.params.m);
  CHECK(back.params.v == c.params.v);

  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 8);
  CHECK_THROWS_AS(load_checkpoint(path), DataError);
  std::filesystem::remove(path);
}
