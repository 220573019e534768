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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <string>

#include "sezdet/errors.hpp"
#include "sezdet/model.hpp"

namespace sezdet {
namespace {

using Index = Eigen::Index;

FeatureMaps<double> as_maps(const Vec<double>& v, const Eigen::array<Index, 4>& dims) {
  FeatureMaps<double> t(dims);
  std::copy(v.data(), v.data() + v.size(), t.data());
  return t;
}

struct Fnv {
  std::uint64_t h = 1469598103934665603ull;
  void add(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xFF;
      h *= 1099511628211ull;
    }
  }
  void add_mask(const double* x, Index n) {
    std::uint64_t word = 0;
    for (Index i = 0; i < n; ++i) {
      word = (word << 1) | (x[i] > 0.0 ? 1u : 0u);
      if (i % 64 == 63) {
        add(word);
        word = 0;
      }
    }
    add(word);
  }
};

}  // namespace

int ModelConfig::scaled(int filters) const {
  return std::max(1, static_cast<int>(std::lround(filters * channel_width_multiplier)));
}

void ModelConfig::validate() const {
  if (channels < 1) throw ConfigError("model: channels must be >= 1");
  if (kept_bins < 1) throw ConfigError("model: kept_bins must be >= 1");
  if (scales.empty()) throw ConfigError("model: at least one scale required");
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (scales[i] < 1 || scales[i] > 20) throw ConfigError("model: scales must lie in 1..20");
    if (i > 0 && scales[i] <= scales[i - 1]) throw ConfigError("model: scales must ascend");
  }
  if (fc_width < 1) throw ConfigError("model: fc_width must be >= 1");
  for (int f : conv3d_filters)
    if (f < 1) throw ConfigError("model: conv3d filter counts must be >= 1");
  for (int f : conv2d_filters)
    if (f < 1) throw ConfigError("model: conv2d filter counts must be >= 1");
  for (int w : head_widths)
    if (w < 1) throw ConfigError("model: head widths must be >= 1");
  if (!(channel_width_multiplier > 0.0))
    throw ConfigError("model: channel_width_multiplier must be positive");
}

ModelConfig ModelConfig::tiny(int channels, std::vector<int> scales) {
  ModelConfig cfg;
  cfg.channels = channels;
  cfg.scales = std::move(scales);
  cfg.conv3d_filters = {2, 3, 3};
  cfg.fc_width = 8;
  cfg.conv2d_filters = {2, 2, 2};
  cfg.head_widths = {16, 8, 4};
  return cfg;
}

Kernel3 conv3d_kernel(int scale) { return scale <= 2 ? Kernel3{3, 3, 1} : Kernel3{3, 3, 3}; }
Pool3 pool3d_kernel(int scale) { return scale <= 2 ? Pool3{2, 2, 1} : Pool3{2, 2, 2}; }

Index parameter_count(const ModelConfig& cfg) {
  cfg.validate();
  auto pooled = [](Index extent, Index pool) { return extent / std::min(extent, pool); };
  Index total = 0;
  for (int scale : cfg.scales) {
    const Index kvol = scale <= 2 ? 9 : 27;
    const Index tpool = scale <= 2 ? 1 : 2;
    Index h = cfg.channels, w = cfg.kept_bins, d = (Index{1} << scale) - 1;
    Index cin = 1;
    for (int b = 0; b < 3; ++b) {
      const Index cout = cfg.scaled(cfg.conv3d_filters[b]);
      total += cout * cin * kvol + cout;
      h = pooled(h, 2);
      w = pooled(w, 2);
      d = pooled(d, tpool);
      cin = cout;
    }
    total += Index{cfg.fc_width} * cin * h * w * d + cfg.fc_width;
  }
  Index h = static_cast<Index>(cfg.scales.size()), w = cfg.fc_width, cin = 1;
  for (int b = 0; b < 3; ++b) {
    const Index cout = cfg.scaled(cfg.conv2d_filters[b]);
    total += cout * cin * 25 + cout;
    h = pooled(h, 2);
    w = pooled(w, 2);
    cin = cout;
  }
  Index width = cin * h * w;
  for (int next : cfg.head_widths) {
    total += Index{next} * width + next;
    width = next;
  }
  total += 2 * width + 2;
  return total;
}

ModelParams ModelParams::from_weights(Eigen::VectorXd w) {
  ModelParams p;
  p.m = Eigen::VectorXd::Zero(w.size());
  p.v = Eigen::VectorXd::Zero(w.size());
  p.weights = std::move(w);
  return p;
}

double loss(const ProbabilityPair& pred, const SoftLabel& label) {
  auto bce = [](double y, double y_hat) {
    y_hat = std::clamp(y_hat, kLossEpsilon, 1.0 - kLossEpsilon);
    return -(y * std::log(y_hat) + (1.0 - y) * std::log(1.0 - y_hat));
  };
  return bce(label.p_interictal, pred.interictal) + bce(label.p_ictal, pred.ictal);
}

std::size_t Network::add_block(std::string name, Index size, Index fan_in, Index fan_out,
                               bool is_bias) {
  blocks_.push_back({std::move(name), total_, size, fan_in, fan_out, is_bias});
  total_ += size;
  return blocks_.size() - 1;
}

Network::Network(ModelConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  for (int scale : cfg_.scales) {
    ScaleLayers layers;
    layers.scale = scale;
    layers.kernel = conv3d_kernel(scale);
    layers.pool = pool3d_kernel(scale);
    std::array<Extent3, 4> ext;
    ext[0] = {cfg_.channels, cfg_.kept_bins, window_count(scale)};
    const std::string prefix = "scale" + std::to_string(scale);
    Index cin = 1;
    for (int b = 0; b < 3; ++b) {
      const Index cout = cfg_.scaled(cfg_.conv3d_filters[b]);
      const Index kvol = layers.kernel.volume();
      const std::string name = prefix + ".conv" + std::to_string(b);
      layers.conv_kernel[b] =
          add_block(name + ".kernel", cout * cin * kvol, cin * kvol, cout * kvol, false);
      layers.conv_bias[b] = add_block(name + ".bias", cout, cin * kvol, cout * kvol, true);
      ext[b + 1] = pooled_extent(ext[b], layers.pool);
      cin = cout;
    }
    const Index flat = cin * ext[3].volume();
    layers.fc_weight = add_block(prefix + ".fc.weight", Index{cfg_.fc_width} * flat, flat,
                                 cfg_.fc_width, false);
    layers.fc_bias = add_block(prefix + ".fc.bias", cfg_.fc_width, flat, cfg_.fc_width, true);
    scale_layers_.push_back(layers);
    scale_extents_.push_back(ext);
  }

  fusion_extents_[0] = {static_cast<Index>(cfg_.scales.size()), cfg_.fc_width, 1};
  Index cin = 1;
  for (int b = 0; b < 3; ++b) {
    const Index cout = cfg_.scaled(cfg_.conv2d_filters[b]);
    const Index kvol = kConv2dKernel.volume();
    const std::string name = "fusion.conv" + std::to_string(b);
    fusion_kernel_[b] = add_block(name + ".kernel", cout * cin * kvol, cin * kvol, cout * kvol,
                                  false);
    fusion_bias_[b] = add_block(name + ".bias", cout, cin * kvol, cout * kvol, true);
    fusion_extents_[b + 1] = pooled_extent(fusion_extents_[b], kPool2dKernel);
    cin = cout;
  }

  Index width = cin * fusion_extents_[3].volume();
  for (std::size_t i = 0; i < cfg_.head_widths.size(); ++i) {
    const Index next = cfg_.head_widths[i];
    const std::string name = "head" + std::to_string(i);
    head_weight_.push_back(add_block(name + ".weight", next * width, width, next, false));
    head_bias_.push_back(add_block(name + ".bias", next, width, next, true));
    width = next;
  }
  out_weight_ = add_block("out.weight", 2 * width, width, 2, false);
  out_bias_ = add_block("out.bias", 2, width, 2, true);
}

void Network::check_input(const MultiscaleSpectrogram& spec) const {
  if (spec.scales != cfg_.scales || spec.per_scale.size() != cfg_.scales.size())
    throw DataError("model input: scales do not match the model configuration");
  for (std::size_t s = 0; s < spec.per_scale.size(); ++s) {
    const auto& t = spec.per_scale[s];
    const Extent3& e = scale_extents_[s][0];
    if (t.dimension(0) != e.h || t.dimension(1) != e.w || t.dimension(2) != e.d)
      throw DataError("model input: scale " + std::to_string(cfg_.scales[s]) +
                      " tensor shape does not match (channels, kept_bins, 2^n-1)");
  }
}

Eigen::VectorXd Network::initialize(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(total_);
  for (const auto& b : blocks_) {
    if (b.is_bias) {
      if (b.name != "out.bias") w.segment(b.offset, b.size).setConstant(kReluBiasInit);
      continue;
    }
    const double limit = std::sqrt(6.0 / static_cast<double>(b.fan_in + b.fan_out));
    for (Index i = 0; i < b.size; ++i) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      w(b.offset + i) = limit * (2.0 * u - 1.0);
    }
  }
  return w;
}

ProbabilityPair Network::forward(const MultiscaleSpectrogram& spec, const Eigen::VectorXd& w,
                                 Workspace& ws) const {
  check_input(spec);
  if (w.size() != total_) throw DataError("model: weight vector has the wrong length");
  ws.scales.resize(scale_layers_.size());

  ws.fx[0].resize(1, fusion_extents_[0].h, fusion_extents_[0].w, 1);
  for (std::size_t s = 0; s < scale_layers_.size(); ++s) {
    const auto& L = scale_layers_[s];
    auto& st = ws.scales[s];
    const auto& src = spec.per_scale[s];
    st.x[0].resize(1, src.dimension(0), src.dimension(1), src.dimension(2));
    std::copy(src.data(), src.data() + src.size(), st.x[0].data());
    for (int b = 0; b < 3; ++b) {
      const Index cout = cfg_.scaled(cfg_.conv3d_filters[b]);
      conv3d_forward(st.x[b], block_ptr(w, L.conv_kernel[b]), block_ptr(w, L.conv_bias[b]),
                     cout, L.kernel, st.a[b]);
      relu_inplace(st.a[b].data(), st.a[b].size());
      maxpool3d_forward(st.a[b], L.pool, st.x[b + 1], st.argmax[b]);
    }
    st.flat = Eigen::Map<const Vec<double>>(st.x[3].data(), st.x[3].size());
    st.fc = dense_forward(st.flat, block_ptr(w, L.fc_weight), block_ptr(w, L.fc_bias),
                          cfg_.fc_width);
    relu_inplace(st.fc.data(), st.fc.size());
    std::copy(st.fc.data(), st.fc.data() + st.fc.size(),
              ws.fx[0].data() + static_cast<Index>(s) * cfg_.fc_width);
  }

  for (int b = 0; b < 3; ++b) {
    const Index cout = cfg_.scaled(cfg_.conv2d_filters[b]);
    conv3d_forward(ws.fx[b], block_ptr(w, fusion_kernel_[b]), block_ptr(w, fusion_bias_[b]),
                   cout, kConv2dKernel, ws.fa[b]);
    relu_inplace(ws.fa[b].data(), ws.fa[b].size());
    maxpool3d_forward(ws.fa[b], kPool2dKernel, ws.fx[b + 1], ws.fargmax[b]);
  }
  ws.fflat = Eigen::Map<const Vec<double>>(ws.fx[3].data(), ws.fx[3].size());

  ws.head.resize(head_weight_.size());
  const Vec<double>* h = &ws.fflat;
  for (std::size_t i = 0; i < head_weight_.size(); ++i) {
    ws.head[i] = dense_forward(*h, block_ptr(w, head_weight_[i]), block_ptr(w, head_bias_[i]),
                               cfg_.head_widths[i]);
    relu_inplace(ws.head[i].data(), ws.head[i].size());
    h = &ws.head[i];
  }
  ws.logits = dense_forward(*h, block_ptr(w, out_weight_), block_ptr(w, out_bias_), Index{2});
  ws.out = {sigmoid(ws.logits(0)), sigmoid(ws.logits(1))};
  return ws.out;
}

double Network::backward(const MultiscaleSpectrogram& spec, const Eigen::VectorXd& w,
                         const SoftLabel& label, Workspace& ws, Eigen::VectorXd& grad) const {
  const ProbabilityPair pred = forward(spec, w, ws);
  if (grad.size() != total_) grad = Eigen::VectorXd::Zero(total_);

  // d(BCE)/d(logit) = y_hat - y inside the clamp range, zero where the clamp is active.
  auto dlogit = [](double y_hat, double y) {
    return (y_hat > kLossEpsilon && y_hat < 1.0 - kLossEpsilon) ? y_hat - y : 0.0;
  };
  Vec<double> g(2);
  g << dlogit(pred.interictal, label.p_interictal), dlogit(pred.ictal, label.p_ictal);

  const Vec<double>& last = ws.head.empty() ? ws.fflat : ws.head.back();
  g = dense_backward(last, block_ptr(w, out_weight_), g, block_ptr(grad, out_weight_),
                     block_ptr(grad, out_bias_));
  for (std::size_t i = head_weight_.size(); i-- > 0;) {
    relu_backward_inplace(ws.head[i].data(), g.data(), g.size());
    const Vec<double>& input = i == 0 ? ws.fflat : ws.head[i - 1];
    g = dense_backward(input, block_ptr(w, head_weight_[i]), g, block_ptr(grad, head_weight_[i]),
                       block_ptr(grad, head_bias_[i]));
  }

  FeatureMaps<double> gmap = as_maps(g, ws.fx[3].dimensions());
  FeatureMaps<double> gpre, gin;
  for (int b = 2; b >= 0; --b) {
    maxpool3d_backward(gmap, ws.fargmax[b], ws.fa[b].dimensions(), gpre);
    relu_backward_inplace(ws.fa[b].data(), gpre.data(), gpre.size());
    conv3d_backward(ws.fx[b], block_ptr(w, fusion_kernel_[b]), gpre, kConv2dKernel,
                    block_ptr(grad, fusion_kernel_[b]), block_ptr(grad, fusion_bias_[b]), &gin);
    gmap = std::move(gin);
  }
  // gmap now holds d loss / d fusion input, one row per scale.

  for (std::size_t s = 0; s < scale_layers_.size(); ++s) {
    const auto& L = scale_layers_[s];
    auto& st = ws.scales[s];
    Vec<double> dfc = Eigen::Map<const Vec<double>>(
        gmap.data() + static_cast<Index>(s) * cfg_.fc_width, cfg_.fc_width);
    relu_backward_inplace(st.fc.data(), dfc.data(), dfc.size());
    const Vec<double> dflat = dense_backward(st.flat, block_ptr(w, L.fc_weight), dfc,
                                             block_ptr(grad, L.fc_weight),
                                             block_ptr(grad, L.fc_bias));
    FeatureMaps<double> gs = as_maps(dflat, st.x[3].dimensions());
    for (int b = 2; b >= 0; --b) {
      maxpool3d_backward(gs, st.argmax[b], st.a[b].dimensions(), gpre);
      relu_backward_inplace(st.a[b].data(), gpre.data(), gpre.size());
      conv3d_backward(st.x[b], block_ptr(w, L.conv_kernel[b]), gpre, L.kernel,
                      block_ptr(grad, L.conv_kernel[b]), block_ptr(grad, L.conv_bias[b]),
                      b > 0 ? &gin : nullptr);
      if (b > 0) gs = std::move(gin);
    }
  }
  return loss(pred, label);
}

std::uint64_t Network::activation_signature(const Workspace& ws) const {
  Fnv f;
  for (const auto& st : ws.scales) {
    for (int b = 0; b < 3; ++b) {
      f.add_mask(st.a[b].data(), st.a[b].size());
      for (Index i : st.argmax[b]) f.add(static_cast<std::uint64_t>(i));
    }
    f.add_mask(st.fc.data(), st.fc.size());
  }
  for (int b = 0; b < 3; ++b) {
    f.add_mask(ws.fa[b].data(), ws.fa[b].size());
    for (Index i : ws.fargmax[b]) f.add(static_cast<std::uint64_t>(i));
  }
  for (const auto& h : ws.head) f.add_mask(h.data(), h.size());
  for (double p : {ws.out.interictal, ws.out.ictal})
    f.add(p > kLossEpsilon && p < 1.0 - kLossEpsilon ? 1u : 0u);
  return f.h;
}

ProbabilityPair forward(const MultiscaleSpectrogram& spec, const ModelParams& params,
                        const ModelConfig& cfg) {
  Network net(cfg);
  Workspace ws;
  return net.forward(spec, params.weights, ws);
}

Eigen::VectorXd backward(const MultiscaleSpectrogram& spec, const ModelParams& params,
                         const SoftLabel& label, const ModelConfig& cfg) {
  Network net(cfg);
  Workspace ws;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(net.parameter_count());
  net.backward(spec, params.weights, label, ws, grad);
  return grad;
}

Predictor::Predictor(ModelConfig model, SpectralConfig spectral, Eigen::VectorXd weights)
    : network_(std::move(model)), spectral_(std::move(spectral)), weights_(std::move(weights)) {
  spectral_.validate();
  if (spectral_.scales != network_.config().scales ||
      spectral_.kept_bins != network_.config().kept_bins)
    throw DataError("predictor: spectral and model configurations disagree");
  if (weights_.size() != network_.parameter_count())
    throw DataError("predictor: weight vector has the wrong length");
}

ProbabilityPair Predictor::predict(const MultiscaleSpectrogram& features) {
  return network_.forward(features, weights_, ws_);
}

}  // namespace sezdet
