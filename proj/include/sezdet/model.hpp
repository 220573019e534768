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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sezdet/labeling.hpp"
#include "sezdet/layers.hpp"
#include "sezdet/spectral.hpp"

namespace sezdet {

/// Architecture of the multiscale 3D-CNN. Conv stacks are always three blocks
/// deep; the output layer is always two sigmoid nodes.
struct ModelConfig {
  int channels = 22;
  int kept_bins = 32;
  std::vector<int> scales{1, 2, 3, 4, 5};
  std::array<int, 3> conv3d_filters{16, 32, 64};
  int fc_width = 512;
  std::array<int, 3> conv2d_filters{16, 32, 64};
  std::vector<int> head_widths{1024, 256, 64};
  double channel_width_multiplier = 1.0;

  /// Filter count after applying the width multiplier (at least 1).
  int scaled(int filters) const;
  void validate() const;

  /// The smallest configuration worth training: a handful of filters and
  /// narrow fully connected layers.
  static ModelConfig tiny(int channels, std::vector<int> scales);

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Scales 1-2 convolve with (3,3,1)/pool (2,2,1); larger scales use (3,3,3)/(2,2,2).
Kernel3 conv3d_kernel(int scale);
Pool3 pool3d_kernel(int scale);
inline constexpr Kernel3 kConv2dKernel{5, 5, 1};
inline constexpr Pool3 kPool2dKernel{2, 2, 1};

/// Closed-form parameter count of a configuration.
Eigen::Index parameter_count(const ModelConfig& cfg);

/// Contiguous slice of the flat parameter vector holding one tensor.
struct ParamBlock {
  std::string name;
  Eigen::Index offset = 0;
  Eigen::Index size = 0;
  Eigen::Index fan_in = 0;
  Eigen::Index fan_out = 0;
  bool is_bias = false;
};

/// Learnable weights plus Nadam state.
struct ModelParams {
  Eigen::VectorXd weights;
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::int64_t step = 0;
  double mu_product = 1.0;

  static ModelParams from_weights(Eigen::VectorXd w);
};

/// Independent sigmoid outputs; not renormalized to sum to one.
struct ProbabilityPair {
  double interictal = 0.5;
  double ictal = 0.5;
};

inline constexpr double kLossEpsilon = 1e-7;
/// Initial bias of every ReLU layer; keeps units active while the signal is small.
inline constexpr double kReluBiasInit = 0.1;

/// Binary cross-entropy summed over both output nodes, predictions clamped
/// to [eps, 1 - eps].
double loss(const ProbabilityPair& pred, const SoftLabel& label);

/// Intermediate activations of one forward pass, reused across calls.
struct Workspace {
  struct ScaleStack {
    std::array<FeatureMaps<double>, 4> x;  // x[0] input, x[b+1] pooled output of block b
    std::array<FeatureMaps<double>, 3> a;  // post-ReLU conv outputs
    std::array<std::vector<Eigen::Index>, 3> argmax;
    Vec<double> flat;
    Vec<double> fc;  // post-ReLU
  };
  std::vector<ScaleStack> scales;
  std::array<FeatureMaps<double>, 4> fx;
  std::array<FeatureMaps<double>, 3> fa;
  std::array<std::vector<Eigen::Index>, 3> fargmax;
  Vec<double> fflat;
  std::vector<Vec<double>> head;  // post-ReLU hidden activations
  Vec<double> logits;
  ProbabilityPair out;

  // backward scratch
  FeatureMaps<double> g0, g1;
};

/// Shape-resolved network: owns the parameter layout and runs forward and
/// backward passes over a flat weight vector.
class Network {
 public:
  explicit Network(ModelConfig cfg);

  const ModelConfig& config() const { return cfg_; }
  const std::vector<ParamBlock>& layout() const { return blocks_; }
  Eigen::Index parameter_count() const { return total_; }

  /// Per-scale extents of the input and after each pooled block.
  const std::vector<std::array<Extent3, 4>>& scale_extents() const { return scale_extents_; }
  const std::array<Extent3, 4>& fusion_extents() const { return fusion_extents_; }

  /// Throws DataError unless `spec` matches the configured shape.
  void check_input(const MultiscaleSpectrogram& spec) const;

  /// Glorot-uniform weights determined by `seed`; ReLU-layer biases start at
  /// kReluBiasInit and the output bias at zero.
  Eigen::VectorXd initialize(std::uint64_t seed) const;

  ProbabilityPair forward(const MultiscaleSpectrogram& spec, const Eigen::VectorXd& weights,
                          Workspace& ws) const;

  /// Runs forward, then accumulates d loss / d weights into `grad`. Returns the loss.
  double backward(const MultiscaleSpectrogram& spec, const Eigen::VectorXd& weights,
                  const SoftLabel& label, Workspace& ws, Eigen::VectorXd& grad) const;

  /// Hash of the piecewise-linear regime of the last forward pass: ReLU
  /// on/off pattern, max-pool winners and loss-clamp state. Equal signatures
  /// mean the same smooth piece of the loss surface.
  std::uint64_t activation_signature(const Workspace& ws) const;

 private:
  struct ScaleLayers {
    int scale = 1;
    Kernel3 kernel;
    Pool3 pool;
    std::array<std::size_t, 3> conv_kernel{}, conv_bias{};
    std::size_t fc_weight = 0, fc_bias = 0;
  };

  std::size_t add_block(std::string name, Eigen::Index size, Eigen::Index fan_in,
                        Eigen::Index fan_out, bool is_bias);
  const double* block_ptr(const Eigen::VectorXd& w, std::size_t block) const {
    return w.data() + blocks_[block].offset;
  }
  double* block_ptr(Eigen::VectorXd& w, std::size_t block) const {
    return w.data() + blocks_[block].offset;
  }

  ModelConfig cfg_;
  std::vector<ParamBlock> blocks_;
  Eigen::Index total_ = 0;
  std::vector<ScaleLayers> scale_layers_;
  std::vector<std::array<Extent3, 4>> scale_extents_;
  std::array<Extent3, 4> fusion_extents_;
  std::array<std::size_t, 3> fusion_kernel_{}, fusion_bias_{};
  std::vector<std::size_t> head_weight_, head_bias_;
  std::size_t out_weight_ = 0, out_bias_ = 0;
};

/// Convenience wrappers over a freshly built Network.
ProbabilityPair forward(const MultiscaleSpectrogram& spec, const ModelParams& params,
                        const ModelConfig& cfg);
Eigen::VectorXd backward(const MultiscaleSpectrogram& spec, const ModelParams& params,
                         const SoftLabel& label, const ModelConfig& cfg);

/// A trained network bound to its feature extractor; evaluates PIPs on raw
/// segments. Not thread-safe (owns a workspace); make one per stream.
class Predictor {
 public:
  Predictor(ModelConfig model, SpectralConfig spectral, Eigen::VectorXd weights);

  const Network& network() const { return network_; }
  const SpectralConfig& spectral() const { return spectral_; }

  ProbabilityPair predict(const MultiscaleSpectrogram& features);
  template <typename Derived>
  double pip(const Eigen::MatrixBase<Derived>& segment) {
    return predict(segment_features(segment, spectral_)).ictal;
  }

 private:
  Network network_;
  SpectralConfig spectral_;
  Eigen::VectorXd weights_;
  Workspace ws_;
};

}  // namespace sezdet
