// Copyright 2026 The abrake Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "abrake/delay_harness.hpp"
#include "abrake/groups.hpp"
#include "abrake/optimizers.hpp"
#include "abrake/param_vector.hpp"
#include "abrake/rng.hpp"

namespace abrake {

/// Dense network input -> hidden... -> classes, ReLU on hidden layers,
/// softmax cross-entropy on the output.
///
/// Parameter layout, layer by layer: W (out x in, row-major) then b (out).
struct MlpSpec {
  std::vector<std::size_t> layer_sizes;

  struct Layer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::size_t weight_offset = 0;
    std::size_t bias_offset = 0;
  };

  void validate() const;
  std::size_t num_layers() const noexcept {
    return layer_sizes.empty() ? 0 : layer_sizes.size() - 1;
  }
  std::size_t input_size() const { return layer_sizes.front(); }
  std::size_t num_classes() const { return layer_sizes.back(); }
  std::vector<Layer> layout() const;
  std::size_t parameter_count() const;
};

/// Row-major samples x features.
struct SyntheticDataset {
  std::size_t features = 0;
  std::size_t classes = 0;
  std::vector<double> inputs;
  std::vector<std::size_t> labels;

  std::size_t size() const noexcept { return labels.size(); }
  std::span<const double> sample(std::size_t i) const {
    return std::span<const double>(inputs).subspan(i * features, features);
  }
};

struct BlobOptions {
  std::size_t samples = 2000;
  std::size_t features = 2;
  std::size_t classes = 3;
  double center_scale = 3.0;
  double spread = 1.0;
};

/// Gaussian blobs; sample i has label i mod classes.
SyntheticDataset make_blobs(const BlobOptions& options, std::uint64_t seed);

/// Columns x0..x{F-1},label after a "# classes=K" line. Other leading
/// "#" lines are ignored on read.
void write_dataset_csv(const SyntheticDataset& data, std::ostream& out);
/// Throws ConfigError on malformed input.
SyntheticDataset read_dataset_csv(std::istream& in);

struct LossAndGradient {
  double loss = 0.0;
  ParamVector grad;
};

/// Mean cross-entropy over `indices` and its exact gradient. Throws
/// NumericalError naming the layer whose activations went non-finite.
LossAndGradient forward_backward(const MlpSpec& spec, std::span<const double> params,
                                 const SyntheticDataset& data,
                                 std::span<const std::size_t> indices);

/// Forward pass only, over the whole dataset.
double mlp_loss(const MlpSpec& spec, std::span<const double> params,
                const SyntheticDataset& data);
double mlp_accuracy(const MlpSpec& spec, std::span<const double> params,
                    const SyntheticDataset& data);

/// Weights ~ N(0, 2 / fan_in), biases 0.
ParamVector init_params(const MlpSpec& spec, Rng& rng);

/// Global: one group. PerTensor: W and b of each layer. PerFilter: one group
/// per row of each W, b per layer. PerElement: singletons.
GroupSpec build_groups(const MlpSpec& spec, GroupMode mode);

/// Minibatch gradients from a per-epoch shuffle (last partial batch dropped);
/// loss and accuracy over the full dataset.
class MlpOracle final : public GradientOracle {
 public:
  MlpOracle(const MlpSpec& spec, const SyntheticDataset& data, std::size_t batch_size, Rng rng);

  std::size_t dimension() const override { return spec_.parameter_count(); }
  void gradient(std::span<const double> weights, std::size_t step,
                std::span<double> out) override;
  double loss(std::span<const double> weights) const override;
  std::optional<double> accuracy(std::span<const double> weights) const override;

  std::span<const std::size_t> batch_indices(std::size_t step);

 private:
  const MlpSpec& spec_;
  const SyntheticDataset& data_;
  std::size_t batch_size_;
  Rng rng_;
  std::optional<std::size_t> epoch_;
  std::vector<std::size_t> order_;
};

struct TrainOptions {
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  RunOptions run;
};

/// Delayed training of a freshly initialized network. The seed drives the
/// initialization (substream 0) and the batch order (substream 1).
RunResult train(const MlpSpec& spec, const SyntheticDataset& data, const OptimizerConfig& config,
                GroupMode grouping, const DelayConfig& delay, const TrainOptions& options);

}  // namespace abrake
