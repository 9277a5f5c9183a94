// Copyright 2026 The abrake Authors
// SPDX-License-Identifier: Apache-2.0

#include "abrake/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "abrake/errors.hpp"
#include "abrake/format.hpp"

namespace abrake {

void MlpSpec::validate() const {
  if (layer_sizes.size() < 2) throw ConfigError("layer_sizes: need at least input and output");
  for (std::size_t s : layer_sizes) {
    if (s < 1) throw ConfigError("layer_sizes: every size must be >= 1");
  }
}

std::vector<MlpSpec::Layer> MlpSpec::layout() const {
  validate();
  std::vector<Layer> layers;
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    Layer layer;
    layer.in = layer_sizes[l];
    layer.out = layer_sizes[l + 1];
    layer.weight_offset = offset;
    offset += layer.in * layer.out;
    layer.bias_offset = offset;
    offset += layer.out;
    layers.push_back(layer);
  }
  return layers;
}

std::size_t MlpSpec::parameter_count() const {
  const auto layers = layout();
  return layers.back().bias_offset + layers.back().out;
}

SyntheticDataset make_blobs(const BlobOptions& options, std::uint64_t seed) {
  if (options.samples < 1 || options.features < 1 || options.classes < 1) {
    throw ConfigError("blobs: samples, features and classes must be >= 1");
  }
  Rng centers_rng = Rng(seed).substream(0);
  Rng noise_rng = Rng(seed).substream(1);
  std::vector<double> centers(options.classes * options.features);
  for (double& c : centers) c = options.center_scale * centers_rng.next_normal();

  SyntheticDataset data;
  data.features = options.features;
  data.classes = options.classes;
  data.inputs.resize(options.samples * options.features);
  data.labels.resize(options.samples);
  for (std::size_t i = 0; i < options.samples; ++i) {
    const std::size_t label = i % options.classes;
    data.labels[i] = label;
    for (std::size_t f = 0; f < options.features; ++f) {
      data.inputs[i * options.features + f] =
          centers[label * options.features + f] + options.spread * noise_rng.next_normal();
    }
  }
  return data;
}

void write_dataset_csv(const SyntheticDataset& data, std::ostream& out) {
  out << "# classes=" << data.classes << '\n';
  for (std::size_t f = 0; f < data.features; ++f) out << 'x' << f << ',';
  out << "label\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double x : data.sample(i)) out << format_double(x) << ',';
    out << data.labels[i] << '\n';
  }
}

SyntheticDataset read_dataset_csv(std::istream& in) {
  SyntheticDataset data;
  std::string line;
  bool have_classes = false;
  while (std::getline(in, line) && line.rfind('#', 0) == 0) {
    if (line.rfind("# classes=", 0) != 0) continue;
    try {
      data.classes = std::stoul(line.substr(10));
    } catch (const std::exception&) {
      throw ConfigError("dataset: bad class count");
    }
    have_classes = true;
  }
  if (!have_classes) throw ConfigError("dataset: missing '# classes=' line");
  if (!in && line.empty()) throw ConfigError("dataset: missing column header");
  data.features = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
  if (data.features == 0) throw ConfigError("dataset: no feature columns");

  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++row;
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      if (col < data.features) {
        auto x = parse_double(cell);
        if (!x) throw ConfigError("dataset: bad number on row " + std::to_string(row));
        data.inputs.push_back(*x);
      } else if (col == data.features) {
        std::size_t label = 0;
        try {
          label = std::stoul(cell);
        } catch (const std::exception&) {
          throw ConfigError("dataset: bad label on row " + std::to_string(row));
        }
        if (label >= data.classes) throw ConfigError("dataset: label out of range");
        data.labels.push_back(label);
      }
      ++col;
    }
    if (col != data.features + 1) {
      throw ConfigError("dataset: wrong column count on row " + std::to_string(row));
    }
  }
  return data;
}

namespace {

void require_compatible(const MlpSpec& spec, std::span<const double> params,
                        const SyntheticDataset& data) {
  if (params.size() != spec.parameter_count()) {
    throw ContractError("mlp: parameter count does not match the spec");
  }
  if (data.features != spec.input_size() || data.classes != spec.num_classes()) {
    throw ContractError("mlp: dataset shape does not match the spec");
  }
}

// Activations of every layer for one sample; acts[0] is the input and the
// last entry holds the logits.
void forward(const std::vector<MlpSpec::Layer>& layers, std::span<const double> params,
             std::span<const double> x, std::vector<std::vector<double>>& acts) {
  acts[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    const std::vector<double>& a = acts[l];
    std::vector<double>& z = acts[l + 1];
    z.resize(layer.out);
    const bool hidden = l + 1 < layers.size();
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double* row = params.data() + layer.weight_offset + o * layer.in;
      double s = params[layer.bias_offset + o];
      for (std::size_t i = 0; i < layer.in; ++i) s += row[i] * a[i];
      if (!std::isfinite(s)) {
        throw NumericalError("non-finite activation in layer " + std::to_string(l), l);
      }
      z[o] = hidden ? std::max(s, 0.0) : s;
    }
  }
}

// Cross-entropy of logits against `label`; fills probs with the softmax.
double cross_entropy(const std::vector<double>& logits, std::size_t label,
                     std::vector<double>& probs) {
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  probs.resize(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) {
    probs[k] = std::exp(logits[k] - top);
    sum += probs[k];
  }
  for (double& p : probs) p /= sum;
  return std::log(sum) + top - logits[label];
}

}  // namespace

LossAndGradient forward_backward(const MlpSpec& spec, std::span<const double> params,
                                 const SyntheticDataset& data,
                                 std::span<const std::size_t> indices) {
  require_compatible(spec, params, data);
  if (indices.empty()) throw ContractError("forward_backward: empty batch");
  const auto layers = spec.layout();
  const double scale = 1.0 / static_cast<double>(indices.size());

  LossAndGradient out;
  out.grad = ParamVector(params.size());
  std::vector<std::vector<double>> acts(layers.size() + 1);
  std::vector<double> probs, delta, prev;

  for (std::size_t idx : indices) {
    if (idx >= data.size()) throw ContractError("forward_backward: sample index out of range");
    forward(layers, params, data.sample(idx), acts);
    out.loss += cross_entropy(acts.back(), data.labels[idx], probs);

    delta = probs;
    delta[data.labels[idx]] -= 1.0;
    for (double& d : delta) d *= scale;

    for (std::size_t l = layers.size(); l-- > 0;) {
      const auto& layer = layers[l];
      const std::vector<double>& a = acts[l];
      for (std::size_t o = 0; o < layer.out; ++o) {
        double* grow = out.grad.data() + layer.weight_offset + o * layer.in;
        for (std::size_t i = 0; i < layer.in; ++i) grow[i] += delta[o] * a[i];
        out.grad[layer.bias_offset + o] += delta[o];
      }
      if (l == 0) break;
      prev.assign(layer.in, 0.0);
      for (std::size_t o = 0; o < layer.out; ++o) {
        const double* row = params.data() + layer.weight_offset + o * layer.in;
        for (std::size_t i = 0; i < layer.in; ++i) prev[i] += row[i] * delta[o];
      }
      for (std::size_t i = 0; i < layer.in; ++i) {
        if (!(a[i] > 0.0)) prev[i] = 0.0;
      }
      delta.swap(prev);
    }
  }
  out.loss *= scale;
  return out;
}

double mlp_loss(const MlpSpec& spec, std::span<const double> params,
                const SyntheticDataset& data) {
  require_compatible(spec, params, data);
  const auto layers = spec.layout();
  std::vector<std::vector<double>> acts(layers.size() + 1);
  std::vector<double> probs;
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    forward(layers, params, data.sample(i), acts);
    total += cross_entropy(acts.back(), data.labels[i], probs);
  }
  return total / static_cast<double>(data.size());
}

double mlp_accuracy(const MlpSpec& spec, std::span<const double> params,
                    const SyntheticDataset& data) {
  require_compatible(spec, params, data);
  const auto layers = spec.layout();
  std::vector<std::vector<double>> acts(layers.size() + 1);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    forward(layers, params, data.sample(i), acts);
    const auto& logits = acts.back();
    const auto best = static_cast<std::size_t>(
        std::max_element(logits.begin(), logits.end()) - logits.begin());
    if (best == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

ParamVector init_params(const MlpSpec& spec, Rng& rng) {
  ParamVector params(spec.parameter_count());
  for (const auto& layer : spec.layout()) {
    const double stddev = std::sqrt(2.0 / static_cast<double>(layer.in));
    for (std::size_t k = 0; k < layer.in * layer.out; ++k) {
      params[layer.weight_offset + k] = stddev * rng.next_normal();
    }
  }
  return params;
}

GroupSpec build_groups(const MlpSpec& spec, GroupMode mode) {
  const std::size_t n = spec.parameter_count();
  switch (mode) {
    case GroupMode::Global: return GroupSpec::global(n);
    case GroupMode::PerElement: return GroupSpec::per_element(n);
    case GroupMode::PerTensor:
    case GroupMode::PerFilter: break;
  }
  std::vector<IndexRange> ranges;
  for (const auto& layer : spec.layout()) {
    if (mode == GroupMode::PerTensor) {
      ranges.push_back({layer.weight_offset, layer.bias_offset});
    } else {
      for (std::size_t o = 0; o < layer.out; ++o) {
        const std::size_t begin = layer.weight_offset + o * layer.in;
        ranges.push_back({begin, begin + layer.in});
      }
    }
    ranges.push_back({layer.bias_offset, layer.bias_offset + layer.out});
  }
  return GroupSpec(mode, std::move(ranges), n);
}

MlpOracle::MlpOracle(const MlpSpec& spec, const SyntheticDataset& data, std::size_t batch_size,
                     Rng rng)
    : spec_(spec), data_(data), batch_size_(batch_size), rng_(rng) {
  if (batch_size_ < 1 || batch_size_ > data_.size()) {
    throw ConfigError("batch_size: must lie in [1, dataset size]");
  }
}

std::span<const std::size_t> MlpOracle::batch_indices(std::size_t step) {
  const std::size_t per_epoch = data_.size() / batch_size_;
  const std::size_t epoch = step / per_epoch;
  if (epoch_ != epoch) {
    order_.resize(data_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    Rng shuffle = rng_.substream(epoch);
    for (std::size_t i = order_.size(); i > 1; --i) {
      std::swap(order_[i - 1], order_[shuffle.next_below(i)]);
    }
    epoch_ = epoch;
  }
  const std::size_t first = (step % per_epoch) * batch_size_;
  return std::span<const std::size_t>(order_).subspan(first, batch_size_);
}

void MlpOracle::gradient(std::span<const double> weights, std::size_t step,
                         std::span<double> out) {
  const auto lg = forward_backward(spec_, weights, data_, batch_indices(step));
  std::copy(lg.grad.begin(), lg.grad.end(), out.begin());
}

double MlpOracle::loss(std::span<const double> weights) const {
  return mlp_loss(spec_, weights, data_);
}

std::optional<double> MlpOracle::accuracy(std::span<const double> weights) const {
  try {
    return mlp_accuracy(spec_, weights, data_);
  } catch (const NumericalError&) {
    return std::nullopt;
  }
}

RunResult train(const MlpSpec& spec, const SyntheticDataset& data, const OptimizerConfig& config,
                GroupMode grouping, const DelayConfig& delay, const TrainOptions& options) {
  spec.validate();
  Rng init_rng = Rng(options.seed).substream(0);
  const ParamVector w0 = init_params(spec, init_rng);
  MlpOracle oracle(spec, data, options.batch_size, Rng(options.seed).substream(1));
  return run_async(oracle, config, build_groups(spec, grouping), delay, w0, options.run);
}

}  // namespace abrake
