#pragma once

// Minimal feed-forward network engine used for both approximators and
// classifiers: topology, forward pass, backpropagation and RMSprop training.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcma/matrix.hpp"

namespace mcma::nn {

enum class Activation { sigmoid, linear, softmax };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

struct Topology {
  std::vector<std::size_t> layer_sizes;  // input layer first
  Activation hidden_activation = Activation::sigmoid;
  Activation output_activation = Activation::linear;

  // Throws ValidationError when the invariants do not hold.
  void validate() const;

  std::size_t input_size() const { return layer_sizes.front(); }
  std::size_t output_size() const { return layer_sizes.back(); }
  std::size_t weight_layers() const { return layer_sizes.size() - 1; }

  // "6->8->1"
  std::string shape_string() const;
  static std::vector<std::size_t> parse_shape(std::string_view text);

  // Same hidden layers with a different output layer.
  Topology with_output(std::size_t size, Activation activation) const;

  friend bool operator==(const Topology&, const Topology&) = default;
};

// One fully-connected layer. weights is fan_in x fan_out, row-major.
struct Layer {
  std::size_t fan_in = 0;
  std::size_t fan_out = 0;
  std::vector<double> weights;
  std::vector<double> biases;

  Layer() = default;
  Layer(std::size_t in, std::size_t out)
      : fan_in(in), fan_out(out), weights(in * out, 0.0), biases(out, 0.0) {}

  double& weight(std::size_t i, std::size_t j) { return weights[i * fan_out + j]; }
  double weight(std::size_t i, std::size_t j) const { return weights[i * fan_out + j]; }

  friend bool operator==(const Layer&, const Layer&) = default;
};

// Gradients share the parameter layout.
using Gradient = std::vector<Layer>;

// Half-width of the uniform initialisation interval for a layer.
double init_bound(std::size_t fan_in);

class Mlp {
 public:
  Mlp() = default;
  // Validates topology and that layer shapes match it.
  Mlp(Topology topology, std::vector<Layer> layers, std::uint64_t seed);

  // Weights and biases ~ U(-sqrt(1/fan_in), +sqrt(1/fan_in)), drawn layer by
  // layer (weights row-major, then biases) from mt19937_64(seed).
  static Mlp init(const Topology& topology, std::uint64_t seed);

  const Topology& topology() const { return topology_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t parameter_count() const;

  std::vector<double> forward(std::span<const double> input) const;

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  Topology topology_;
  std::vector<Layer> layers_;
  std::uint64_t seed_ = 0;
};

// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);

struct ClassPrediction {
  std::size_t index = 0;
  double confidence = 0.0;
  std::vector<double> distribution;
};

// argmax of the output distribution, ties toward the lowest index. A scalar
// sigmoid output is read as the distribution [1 - p, p].
ClassPrediction predict_class(const Mlp& mlp, std::span<const double> input);

enum class LossKind { mean_squared_error, cross_entropy, binary_cross_entropy };

std::string_view to_string(LossKind k);

// cross_entropy needs softmax, binary_cross_entropy needs a single sigmoid,
// mean_squared_error needs a linear or sigmoid output.
void check_loss_compatible(const Topology& topology, LossKind loss);

enum class Optimizer { rmsprop, sgd };

struct TrainConfig {
  int epochs = 1500;
  Optimizer optimizer = Optimizer::rmsprop;
  double learning_rate = 0.01;
  double rmsprop_decay = 0.9;
  double rmsprop_epsilon = 1e-8;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;

  void validate() const;
};

// Weighted mean loss over the rows, sum(w_i * L_i) / sum(w_i). Empty weights
// means unit weights. Per-sample losses:
//   mse  : mean over outputs of (y - t)^2
//   ce   : -sum_j t_j log softmax(z)_j
//   bce  : -(t log s(z) + (1 - t) log(1 - s(z)))
double evaluate_loss(const Mlp& mlp, const Matrix& inputs, const Matrix& targets, LossKind loss,
                     std::span<const double> weights = {});

// Same loss plus its exact gradient with respect to every parameter.
double loss_and_gradient(const Mlp& mlp, const Matrix& inputs, const Matrix& targets,
                         LossKind loss, std::span<const double> weights, Gradient& gradient);

struct TrainResult {
  double final_loss = 0.0;
  int epochs_run = 0;
};

// Mini-batch training in place. Rows are visited in an order reshuffled each
// epoch from config.seed. Throws TrainingError naming the epoch if the loss
// or a gradient becomes non-finite; parameters are left at their last
// finite values.
TrainResult train(Mlp& mlp, const Matrix& inputs, const Matrix& targets, LossKind loss,
                  const TrainConfig& config, std::span<const double> sample_weights = {});

// Plain-text model format, see model_io.cpp for the layout.
void write_mlp(std::ostream& os, const Mlp& mlp);
Mlp read_mlp(std::istream& is);
void save_mlp(const std::filesystem::path& path, const Mlp& mlp);
Mlp load_mlp(const std::filesystem::path& path);

}  // namespace mcma::nn
