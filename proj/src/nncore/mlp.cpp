#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "mcma/nncore.hpp"
#include "mcma/seed.hpp"

namespace mcma::nn {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::sigmoid: return "sigmoid";
    case Activation::linear: return "linear";
    case Activation::softmax: return "softmax";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "linear") return Activation::linear;
  if (name == "softmax") return Activation::softmax;
  throw ValidationError(fmt::format("unknown activation '{}'", name));
}

std::string_view to_string(LossKind k) {
  switch (k) {
    case LossKind::mean_squared_error: return "mean_squared_error";
    case LossKind::cross_entropy: return "cross_entropy";
    case LossKind::binary_cross_entropy: return "binary_cross_entropy";
  }
  return "?";
}

void Topology::validate() const {
  if (layer_sizes.size() < 2)
    throw ValidationError("topology needs at least an input and an output layer");
  for (std::size_t n : layer_sizes)
    if (n < 1) throw ValidationError("topology layers must have at least one neuron");
  if (hidden_activation != Activation::sigmoid)
    throw ValidationError("hidden activation must be sigmoid");
  if (output_activation == Activation::softmax && output_size() < 2)
    throw ValidationError("softmax output needs at least two neurons");
}

std::string Topology::shape_string() const {
  std::string out;
  for (std::size_t i = 0; i < layer_sizes.size(); ++i) {
    if (i) out += "->";
    out += std::to_string(layer_sizes[i]);
  }
  return out;
}

std::vector<std::size_t> Topology::parse_shape(std::string_view text) {
  std::vector<std::size_t> sizes;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = text.find("->", pos);
    std::string_view part = text.substr(pos, next == std::string_view::npos ? text.npos : next - pos);
    while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
    while (!part.empty() && part.back() == ' ') part.remove_suffix(1);
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc{} || ptr != part.data() + part.size() || part.empty())
      throw ValidationError(fmt::format("malformed topology '{}'", text));
    sizes.push_back(value);
    if (next == std::string_view::npos) break;
    pos = next + 2;
  }
  return sizes;
}

Topology Topology::with_output(std::size_t size, Activation activation) const {
  Topology t = *this;
  t.layer_sizes.back() = size;
  t.output_activation = activation;
  return t;
}

double init_bound(std::size_t fan_in) { return std::sqrt(1.0 / static_cast<double>(fan_in)); }

Mlp::Mlp(Topology topology, std::vector<Layer> layers, std::uint64_t seed)
    : topology_(std::move(topology)), layers_(std::move(layers)), seed_(seed) {
  topology_.validate();
  if (layers_.size() != topology_.weight_layers())
    throw ValidationError("layer count does not match topology");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    if (layer.fan_in != topology_.layer_sizes[l] || layer.fan_out != topology_.layer_sizes[l + 1] ||
        layer.weights.size() != layer.fan_in * layer.fan_out || layer.biases.size() != layer.fan_out)
      throw ValidationError(fmt::format("layer {} shape does not match topology {}", l,
                                        topology_.shape_string()));
  }
}

Mlp Mlp::init(const Topology& topology, std::uint64_t seed) {
  topology.validate();
  std::mt19937_64 rng(seed);
  std::vector<Layer> layers;
  for (std::size_t l = 0; l + 1 < topology.layer_sizes.size(); ++l) {
    Layer layer(topology.layer_sizes[l], topology.layer_sizes[l + 1]);
    const double bound = init_bound(layer.fan_in);
    for (double& w : layer.weights) w = (2.0 * unit_double(rng()) - 1.0) * bound;
    for (double& b : layer.biases) b = (2.0 * unit_double(rng()) - 1.0) * bound;
    layers.push_back(std::move(layer));
  }
  return Mlp(topology, std::move(layers), seed);
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const Layer& l : layers_) n += l.weights.size() + l.biases.size();
  return n;
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.begin(), logits.end());
  const double peak = *std::max_element(out.begin(), out.end());
  double sum = 0.0;
  for (double& v : out) {
    v = std::exp(v - peak);
    sum += v;
  }
  for (double& v : out) v /= sum;
  return out;
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
  if (input.size() != topology_.input_size())
    throw ValidationError(fmt::format("forward: expected {} inputs, got {}", topology_.input_size(),
                                      input.size()));
  for (double v : input)
    if (!std::isfinite(v)) throw ValidationError("forward: non-finite input");

  std::vector<double> current(input.begin(), input.end());
  std::vector<double> next;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    next.assign(layer.biases.begin(), layer.biases.end());
    for (std::size_t i = 0; i < layer.fan_in; ++i) {
      const double a = current[i];
      const double* w = &layer.weights[i * layer.fan_out];
      for (std::size_t j = 0; j < layer.fan_out; ++j) next[j] += a * w[j];
    }
    const bool last = l + 1 == layers_.size();
    const Activation act = last ? topology_.output_activation : topology_.hidden_activation;
    if (act == Activation::sigmoid) {
      for (double& v : next) v = sigmoid(v);
    } else if (act == Activation::softmax) {
      next = softmax(next);
    }
    current.swap(next);
  }
  return current;
}

ClassPrediction predict_class(const Mlp& mlp, std::span<const double> input) {
  const Topology& t = mlp.topology();
  const bool binary = t.output_activation == Activation::sigmoid && t.output_size() == 1;
  if (t.output_activation != Activation::softmax && !binary)
    throw ValidationError("predict_class needs a softmax or single-sigmoid output");

  ClassPrediction pred;
  std::vector<double> out = mlp.forward(input);
  if (binary) {
    const double p = out[0];
    pred.distribution = {1.0 - p, p};
    pred.index = p >= 0.5 ? 1 : 0;
    pred.confidence = pred.index == 1 ? p : 1.0 - p;
    return pred;
  }
  pred.distribution = std::move(out);
  // max_element returns the first maximum, giving the low-index tie break.
  auto it = std::max_element(pred.distribution.begin(), pred.distribution.end());
  pred.index = static_cast<std::size_t>(it - pred.distribution.begin());
  pred.confidence = *it;
  return pred;
}

void check_loss_compatible(const Topology& t, LossKind loss) {
  switch (loss) {
    case LossKind::cross_entropy:
      if (t.output_activation != Activation::softmax)
        throw ValidationError("cross_entropy loss requires a softmax output");
      break;
    case LossKind::binary_cross_entropy:
      if (t.output_activation != Activation::sigmoid || t.output_size() != 1)
        throw ValidationError("binary_cross_entropy loss requires a single sigmoid output");
      break;
    case LossKind::mean_squared_error:
      if (t.output_activation == Activation::softmax)
        throw ValidationError("mean_squared_error loss is not supported with softmax outputs");
      break;
  }
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ValidationError("epochs must be positive");
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (!(rmsprop_decay > 0.0 && rmsprop_decay < 1.0))
    throw ValidationError("rmsprop_decay must lie in (0, 1)");
  if (!(rmsprop_epsilon > 0.0)) throw ValidationError("rmsprop_epsilon must be positive");
  if (batch_size < 1) throw ValidationError("batch_size must be positive");
}

}  // namespace mcma::nn
