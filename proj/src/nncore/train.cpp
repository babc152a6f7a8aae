#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "mcma/nncore.hpp"

namespace mcma::nn {
namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

void check_data(const Mlp& mlp, const Matrix& inputs, const Matrix& targets, LossKind loss,
                std::span<const double> weights) {
  const Topology& t = mlp.topology();
  check_loss_compatible(t, loss);
  if (inputs.rows() == 0) throw ValidationError("training data is empty");
  if (inputs.rows() != targets.rows())
    throw ValidationError(fmt::format("{} inputs but {} targets", inputs.rows(), targets.rows()));
  if (inputs.cols() != t.input_size())
    throw ValidationError(fmt::format("inputs have {} columns, network expects {}", inputs.cols(),
                                      t.input_size()));
  if (targets.cols() != t.output_size())
    throw ValidationError(fmt::format("targets have {} columns, network produces {}",
                                      targets.cols(), t.output_size()));
  for (double v : inputs.data())
    if (!std::isfinite(v)) throw ValidationError("non-finite training input");
  for (double v : targets.data())
    if (!std::isfinite(v)) throw ValidationError("non-finite training target");
  if (!weights.empty()) {
    if (weights.size() != inputs.rows())
      throw ValidationError("sample weight count does not match the data");
    for (double w : weights)
      if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("sample weights must be finite and >= 0");
  }
}

Gradient zero_like(const Mlp& mlp) {
  Gradient g;
  for (const Layer& l : mlp.layers()) g.emplace_back(l.fan_in, l.fan_out);
  return g;
}

void clear(Gradient& g) {
  for (Layer& l : g) {
    std::fill(l.weights.begin(), l.weights.end(), 0.0);
    std::fill(l.biases.begin(), l.biases.end(), 0.0);
  }
}

// Reusable per-network scratch space for a forward/backward pass.
class Backprop {
 public:
  explicit Backprop(const Mlp& mlp) : mlp_(mlp) {
    const auto& sizes = mlp.topology().layer_sizes;
    act_.resize(sizes.size());
    delta_.resize(sizes.size());
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      act_[i].resize(sizes[i]);
      delta_[i].resize(sizes[i]);
    }
    logits_.resize(sizes.back());
  }

  // Loss of one sample; if grad is non-null adds scale * dL/dparams to it.
  double run(std::span<const double> x, std::span<const double> t, LossKind loss, double scale,
             Gradient* grad) {
    forward(x);
    const Topology& topo = mlp_.topology();
    const std::size_t m = topo.output_size();
    std::vector<double>& out = act_.back();
    std::vector<double>& dz = delta_.back();
    double value = 0.0;

    switch (loss) {
      case LossKind::mean_squared_error: {
        const bool sig = topo.output_activation == Activation::sigmoid;
        for (std::size_t j = 0; j < m; ++j) {
          const double diff = out[j] - t[j];
          value += diff * diff;
          double d = 2.0 * diff / static_cast<double>(m);
          if (sig) d *= out[j] * (1.0 - out[j]);
          dz[j] = d;
        }
        value /= static_cast<double>(m);
        break;
      }
      case LossKind::cross_entropy: {
        const double peak = *std::max_element(logits_.begin(), logits_.end());
        double sum = 0.0;
        for (double z : logits_) sum += std::exp(z - peak);
        const double lse = peak + std::log(sum);
        double tsum = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
          value -= t[j] * (logits_[j] - lse);
          tsum += t[j];
        }
        for (std::size_t j = 0; j < m; ++j) dz[j] = out[j] * tsum - t[j];
        break;
      }
      case LossKind::binary_cross_entropy: {
        const double z = logits_[0];
        value = softplus(z) - t[0] * z;
        dz[0] = out[0] - t[0];
        break;
      }
    }
    if (grad) backward(scale, *grad);
    return value;
  }

 private:
  void forward(std::span<const double> x) {
    std::copy(x.begin(), x.end(), act_[0].begin());
    const auto& layers = mlp_.layers();
    const Topology& topo = mlp_.topology();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const Layer& layer = layers[l];
      const std::vector<double>& in = act_[l];
      std::vector<double>& z = act_[l + 1];
      std::copy(layer.biases.begin(), layer.biases.end(), z.begin());
      for (std::size_t i = 0; i < layer.fan_in; ++i) {
        const double a = in[i];
        const double* w = &layer.weights[i * layer.fan_out];
        for (std::size_t j = 0; j < layer.fan_out; ++j) z[j] += a * w[j];
      }
      const bool last = l + 1 == layers.size();
      if (!last) {
        for (double& v : z) v = sigmoid(v);
        continue;
      }
      std::copy(z.begin(), z.end(), logits_.begin());
      if (topo.output_activation == Activation::sigmoid) {
        for (double& v : z) v = sigmoid(v);
      } else if (topo.output_activation == Activation::softmax) {
        std::vector<double> p = softmax(z);
        std::copy(p.begin(), p.end(), z.begin());
      }
    }
  }

  void backward(double scale, Gradient& grad) {
    const auto& layers = mlp_.layers();
    for (std::size_t l = layers.size(); l-- > 0;) {
      const Layer& layer = layers[l];
      Layer& g = grad[l];
      const std::vector<double>& in = act_[l];
      const std::vector<double>& dz = delta_[l + 1];
      for (std::size_t j = 0; j < layer.fan_out; ++j) g.biases[j] += scale * dz[j];
      for (std::size_t i = 0; i < layer.fan_in; ++i) {
        const double a = scale * in[i];
        double* gw = &g.weights[i * layer.fan_out];
        for (std::size_t j = 0; j < layer.fan_out; ++j) gw[j] += a * dz[j];
      }
      if (l == 0) break;
      std::vector<double>& dprev = delta_[l];
      for (std::size_t i = 0; i < layer.fan_in; ++i) {
        const double* w = &layer.weights[i * layer.fan_out];
        double s = 0.0;
        for (std::size_t j = 0; j < layer.fan_out; ++j) s += w[j] * dz[j];
        dprev[i] = s * in[i] * (1.0 - in[i]);
      }
    }
  }

  const Mlp& mlp_;
  std::vector<std::vector<double>> act_;
  std::vector<std::vector<double>> delta_;
  std::vector<double> logits_;
};

double total_weight(std::span<const double> weights, std::size_t n) {
  if (weights.empty()) return static_cast<double>(n);
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

bool all_finite(const Gradient& g) {
  for (const Layer& l : g) {
    for (double v : l.weights)
      if (!std::isfinite(v)) return false;
    for (double v : l.biases)
      if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

double evaluate_loss(const Mlp& mlp, const Matrix& inputs, const Matrix& targets, LossKind loss,
                     std::span<const double> weights) {
  check_data(mlp, inputs, targets, loss, weights);
  const double total = total_weight(weights, inputs.rows());
  if (!(total > 0.0)) throw ValidationError("sample weights sum to zero");
  Backprop bp(mlp);
  double sum = 0.0;
  for (std::size_t i = 0; i < inputs.rows(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    sum += w * bp.run(inputs.row(i), targets.row(i), loss, 0.0, nullptr);
  }
  return sum / total;
}

double loss_and_gradient(const Mlp& mlp, const Matrix& inputs, const Matrix& targets,
                         LossKind loss, std::span<const double> weights, Gradient& gradient) {
  check_data(mlp, inputs, targets, loss, weights);
  const double total = total_weight(weights, inputs.rows());
  if (!(total > 0.0)) throw ValidationError("sample weights sum to zero");
  gradient = zero_like(mlp);
  Backprop bp(mlp);
  double sum = 0.0;
  for (std::size_t i = 0; i < inputs.rows(); ++i) {
    const double w = (weights.empty() ? 1.0 : weights[i]) / total;
    sum += w * bp.run(inputs.row(i), targets.row(i), loss, w, &gradient);
  }
  return sum;
}

TrainResult train(Mlp& mlp, const Matrix& inputs, const Matrix& targets, LossKind loss,
                  const TrainConfig& config, std::span<const double> sample_weights) {
  config.validate();
  check_data(mlp, inputs, targets, loss, sample_weights);
  if (!(total_weight(sample_weights, inputs.rows()) > 0.0))
    throw ValidationError("sample weights sum to zero");

  const std::size_t n = inputs.rows();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(config.seed);

  Gradient grad = zero_like(mlp);
  Gradient cache = zero_like(mlp);  // RMSprop running mean of squared gradients
  std::vector<double> staged;
  Backprop bp(mlp);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    // Fisher-Yates with raw engine output so the order does not depend on
    // the standard library's distribution implementation.
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t stop = std::min(n, start + config.batch_size);
      double batch_weight = 0.0;
      for (std::size_t k = start; k < stop; ++k)
        batch_weight += sample_weights.empty() ? 1.0 : sample_weights[order[k]];
      if (!(batch_weight > 0.0)) continue;

      clear(grad);
      for (std::size_t k = start; k < stop; ++k) {
        const std::size_t row = order[k];
        const double w = sample_weights.empty() ? 1.0 : sample_weights[row];
        epoch_loss += w * bp.run(inputs.row(row), targets.row(row), loss, w / batch_weight, &grad);
      }
      if (!std::isfinite(epoch_loss) || !all_finite(grad))
        throw TrainingError(fmt::format("non-finite loss or gradient at epoch {}", epoch));

      // Stage the update, then commit only if every new value is finite.
      staged.clear();
      auto& layers = mlp.layers();
      for (std::size_t l = 0; l < layers.size(); ++l) {
        auto step = [&](std::vector<double>& params, std::vector<double>& g, std::vector<double>& c) {
          for (std::size_t p = 0; p < params.size(); ++p) {
            double delta;
            if (config.optimizer == Optimizer::rmsprop) {
              c[p] = config.rmsprop_decay * c[p] + (1.0 - config.rmsprop_decay) * g[p] * g[p];
              delta = config.learning_rate * g[p] / (std::sqrt(c[p]) + config.rmsprop_epsilon);
            } else {
              delta = config.learning_rate * g[p];
            }
            staged.push_back(params[p] - delta);
          }
        };
        step(layers[l].weights, grad[l].weights, cache[l].weights);
        step(layers[l].biases, grad[l].biases, cache[l].biases);
      }
      for (double v : staged)
        if (!std::isfinite(v))
          throw TrainingError(fmt::format("non-finite parameter update at epoch {}", epoch));
      std::size_t s = 0;
      for (Layer& layer : layers) {
        for (double& w : layer.weights) w = staged[s++];
        for (double& b : layer.biases) b = staged[s++];
      }
    }
    if (!std::isfinite(epoch_loss))
      throw TrainingError(fmt::format("non-finite loss at epoch {}", epoch));
  }

  TrainResult result;
  result.epochs_run = config.epochs;
  result.final_loss = evaluate_loss(mlp, inputs, targets, loss, sample_weights);
  if (!std::isfinite(result.final_loss))
    throw TrainingError(fmt::format("non-finite loss at epoch {}", config.epochs));
  return result;
}

}  // namespace mcma::nn
