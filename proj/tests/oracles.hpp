#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance binary. Nothing here calls into the code under test beyond the
// plain data types and the entry points being checked.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "mcma/matrix.hpp"
#include "mcma/nncore.hpp"
#include "mcma/runtime.hpp"

namespace oracle {

// Random topology with 2..4 layers of 1..10 neurons, output activation fitting
// the loss.
inline mcma::nn::Topology random_topology(std::mt19937_64& rng, mcma::nn::LossKind loss) {
  using mcma::nn::Activation;
  std::uniform_int_distribution<int> n_layers(2, 4), width(1, 10), out2(2, 10);
  mcma::nn::Topology t;
  const int layers = n_layers(rng);
  for (int i = 0; i < layers; ++i) t.layer_sizes.push_back(static_cast<std::size_t>(width(rng)));
  switch (loss) {
    case mcma::nn::LossKind::mean_squared_error:
      t.output_activation = (rng() & 1) ? Activation::linear : Activation::sigmoid;
      break;
    case mcma::nn::LossKind::cross_entropy:
      t.output_activation = Activation::softmax;
      t.layer_sizes.back() = static_cast<std::size_t>(out2(rng));
      break;
    case mcma::nn::LossKind::binary_cross_entropy:
      t.output_activation = Activation::sigmoid;
      t.layer_sizes.back() = 1;
      break;
  }
  return t;
}

// Targets valid for the loss: any reals for MSE, a distribution for CE, a
// probability for BCE.
inline mcma::Matrix random_targets(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                                   mcma::nn::LossKind loss) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  mcma::Matrix t(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      t(r, c) = loss == mcma::nn::LossKind::mean_squared_error ? 2.0 * u(rng) - 1.0 : u(rng);
      sum += t(r, c);
    }
    if (loss == mcma::nn::LossKind::cross_entropy)
      for (std::size_t c = 0; c < cols; ++c) t(r, c) /= sum;
  }
  return t;
}

struct GradientCheck {
  double worst_relative_error = 0.0;
  std::size_t parameters = 0;
};

// Loss recomputed from scratch in long double, with one parameter shifted by
// delta (layer, flat index, bias or weight). Same definitions as nncore:
// sigmoid hidden layers, weighted mean of per-sample losses.
struct Shift {
  std::size_t layer = 0, index = 0;
  bool bias = false;
  long double delta = 0.0L;
};

inline long double reference_loss(const mcma::nn::Mlp& mlp, const mcma::Matrix& x, const mcma::Matrix& t,
                                  mcma::nn::LossKind loss, const std::vector<double>& w, const Shift& shift) {
  using mcma::nn::Activation;
  using mcma::nn::LossKind;
  const auto& layers = mlp.layers();
  long double total = 0.0L, weight_sum = 0.0L;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    std::vector<long double> a(x.row(r).begin(), x.row(r).end());
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto& L = layers[l];
      std::vector<long double> z(L.fan_out);
      for (std::size_t j = 0; j < L.fan_out; ++j) {
        long double b = L.biases[j];
        if (shift.bias && shift.layer == l && shift.index == j) b += shift.delta;
        z[j] = b;
        for (std::size_t i = 0; i < L.fan_in; ++i) {
          long double wt = L.weights[i * L.fan_out + j];
          if (!shift.bias && shift.layer == l && shift.index == i * L.fan_out + j) wt += shift.delta;
          z[j] += a[i] * wt;
        }
      }
      const bool last = l + 1 == layers.size();
      const Activation act = last ? mlp.topology().output_activation : Activation::sigmoid;
      if (act == Activation::sigmoid)
        for (auto& v : z) v = 1.0L / (1.0L + std::exp(-v));
      else if (act == Activation::softmax) {
        const long double peak = *std::max_element(z.begin(), z.end());
        long double sum = 0.0L;
        for (auto& v : z) sum += (v = std::exp(v - peak));
        for (auto& v : z) v /= sum;
      }
      a = std::move(z);
    }
    long double per = 0.0L;
    for (std::size_t j = 0; j < a.size(); ++j) {
      const long double tj = t(r, j);
      switch (loss) {
        case LossKind::mean_squared_error: per += (a[j] - tj) * (a[j] - tj) / static_cast<long double>(a.size()); break;
        case LossKind::cross_entropy: per -= tj * std::log(a[j]); break;
        case LossKind::binary_cross_entropy: per -= tj * std::log(a[j]) + (1.0L - tj) * std::log(1.0L - a[j]); break;
      }
    }
    const long double wr = w.empty() ? 1.0L : w[r];
    total += wr * per;
    weight_sum += wr;
  }
  return total / weight_sum;
}

// Central differences with step h on the long-double reference loss against
// loss_and_gradient. The relative error of one parameter is |analytic -
// numeric| / max(|analytic|, |numeric|, floor); the floor keeps parameters
// whose true gradient is ~0 from dividing round-off by round-off.
inline GradientCheck check_gradient(const mcma::nn::Mlp& mlp, const mcma::Matrix& x, const mcma::Matrix& t,
                                    mcma::nn::LossKind loss, const std::vector<double>& w, double h = 1e-5,
                                    double floor = 1e-12) {
  mcma::nn::Gradient g;
  mcma::nn::loss_and_gradient(mlp, x, t, loss, w, g);
  GradientCheck out;
  auto visit = [&](std::size_t layer, std::size_t index, bool bias, double analytic) {
    const long double up = reference_loss(mlp, x, t, loss, w, Shift{layer, index, bias, h});
    const long double down = reference_loss(mlp, x, t, loss, w, Shift{layer, index, bias, -h});
    const double numeric = static_cast<double>((up - down) / (2.0L * h));
    const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
    out.worst_relative_error = std::max(out.worst_relative_error, std::abs(analytic - numeric) / denom);
    ++out.parameters;
  };
  for (std::size_t l = 0; l < mlp.layers().size(); ++l) {
    const auto& layer = mlp.layers()[l];
    for (std::size_t i = 0; i < layer.weights.size(); ++i) visit(l, i, false, g[l].weights[i]);
    for (std::size_t j = 0; j < layer.biases.size(); ++j) visit(l, j, true, g[l].biases[j]);
  }
  return out;
}

// Label oracles written as brute-force scans.
inline int complementary_label(const std::vector<double>& errors, double bound) {
  for (std::size_t k = 0; k < errors.size(); ++k)
    if (errors[k] <= bound) return static_cast<int>(k) + 1;
  return 0;
}

inline int competitive_label(const std::vector<double>& errors, double bound) {
  double best = INFINITY;
  int arg = 0;
  for (std::size_t k = 0; k < errors.size(); ++k)
    if (errors[k] < best) {
      best = errors[k];
      arg = static_cast<int>(k) + 1;
    }
  return best <= bound ? arg : 0;
}

// Prefix rejection: label k implies every earlier approximator misses the
// bound and approximator k meets it; label 0 implies none meets it.
inline bool prefix_rejection_holds(const std::vector<double>& errors, int label, double bound) {
  if (label < 0 || static_cast<std::size_t>(label) > errors.size()) return false;
  const std::size_t stop = label == 0 ? errors.size() : static_cast<std::size_t>(label) - 1;
  for (std::size_t j = 0; j < stop; ++j)
    if (errors[j] <= bound) return false;
  return label == 0 || errors[static_cast<std::size_t>(label) - 1] <= bound;
}

// Reload count by simulating the weight buffer. Route index 0 is the CPU.
inline std::size_t simulate_reloads(const std::vector<int>& routes, mcma::runtime::BufferCase bc) {
  using mcma::runtime::BufferCase;
  std::size_t loads = 0;
  if (bc == BufferCase::all_fit) return 0;
  int resident = -1;  // nothing loaded
  for (int r : routes) {
    if (r == 0) continue;
    if (bc == BufferCase::none_fit || r != resident) ++loads;
    resident = r;
  }
  return loads;
}

// Straight-line evaluation of a network with one hidden sigmoid layer and a
// linear output.
inline std::vector<double> forward_one_hidden(const mcma::nn::Mlp& mlp, const std::vector<double>& x) {
  const auto& h = mlp.layers()[0];
  const auto& o = mlp.layers()[1];
  std::vector<double> hidden(h.fan_out);
  for (std::size_t j = 0; j < h.fan_out; ++j) {
    double z = h.biases[j];
    for (std::size_t i = 0; i < h.fan_in; ++i) z += x[i] * h.weights[i * h.fan_out + j];
    hidden[j] = 1.0 / (1.0 + std::exp(-z));
  }
  std::vector<double> y(o.fan_out);
  for (std::size_t j = 0; j < o.fan_out; ++j) {
    double z = o.biases[j];
    for (std::size_t i = 0; i < o.fan_in; ++i) z += hidden[i] * o.weights[i * o.fan_out + j];
    y[j] = z;
  }
  return y;
}

// J_n(x) from the ascending series in long double.
inline long double bessel_series(int n, long double x) {
  long double term = 1.0L;
  for (int i = 1; i <= n; ++i) term *= (x / 2.0L) / static_cast<long double>(i);
  long double sum = term;
  const long double q = -(x * x) / 4.0L;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<long double>(k) * static_cast<long double>(k + n));
    sum += term;
    if (std::abs(term) < 1e-30L) break;
  }
  return sum;
}

// Black-Scholes price by Simpson integration of the discounted payoff against
// the standard normal density of the log-return driver.
inline double black_scholes_quadrature(double s, double k, double r, double sigma, double t, bool call) {
  const int n = 200000;  // even
  const double lo = -12.0, hi = 12.0, step = (hi - lo) / n;
  const double drift = (r - 0.5 * sigma * sigma) * t, vol = sigma * std::sqrt(t);
  auto f = [&](double z) {
    const double st = s * std::exp(drift + vol * z);
    const double payoff = call ? std::max(st - k, 0.0) : std::max(k - st, 0.0);
    return payoff * std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
  };
  double acc = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) acc += f(lo + i * step) * (i % 2 ? 4.0 : 2.0);
  return std::exp(-r * t) * acc * step / 3.0;
}

}  // namespace oracle
