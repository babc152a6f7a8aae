#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "mcma/bench.hpp"

namespace mcma::bench {

std::string_view to_string(ErrorMetric m) {
  switch (m) {
    case ErrorMetric::absolute: return "absolute";
    case ErrorMetric::relative: return "relative";
    case ErrorMetric::misclassification: return "misclassification";
  }
  return "?";
}

ErrorMetric parse_error_metric(std::string_view name) {
  if (name == "absolute") return ErrorMetric::absolute;
  if (name == "relative") return ErrorMetric::relative;
  if (name == "misclassification") return ErrorMetric::misclassification;
  throw ValidationError(fmt::format("unknown error metric '{}'", name));
}

bool InputRange::contains(double v) const {
  if (!std::isfinite(v) || v < lo || v > hi) return false;
  return !integral || v == std::round(v);
}

void Benchmark::validate() const {
  if (name.empty()) throw ValidationError("benchmark needs a name");
  if (input_dim == 0 || output_dim == 0) throw ValidationError("benchmark dimensions must be positive");
  if (input_ranges.size() != input_dim || output_ranges.size() != output_dim)
    throw ValidationError(fmt::format("benchmark {}: range count does not match dimensions", name));
  for (const InputRange& r : input_ranges)
    if (!(r.lo <= r.hi)) throw ValidationError(fmt::format("benchmark {}: empty input range", name));
  for (const OutputRange& r : output_ranges)
    if (!(r.lo < r.hi)) throw ValidationError(fmt::format("benchmark {}: empty output range", name));
  if (!exact) throw ValidationError(fmt::format("benchmark {}: no evaluator", name));
  if (!(error_bound > 0.0) || !std::isfinite(error_bound))
    throw ValidationError(fmt::format("benchmark {}: error bound must be positive", name));
  approximator_topology.validate();
  classifier_topology.validate();
  if (approximator_topology.input_size() != input_dim || approximator_topology.output_size() != output_dim)
    throw ValidationError(fmt::format("benchmark {}: approximator topology {} does not match {}->{}", name,
                                      approximator_topology.shape_string(), input_dim, output_dim));
  if (classifier_topology.input_size() != input_dim)
    throw ValidationError(fmt::format("benchmark {}: classifier topology {} does not take {} inputs",
                                      name, classifier_topology.shape_string(), input_dim));
}

bool Benchmark::in_support(std::span<const double> input) const {
  if (input.size() != input_dim) return false;
  for (std::size_t i = 0; i < input_dim; ++i)
    if (!input_ranges[i].contains(input[i])) return false;
  return true;
}

std::vector<double> evaluate_exact(const Benchmark& b, std::span<const double> input) {
  if (input.size() != b.input_dim)
    throw ValidationError(fmt::format("{}: expected {} inputs, got {}", b.name, b.input_dim, input.size()));
  if (!b.in_support(input)) throw ValidationError(fmt::format("{}: input outside the sampler support", b.name));
  std::vector<double> out = b.exact(input);
  if (out.size() != b.output_dim)
    throw ValidationError(fmt::format("{}: evaluator returned {} values", b.name, out.size()));
  return out;
}

std::vector<double> encode_input(const Benchmark& b, std::span<const double> input) {
  if (input.size() != b.input_dim) throw ValidationError(fmt::format("{}: input dimension mismatch", b.name));
  std::vector<double> out(input.size());
  for (std::size_t i = 0; i < input.size(); ++i) {
    const InputRange& r = b.input_ranges[i];
    out[i] = r.hi > r.lo ? 2.0 * (input[i] - r.lo) / (r.hi - r.lo) - 1.0 : 0.0;
  }
  return out;
}

std::vector<double> encode_output(const Benchmark& b, std::span<const double> output) {
  if (output.size() != b.output_dim) throw ValidationError(fmt::format("{}: output dimension mismatch", b.name));
  std::vector<double> out(output.size());
  for (std::size_t i = 0; i < output.size(); ++i) {
    const OutputRange& r = b.output_ranges[i];
    out[i] = (output[i] - r.lo) / (r.hi - r.lo);
  }
  return out;
}

std::vector<double> decode_output(const Benchmark& b, std::span<const double> encoded) {
  if (encoded.size() != b.output_dim) throw ValidationError(fmt::format("{}: output dimension mismatch", b.name));
  std::vector<double> out(encoded.size());
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    const OutputRange& r = b.output_ranges[i];
    out[i] = r.lo + encoded[i] * (r.hi - r.lo);
  }
  return out;
}

namespace {

nn::Topology approx(std::vector<std::size_t> sizes) {
  return {std::move(sizes), nn::Activation::sigmoid, nn::Activation::linear};
}

nn::Topology gate(std::vector<std::size_t> sizes) {
  return {std::move(sizes), nn::Activation::sigmoid, nn::Activation::softmax};
}

std::vector<InputRange> unit_cube(std::size_t n) { return std::vector<InputRange>(n, InputRange{0.0, 1.0}); }

std::vector<Benchmark> build_catalog() {
  std::vector<Benchmark> all;

  all.push_back(Benchmark{
      .name = "blackscholes",
      .description = "European option price; inputs spot, strike, rate, volatility, expiry, type (0 call, 1 put)",
      .input_dim = 6,
      .output_dim = 1,
      .input_ranges = {{80, 120}, {80, 120}, {0.01, 0.1}, {0.1, 0.5}, {0.25, 2.0}, {0, 1, true}},
      .output_ranges = {{0.0, 50.0}},
      .exact = [](std::span<const double> x) {
        return std::vector<double>{black_scholes(x[0], x[1], x[2], x[3], x[4],
                                                 x[5] == 0.0 ? OptionType::call : OptionType::put)};
      },
      .error_metric = ErrorMetric::relative,
      .error_bound = 0.1,
      .approximator_topology = approx({6, 8, 8, 1}),
      .classifier_topology = gate({6, 8, 2}),
  });

  all.push_back(Benchmark{
      .name = "bessel",
      .description = "Bessel function of the first kind J_n(x); inputs integer order n and x",
      .input_dim = 2,
      .output_dim = 1,
      .input_ranges = {{0, 5, true}, {0.0, 10.0}},
      .output_ranges = {{-0.5, 1.0}},
      .exact = [](std::span<const double> x) {
        return std::vector<double>{bessel_j(static_cast<int>(x[0]), x[1])};
      },
      .error_metric = ErrorMetric::relative,
      .error_bound = 0.1,
      .approximator_topology = approx({2, 8, 8, 1}),
      .classifier_topology = gate({2, 8, 2}),
  });

  all.push_back(Benchmark{
      .name = "sobel",
      .description = "Sobel gradient magnitude of a 3x3 window of intensities in [0, 1]",
      .input_dim = 9,
      .output_dim = 1,
      .input_ranges = unit_cube(9),
      .output_ranges = {{0.0, 4.0 * std::numbers::sqrt2}},
      .exact = [](std::span<const double> x) {
        return std::vector<double>{sobel_magnitude(x.first<9>())};
      },
      .error_metric = ErrorMetric::relative,
      .error_bound = 0.1,
      .approximator_topology = approx({9, 8, 1}),
      .classifier_topology = gate({9, 8, 2}),
  });

  all.push_back(Benchmark{
      .name = "kmeans",
      .description = "Distance from a 6-D point to the nearest of four fixed centroids",
      .input_dim = 6,
      .output_dim = 1,
      .input_ranges = unit_cube(6),
      .output_ranges = {{0.0, 1.5}},
      .exact = [](std::span<const double> x) {
        return std::vector<double>{kmeans_nearest_distance(x.first<6>())};
      },
      .error_metric = ErrorMetric::relative,
      .error_bound = 0.1,
      .approximator_topology = approx({6, 8, 4, 1}),
      .classifier_topology = gate({6, 8, 2}),
  });

  all.push_back(Benchmark{
      .name = "inversek2j",
      .description = "Joint angles of a two-link arm (links 0.5, 0.5) reaching (x, y)",
      .input_dim = 2,
      .output_dim = 2,
      .input_ranges = {{0.1, 0.7}, {0.1, 0.7}},
      .output_ranges = {{-std::numbers::pi / 2, std::numbers::pi}, {0.0, std::numbers::pi}},
      .exact = [](std::span<const double> x) {
        auto t = inverse_kinematics(x[0], x[1]);
        return std::vector<double>{t[0], t[1]};
      },
      .error_metric = ErrorMetric::relative,
      .error_bound = 0.1,
      .approximator_topology = approx({2, 8, 2}),
      .classifier_topology = gate({2, 8, 2}),
  });

  all.push_back(Benchmark{
      .name = "jmeint",
      .description = "Triangle-pair intersection; 18 vertex coordinates, one-hot (disjoint, intersecting)",
      .input_dim = 18,
      .output_dim = 2,
      .input_ranges = unit_cube(18),
      .output_ranges = {{0.0, 1.0}, {0.0, 1.0}},
      .exact = [](std::span<const double> x) {
        Triangle a, b;
        for (std::size_t v = 0; v < 3; ++v)
          for (std::size_t k = 0; k < 3; ++k) {
            a[v][k] = x[3 * v + k];
            b[v][k] = x[9 + 3 * v + k];
          }
        const bool hit = triangles_intersect(a, b);
        return std::vector<double>{hit ? 0.0 : 1.0, hit ? 1.0 : 0.0};
      },
      .error_metric = ErrorMetric::misclassification,
      .error_bound = 0.5,
      .approximator_topology = approx({18, 32, 8, 2}),
      .classifier_topology = gate({18, 16, 2}),
  });

  all.push_back(Benchmark{
      .name = "piecewise",
      .description = "Synthetic three-regime piecewise-linear target on [0, 3]",
      .input_dim = 1,
      .output_dim = 1,
      .input_ranges = {{0.0, 3.0}},
      .output_ranges = {{1.0, 2.0}},
      .exact = [](std::span<const double> x) { return std::vector<double>{piecewise3(x[0])}; },
      .error_metric = ErrorMetric::relative,
      .error_bound = 0.02,
      .approximator_topology = approx({1, 2, 1}),
      .classifier_topology = gate({1, 8, 2}),
  });

  for (const Benchmark& b : all) b.validate();
  return all;
}

}  // namespace

const std::vector<Benchmark>& list_benchmarks() {
  static const std::vector<Benchmark> catalog = build_catalog();
  return catalog;
}

const Benchmark& find_benchmark(std::string_view name) {
  for (const Benchmark& b : list_benchmarks())
    if (b.name == name) return b;
  if (name == "fft" || name == "jpeg")
    throw NotFoundError(fmt::format(
        "benchmark '{}' is not provided: it depends on file/image workloads outside this toolkit", name));
  throw NotFoundError(fmt::format("unknown benchmark '{}'", name));
}

}  // namespace mcma::bench
