#pragma once

// Benchmark target functions, their catalog, and dataset generation.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcma/matrix.hpp"
#include "mcma/nncore.hpp"

namespace mcma::bench {

enum class ErrorMetric { absolute, relative, misclassification };

std::string_view to_string(ErrorMetric m);
ErrorMetric parse_error_metric(std::string_view name);

// Floor of the relative-error denominator, max(|exact|, kRelativeFloor).
inline constexpr double kRelativeFloor = 1e-6;

// Closed interval sampled uniformly; integral dimensions draw integers.
struct InputRange {
  double lo = 0.0;
  double hi = 1.0;
  bool integral = false;

  bool contains(double v) const;
};

// Nominal output interval used only to scale network targets.
struct OutputRange {
  double lo = 0.0;
  double hi = 1.0;
};

using ExactFn = std::function<std::vector<double>(std::span<const double>)>;

struct Benchmark {
  std::string name;
  std::string description;
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  std::vector<InputRange> input_ranges;
  std::vector<OutputRange> output_ranges;
  ExactFn exact;  // called only with inputs inside input_ranges
  ErrorMetric error_metric = ErrorMetric::relative;
  double error_bound = 0.1;
  nn::Topology approximator_topology;
  // Binary gate topology; multiclass gates replace the output layer.
  nn::Topology classifier_topology;

  void validate() const;
  bool in_support(std::span<const double> input) const;
};

// The registered benchmarks, in catalog order.
const std::vector<Benchmark>& list_benchmarks();

// Throws NotFoundError; names from the original suite that were dropped
// (fft, jpeg) get a dedicated message.
const Benchmark& find_benchmark(std::string_view name);

// Validates dimension and support, then evaluates.
std::vector<double> evaluate_exact(const Benchmark& benchmark, std::span<const double> input);

// Network-side scaling derived from the benchmark's ranges: inputs map to
// [-1, 1], outputs to [0, 1].
std::vector<double> encode_input(const Benchmark& benchmark, std::span<const double> input);
std::vector<double> encode_output(const Benchmark& benchmark, std::span<const double> output);
std::vector<double> decode_output(const Benchmark& benchmark, std::span<const double> encoded);

// ---- reference target functions -----------------------------------------

enum class OptionType { call = 0, put = 1 };

// Black-Scholes-Merton European option price.
double black_scholes(double spot, double strike, double rate, double volatility, double expiry,
                     OptionType type);

// Bessel function of the first kind J_n(x), integer n >= 0, x >= 0.
double bessel_j(int order, double x);

// Sobel gradient magnitude of a 3x3 window given row-major.
double sobel_magnitude(std::span<const double, 9> window);

// Fixed 6-D centroids used by the kmeans benchmark.
const std::vector<std::array<double, 6>>& kmeans_centroids();
double kmeans_nearest_distance(std::span<const double, 6> point);

// Link lengths of the two-link arm used by inversek2j.
inline constexpr double kArmLink1 = 0.5;
inline constexpr double kArmLink2 = 0.5;

// Joint angles (theta1, theta2) reaching (x, y), elbow-down (theta2 >= 0).
std::array<double, 2> inverse_kinematics(double x, double y);
std::array<double, 2> forward_kinematics(double theta1, double theta2);

using Vec3 = std::array<double, 3>;
using Triangle = std::array<Vec3, 3>;

bool triangles_intersect(const Triangle& a, const Triangle& b);

// Three-regime piecewise-linear target on [0, 3] with values in [1, 2]:
//   x in [0,1): 1 + x;  x in [1,2): 3 - x;  x in [2,3]: x - 1
double piecewise3(double x);

// ---- datasets -----------------------------------------------------------

struct Dataset {
  std::string benchmark;
  std::uint64_t seed = 0;
  double train_fraction = 0.0;
  Matrix inputs;
  Matrix outputs;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;

  std::size_t size() const { return inputs.rows(); }
};

inline constexpr std::size_t kMinDatasetSize = 10;

// Inputs drawn i.i.d. from the sampler with mt19937_64(seed). The first
// llround(train_fraction * n) samples form the train split, the rest the test
// split.
Dataset generate_dataset(const Benchmark& benchmark, std::size_t n_samples, std::uint64_t seed,
                         double train_fraction);

// dir/dataset.csv (x0..,y0.. header) plus dir/dataset.meta sidecar.
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace mcma::bench
