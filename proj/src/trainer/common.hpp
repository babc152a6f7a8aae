#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mcma/trainer.hpp"

namespace mcma::trainer::detail {

// Train split prepared for the networks: encoded inputs and targets plus the
// exact outputs used to score approximations. Rows are local indices.
struct Workset {
  const bench::Benchmark& benchmark;
  Matrix inputs;   // encoded
  Matrix targets;  // encoded
  Matrix exact;    // benchmark units

  Workset(const bench::Dataset& dataset, const bench::Benchmark& benchmark);
  std::size_t size() const { return inputs.rows(); }
};

using Rows = std::vector<std::size_t>;

Rows all_rows(const Workset& ws);

// Per-sample error of one approximator on the given rows.
std::vector<double> approximator_errors(const nn::Mlp& approximator, const Workset& ws, const Rows& rows);

// Class index predicted for each row.
std::vector<int> predict(const nn::Mlp& classifier, const Workset& ws, const Rows& rows);

// Mean-squared-error training on the given rows.
void fit_approximator(nn::Mlp& approximator, const Workset& ws, const Rows& rows, nn::TrainConfig config);

// Cross-entropy training on one-hot labels with inverse-frequency class
// weights min(cap, n_max / n_c).
void fit_classifier(nn::Mlp& classifier, const Workset& ws, const Rows& rows, const std::vector<int>& labels,
                    double weight_cap, nn::TrainConfig config);

std::vector<double> class_weights(const std::vector<int>& labels, std::size_t n_classes, double cap);

// sqrt(mean(e^2)) / bound over the listed entries; 0 for an empty list.
double rmse_normalized(const std::vector<double>& errors, const std::vector<std::size_t>& which, double bound);

nn::TrainConfig seeded(const nn::TrainConfig& base, std::uint64_t root, std::string_view role,
                       std::size_t index, std::size_t stage, std::size_t round);

}  // namespace mcma::trainer::detail
