#pragma once

// Training pipelines that produce a TrainedSystem: one-pass, iterative,
// cascaded (MCCA) and multiclass-classifier / multiple-approximator (MCMA).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ptree_fwd.hpp>

#include "mcma/bench.hpp"
#include "mcma/nncore.hpp"
#include "mcma/quality.hpp"

namespace mcma::trainer {

enum class Architecture { one_pass, iterative, mcca, mcma };
enum class Allocation { complementary, competitive };

std::string_view to_string(Architecture a);
Architecture parse_architecture(std::string_view name);
std::string_view to_string(Allocation a);
Allocation parse_allocation(std::string_view name);

struct PipelineConfig {
  std::size_t n_approximators = 3;
  std::size_t n_iterations = 5;
  quality::SelectionPolicy selection_policy = quality::SelectionPolicy::AC;
  Allocation allocation = Allocation::complementary;
  // A cascade pair is kept only if it accepts more than this fraction of the
  // samples that reach it.
  double mcca_convergence_min_gain = 0.05;
  std::size_t mcca_min_remaining = 50;
  // MCMA: retrain approximator k on territory k intersected with its safe
  // samples instead of the whole territory.
  bool territory_safe_only = false;
  // Inverse-frequency class weights for classifier training are capped here.
  double class_weight_cap = 10.0;
  // Competitive MCMA: approximator k trains with learning rate multiplied by
  // entry (k - 1) mod size.
  std::vector<double> competitive_lr_multipliers = {0.5, 1.0, 2.0};
  // Shuffle seeds in these are ignored; every training call gets a derived seed.
  nn::TrainConfig approximator_train;
  nn::TrainConfig classifier_train;
  std::uint64_t seed = 1;

  void validate() const;
};

void put_config(boost::property_tree::ptree& tree, const PipelineConfig& config);
PipelineConfig get_config(const boost::property_tree::ptree& tree);

struct RoundLog {
  std::size_t stage = 1;  // cascade pair (MCCA), 1 otherwise
  std::size_t round = 1;
  std::size_t subset_size = 0;          // samples the approximator(s) trained on
  double safe_fraction = 0.0;           // samples labelled safe for some approximator
  double invocation = 0.0;              // samples the gate routes to an approximator
  double rmse_normalized = 0.0;         // over routed samples
  double subset_rmse_normalized = 0.0;  // over the training subset
  std::string note;
};

struct TrainedSystem {
  Architecture architecture = Architecture::one_pass;
  Allocation allocation = Allocation::complementary;
  std::string benchmark;
  double error_bound = 0.0;
  std::vector<nn::Mlp> approximators;
  // MCCA: one binary gate per approximator, in cascade order. Otherwise one
  // gate: 2 classes for one-pass/iterative, n + 1 for MCMA (class 0 = CPU).
  std::vector<nn::Mlp> classifiers;
  std::vector<RoundLog> training_log;
  std::vector<std::string> warnings;
  PipelineConfig config;

  void validate() const;
};

// Output of one approximator in the benchmark's own units.
std::vector<double> approximate(const nn::Mlp& approximator, const bench::Benchmark& benchmark,
                                std::span<const double> input);

TrainedSystem train_one_pass(const bench::Dataset& dataset, const bench::Benchmark& benchmark,
                             const PipelineConfig& config);
TrainedSystem train_iterative(const bench::Dataset& dataset, const bench::Benchmark& benchmark,
                              const PipelineConfig& config);
TrainedSystem train_mcca(const bench::Dataset& dataset, const bench::Benchmark& benchmark,
                         const PipelineConfig& config);
TrainedSystem train_mcma(const bench::Dataset& dataset, const bench::Benchmark& benchmark,
                         const PipelineConfig& config);

// MCMA round 0 alone: the approximators before the first classifier is
// trained. train_mcma starts from exactly these.
std::vector<nn::Mlp> initialize_mcma(const bench::Dataset& dataset, const bench::Benchmark& benchmark,
                                     const PipelineConfig& config, std::vector<std::string>* warnings = nullptr);

TrainedSystem train(Architecture architecture, const bench::Dataset& dataset,
                    const bench::Benchmark& benchmark, const PipelineConfig& config);

// Directory with manifest.ini, training_log.csv, approximator_<k>.mlp and
// classifier_<k>.mlp.
void save_system(const TrainedSystem& system, const std::filesystem::path& dir);
TrainedSystem load_system(const std::filesystem::path& dir);

}  // namespace mcma::trainer
