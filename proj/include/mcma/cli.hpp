#pragma once

// Command-line front end: run configuration, manifests and the five
// commands (generate, train, eval, sweep, compare).
//
// Configuration precedence, lowest first: built-in defaults, benchmark
// catalog, --config file, command-line flags. All randomness derives from the
// single root seed: the dataset uses derive_seed(seed, "dataset") and training
// uses derive_seed(seed, "trainer").

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ptree_fwd.hpp>

#include "mcma/bench.hpp"
#include "mcma/error.hpp"
#include "mcma/quality.hpp"
#include "mcma/runtime.hpp"
#include "mcma/trainer.hpp"

namespace mcma::cli {

inline constexpr std::string_view kToolVersion = "mcma 0.1.0";

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitValidation = 3;  // bad values, missing inputs, refused overwrite
inline constexpr int kExitRuntime = 4;     // I/O failures, diverged training

class UsageError : public Error {
 public:
  using Error::Error;
};

enum class Pipeline { one_pass, iterative, mcca, mcma_complementary, mcma_competitive };

std::string_view to_string(Pipeline p);
Pipeline parse_pipeline(std::string_view name);
trainer::Architecture architecture_of(Pipeline p);
trainer::Allocation allocation_of(Pipeline p);

struct RunConfig {
  std::string command;
  std::string benchmark;  // empty: taken from the dataset where one is given
  Pipeline pipeline = Pipeline::mcma_competitive;
  std::size_t n_samples = 3000;
  std::uint64_t seed = 1;
  double train_fraction = 2.0 / 3.0;

  // Unset values fall back to the benchmark catalog.
  std::optional<double> error_bound;
  std::optional<std::string> approximator_topology;  // layer sizes, "6->8->1"
  std::optional<std::string> classifier_topology;

  trainer::PipelineConfig trainer;  // trainer.seed is replaced by the derived seed
  runtime::CostModelParams cost;

  std::vector<double> bounds;        // sweep
  std::vector<Pipeline> pipelines;   // sweep, compare

  std::filesystem::path data_dir;
  std::filesystem::path system_dir;
  std::filesystem::path out_dir;
  bool force = false;

  std::uint64_t dataset_seed() const;
  std::uint64_t trainer_seed() const;

  // Catalog entry with the bound and topology overrides applied.
  bench::Benchmark resolved_benchmark() const;
  // Trainer settings for one pipeline: derived seed, allocation.
  trainer::PipelineConfig resolved_trainer(Pipeline p) const;
};

// INI sections [run], [bench], [trainer], [runtime]. Keys absent from the
// file keep their current value; unknown keys are a ValidationError.
void apply_config_file(RunConfig& config, const std::filesystem::path& path);
void apply_config_tree(RunConfig& config, const boost::property_tree::ptree& tree);

// The fully resolved configuration (catalog values filled in). The result is
// a valid --config file that reproduces the run.
boost::property_tree::ptree manifest_tree(const RunConfig& config);
void write_manifest(const std::filesystem::path& dir, const RunConfig& config);

// Throws ValidationError when dir exists and is non-empty unless force is set.
void prepare_output_dir(const std::filesystem::path& dir, bool force);

struct CompareRow {
  Pipeline pipeline = Pipeline::one_pass;
  quality::EvalReport report;
  bool best = false;  // highest invocation, first on ties
};

struct SweepRow {
  double bound = 0.0;
  Pipeline pipeline = Pipeline::one_pass;
  quality::EvalReport report;
};

// Command bodies. Each validates its inputs, writes into config.out_dir and
// prints a short human-readable summary to out.
bench::Dataset cmd_generate(const RunConfig& config, std::ostream& out);
trainer::TrainedSystem cmd_train(const RunConfig& config, std::ostream& out);
runtime::Evaluation cmd_eval(const RunConfig& config, std::ostream& out);
std::vector<SweepRow> cmd_sweep(const RunConfig& config, std::ostream& out);
std::vector<CompareRow> cmd_compare(const RunConfig& config, std::ostream& out);

// Full argument parsing and dispatch; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mcma::cli
