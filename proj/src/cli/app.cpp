#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "mcma/cli.hpp"

namespace mcma::cli {
namespace {

// Flag values are applied on top of the config file only when given.
struct Flags {
  std::string config, benchmark, pipeline, data, system, out, policy, buffer_case;
  std::string approximator_topology, classifier_topology;
  std::size_t n = 0, iterations = 0, approximators = 0;
  std::uint64_t seed = 0;
  double bound = 0.0, train_fraction = 0.0, min_gain = 0.0;
  int epochs = 0;
  bool force = false, territory_safe_only = false;
  std::vector<double> bounds;
  std::vector<std::string> pipelines;
};

void add_output(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "INI file with [run] [bench] [trainer] [runtime] sections");
  sub->add_option("--out", f.out, "Output directory");
  sub->add_flag("--force", f.force, "Overwrite a non-empty output directory");
}

void add_dataset(CLI::App* sub, Flags& f) {
  sub->add_option("--benchmark", f.benchmark, "Benchmark name");
  sub->add_option("--n", f.n, "Number of samples");
  sub->add_option("--seed", f.seed, "Root seed");
  sub->add_option("--train-fraction", f.train_fraction, "Fraction of samples in the train split");
}

void add_training(CLI::App* sub, Flags& f) {
  sub->add_option("--bound", f.bound, "Error bound (default: catalog)");
  sub->add_option("--iterations", f.iterations, "Training rounds");
  sub->add_option("--approximators", f.approximators, "Approximators (MCMA) or maximum pairs (MCCA)");
  sub->add_option("--epochs", f.epochs, "Epochs per training call, both roles");
  sub->add_option("--policy", f.policy, "Selection policy from round 2: A, C or AC");
  sub->add_option("--min-gain", f.min_gain, "MCCA convergence threshold");
  sub->add_flag("--territory-safe-only", f.territory_safe_only,
                "MCMA: retrain on territory samples that are also safe");
  sub->add_option("--approximator-topology", f.approximator_topology, "Layer sizes, e.g. 6->8->8->1");
  sub->add_option("--classifier-topology", f.classifier_topology, "Binary gate layer sizes, e.g. 6->8->2");
}

void add_runtime(CLI::App* sub, Flags& f) {
  sub->add_option("--buffer-case", f.buffer_case, "all_fit, none_fit or one_fits");
}

bool given(const CLI::App* sub, const char* name) {
  try {
    return sub->get_option(name)->count() > 0;
  } catch (const CLI::OptionNotFound&) {
    return false;
  }
}

RunConfig resolve(const CLI::App* sub, const Flags& f) {
  RunConfig c;
  if (given(sub, "--config")) apply_config_file(c, f.config);
  if (given(sub, "--benchmark")) c.benchmark = f.benchmark;
  if (given(sub, "--pipeline")) c.pipeline = parse_pipeline(f.pipeline);
  if (given(sub, "--n")) c.n_samples = f.n;
  if (given(sub, "--seed")) c.seed = f.seed;
  if (given(sub, "--train-fraction")) c.train_fraction = f.train_fraction;
  if (given(sub, "--bound")) c.error_bound = f.bound;
  if (given(sub, "--iterations")) c.trainer.n_iterations = f.iterations;
  if (given(sub, "--approximators")) c.trainer.n_approximators = f.approximators;
  if (given(sub, "--epochs")) {
    c.trainer.approximator_train.epochs = f.epochs;
    c.trainer.classifier_train.epochs = f.epochs;
  }
  if (given(sub, "--policy")) c.trainer.selection_policy = quality::parse_selection_policy(f.policy);
  if (given(sub, "--min-gain")) c.trainer.mcca_convergence_min_gain = f.min_gain;
  if (given(sub, "--territory-safe-only")) c.trainer.territory_safe_only = f.territory_safe_only;
  if (given(sub, "--approximator-topology")) c.approximator_topology = f.approximator_topology;
  if (given(sub, "--classifier-topology")) c.classifier_topology = f.classifier_topology;
  if (given(sub, "--buffer-case")) c.cost.buffer_case = runtime::parse_buffer_case(f.buffer_case);
  if (given(sub, "--bounds")) c.bounds = f.bounds;
  if (given(sub, "--pipelines")) {
    c.pipelines.clear();
    for (const std::string& p : f.pipelines) c.pipelines.push_back(parse_pipeline(p));
  }
  if (given(sub, "--data")) c.data_dir = f.data;
  if (given(sub, "--system")) c.system_dir = f.system;
  if (given(sub, "--out")) c.out_dir = f.out;
  c.force = f.force;
  return c;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Approximate-computing trainer: multiple approximators behind learned quality gates", "mcma"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  Flags f;

  CLI::App* gen = app.add_subcommand("generate", "Sample a benchmark into a dataset directory");
  add_dataset(gen, f);
  add_output(gen, f);

  CLI::App* train = app.add_subcommand("train", "Train one pipeline on a dataset");
  train->add_option("--data", f.data, "Dataset directory");
  train->add_option("--benchmark", f.benchmark, "Benchmark name (checked against the dataset)");
  train->add_option("--seed", f.seed, "Root seed");
  train->add_option("--pipeline", f.pipeline,
                    "one_pass, iterative, mcca, mcma_complementary or mcma_competitive");
  add_training(train, f);
  add_output(train, f);

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a trained system on a dataset's test split");
  eval->add_option("--system", f.system, "Trained system directory");
  eval->add_option("--data", f.data, "Dataset directory");
  eval->add_option("--benchmark", f.benchmark, "Benchmark name (checked against the system)");
  add_runtime(eval, f);
  add_output(eval, f);

  CLI::App* sweep = app.add_subcommand("sweep", "Train and evaluate pipelines over several error bounds");
  add_dataset(sweep, f);
  sweep->add_option("--data", f.data, "Dataset directory (default: generate)");
  sweep->add_option("--bounds", f.bounds, "Comma-separated error bounds")->delimiter(',');
  sweep->add_option("--pipelines", f.pipelines, "Comma-separated pipelines (default: all)")->delimiter(',');
  add_training(sweep, f);
  add_runtime(sweep, f);
  add_output(sweep, f);

  CLI::App* compare = app.add_subcommand("compare", "Train and evaluate several pipelines side by side");
  add_dataset(compare, f);
  compare->add_option("--data", f.data, "Dataset directory (default: generate)");
  compare->add_option("--pipelines", f.pipelines, "Comma-separated pipelines")->delimiter(',');
  add_training(compare, f);
  add_runtime(compare, f);
  add_output(compare, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    fmt::print(err, "usage error: {}\n", e.what());
    return kExitUsage;
  }

  try {
    if (gen->parsed()) cmd_generate(resolve(gen, f), out);
    else if (train->parsed()) cmd_train(resolve(train, f), out);
    else if (eval->parsed()) cmd_eval(resolve(eval, f), out);
    else if (sweep->parsed()) cmd_sweep(resolve(sweep, f), out);
    else if (compare->parsed()) cmd_compare(resolve(compare, f), out);
    return kExitOk;
  } catch (const UsageError& e) {
    fmt::print(err, "usage error: {}\n", e.what());
    return kExitUsage;
  } catch (const ValidationError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitValidation;
  } catch (const NotFoundError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    fmt::print(err, "runtime error: {}\n", e.what());
    return kExitRuntime;
  }
}

}  // namespace mcma::cli
