#include "common.hpp"

#include <algorithm>
#include <cmath>

#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "mcma/seed.hpp"
#include "mcma/text.hpp"

namespace mcma::trainer {

std::string_view to_string(Architecture a) {
  switch (a) {
    case Architecture::one_pass: return "one_pass";
    case Architecture::iterative: return "iterative";
    case Architecture::mcca: return "mcca";
    case Architecture::mcma: return "mcma";
  }
  return "?";
}

Architecture parse_architecture(std::string_view name) {
  if (name == "one_pass") return Architecture::one_pass;
  if (name == "iterative") return Architecture::iterative;
  if (name == "mcca") return Architecture::mcca;
  if (name == "mcma") return Architecture::mcma;
  throw ValidationError(fmt::format("unknown architecture '{}'", name));
}

std::string_view to_string(Allocation a) {
  return a == Allocation::complementary ? "complementary" : "competitive";
}

Allocation parse_allocation(std::string_view name) {
  if (name == "complementary") return Allocation::complementary;
  if (name == "competitive") return Allocation::competitive;
  throw ValidationError(fmt::format("unknown allocation '{}'", name));
}

void PipelineConfig::validate() const {
  if (n_approximators < 1) throw ValidationError("n_approximators must be at least 1");
  if (n_iterations < 1) throw ValidationError("n_iterations must be at least 1");
  if (!(mcca_convergence_min_gain > 0.0 && mcca_convergence_min_gain <= 1.0))
    throw ValidationError("mcca_convergence_min_gain must lie in (0, 1]");
  if (!(class_weight_cap >= 1.0)) throw ValidationError("class_weight_cap must be >= 1");
  if (competitive_lr_multipliers.empty()) throw ValidationError("competitive_lr_multipliers is empty");
  for (double m : competitive_lr_multipliers)
    if (!(m > 0.0)) throw ValidationError("competitive_lr_multipliers must be positive");
  approximator_train.validate();
  classifier_train.validate();
}

namespace {

void put_train(boost::property_tree::ptree& t, const std::string& prefix, const nn::TrainConfig& c) {
  t.put(prefix + "epochs", std::to_string(c.epochs));
  t.put(prefix + "optimizer", c.optimizer == nn::Optimizer::rmsprop ? "rmsprop" : "sgd");
  t.put(prefix + "learning_rate", text::format_double(c.learning_rate));
  t.put(prefix + "rmsprop_decay", text::format_double(c.rmsprop_decay));
  t.put(prefix + "rmsprop_epsilon", text::format_double(c.rmsprop_epsilon));
  t.put(prefix + "batch_size", std::to_string(c.batch_size));
}

nn::TrainConfig get_train(const boost::property_tree::ptree& t, const std::string& prefix) {
  nn::TrainConfig c;
  c.epochs = std::stoi(text::require(t, prefix + "epochs"));
  const std::string opt = text::require(t, prefix + "optimizer");
  if (opt != "rmsprop" && opt != "sgd") throw IoError(fmt::format("unknown optimizer '{}'", opt));
  c.optimizer = opt == "sgd" ? nn::Optimizer::sgd : nn::Optimizer::rmsprop;
  c.learning_rate = text::parse_double(text::require(t, prefix + "learning_rate"));
  c.rmsprop_decay = text::parse_double(text::require(t, prefix + "rmsprop_decay"));
  c.rmsprop_epsilon = text::parse_double(text::require(t, prefix + "rmsprop_epsilon"));
  c.batch_size = text::parse_index(text::require(t, prefix + "batch_size"));
  return c;
}

}  // namespace

void put_config(boost::property_tree::ptree& t, const PipelineConfig& c) {
  t.put("n_approximators", std::to_string(c.n_approximators));
  t.put("n_iterations", std::to_string(c.n_iterations));
  t.put("selection_policy", std::string(quality::to_string(c.selection_policy)));
  t.put("allocation", std::string(to_string(c.allocation)));
  t.put("mcca_convergence_min_gain", text::format_double(c.mcca_convergence_min_gain));
  t.put("mcca_min_remaining", std::to_string(c.mcca_min_remaining));
  t.put("territory_safe_only", c.territory_safe_only ? "true" : "false");
  t.put("class_weight_cap", text::format_double(c.class_weight_cap));
  t.put("competitive_lr_multipliers", text::join_doubles(c.competitive_lr_multipliers, " "));
  t.put("seed", std::to_string(c.seed));
  put_train(t, "approximator_", c.approximator_train);
  put_train(t, "classifier_", c.classifier_train);
}

PipelineConfig get_config(const boost::property_tree::ptree& t) {
  PipelineConfig c;
  c.n_approximators = text::parse_index(text::require(t, "n_approximators"));
  c.n_iterations = text::parse_index(text::require(t, "n_iterations"));
  c.selection_policy = quality::parse_selection_policy(text::require(t, "selection_policy"));
  c.allocation = parse_allocation(text::require(t, "allocation"));
  c.mcca_convergence_min_gain = text::parse_double(text::require(t, "mcca_convergence_min_gain"));
  c.mcca_min_remaining = text::parse_index(text::require(t, "mcca_min_remaining"));
  c.territory_safe_only = text::require(t, "territory_safe_only") == "true";
  c.class_weight_cap = text::parse_double(text::require(t, "class_weight_cap"));
  c.competitive_lr_multipliers.clear();
  for (const std::string& tok : text::split(text::require(t, "competitive_lr_multipliers"), ' '))
    if (!tok.empty()) c.competitive_lr_multipliers.push_back(text::parse_double(tok));
  c.seed = std::stoull(text::require(t, "seed"));
  c.approximator_train = get_train(t, "approximator_");
  c.classifier_train = get_train(t, "classifier_");
  return c;
}

void TrainedSystem::validate() const {
  if (approximators.empty()) throw ValidationError("system has no approximators");
  if (classifiers.empty()) throw ValidationError("system has no classifiers");
  for (const nn::Mlp& c : classifiers)
    if (c.topology().output_activation != nn::Activation::softmax)
      throw ValidationError("system classifiers must have softmax outputs");
  switch (architecture) {
    case Architecture::mcca:
      if (classifiers.size() != approximators.size())
        throw ValidationError("mcca needs one classifier per approximator");
      for (const nn::Mlp& c : classifiers)
        if (c.topology().output_size() != 2) throw ValidationError("mcca classifiers must be binary");
      break;
    case Architecture::mcma:
      if (classifiers.size() != 1) throw ValidationError("mcma needs exactly one classifier");
      if (classifiers[0].topology().output_size() != approximators.size() + 1)
        throw ValidationError("mcma classifier output size must be n_approximators + 1");
      break;
    case Architecture::one_pass:
    case Architecture::iterative:
      if (classifiers.size() != 1 || approximators.size() != 1)
        throw ValidationError("one_pass/iterative systems hold one approximator and one classifier");
      if (classifiers[0].topology().output_size() != 2) throw ValidationError("binary gate must have 2 outputs");
      break;
  }
}

std::vector<double> approximate(const nn::Mlp& approximator, const bench::Benchmark& benchmark,
                                std::span<const double> input) {
  return bench::decode_output(benchmark, approximator.forward(bench::encode_input(benchmark, input)));
}

namespace detail {

Workset::Workset(const bench::Dataset& dataset, const bench::Benchmark& bm) : benchmark(bm) {
  if (dataset.benchmark != bm.name)
    throw ValidationError(fmt::format("dataset is for '{}', benchmark is '{}'", dataset.benchmark, bm.name));
  if (dataset.train.empty()) throw ValidationError("train split is empty");
  inputs = Matrix(0, bm.input_dim);
  targets = Matrix(0, bm.output_dim);
  exact = Matrix(0, bm.output_dim);
  for (std::size_t i : dataset.train) {
    inputs.append_row(bench::encode_input(bm, dataset.inputs.row(i)));
    targets.append_row(bench::encode_output(bm, dataset.outputs.row(i)));
    exact.append_row(dataset.outputs.row(i));
  }
}

Rows all_rows(const Workset& ws) {
  Rows r(ws.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = i;
  return r;
}

std::vector<double> approximator_errors(const nn::Mlp& approximator, const Workset& ws, const Rows& rows) {
  std::vector<double> errors;
  errors.reserve(rows.size());
  for (std::size_t r : rows) {
    const auto out = bench::decode_output(ws.benchmark, approximator.forward(ws.inputs.row(r)));
    errors.push_back(quality::sample_error(ws.benchmark, out, ws.exact.row(r)));
  }
  return errors;
}

std::vector<int> predict(const nn::Mlp& classifier, const Workset& ws, const Rows& rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(static_cast<int>(nn::predict_class(classifier, ws.inputs.row(r)).index));
  return out;
}

void fit_approximator(nn::Mlp& approximator, const Workset& ws, const Rows& rows, nn::TrainConfig config) {
  nn::train(approximator, ws.inputs.select_rows(rows), ws.targets.select_rows(rows),
            nn::LossKind::mean_squared_error, config);
}

std::vector<double> class_weights(const std::vector<int>& labels, std::size_t n_classes, double cap) {
  std::vector<std::size_t> counts(n_classes, 0);
  for (int l : labels) ++counts.at(static_cast<std::size_t>(l));
  const std::size_t most = *std::max_element(counts.begin(), counts.end());
  std::vector<double> w(n_classes, 1.0);
  for (std::size_t c = 0; c < n_classes; ++c)
    if (counts[c] > 0) w[c] = std::min(cap, static_cast<double>(most) / static_cast<double>(counts[c]));
  return w;
}

void fit_classifier(nn::Mlp& classifier, const Workset& ws, const Rows& rows, const std::vector<int>& labels,
                    double weight_cap, nn::TrainConfig config) {
  const std::size_t n_classes = classifier.topology().output_size();
  const std::vector<double> per_class = class_weights(labels, n_classes, weight_cap);
  Matrix targets(rows.size(), n_classes, 0.0);
  std::vector<double> weights(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto label = static_cast<std::size_t>(labels[i]);
    targets(i, label) = 1.0;
    weights[i] = per_class[label];
  }
  nn::train(classifier, ws.inputs.select_rows(rows), targets, nn::LossKind::cross_entropy, config, weights);
}

double rmse_normalized(const std::vector<double>& errors, const std::vector<std::size_t>& which, double bound) {
  if (which.empty()) return 0.0;
  std::vector<double> sq;
  sq.reserve(which.size());
  for (std::size_t i : which) sq.push_back(errors[i] * errors[i]);
  std::sort(sq.begin(), sq.end());
  double s = 0.0;
  for (double v : sq) s += v;
  return std::sqrt(s / static_cast<double>(sq.size())) / bound;
}

nn::TrainConfig seeded(const nn::TrainConfig& base, std::uint64_t root, std::string_view role, std::size_t index,
                       std::size_t stage, std::size_t round) {
  nn::TrainConfig c = base;
  c.seed = derive_seed(root, role, {index, stage, round});
  return c;
}

}  // namespace detail
}  // namespace mcma::trainer
