#include <algorithm>

#include <fmt/format.h>

#include "common.hpp"
#include "mcma/seed.hpp"

namespace mcma::trainer {

using detail::Rows;
using detail::Workset;

namespace {

nn::Topology binary_gate(const bench::Benchmark& bm) {
  return bm.classifier_topology.with_output(2, nn::Activation::softmax);
}

Rows pick(const Rows& rows, const std::vector<std::size_t>& positions) {
  Rows out;
  out.reserve(positions.size());
  for (std::size_t p : positions) out.push_back(rows[p]);
  return out;
}

double fraction(std::size_t part, std::size_t whole) {
  return whole == 0 ? 0.0 : static_cast<double>(part) / static_cast<double>(whole);
}

struct PairResult {
  nn::Mlp approximator;
  nn::Mlp classifier;
  std::vector<std::size_t> accepted;  // positions into the pair's rows
  std::vector<RoundLog> log;
  std::vector<std::string> warnings;
};

// One approximator/classifier pair co-trained for `rounds` rounds on `rows`.
// Round 1 trains the approximator on every row (nothing can select yet) and
// labels the classifier by approximator error (category A). Later rounds
// retrain the approximator on the rows picked by `policy`, warm-starting both
// networks.
PairResult train_pair(const Workset& ws, const Rows& rows, const PipelineConfig& cfg,
                      quality::SelectionPolicy policy, std::size_t stage, std::size_t rounds) {
  const bench::Benchmark& bm = ws.benchmark;
  const double bound = bm.error_bound;
  PairResult out{nn::Mlp::init(bm.approximator_topology, derive_seed(cfg.seed, "approximator", {stage})),
                 nn::Mlp::init(binary_gate(bm), derive_seed(cfg.seed, "classifier", {stage})),
                 {}, {}, {}};

  std::vector<std::size_t> subset(rows.size());
  for (std::size_t p = 0; p < rows.size(); ++p) subset[p] = p;
  std::vector<double> errors;
  std::vector<int> approve;

  for (std::size_t round = 1; round <= rounds; ++round) {
    RoundLog log;
    log.stage = stage;
    log.round = round;

    if (round > 1) {
      std::vector<std::size_t> next;
      for (std::size_t p = 0; p < rows.size(); ++p) {
        const bool a = quality::is_safe(errors[p], bound);
        const bool c = approve[p] == 1;
        const bool take = policy == quality::SelectionPolicy::A   ? a
                          : policy == quality::SelectionPolicy::C ? c
                                                                  : a && c;
        if (take) next.push_back(p);
      }
      if (next.empty())
        log.note = "selection empty; reusing previous subset";
      else
        subset = std::move(next);
    }

    detail::fit_approximator(out.approximator, ws, pick(rows, subset),
                             detail::seeded(cfg.approximator_train, cfg.seed, "approximator-train", stage, stage, round));
    errors = detail::approximator_errors(out.approximator, ws, rows);

    std::vector<int> labels(rows.size());
    std::size_t n_safe = 0;
    for (std::size_t p = 0; p < rows.size(); ++p) {
      labels[p] = quality::is_safe(errors[p], bound) ? 1 : 0;
      n_safe += static_cast<std::size_t>(labels[p]);
    }
    if (n_safe == 0 || n_safe == rows.size())
      out.warnings.push_back(fmt::format("stage {} round {}: all {} samples labelled {}", stage, round, rows.size(),
                                         n_safe == 0 ? "unsafe" : "safe"));

    detail::fit_classifier(out.classifier, ws, rows, labels, cfg.class_weight_cap,
                           detail::seeded(cfg.classifier_train, cfg.seed, "classifier-train", stage, stage, round));
    approve = detail::predict(out.classifier, ws, rows);

    std::vector<std::size_t> routed;
    for (std::size_t p = 0; p < rows.size(); ++p)
      if (approve[p] == 1) routed.push_back(p);

    log.subset_size = subset.size();
    log.safe_fraction = fraction(n_safe, rows.size());
    log.invocation = fraction(routed.size(), rows.size());
    log.rmse_normalized = detail::rmse_normalized(errors, routed, bound);
    log.subset_rmse_normalized = detail::rmse_normalized(errors, subset, bound);
    out.log.push_back(std::move(log));
    if (round == rounds) out.accepted = std::move(routed);
  }
  return out;
}

TrainedSystem make_system(Architecture arch, const bench::Benchmark& bm, const PipelineConfig& cfg) {
  cfg.validate();
  bm.validate();
  TrainedSystem sys;
  sys.architecture = arch;
  sys.allocation = cfg.allocation;
  sys.benchmark = bm.name;
  sys.error_bound = bm.error_bound;
  sys.config = cfg;
  return sys;
}

TrainedSystem pair_system(Architecture arch, const bench::Dataset& ds, const bench::Benchmark& bm,
                          const PipelineConfig& cfg, quality::SelectionPolicy policy, std::size_t rounds) {
  TrainedSystem sys = make_system(arch, bm, cfg);
  Workset ws(ds, bm);
  PairResult pair = train_pair(ws, detail::all_rows(ws), cfg, policy, 1, rounds);
  sys.approximators.push_back(std::move(pair.approximator));
  sys.classifiers.push_back(std::move(pair.classifier));
  sys.training_log = std::move(pair.log);
  sys.warnings = std::move(pair.warnings);
  return sys;
}

// Competitive MCMA scales each approximator's learning rate.
nn::TrainConfig approximator_config(const PipelineConfig& cfg, std::size_t k) {
  nn::TrainConfig c = cfg.approximator_train;
  if (cfg.allocation == Allocation::competitive)
    c.learning_rate *= cfg.competitive_lr_multipliers[(k - 1) % cfg.competitive_lr_multipliers.size()];
  return c;
}

// MCMA round 0. Complementary: A_1 trains on every row, A_k on the rows no
// earlier approximator covers. Competitive: every A_k trains on every row with
// its own seed and learning-rate multiplier.
std::vector<nn::Mlp> init_mcma(const Workset& ws, const Rows& rows, const PipelineConfig& cfg,
                               std::vector<std::string>& warnings) {
  const bench::Benchmark& bm = ws.benchmark;
  const std::size_t n = cfg.n_approximators;
  const bool competitive = cfg.allocation == Allocation::competitive;
  std::vector<nn::Mlp> approximators;
  for (std::size_t k = 1; k <= n; ++k)
    approximators.push_back(nn::Mlp::init(bm.approximator_topology, derive_seed(cfg.seed, "approximator", {k})));

  if (competitive) {
    for (std::size_t k = 1; k <= n; ++k)
      detail::fit_approximator(approximators[k - 1], ws, rows,
                               detail::seeded(approximator_config(cfg, k), cfg.seed, "approximator-train", k, 1, 0));
    return approximators;
  }
  Rows unclaimed = rows;
  for (std::size_t k = 1; k <= n; ++k) {
    Rows train_on = unclaimed;
    if (train_on.empty()) {
      warnings.push_back(fmt::format("init: no samples left for approximator {}; trained on all", k));
      train_on = rows;
    }
    nn::Mlp& a = approximators[k - 1];
    detail::fit_approximator(a, ws, train_on,
                             detail::seeded(approximator_config(cfg, k), cfg.seed, "approximator-train", k, 1, 0));
    const auto errs = detail::approximator_errors(a, ws, unclaimed);
    Rows still;
    for (std::size_t i = 0; i < unclaimed.size(); ++i)
      if (!quality::is_safe(errs[i], bm.error_bound)) still.push_back(unclaimed[i]);
    unclaimed = std::move(still);
  }
  return approximators;
}

}  // namespace

TrainedSystem train_one_pass(const bench::Dataset& ds, const bench::Benchmark& bm, const PipelineConfig& cfg) {
  return pair_system(Architecture::one_pass, ds, bm, cfg, quality::SelectionPolicy::A, 1);
}

TrainedSystem train_iterative(const bench::Dataset& ds, const bench::Benchmark& bm, const PipelineConfig& cfg) {
  return pair_system(Architecture::iterative, ds, bm, cfg, cfg.selection_policy, cfg.n_iterations);
}

TrainedSystem train_mcca(const bench::Dataset& ds, const bench::Benchmark& bm, const PipelineConfig& cfg) {
  TrainedSystem sys = make_system(Architecture::mcca, bm, cfg);
  Workset ws(ds, bm);
  Rows remaining = detail::all_rows(ws);

  for (std::size_t stage = 1; stage <= cfg.n_approximators; ++stage) {
    if (remaining.size() < cfg.mcca_min_remaining) {
      if (stage == 1)
        throw ValidationError(fmt::format("mcca needs at least {} training samples", cfg.mcca_min_remaining));
      sys.warnings.push_back(fmt::format("cascade stopped before pair {}: {} samples remain (minimum {})", stage,
                                         remaining.size(), cfg.mcca_min_remaining));
      break;
    }
    // Category C from round 2 onward.
    PairResult pair = train_pair(ws, remaining, cfg, quality::SelectionPolicy::C, stage, cfg.n_iterations);
    const double gain = fraction(pair.accepted.size(), remaining.size());
    if (stage > 1 && gain <= cfg.mcca_convergence_min_gain) {
      sys.warnings.push_back(fmt::format("pair {} accepted {:.4f} of its {} samples (needs > {}); discarded", stage,
                                         gain, remaining.size(), cfg.mcca_convergence_min_gain));
      break;
    }
    sys.approximators.push_back(std::move(pair.approximator));
    sys.classifiers.push_back(std::move(pair.classifier));
    for (RoundLog& l : pair.log) sys.training_log.push_back(std::move(l));
    for (std::string& w : pair.warnings) sys.warnings.push_back(std::move(w));
    if (pair.accepted.empty()) {
      sys.warnings.push_back(fmt::format("pair {} accepted no samples; cascade stopped", stage));
      break;
    }

    std::vector<char> taken(remaining.size(), 0);
    for (std::size_t p : pair.accepted) taken[p] = 1;
    Rows next;
    for (std::size_t p = 0; p < remaining.size(); ++p)
      if (!taken[p]) next.push_back(remaining[p]);
    remaining = std::move(next);
  }
  return sys;
}

std::vector<nn::Mlp> initialize_mcma(const bench::Dataset& ds, const bench::Benchmark& bm,
                                     const PipelineConfig& cfg, std::vector<std::string>* warnings) {
  cfg.validate();
  bm.validate();
  Workset ws(ds, bm);
  std::vector<std::string> sink;
  return init_mcma(ws, detail::all_rows(ws), cfg, warnings ? *warnings : sink);
}

TrainedSystem train_mcma(const bench::Dataset& ds, const bench::Benchmark& bm, const PipelineConfig& cfg) {
  TrainedSystem sys = make_system(Architecture::mcma, bm, cfg);
  Workset ws(ds, bm);
  const Rows rows = detail::all_rows(ws);
  const std::size_t n = cfg.n_approximators;
  const double bound = bm.error_bound;
  const bool competitive = cfg.allocation == Allocation::competitive;

  sys.approximators = init_mcma(ws, rows, cfg, sys.warnings);

  nn::Mlp gate = nn::Mlp::init(bm.classifier_topology.with_output(n + 1, nn::Activation::softmax),
                               derive_seed(cfg.seed, "classifier", {1}));

  auto error_matrix = [&] {
    Matrix e(rows.size(), n);
    for (std::size_t k = 0; k < n; ++k) {
      const auto col = detail::approximator_errors(sys.approximators[k], ws, rows);
      for (std::size_t i = 0; i < rows.size(); ++i) e(i, k) = col[i];
    }
    return e;
  };

  Matrix errors = error_matrix();
  for (std::size_t round = 1; round <= cfg.n_iterations; ++round) {
    RoundLog log;
    log.round = round;

    const std::vector<int> labels = competitive ? quality::label_competitive(errors, bound)
                                                : quality::label_complementary(errors, bound);
    const auto n_safe = static_cast<std::size_t>(
        std::count_if(labels.begin(), labels.end(), [](int l) { return l != quality::kCpuClass; }));
    detail::fit_classifier(gate, ws, rows, labels, cfg.class_weight_cap,
                           detail::seeded(cfg.classifier_train, cfg.seed, "classifier-train", 1, 1, round));
    const std::vector<int> routes = detail::predict(gate, ws, rows);

    std::size_t trained_on = 0;
    std::vector<std::string> empty;
    for (std::size_t k = 1; k <= n; ++k) {
      Rows territory;
      for (std::size_t i = 0; i < rows.size(); ++i)
        if (routes[i] == static_cast<int>(k) && (!cfg.territory_safe_only || quality::is_safe(errors(i, k - 1), bound)))
          territory.push_back(rows[i]);
      if (territory.empty()) {
        empty.push_back(std::to_string(k));
        continue;
      }
      trained_on += territory.size();
      detail::fit_approximator(sys.approximators[k - 1], ws, territory,
                               detail::seeded(approximator_config(cfg, k), cfg.seed, "approximator-train", k, 1, round));
    }
    if (!empty.empty()) log.note = fmt::format("empty territory: {}", fmt::join(empty, " "));

    errors = error_matrix();
    std::vector<double> routed_err;
    std::vector<std::size_t> routed_idx;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (routes[i] == quality::kCpuClass) continue;
      routed_idx.push_back(routed_err.size());
      routed_err.push_back(errors(i, static_cast<std::size_t>(routes[i]) - 1));
    }
    log.subset_size = trained_on;
    log.safe_fraction = fraction(n_safe, rows.size());
    log.invocation = fraction(routed_err.size(), rows.size());
    log.rmse_normalized = detail::rmse_normalized(routed_err, routed_idx, bound);
    log.subset_rmse_normalized = log.rmse_normalized;
    sys.training_log.push_back(std::move(log));
  }
  sys.classifiers.push_back(std::move(gate));
  return sys;
}

TrainedSystem train(Architecture architecture, const bench::Dataset& ds, const bench::Benchmark& bm,
                    const PipelineConfig& cfg) {
  switch (architecture) {
    case Architecture::one_pass: return train_one_pass(ds, bm, cfg);
    case Architecture::iterative: return train_iterative(ds, bm, cfg);
    case Architecture::mcca: return train_mcca(ds, bm, cfg);
    case Architecture::mcma: return train_mcma(ds, bm, cfg);
  }
  throw ValidationError("unknown architecture");
}

}  // namespace mcma::trainer
