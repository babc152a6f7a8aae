#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>

#include <doctest.h>

#include "mcma/runtime.hpp"
#include "oracles.hpp"
#include "scratch_dir.hpp"

using namespace mcma;
using trainer::Architecture;
using trainer::PipelineConfig;
using trainer::TrainedSystem;

namespace {

PipelineConfig quick(int epochs = 200, std::uint64_t seed = 1) {
  PipelineConfig c;
  c.approximator_train.epochs = epochs;
  c.classifier_train.epochs = epochs;
  c.seed = seed;
  return c;
}

bench::Benchmark constant_benchmark(double bound) {
  bench::Benchmark b = bench::find_benchmark("piecewise");
  b.name = "constant";
  b.exact = [](std::span<const double>) { return std::vector<double>{1.5}; };
  b.error_bound = bound;
  return b;
}

double invocation_on(const TrainedSystem& s, const bench::Benchmark& bm, const bench::Dataset& ds,
                     const std::vector<std::size_t>& rows) {
  std::size_t routed = 0;
  for (std::size_t i : rows) routed += runtime::dispatch(s, bm, ds.inputs.row(i)).route.is_cpu() ? 0 : 1;
  return static_cast<double>(routed) / static_cast<double>(rows.size());
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

// Mean distance from each safe sample to its nearest safe neighbour, in the
// networks' encoded input space. Safe means some approximator meets the bound.
double mean_nearest_safe_distance(const runtime::Evaluation& ev, const bench::Benchmark& bm,
                                  const bench::Dataset& ds, double bound) {
  std::vector<std::vector<double>> pts;
  for (const auto& v : ev.verdicts) {
    const double best = *std::min_element(v.per_approx_error.begin(), v.per_approx_error.end());
    if (best <= bound) pts.push_back(bench::encode_input(bm, ds.inputs.row(v.sample_index)));
  }
  REQUIRE(pts.size() >= 2);
  double total = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (i == j) continue;
      double d2 = 0.0;
      for (std::size_t k = 0; k < pts[i].size(); ++k) d2 += (pts[i][k] - pts[j][k]) * (pts[i][k] - pts[j][k]);
      nearest = std::min(nearest, std::sqrt(d2));
    }
    total += nearest;
  }
  return total / static_cast<double>(pts.size());
}

}  // namespace

TEST_CASE("pipeline config") {
  const PipelineConfig c;
  CHECK(c.n_approximators == 3);
  CHECK(c.n_iterations == 5);
  CHECK(c.selection_policy == quality::SelectionPolicy::AC);
  CHECK(c.mcca_convergence_min_gain == 0.05);
  CHECK(c.competitive_lr_multipliers == std::vector<double>{0.5, 1.0, 2.0});
  PipelineConfig bad;
  bad.n_approximators = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = PipelineConfig{};
  bad.mcca_convergence_min_gain = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  for (auto a : {Architecture::one_pass, Architecture::iterative, Architecture::mcca, Architecture::mcma})
    CHECK(trainer::parse_architecture(trainer::to_string(a)) == a);
  CHECK_THROWS_AS(trainer::parse_architecture("adaboost"), ValidationError);
}

TEST_CASE("one-pass on a constant target") {
  const auto bm = constant_benchmark(0.1);
  const auto ds = bench::generate_dataset(bm, 300, 3, 2.0 / 3.0);
  const TrainedSystem s = trainer::train_one_pass(ds, bm, quick(300));
  CHECK(s.training_log.size() == 1);
  CHECK(s.approximators.size() == 1);
  CHECK(s.classifiers.size() == 1);
  CHECK(s.classifiers[0].topology().output_size() == 2);
  CHECK(invocation_on(s, bm, ds, ds.train) >= 0.95);
}

TEST_CASE("one-pass with degenerate bounds") {
  const auto& pw = bench::find_benchmark("piecewise");
  const auto ds = bench::generate_dataset(pw, 200, 4, 0.5);

  auto loose = pw;
  loose.error_bound = 1e9;
  const TrainedSystem all = trainer::train_one_pass(ds, loose, quick(100));
  CHECK(runtime::evaluate(all, loose, ds, runtime::CostModelParams{}).report.invocation == 1.0);
  CHECK_FALSE(all.warnings.empty());

  auto tight = pw;
  tight.error_bound = 1e-12;
  const TrainedSystem none = trainer::train_one_pass(ds, tight, quick(100));
  CHECK(runtime::evaluate(none, tight, ds, runtime::CostModelParams{}).report.invocation <= 0.05);
  CHECK_FALSE(none.warnings.empty());
}

TEST_CASE("iterative with one round is one-pass") {
  const auto& bm = bench::find_benchmark("bessel");
  const auto ds = bench::generate_dataset(bm, 300, 5, 2.0 / 3.0);
  PipelineConfig c = quick(150);
  c.n_iterations = 1;
  const TrainedSystem a = trainer::train_one_pass(ds, bm, c);
  const TrainedSystem b = trainer::train_iterative(ds, bm, c);
  CHECK(a.approximators == b.approximators);
  CHECK(a.classifiers == b.classifiers);
  REQUIRE(b.training_log.size() == 1);
  CHECK(a.training_log[0].invocation == b.training_log[0].invocation);
  CHECK(a.training_log[0].rmse_normalized == b.training_log[0].rmse_normalized);
}

TEST_CASE("iterative logs every round") {
  const auto& bm = bench::find_benchmark("bessel");
  const auto ds = bench::generate_dataset(bm, 300, 5, 2.0 / 3.0);
  for (std::size_t rounds : {2u, 4u}) {
    PipelineConfig c = quick(60);
    c.n_iterations = rounds;
    const TrainedSystem s = trainer::train_iterative(ds, bm, c);
    CHECK(s.training_log.size() == rounds);
    for (std::size_t r = 0; r < rounds; ++r) CHECK(s.training_log[r].round == r + 1);
  }
}

TEST_CASE("iterative subset error mostly falls on blackscholes") {
  // Full-length training. A round counts when its subset rmse does not exceed
  // the previous round's; round 1 has no predecessor and counts.
  const auto& bm = bench::find_benchmark("blackscholes");
  const auto ds = bench::generate_dataset(bm, 1500, 1, 2.0 / 3.0);
  PipelineConfig c;
  c.seed = 1;
  const TrainedSystem s = trainer::train_iterative(ds, bm, c);
  REQUIRE(s.training_log.size() == 5);
  int rounds = 1;
  for (std::size_t r = 1; r < 5; ++r)
    if (s.training_log[r].subset_rmse_normalized <= s.training_log[r - 1].subset_rmse_normalized) ++rounds;
  CHECK(rounds >= 3);
}

TEST_CASE("category C clusters safe samples more tightly than category A on bessel") {
  const auto& bm = bench::find_benchmark("bessel");
  const auto ds = bench::generate_dataset(bm, 1500, 1, 2.0 / 3.0);
  double stat[2];
  int i = 0;
  for (auto policy : {quality::SelectionPolicy::C, quality::SelectionPolicy::A}) {
    PipelineConfig c;
    c.seed = 1;
    c.selection_policy = policy;
    const TrainedSystem s = trainer::train_iterative(ds, bm, c);
    const auto ev = runtime::evaluate(s, bm, ds, ds.train, runtime::CostModelParams{});
    stat[i++] = mean_nearest_safe_distance(ev, bm, ds, bm.error_bound);
  }
  CAPTURE(stat[0]);
  CAPTURE(stat[1]);
  CHECK(stat[0] < stat[1]);
}

TEST_CASE("mcca cascade on the piecewise target") {
  const auto& bm = bench::find_benchmark("piecewise");
  const auto ds = bench::generate_dataset(bm, 1500, 1, 2.0 / 3.0);
  PipelineConfig c;
  c.seed = 1;
  const TrainedSystem s = trainer::train_mcca(ds, bm, c);
  REQUIRE(s.approximators.size() >= 2);
  CHECK(s.classifiers.size() == s.approximators.size());
  CHECK(s.training_log.size() == s.approximators.size() * c.n_iterations);

  // Replaying the final gates on the train split reproduces the training-time
  // hand-off: pair k sees the rows all earlier gates rejected.
  std::vector<std::size_t> remaining = ds.train;
  std::vector<std::vector<std::size_t>> accepted(s.classifiers.size());
  for (std::size_t k = 0; k < s.classifiers.size(); ++k) {
    std::vector<std::size_t> next;
    for (std::size_t i : remaining) {
      const auto enc = bench::encode_input(bm, ds.inputs.row(i));
      (nn::predict_class(s.classifiers[k], enc).index == 1 ? accepted[k] : next).push_back(i);
    }
    CHECK(next.size() < remaining.size());  // strictly decreasing rejected sets
    if (k > 0)
      CHECK(static_cast<double>(accepted[k].size()) / static_cast<double>(remaining.size()) >
            c.mcca_convergence_min_gain);
    remaining = std::move(next);
  }
  std::vector<int> owner(ds.size(), 0);
  for (const auto& set : accepted)
    for (std::size_t i : set) ++owner[i];
  for (int o : owner) CHECK(o <= 1);

  // Cumulative test invocation after each added pair.
  double previous = 0.0, first = 0.0;
  for (std::size_t m = 1; m <= s.approximators.size(); ++m) {
    TrainedSystem prefix = s;
    prefix.approximators.resize(m);
    prefix.classifiers.resize(m);
    const double inv = runtime::evaluate(prefix, bm, ds, runtime::CostModelParams{}).report.invocation;
    CHECK(inv >= previous);
    if (m == 1) first = inv;
    previous = inv;
  }
  CHECK(previous > first);
}

TEST_CASE("mcca min gain of 1 keeps only the first pair") {
  const auto& bm = bench::find_benchmark("piecewise");
  const auto ds = bench::generate_dataset(bm, 400, 2, 2.0 / 3.0);
  PipelineConfig c = quick(100);
  c.mcca_convergence_min_gain = 1.0;
  const TrainedSystem s = trainer::train_mcca(ds, bm, c);
  CHECK(s.approximators.size() == 1);
  CHECK(s.classifiers.size() == 1);
}

TEST_CASE("mcca stops cleanly when too few samples remain") {
  const auto& bm = bench::find_benchmark("piecewise");
  const auto ds = bench::generate_dataset(bm, 60, 2, 0.5);
  PipelineConfig c = quick(50);
  CHECK_THROWS_AS(trainer::train_mcca(ds, bm, c), ValidationError);  // 30 < 50 from the start
  c.mcca_min_remaining = 10;
  CHECK_NOTHROW(trainer::train_mcca(ds, bm, c));
}

TEST_CASE("mcma structure") {
  const auto& bm = bench::find_benchmark("bessel");
  const auto ds = bench::generate_dataset(bm, 300, 6, 2.0 / 3.0);
  for (auto alloc : {trainer::Allocation::complementary, trainer::Allocation::competitive}) {
    PipelineConfig c = quick(80);
    c.allocation = alloc;
    const TrainedSystem s = trainer::train_mcma(ds, bm, c);
    CHECK(s.approximators.size() == 3);
    REQUIRE(s.classifiers.size() == 1);
    CHECK(s.classifiers[0].topology().output_size() == 4);
    CHECK(s.training_log.size() == 5);
    CHECK_NOTHROW(s.validate());
  }
  CHECK_THROWS_AS(
      [&] {
        PipelineConfig c = quick(10);
        c.n_approximators = 0;
        trainer::train_mcma(ds, bm, c);
      }(),
      ValidationError);
}

TEST_CASE("mcma with one complementary approximator is a binary pair") {
  const auto& bm = bench::find_benchmark("piecewise");
  const auto ds = bench::generate_dataset(bm, 300, 6, 2.0 / 3.0);
  PipelineConfig c = quick(100);
  c.n_approximators = 1;
  const TrainedSystem s = trainer::train_mcma(ds, bm, c);
  CHECK(s.approximators.size() == 1);
  CHECK(s.classifiers[0].topology().output_size() == 2);
  CHECK(s.classifiers[0].topology().output_activation == nn::Activation::softmax);
  for (std::size_t i : ds.test) {
    const auto r = runtime::dispatch(s, bm, ds.inputs.row(i)).route;
    CHECK(r.index() <= 1);
  }
}

TEST_CASE("mcma first-round labels") {
  const auto& bm = bench::find_benchmark("piecewise");
  const auto ds = bench::generate_dataset(bm, 600, 7, 2.0 / 3.0);
  PipelineConfig c = quick(300);
  const auto init = trainer::initialize_mcma(ds, bm, c);
  REQUIRE(init.size() == 3);
  Matrix errors(ds.train.size(), 3);
  for (std::size_t r = 0; r < ds.train.size(); ++r)
    for (std::size_t k = 0; k < 3; ++k) {
      const std::size_t i = ds.train[r];
      errors(r, k) = quality::sample_error(bm, trainer::approximate(init[k], bm, ds.inputs.row(i)), ds.outputs.row(i));
    }
  const auto labels = quality::label_complementary(errors, bm.error_bound);
  REQUIRE(labels.size() == ds.train.size());  // one label per sample
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const std::vector<double> e(errors.row(r).begin(), errors.row(r).end());
    CHECK(oracle::prefix_rejection_holds(e, labels[r], bm.error_bound));
  }

  CHECK(trainer::initialize_mcma(ds, bm, c) == init);

  // Competitive initialisation trains every approximator on all samples with
  // different seeds and rates, so they differ.
  c.allocation = trainer::Allocation::competitive;
  const auto comp = trainer::initialize_mcma(ds, bm, c);
  CHECK_FALSE(comp[0] == comp[1]);
  CHECK_FALSE(comp[1] == comp[2]);
}

TEST_CASE("training is reproducible and persists byte-identically") {
  const test::ScratchDir dir("trainer_det");
  const auto& bm = bench::find_benchmark("bessel");
  const auto ds = bench::generate_dataset(bm, 300, 8, 2.0 / 3.0);
  PipelineConfig c = quick(60);
  c.allocation = trainer::Allocation::competitive;
  for (auto arch : {Architecture::one_pass, Architecture::iterative, Architecture::mcca, Architecture::mcma}) {
    c.mcca_min_remaining = 20;
    const TrainedSystem a = trainer::train(arch, ds, bm, c);
    const TrainedSystem b = trainer::train(arch, ds, bm, c);
    const auto pa = dir.path / (std::string(trainer::to_string(arch)) + "_a");
    const auto pb = dir.path / (std::string(trainer::to_string(arch)) + "_b");
    trainer::save_system(a, pa);
    trainer::save_system(b, pb);
    for (const auto& entry : std::filesystem::directory_iterator(pa)) {
      CAPTURE(entry.path().string());
      CHECK(slurp(entry.path()) == slurp(pb / entry.path().filename()));
    }

    const TrainedSystem back = trainer::load_system(pa);
    CHECK(back.architecture == a.architecture);
    CHECK(back.allocation == a.allocation);
    CHECK(back.approximators == a.approximators);
    CHECK(back.classifiers == a.classifiers);
    CHECK(back.error_bound == a.error_bound);
    CHECK(back.warnings == a.warnings);
    REQUIRE(back.training_log.size() == a.training_log.size());
    for (std::size_t r = 0; r < a.training_log.size(); ++r) {
      CHECK(back.training_log[r].invocation == a.training_log[r].invocation);
      CHECK(back.training_log[r].note == a.training_log[r].note);
    }
    CHECK(back.config.seed == a.config.seed);
    CHECK(back.config.competitive_lr_multipliers == a.config.competitive_lr_multipliers);
  }
  CHECK_THROWS_AS(trainer::load_system(dir.path / "nothing"), NotFoundError);
}

TEST_CASE("training log notes with commas survive a round trip") {
  const test::ScratchDir dir("trainer_notes");
  const auto& bm = bench::find_benchmark("piecewise");
  const auto ds = bench::generate_dataset(bm, 200, 8, 0.5);
  TrainedSystem s = trainer::train_one_pass(ds, bm, quick(20));
  s.training_log[0].note = "empty, \"quoted\" territory";
  trainer::save_system(s, dir.path);
  CHECK(trainer::load_system(dir.path).training_log[0].note == s.training_log[0].note);
}
