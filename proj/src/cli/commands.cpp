#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "mcma/cli.hpp"
#include "mcma/text.hpp"

namespace mcma::cli {
namespace {

namespace fs = std::filesystem;

RunConfig with_command(RunConfig c, const char* command) {
  c.command = command;
  return c;
}

bench::Dataset load_checked(const fs::path& dir, const std::string& benchmark) {
  bench::Dataset ds = bench::load_dataset(dir);
  if (!benchmark.empty() && ds.benchmark != benchmark)
    throw ValidationError(
        fmt::format("dataset {} is for '{}', not '{}'", dir.string(), ds.benchmark, benchmark));
  return ds;
}

// Sweep and compare use --data when given, otherwise generate in memory.
bench::Dataset obtain_dataset(const RunConfig& c, const bench::Benchmark& bm) {
  if (!c.data_dir.empty()) return load_checked(c.data_dir, bm.name);
  return bench::generate_dataset(bm, c.n_samples, c.dataset_seed(), c.train_fraction);
}

void print_report_line(std::ostream& out, std::string_view label, const quality::EvalReport& r) {
  fmt::print(out, "{:<20} invocation={:.4f} rmse_normalized={:.4f} speedup={:.4f} energy={:.4f}\n", label,
             r.invocation, r.rmse_normalized, r.modeled_speedup, r.modeled_energy_reduction);
}

void check_unique(const std::vector<Pipeline>& ps) {
  std::set<Pipeline> seen;
  for (Pipeline p : ps)
    if (!seen.insert(p).second) throw ValidationError(fmt::format("pipeline '{}' listed twice", to_string(p)));
}

std::vector<Pipeline> requested_pipelines(const RunConfig& c) {
  if (!c.pipelines.empty()) return c.pipelines;
  return {Pipeline::one_pass, Pipeline::iterative, Pipeline::mcca, Pipeline::mcma_complementary,
          Pipeline::mcma_competitive};
}

void write_csv(const fs::path& path, const std::string& body) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(fmt::format("cannot write {}", path.string()));
  os << body;
  if (!os) throw IoError(fmt::format("failed writing {}", path.string()));
}

}  // namespace

bench::Dataset cmd_generate(const RunConfig& config, std::ostream& out) {
  RunConfig c = with_command(config, "generate");
  const bench::Benchmark bm = c.resolved_benchmark();
  bench::Dataset ds = bench::generate_dataset(bm, c.n_samples, c.dataset_seed(), c.train_fraction);
  prepare_output_dir(c.out_dir, c.force);
  bench::save_dataset(ds, c.out_dir);
  write_manifest(c.out_dir, c);
  fmt::print(out, "generated {} samples of {} ({} train, {} test) in {}\n", ds.size(), bm.name, ds.train.size(),
             ds.test.size(), c.out_dir.string());
  return ds;
}

trainer::TrainedSystem cmd_train(const RunConfig& config, std::ostream& out) {
  RunConfig c = with_command(config, "train");
  if (c.data_dir.empty()) throw UsageError("train needs a dataset (--data)");
  const bench::Dataset ds = load_checked(c.data_dir, c.benchmark);
  c.benchmark = ds.benchmark;
  const bench::Benchmark bm = c.resolved_benchmark();
  const trainer::PipelineConfig tc = c.resolved_trainer(c.pipeline);
  prepare_output_dir(c.out_dir, c.force);

  trainer::TrainedSystem sys = trainer::train(architecture_of(c.pipeline), ds, bm, tc);
  trainer::save_system(sys, c.out_dir);
  write_manifest(c.out_dir, c);

  fmt::print(out, "{} on {} (bound {}): {} approximator(s), {} classifier(s)\n", to_string(c.pipeline), bm.name,
             bm.error_bound, sys.approximators.size(), sys.classifiers.size());
  fmt::print(out, "{:>5} {:>5} {:>8} {:>10} {:>10}  {}\n", "stage", "round", "subset", "invocation", "rmse", "note");
  for (const trainer::RoundLog& r : sys.training_log)
    fmt::print(out, "{:>5} {:>5} {:>8} {:>10.4f} {:>10.4f}  {}\n", r.stage, r.round, r.subset_size, r.invocation,
               r.rmse_normalized, r.note);
  for (const std::string& w : sys.warnings) fmt::print(out, "warning: {}\n", w);
  return sys;
}

runtime::Evaluation cmd_eval(const RunConfig& config, std::ostream& out) {
  RunConfig c = with_command(config, "eval");
  if (c.system_dir.empty()) throw UsageError("eval needs a trained system (--system)");
  if (c.data_dir.empty()) throw UsageError("eval needs a dataset (--data)");
  const trainer::TrainedSystem sys = trainer::load_system(c.system_dir);
  if (!c.benchmark.empty() && c.benchmark != sys.benchmark)
    throw ValidationError(fmt::format("system was trained for '{}', not '{}'", sys.benchmark, c.benchmark));
  const bench::Dataset ds = bench::load_dataset(c.data_dir);
  if (ds.benchmark != sys.benchmark)
    throw ValidationError(fmt::format("benchmark mismatch: system is '{}', dataset is '{}'", sys.benchmark,
                                      ds.benchmark));
  c.benchmark = sys.benchmark;
  const bench::Benchmark& bm = bench::find_benchmark(sys.benchmark);
  runtime::Evaluation ev = runtime::evaluate(sys, bm, ds, c.cost);
  prepare_output_dir(c.out_dir, c.force);
  runtime::write_evaluation(c.out_dir, ev, ds);
  write_manifest(c.out_dir, c);

  print_report_line(out, sys.benchmark, ev.report);
  const auto& k = ev.report.confusion_counts;
  fmt::print(out, "AC={} nAC={} AnC={} nAnC={} reloads={}\n", k[0], k[1], k[2], k[3], ev.report.reload_count);
  return ev;
}

std::vector<SweepRow> cmd_sweep(const RunConfig& config, std::ostream& out) {
  RunConfig c = with_command(config, "sweep");
  if (c.bounds.size() < 2) throw UsageError("sweep needs at least two bounds (--bounds)");
  for (double b : c.bounds)
    if (!(b > 0.0)) throw ValidationError(fmt::format("error bounds must be positive, got {}", b));
  c.pipelines = requested_pipelines(c);
  check_unique(c.pipelines);
  if (c.benchmark.empty() && !c.data_dir.empty()) c.benchmark = bench::load_dataset(c.data_dir).benchmark;
  const bench::Benchmark base = c.resolved_benchmark();
  const bench::Dataset ds = obtain_dataset(c, base);
  prepare_output_dir(c.out_dir, c.force);
  c.error_bound.reset();

  std::vector<SweepRow> rows;
  std::string csv = "bound,pipeline,invocation,rmse_normalized,speedup\n";
  for (double bound : c.bounds) {
    bench::Benchmark bm = base;
    bm.error_bound = bound;
    for (Pipeline p : c.pipelines) {
      const trainer::TrainedSystem sys = trainer::train(architecture_of(p), ds, bm, c.resolved_trainer(p));
      const runtime::Evaluation ev = runtime::evaluate(sys, bm, ds, c.cost);
      rows.push_back({bound, p, ev.report});
      csv += fmt::format("{},{},{},{},{}\n", text::format_double(bound), to_string(p),
                         text::format_double(ev.report.invocation), text::format_double(ev.report.rmse_normalized),
                         text::format_double(ev.report.modeled_speedup));
      print_report_line(out, fmt::format("{} @ {}", to_string(p), bound), ev.report);
    }
  }
  write_csv(c.out_dir / "sweep.csv", csv);
  write_manifest(c.out_dir, c);
  return rows;
}

std::vector<CompareRow> cmd_compare(const RunConfig& config, std::ostream& out) {
  RunConfig c = with_command(config, "compare");
  if (c.pipelines.size() < 2) throw UsageError("compare needs at least two pipelines (--pipelines)");
  check_unique(c.pipelines);
  if (c.benchmark.empty() && !c.data_dir.empty()) c.benchmark = bench::load_dataset(c.data_dir).benchmark;
  const bench::Benchmark bm = c.resolved_benchmark();
  const bench::Dataset ds = obtain_dataset(c, bm);
  prepare_output_dir(c.out_dir, c.force);

  std::vector<CompareRow> rows;
  for (Pipeline p : c.pipelines) {
    const trainer::TrainedSystem sys = trainer::train(architecture_of(p), ds, bm, c.resolved_trainer(p));
    const fs::path dir = c.out_dir / std::string(to_string(p));
    trainer::save_system(sys, dir / "system");
    const runtime::Evaluation ev = runtime::evaluate(sys, bm, ds, c.cost);
    runtime::write_evaluation(dir, ev, ds);
    rows.push_back({p, ev.report, false});
  }
  auto best = std::max_element(rows.begin(), rows.end(), [](const CompareRow& a, const CompareRow& b) {
    return a.report.invocation < b.report.invocation;
  });
  best->best = true;

  std::string csv = "pipeline,invocation,rmse_normalized,speedup,energy_reduction,best\n";
  for (const CompareRow& r : rows) {
    csv += fmt::format("{},{},{},{},{},{}\n", to_string(r.pipeline), text::format_double(r.report.invocation),
                       text::format_double(r.report.rmse_normalized), text::format_double(r.report.modeled_speedup),
                       text::format_double(r.report.modeled_energy_reduction), r.best ? 1 : 0);
    print_report_line(out, fmt::format("{}{}", r.best ? "* " : "  ", to_string(r.pipeline)), r.report);
  }
  write_csv(c.out_dir / "compare.csv", csv);
  write_manifest(c.out_dir, c);
  return rows;
}

}  // namespace mcma::cli
