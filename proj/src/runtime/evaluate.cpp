#include <fstream>

#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "mcma/runtime.hpp"
#include "mcma/text.hpp"

namespace mcma::runtime {

Evaluation evaluate(const trainer::TrainedSystem& system, const bench::Benchmark& benchmark,
                    const bench::Dataset& dataset, std::span<const std::size_t> samples,
                    const CostModelParams& params) {
  params.validate();
  system.validate();
  if (samples.empty()) throw ValidationError("evaluate: no samples to evaluate");
  if (dataset.benchmark != system.benchmark)
    throw ValidationError(fmt::format("dataset is for '{}' but the system was trained for '{}'", dataset.benchmark,
                                      system.benchmark));

  const std::size_t n_approx = system.approximators.size();
  const double bound = system.error_bound;
  const bool competitive =
      system.architecture == trainer::Architecture::mcma && system.allocation == trainer::Allocation::competitive;

  Evaluation ev;
  std::vector<Route> route_seq;
  std::size_t evals = 0;
  Matrix one(1, n_approx);
  for (std::size_t idx : samples) {
    if (idx >= dataset.size()) throw ValidationError(fmt::format("sample {} out of range", idx));
    const auto input = dataset.inputs.row(idx);
    const auto exact = dataset.outputs.row(idx);
    const Dispatch d = dispatch(system, benchmark, input);

    quality::SampleVerdict v;
    v.sample_index = idx;
    for (std::size_t k = 0; k < n_approx; ++k) {
      const auto out = trainer::approximate(system.approximators[k], benchmark, input);
      v.per_approx_error.push_back(quality::sample_error(benchmark, out, exact));
      one(0, k) = v.per_approx_error.back();
    }
    v.assigned_label = (competitive ? quality::label_competitive(one, bound) : quality::label_complementary(one, bound))[0];
    v.classifier_prediction = static_cast<int>(d.route.index());
    v.confusion = quality::confusion_of(v, bound);

    ev.verdicts.push_back(std::move(v));
    ev.routes.push_back({idx, d.route, d.confidence});
    route_seq.push_back(d.route);
    evals += d.classifier_evaluations;
  }

  ev.report = quality::aggregate_report(ev.verdicts, bound, n_approx + 1);
  ev.report.reload_count = count_reloads(route_seq, params.buffer_case);
  ev.report.classifier_evaluations = evals;
  CostCounts counts;
  counts.samples = ev.report.n_samples;
  counts.approximated = ev.report.routed();
  counts.cpu = ev.report.n_samples - counts.approximated;
  counts.classifier_evaluations = evals;
  counts.reloads = ev.report.reload_count;
  const CostEstimate cost = model_cost(counts, params);
  ev.report.modeled_speedup = cost.speedup;
  ev.report.modeled_energy_reduction = cost.energy_reduction;
  return ev;
}

Evaluation evaluate(const trainer::TrainedSystem& system, const bench::Benchmark& benchmark,
                    const bench::Dataset& dataset, const CostModelParams& params) {
  return evaluate(system, benchmark, dataset, dataset.test, params);
}

void write_report(const std::filesystem::path& path, const quality::EvalReport& r) {
  using quality::Confusion;
  boost::property_tree::ptree t;
  t.put("n_samples", std::to_string(r.n_samples));
  t.put("invocation", text::format_double(r.invocation));
  t.put("rmse_normalized", text::format_double(r.rmse_normalized));
  t.put("rmse_all_normalized", text::format_double(r.rmse_all_normalized));
  t.put("AC", std::to_string(r.count(Confusion::AC)));
  t.put("nAC", std::to_string(r.count(Confusion::nAC)));
  t.put("AnC", std::to_string(r.count(Confusion::AnC)));
  t.put("nAnC", std::to_string(r.count(Confusion::nAnC)));
  t.put("per_class_counts", text::join_indices(r.per_class_counts));
  t.put("reload_count", std::to_string(r.reload_count));
  t.put("classifier_evaluations", std::to_string(r.classifier_evaluations));
  t.put("modeled_speedup", text::format_double(r.modeled_speedup));
  t.put("modeled_energy_reduction", text::format_double(r.modeled_energy_reduction));
  text::write_ini(path, t);
}

quality::EvalReport read_report(const std::filesystem::path& path) {
  using quality::Confusion;
  const auto t = text::read_ini(path);
  quality::EvalReport r;
  r.n_samples = text::parse_index(text::require(t, "n_samples"));
  r.invocation = text::parse_double(text::require(t, "invocation"));
  r.rmse_normalized = text::parse_double(text::require(t, "rmse_normalized"));
  r.rmse_all_normalized = text::parse_double(text::require(t, "rmse_all_normalized"));
  const char* names[] = {"AC", "nAC", "AnC", "nAnC"};
  for (std::size_t c = 0; c < 4; ++c) r.confusion_counts[c] = text::parse_index(text::require(t, names[c]));
  r.per_class_counts = text::parse_indices(text::require(t, "per_class_counts"));
  r.reload_count = text::parse_index(text::require(t, "reload_count"));
  r.classifier_evaluations = text::parse_index(text::require(t, "classifier_evaluations"));
  r.modeled_speedup = text::parse_double(text::require(t, "modeled_speedup"));
  r.modeled_energy_reduction = text::parse_double(text::require(t, "modeled_energy_reduction"));
  return r;
}

void write_routes(const std::filesystem::path& path, std::span<const RouteRecord> routes) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(fmt::format("cannot write {}", path.string()));
  os << "sample_index,route,confidence\n";
  for (const RouteRecord& r : routes)
    os << r.sample_index << ',' << r.route.label() << ',' << text::format_double(r.confidence) << '\n';
  if (!os) throw IoError(fmt::format("failed writing {}", path.string()));
}

void write_evaluation(const std::filesystem::path& dir, const Evaluation& ev, const bench::Dataset& dataset) {
  std::filesystem::create_directories(dir);
  write_report(dir / "report.txt", ev.report);
  write_routes(dir / "routes.csv", ev.routes);
  quality::write_verdicts(dir / "verdicts.csv", ev.verdicts, dataset.inputs, dataset.outputs);
}

}  // namespace mcma::runtime
