#pragma once

// Inference-time dispatch, test-split evaluation and the analytic NPU cost
// model (speedup, energy, weight-buffer reloads).

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcma/bench.hpp"
#include "mcma/quality.hpp"
#include "mcma/trainer.hpp"

namespace mcma::runtime {

// Where one input is computed: approximator k (1-based) or the CPU.
class Route {
 public:
  static Route cpu() { return Route(0); }
  static Route approximator(std::size_t k);

  bool is_cpu() const { return index_ == 0; }
  std::size_t index() const { return index_; }  // 0 for CPU
  std::string label() const;                    // "cpu" or "A<k>"

  friend bool operator==(Route, Route) = default;

 private:
  explicit Route(std::size_t index) : index_(index) {}
  std::size_t index_;
};

struct Dispatch {
  Route route = Route::cpu();
  std::vector<double> output;
  double confidence = 0.0;  // probability of the deciding gate's chosen class
  std::size_t classifier_evaluations = 0;
};

// MCMA: gate argmax, class 0 goes to the CPU. MCCA: first approving pair in
// cascade order wins. One-pass/iterative: class 1 of the binary gate
// approves. CPU routes return the exact function value.
Dispatch dispatch(const trainer::TrainedSystem& system, const bench::Benchmark& benchmark,
                  std::span<const double> input);

enum class BufferCase { all_fit, none_fit, one_fits };

std::string_view to_string(BufferCase c);
BufferCase parse_buffer_case(std::string_view name);

struct CostModelParams {
  double t_cpu = 1.0;
  double t_apx = 0.1;
  double t_cls = 0.05;
  double t_reload = 0.01;
  double e_cpu = 1.0;
  double e_apx = 0.1;
  double e_cls = 0.05;
  double e_reload = 0.01;
  BufferCase buffer_case = BufferCase::one_fits;

  void validate() const;
};

// all_fit: 0. none_fit: one load per approximator-routed sample. one_fits:
// an initial load plus one per change of approximator between consecutive
// approximator routes; CPU routes leave the buffer untouched.
std::size_t count_reloads(std::span<const Route> routes, BufferCase buffer_case);

struct CostCounts {
  std::size_t samples = 0;
  std::size_t approximated = 0;
  std::size_t cpu = 0;
  std::size_t classifier_evaluations = 0;
  std::size_t reloads = 0;
};

struct CostEstimate {
  double speedup = 0.0;
  double energy_reduction = 0.0;
};

// T = evals*t_cls + approximated*t_apx + cpu*t_cpu + reloads*t_reload and
// speedup = samples*t_cpu / T; energy likewise with the e_* parameters.
CostEstimate model_cost(const CostCounts& counts, const CostModelParams& params);

struct RouteRecord {
  std::size_t sample_index = 0;
  Route route = Route::cpu();
  double confidence = 0.0;
};

struct Evaluation {
  quality::EvalReport report;
  std::vector<quality::SampleVerdict> verdicts;
  std::vector<RouteRecord> routes;  // in evaluation order
};

// Dispatches the listed samples in order and scores them. Ground-truth
// labels use the system's allocation rule (complementary for non-MCMA).
Evaluation evaluate(const trainer::TrainedSystem& system, const bench::Benchmark& benchmark,
                    const bench::Dataset& dataset, std::span<const std::size_t> samples,
                    const CostModelParams& params);

// Test split in file order.
Evaluation evaluate(const trainer::TrainedSystem& system, const bench::Benchmark& benchmark,
                    const bench::Dataset& dataset, const CostModelParams& params);

// report.txt (key = value), routes.csv and verdicts.csv in dir.
void write_report(const std::filesystem::path& path, const quality::EvalReport& report);
quality::EvalReport read_report(const std::filesystem::path& path);
void write_routes(const std::filesystem::path& path, std::span<const RouteRecord> routes);
void write_evaluation(const std::filesystem::path& dir, const Evaluation& evaluation, const bench::Dataset& dataset);

}  // namespace mcma::runtime
