#pragma once

// Per-sample approximation error, safe-to-approximate labelling and the
// aggregate quality metrics (invocation, normalised RMSE, confusion counts).

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "mcma/bench.hpp"
#include "mcma/matrix.hpp"

namespace mcma::quality {

// Class 0 is the exact (CPU) path; class k >= 1 is approximator k.
inline constexpr int kCpuClass = 0;

// Relative: mean over outputs of |a - e| / max(|e|, 1e-6). Absolute: mean of
// |a - e|. Misclassification: 0 when argmax agrees, else 1.
double sample_error(bench::ErrorMetric metric, std::span<const double> approx, std::span<const double> exact);
double sample_error(const bench::Benchmark& benchmark, std::span<const double> approx,
                    std::span<const double> exact);

// Inclusive: an error equal to the bound is safe.
bool is_safe(double error, double bound);

// errors is n_samples x n_approximators. Label k is the smallest approximator
// index (1-based) whose error is within the bound, 0 when none is.
std::vector<int> label_complementary(const Matrix& errors, double bound);

// Label k is the approximator with the lowest error (ties to the lowest
// index) if that error is within the bound, 0 otherwise.
std::vector<int> label_competitive(const Matrix& errors, double bound);

enum class SelectionPolicy { A, C, AC };

std::string_view to_string(SelectionPolicy p);
SelectionPolicy parse_selection_policy(std::string_view name);

enum class Confusion { AC, nAC, AnC, nAnC };

std::string_view to_string(Confusion c);

struct SampleVerdict {
  std::size_t sample_index = 0;
  std::vector<double> per_approx_error;
  int assigned_label = 0;
  int classifier_prediction = 0;
  Confusion confusion = Confusion::nAnC;
};

// Routed to approximator k: AC iff error(k) <= bound, else nAC.
// Routed to CPU: AnC iff some approximator is within the bound, else nAnC.
Confusion confusion_of(const SampleVerdict& verdict, double bound);

struct EvalReport {
  std::size_t n_samples = 0;
  double invocation = 0.0;
  // sqrt(mean error^2 over approximator-routed samples) / bound; 0 when
  // nothing was routed.
  double rmse_normalized = 0.0;
  // Diagnostic variant over all samples, CPU-routed samples counting as 0.
  double rmse_all_normalized = 0.0;
  std::array<std::size_t, 4> confusion_counts{};  // indexed by Confusion
  std::vector<std::size_t> per_class_counts;      // by classifier_prediction
  std::size_t reload_count = 0;
  std::size_t classifier_evaluations = 0;
  double modeled_speedup = 0.0;
  double modeled_energy_reduction = 0.0;

  std::size_t count(Confusion c) const { return confusion_counts[static_cast<std::size_t>(c)]; }
  std::size_t routed() const { return n_samples - (per_class_counts.empty() ? 0 : per_class_counts[0]); }
};

// Fills the quality fields; cost-model fields stay zero. Errors are summed
// in ascending order so the result does not depend on verdict order.
// Throws ValidationError on an empty input.
EvalReport aggregate_report(std::span<const SampleVerdict> verdicts, double bound, std::size_t n_classes);

// Verdict CSV: sample_index, x0.., y0.., err1.., assigned_label,
// classifier_prediction, confusion.
void write_verdicts(const std::filesystem::path& path, std::span<const SampleVerdict> verdicts,
                    const Matrix& inputs, const Matrix& outputs);

}  // namespace mcma::quality
