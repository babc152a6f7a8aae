#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "mcma/quality.hpp"

namespace mcma::quality {

double sample_error(bench::ErrorMetric metric, std::span<const double> approx, std::span<const double> exact) {
  if (approx.size() != exact.size() || approx.empty())
    throw ValidationError(fmt::format("sample_error: {} approximate values vs {} exact", approx.size(),
                                      exact.size()));
  switch (metric) {
    case bench::ErrorMetric::misclassification: {
      auto a = std::max_element(approx.begin(), approx.end()) - approx.begin();
      auto e = std::max_element(exact.begin(), exact.end()) - exact.begin();
      return a == e ? 0.0 : 1.0;
    }
    case bench::ErrorMetric::absolute: {
      double s = 0.0;
      for (std::size_t i = 0; i < approx.size(); ++i) s += std::abs(approx[i] - exact[i]);
      return s / static_cast<double>(approx.size());
    }
    case bench::ErrorMetric::relative: {
      double s = 0.0;
      for (std::size_t i = 0; i < approx.size(); ++i)
        s += std::abs(approx[i] - exact[i]) / std::max(std::abs(exact[i]), bench::kRelativeFloor);
      return s / static_cast<double>(approx.size());
    }
  }
  return 0.0;
}

double sample_error(const bench::Benchmark& benchmark, std::span<const double> approx,
                    std::span<const double> exact) {
  if (approx.size() != benchmark.output_dim)
    throw ValidationError(fmt::format("sample_error: {} expects {} outputs", benchmark.name, benchmark.output_dim));
  return sample_error(benchmark.error_metric, approx, exact);
}

bool is_safe(double error, double bound) {
  if (!(bound > 0.0)) throw ValidationError("error bound must be positive");
  return error <= bound;
}

namespace {

void check_errors(const Matrix& errors, double bound) {
  if (errors.rows() == 0 || errors.cols() == 0) throw ValidationError("error matrix is empty");
  if (!(bound > 0.0)) throw ValidationError("error bound must be positive");
}

}  // namespace

std::vector<int> label_complementary(const Matrix& errors, double bound) {
  check_errors(errors, bound);
  std::vector<int> labels(errors.rows(), kCpuClass);
  for (std::size_t s = 0; s < errors.rows(); ++s)
    for (std::size_t k = 0; k < errors.cols(); ++k)
      if (is_safe(errors(s, k), bound)) {
        labels[s] = static_cast<int>(k) + 1;
        break;
      }
  return labels;
}

std::vector<int> label_competitive(const Matrix& errors, double bound) {
  check_errors(errors, bound);
  std::vector<int> labels(errors.rows(), kCpuClass);
  for (std::size_t s = 0; s < errors.rows(); ++s) {
    std::size_t best = 0;
    // NaN never wins: comparisons with it are false.
    for (std::size_t k = 1; k < errors.cols(); ++k)
      if (errors(s, k) < errors(s, best) || (std::isnan(errors(s, best)) && !std::isnan(errors(s, k)))) best = k;
    if (is_safe(errors(s, best), bound)) labels[s] = static_cast<int>(best) + 1;
  }
  return labels;
}

std::string_view to_string(SelectionPolicy p) {
  switch (p) {
    case SelectionPolicy::A: return "A";
    case SelectionPolicy::C: return "C";
    case SelectionPolicy::AC: return "AC";
  }
  return "?";
}

SelectionPolicy parse_selection_policy(std::string_view name) {
  if (name == "A") return SelectionPolicy::A;
  if (name == "C") return SelectionPolicy::C;
  if (name == "AC") return SelectionPolicy::AC;
  throw ValidationError(fmt::format("unknown selection policy '{}' (expected A, C or AC)", name));
}

std::string_view to_string(Confusion c) {
  switch (c) {
    case Confusion::AC: return "AC";
    case Confusion::nAC: return "nAC";
    case Confusion::AnC: return "AnC";
    case Confusion::nAnC: return "nAnC";
  }
  return "?";
}

Confusion confusion_of(const SampleVerdict& v, double bound) {
  const int k = v.classifier_prediction;
  if (k < 0 || static_cast<std::size_t>(k) > v.per_approx_error.size())
    throw ValidationError(fmt::format("sample {}: prediction {} out of range", v.sample_index, k));
  if (k != kCpuClass) return is_safe(v.per_approx_error[k - 1], bound) ? Confusion::AC : Confusion::nAC;
  for (double e : v.per_approx_error)
    if (is_safe(e, bound)) return Confusion::AnC;
  return Confusion::nAnC;
}

EvalReport aggregate_report(std::span<const SampleVerdict> verdicts, double bound, std::size_t n_classes) {
  if (verdicts.empty()) throw ValidationError("cannot aggregate an empty set of verdicts");
  if (!(bound > 0.0)) throw ValidationError("error bound must be positive");
  EvalReport r;
  r.n_samples = verdicts.size();
  r.per_class_counts.assign(n_classes, 0);

  std::vector<double> squares;
  for (const SampleVerdict& v : verdicts) {
    const Confusion c = confusion_of(v, bound);
    ++r.confusion_counts[static_cast<std::size_t>(c)];
    if (static_cast<std::size_t>(v.classifier_prediction) >= n_classes)
      throw ValidationError(fmt::format("prediction {} exceeds class count {}", v.classifier_prediction, n_classes));
    ++r.per_class_counts[static_cast<std::size_t>(v.classifier_prediction)];
    if (v.classifier_prediction != kCpuClass) {
      const double e = v.per_approx_error[static_cast<std::size_t>(v.classifier_prediction) - 1];
      squares.push_back(e * e);
    }
  }
  std::sort(squares.begin(), squares.end());
  double sum = 0.0;
  for (double s : squares) sum += s;

  const double n = static_cast<double>(r.n_samples);
  r.invocation = static_cast<double>(squares.size()) / n;
  r.rmse_normalized = squares.empty() ? 0.0 : std::sqrt(sum / static_cast<double>(squares.size())) / bound;
  r.rmse_all_normalized = std::sqrt(sum / n) / bound;
  return r;
}

}  // namespace mcma::quality
