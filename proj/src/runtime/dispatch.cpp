#include <fmt/format.h>

#include "mcma/runtime.hpp"

namespace mcma::runtime {

Route Route::approximator(std::size_t k) {
  if (k == 0) throw ValidationError("approximator routes are 1-based");
  return Route(k);
}

std::string Route::label() const { return is_cpu() ? "cpu" : fmt::format("A{}", index_); }

Dispatch dispatch(const trainer::TrainedSystem& system, const bench::Benchmark& benchmark,
                  std::span<const double> input) {
  if (input.size() != benchmark.input_dim)
    throw ValidationError(fmt::format("dispatch: {} expects {} inputs, got {}", benchmark.name,
                                      benchmark.input_dim, input.size()));
  if (system.benchmark != benchmark.name)
    throw ValidationError(fmt::format("system was trained for '{}', not '{}'", system.benchmark, benchmark.name));

  const std::vector<double> encoded = bench::encode_input(benchmark, input);
  Dispatch d;
  switch (system.architecture) {
    case trainer::Architecture::mcma: {
      const nn::ClassPrediction p = nn::predict_class(system.classifiers[0], encoded);
      d.classifier_evaluations = 1;
      d.confidence = p.confidence;
      if (p.index != 0) d.route = Route::approximator(p.index);
      break;
    }
    case trainer::Architecture::mcca: {
      for (std::size_t k = 0; k < system.classifiers.size(); ++k) {
        const nn::ClassPrediction p = nn::predict_class(system.classifiers[k], encoded);
        ++d.classifier_evaluations;
        d.confidence = p.confidence;
        if (p.index == 1) {
          d.route = Route::approximator(k + 1);
          break;
        }
      }
      break;
    }
    case trainer::Architecture::one_pass:
    case trainer::Architecture::iterative: {
      const nn::ClassPrediction p = nn::predict_class(system.classifiers[0], encoded);
      d.classifier_evaluations = 1;
      d.confidence = p.confidence;
      if (p.index == 1) d.route = Route::approximator(1);
      break;
    }
  }

  if (d.route.is_cpu()) {
    d.output = bench::evaluate_exact(benchmark, input);
  } else {
    const nn::Mlp& a = system.approximators.at(d.route.index() - 1);
    d.output = bench::decode_output(benchmark, a.forward(encoded));
  }
  return d;
}

}  // namespace mcma::runtime
