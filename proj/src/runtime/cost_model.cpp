#include <cmath>

#include <fmt/format.h>

#include "mcma/runtime.hpp"

namespace mcma::runtime {

std::string_view to_string(BufferCase c) {
  switch (c) {
    case BufferCase::all_fit: return "all_fit";
    case BufferCase::none_fit: return "none_fit";
    case BufferCase::one_fits: return "one_fits";
  }
  return "?";
}

BufferCase parse_buffer_case(std::string_view name) {
  if (name == "all_fit") return BufferCase::all_fit;
  if (name == "none_fit") return BufferCase::none_fit;
  if (name == "one_fits") return BufferCase::one_fits;
  throw ValidationError(fmt::format("unknown buffer case '{}' (all_fit, none_fit, one_fits)", name));
}

void CostModelParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(fmt::format("{} must be positive", name));
  };
  auto non_negative = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError(fmt::format("{} must be >= 0", name));
  };
  positive(t_cpu, "t_cpu");
  positive(t_apx, "t_apx");
  non_negative(t_cls, "t_cls");
  non_negative(t_reload, "t_reload");
  positive(e_cpu, "e_cpu");
  positive(e_apx, "e_apx");
  non_negative(e_cls, "e_cls");
  non_negative(e_reload, "e_reload");
}

std::size_t count_reloads(std::span<const Route> routes, BufferCase buffer_case) {
  std::size_t reloads = 0;
  switch (buffer_case) {
    case BufferCase::all_fit:
      return 0;
    case BufferCase::none_fit:
      for (Route r : routes) reloads += r.is_cpu() ? 0 : 1;
      return reloads;
    case BufferCase::one_fits: {
      std::size_t resident = 0;  // 0: buffer empty
      for (Route r : routes) {
        if (r.is_cpu() || r.index() == resident) continue;
        ++reloads;
        resident = r.index();
      }
      return reloads;
    }
  }
  return reloads;
}

CostEstimate model_cost(const CostCounts& c, const CostModelParams& p) {
  p.validate();
  if (c.samples == 0) throw ValidationError("model_cost: no samples");
  if (c.approximated + c.cpu != c.samples)
    throw ValidationError("model_cost: approximated + cpu must equal samples");
  const double n = static_cast<double>(c.samples);
  const double t_sys = static_cast<double>(c.classifier_evaluations) * p.t_cls +
                       static_cast<double>(c.approximated) * p.t_apx + static_cast<double>(c.cpu) * p.t_cpu +
                       static_cast<double>(c.reloads) * p.t_reload;
  const double e_sys = static_cast<double>(c.classifier_evaluations) * p.e_cls +
                       static_cast<double>(c.approximated) * p.e_apx + static_cast<double>(c.cpu) * p.e_cpu +
                       static_cast<double>(c.reloads) * p.e_reload;
  if (!(t_sys > 0.0) || !(e_sys > 0.0)) throw ValidationError("model_cost: zero modelled time or energy");
  return {n * p.t_cpu / t_sys, n * p.e_cpu / e_sys};
}

}  // namespace mcma::runtime
