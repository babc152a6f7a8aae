#include <fstream>

#include <fmt/format.h>

#include "mcma/quality.hpp"
#include "mcma/text.hpp"

namespace mcma::quality {

void write_verdicts(const std::filesystem::path& path, std::span<const SampleVerdict> verdicts,
                    const Matrix& inputs, const Matrix& outputs) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(fmt::format("cannot write {}", path.string()));
  const std::size_t n_approx = verdicts.empty() ? 0 : verdicts.front().per_approx_error.size();

  os << "sample_index";
  for (std::size_t d = 0; d < inputs.cols(); ++d) os << ",x" << d;
  for (std::size_t d = 0; d < outputs.cols(); ++d) os << ",y" << d;
  for (std::size_t k = 1; k <= n_approx; ++k) os << ",err" << k;
  os << ",assigned_label,classifier_prediction,confusion\n";

  for (const SampleVerdict& v : verdicts) {
    if (v.sample_index >= inputs.rows()) throw ValidationError("verdict sample index out of range");
    os << v.sample_index << ',' << text::join_doubles(inputs.row(v.sample_index)) << ','
       << text::join_doubles(outputs.row(v.sample_index));
    for (double e : v.per_approx_error) os << ',' << text::format_double(e);
    os << ',' << v.assigned_label << ',' << v.classifier_prediction << ',' << to_string(v.confusion) << '\n';
  }
  if (!os) throw IoError(fmt::format("failed writing {}", path.string()));
}

}  // namespace mcma::quality
