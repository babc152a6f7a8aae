#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "mcma/bench.hpp"
#include "mcma/seed.hpp"
#include "mcma/text.hpp"

namespace mcma::bench {

Dataset generate_dataset(const Benchmark& benchmark, std::size_t n_samples, std::uint64_t seed,
                         double train_fraction) {
  benchmark.validate();
  if (n_samples < kMinDatasetSize)
    throw ValidationError(fmt::format("n_samples must be at least {}, got {}", kMinDatasetSize, n_samples));
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ValidationError("train_fraction must lie in (0, 1)");

  Dataset ds;
  ds.benchmark = benchmark.name;
  ds.seed = seed;
  ds.train_fraction = train_fraction;
  ds.inputs = Matrix(0, benchmark.input_dim);
  ds.outputs = Matrix(0, benchmark.output_dim);

  std::mt19937_64 rng(seed);
  std::vector<double> x(benchmark.input_dim);
  for (std::size_t s = 0; s < n_samples; ++s) {
    for (std::size_t d = 0; d < benchmark.input_dim; ++d) {
      const InputRange& r = benchmark.input_ranges[d];
      if (r.integral) {
        const auto lo = static_cast<long long>(r.lo);
        const auto span = static_cast<std::uint64_t>(static_cast<long long>(r.hi) - lo + 1);
        x[d] = static_cast<double>(lo + static_cast<long long>(rng() % span));
      } else {
        x[d] = r.lo + unit_double(rng()) * (r.hi - r.lo);
      }
    }
    ds.inputs.append_row(x);
    ds.outputs.append_row(evaluate_exact(benchmark, x));
  }

  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n_samples)));
  if (n_train == 0 || n_train == n_samples)
    throw ValidationError("train_fraction leaves one of the splits empty");
  for (std::size_t i = 0; i < n_samples; ++i) (i < n_train ? ds.train : ds.test).push_back(i);
  return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream csv(dir / "dataset.csv", std::ios::binary);
    if (!csv) throw IoError(fmt::format("cannot write {}", (dir / "dataset.csv").string()));
    std::vector<std::string> header;
    for (std::size_t d = 0; d < ds.inputs.cols(); ++d) header.push_back(fmt::format("x{}", d));
    for (std::size_t d = 0; d < ds.outputs.cols(); ++d) header.push_back(fmt::format("y{}", d));
    csv << fmt::format("{}\n", fmt::join(header, ","));
    for (std::size_t i = 0; i < ds.size(); ++i)
      csv << text::join_doubles(ds.inputs.row(i)) << ',' << text::join_doubles(ds.outputs.row(i)) << '\n';
  }
  boost::property_tree::ptree meta;
  meta.put("format", "mcma-dataset 1");
  meta.put("benchmark", ds.benchmark);
  meta.put("seed", std::to_string(ds.seed));
  meta.put("n_samples", std::to_string(ds.size()));
  meta.put("train_fraction", text::format_double(ds.train_fraction));
  meta.put("input_dim", std::to_string(ds.inputs.cols()));
  meta.put("output_dim", std::to_string(ds.outputs.cols()));
  meta.put("train", text::join_indices(ds.train));
  meta.put("test", text::join_indices(ds.test));
  text::write_ini(dir / "dataset.meta", meta);
}

Dataset load_dataset(const std::filesystem::path& dir) {
  const auto meta_path = dir / "dataset.meta";
  const auto csv_path = dir / "dataset.csv";
  if (!std::filesystem::exists(csv_path))
    throw NotFoundError(fmt::format("dataset not found: expected {}", csv_path.string()));
  const auto meta = text::read_ini(meta_path);

  Dataset ds;
  ds.benchmark = text::require(meta, "benchmark");
  ds.seed = std::stoull(text::require(meta, "seed"));
  ds.train_fraction = text::parse_double(text::require(meta, "train_fraction"));
  const std::size_t n = text::parse_index(text::require(meta, "n_samples"));
  const std::size_t in_dim = text::parse_index(text::require(meta, "input_dim"));
  const std::size_t out_dim = text::parse_index(text::require(meta, "output_dim"));
  ds.train = text::parse_indices(meta.get<std::string>("train", ""));
  ds.test = text::parse_indices(meta.get<std::string>("test", ""));

  std::ifstream csv(csv_path, std::ios::binary);
  std::string line;
  if (!std::getline(csv, line)) throw IoError(fmt::format("{} is empty", csv_path.string()));
  if (text::split(line, ',').size() != in_dim + out_dim)
    throw IoError(fmt::format("{}: header does not match dimensions", csv_path.string()));
  ds.inputs = Matrix(0, in_dim);
  ds.outputs = Matrix(0, out_dim);
  std::vector<double> x(in_dim), y(out_dim);
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    auto cells = text::split(line, ',');
    if (cells.size() != in_dim + out_dim)
      throw IoError(fmt::format("{}: row {} has {} cells", csv_path.string(), ds.size() + 1, cells.size()));
    for (std::size_t d = 0; d < in_dim; ++d) x[d] = text::parse_double(cells[d]);
    for (std::size_t d = 0; d < out_dim; ++d) y[d] = text::parse_double(cells[in_dim + d]);
    ds.inputs.append_row(x);
    ds.outputs.append_row(y);
  }
  if (ds.size() != n) throw IoError(fmt::format("{}: expected {} rows, found {}", csv_path.string(), n, ds.size()));

  std::vector<int> seen(n, 0);
  for (auto* split : {&ds.train, &ds.test})
    for (std::size_t i : *split) {
      if (i >= n || seen[i]++) throw IoError("dataset split indices are not a partition");
    }
  for (int s : seen)
    if (!s) throw IoError("dataset split indices do not cover every sample");
  return ds;
}

}  // namespace mcma::bench
