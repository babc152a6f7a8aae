#include <algorithm>
#include <filesystem>
#include <string>

#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "mcma/cli.hpp"
#include "mcma/seed.hpp"
#include "mcma/text.hpp"

namespace mcma::cli {

namespace pt = boost::property_tree;

std::string_view to_string(Pipeline p) {
  switch (p) {
    case Pipeline::one_pass: return "one_pass";
    case Pipeline::iterative: return "iterative";
    case Pipeline::mcca: return "mcca";
    case Pipeline::mcma_complementary: return "mcma_complementary";
    case Pipeline::mcma_competitive: return "mcma_competitive";
  }
  return "?";
}

Pipeline parse_pipeline(std::string_view name) {
  for (Pipeline p : {Pipeline::one_pass, Pipeline::iterative, Pipeline::mcca, Pipeline::mcma_complementary,
                     Pipeline::mcma_competitive})
    if (name == to_string(p)) return p;
  throw ValidationError(fmt::format(
      "unknown pipeline '{}' (one_pass, iterative, mcca, mcma_complementary, mcma_competitive)", name));
}

trainer::Architecture architecture_of(Pipeline p) {
  switch (p) {
    case Pipeline::one_pass: return trainer::Architecture::one_pass;
    case Pipeline::iterative: return trainer::Architecture::iterative;
    case Pipeline::mcca: return trainer::Architecture::mcca;
    case Pipeline::mcma_complementary:
    case Pipeline::mcma_competitive: return trainer::Architecture::mcma;
  }
  return trainer::Architecture::one_pass;
}

trainer::Allocation allocation_of(Pipeline p) {
  return p == Pipeline::mcma_competitive ? trainer::Allocation::competitive : trainer::Allocation::complementary;
}

std::uint64_t RunConfig::dataset_seed() const { return derive_seed(seed, "dataset"); }
std::uint64_t RunConfig::trainer_seed() const { return derive_seed(seed, "trainer"); }

namespace {

nn::Topology override_shape(const nn::Topology& base, const std::string& shape, const char* role,
                            const bench::Benchmark& bm, std::size_t outputs) {
  nn::Topology t = base;
  t.layer_sizes = nn::Topology::parse_shape(shape);
  t.validate();
  if (t.input_size() != bm.input_dim || t.output_size() != outputs)
    throw ValidationError(fmt::format("{} topology {} must map {} inputs to {} outputs", role, shape,
                                      bm.input_dim, outputs));
  return t;
}

}  // namespace

bench::Benchmark RunConfig::resolved_benchmark() const {
  if (benchmark.empty()) throw UsageError("no benchmark given (--benchmark)");
  bench::Benchmark bm = bench::find_benchmark(benchmark);
  if (error_bound) {
    if (!(*error_bound > 0.0)) throw ValidationError("error bound must be positive");
    bm.error_bound = *error_bound;
  }
  if (approximator_topology)
    bm.approximator_topology =
        override_shape(bm.approximator_topology, *approximator_topology, "approximator", bm, bm.output_dim);
  if (classifier_topology)
    bm.classifier_topology = override_shape(bm.classifier_topology, *classifier_topology, "classifier", bm, 2);
  bm.validate();
  return bm;
}

trainer::PipelineConfig RunConfig::resolved_trainer(Pipeline p) const {
  trainer::PipelineConfig c = trainer;
  c.seed = trainer_seed();
  c.allocation = allocation_of(p);
  c.validate();
  return c;
}

namespace {

pt::ptree trainer_tree(const trainer::PipelineConfig& c) {
  pt::ptree t;
  trainer::put_config(t, c);
  // Derived from the root seed and the pipeline respectively.
  t.erase("seed");
  t.erase("allocation");
  return t;
}

pt::ptree runtime_tree(const runtime::CostModelParams& c) {
  pt::ptree t;
  t.put("t_cpu", text::format_double(c.t_cpu));
  t.put("t_apx", text::format_double(c.t_apx));
  t.put("t_cls", text::format_double(c.t_cls));
  t.put("t_reload", text::format_double(c.t_reload));
  t.put("e_cpu", text::format_double(c.e_cpu));
  t.put("e_apx", text::format_double(c.e_apx));
  t.put("e_cls", text::format_double(c.e_cls));
  t.put("e_reload", text::format_double(c.e_reload));
  t.put("buffer_case", std::string(runtime::to_string(c.buffer_case)));
  return t;
}

std::string join_pipelines(const std::vector<Pipeline>& ps) {
  std::string s;
  for (Pipeline p : ps) {
    if (!s.empty()) s += ' ';
    s += to_string(p);
  }
  return s;
}

// Values in config files may be separated by spaces or commas.
std::vector<std::string> list_tokens(const std::string& value) {
  std::string v = value;
  std::replace(v.begin(), v.end(), ',', ' ');
  std::vector<std::string> out;
  for (const std::string& tok : text::split(v, ' '))
    if (!tok.empty()) out.push_back(tok);
  return out;
}

void check_keys(const pt::ptree& section, const pt::ptree& known, const std::string& name) {
  for (const auto& [key, value] : section)
    if (!known.get_child_optional(pt::ptree::path_type(key, '\0')))
      throw ValidationError(fmt::format("config: unknown key '{}' in [{}]", key, name));
}

}  // namespace

void apply_config_tree(RunConfig& c, const pt::ptree& tree) {
  static const char* kSections[] = {"run", "bench", "trainer", "runtime"};
  for (const auto& [name, section] : tree) {
    if (std::find(std::begin(kSections), std::end(kSections), name) == std::end(kSections))
      throw ValidationError(fmt::format("config: unknown section [{}]", name));
    (void)section;
  }

  try {
    if (auto run = tree.get_child_optional("run")) {
      pt::ptree known;
      for (const char* k : {"command", "tool_version", "benchmark", "pipeline", "n_samples", "seed",
                            "train_fraction", "bounds", "pipelines", "data", "system", "out"})
        known.put(k, "");
      check_keys(*run, known, "run");
      for (const auto& [key, node] : *run) {
        const std::string v = node.data();
        if (key == "benchmark") c.benchmark = v;
        else if (key == "pipeline") c.pipeline = parse_pipeline(v);
        else if (key == "n_samples") c.n_samples = text::parse_index(v);
        else if (key == "seed") c.seed = std::stoull(v);
        else if (key == "train_fraction") c.train_fraction = text::parse_double(v);
        else if (key == "bounds") {
          c.bounds.clear();
          for (const std::string& tok : list_tokens(v)) c.bounds.push_back(text::parse_double(tok));
        } else if (key == "pipelines") {
          c.pipelines.clear();
          for (const std::string& tok : list_tokens(v)) c.pipelines.push_back(parse_pipeline(tok));
        } else if (key == "data") c.data_dir = v;
        else if (key == "system") c.system_dir = v;
        else if (key == "out") c.out_dir = v;
      }
    }
    if (auto b = tree.get_child_optional("bench")) {
      pt::ptree known;
      for (const char* k : {"error_bound", "approximator_topology", "classifier_topology"}) known.put(k, "");
      check_keys(*b, known, "bench");
      if (auto v = b->get_optional<std::string>("error_bound")) c.error_bound = text::parse_double(*v);
      if (auto v = b->get_optional<std::string>("approximator_topology")) c.approximator_topology = *v;
      if (auto v = b->get_optional<std::string>("classifier_topology")) c.classifier_topology = *v;
    }
    if (auto t = tree.get_child_optional("trainer")) {
      pt::ptree merged = trainer_tree(c.trainer);
      check_keys(*t, merged, "trainer");
      for (const auto& [key, node] : *t) merged.put(key, node.data());
      merged.put("seed", std::to_string(c.trainer.seed));
      merged.put("allocation", std::string(trainer::to_string(c.trainer.allocation)));
      c.trainer = trainer::get_config(merged);
    }
    if (auto r = tree.get_child_optional("runtime")) {
      pt::ptree merged = runtime_tree(c.cost);
      check_keys(*r, merged, "runtime");
      for (const auto& [key, node] : *r) merged.put(key, node.data());
      c.cost.t_cpu = text::parse_double(merged.get<std::string>("t_cpu"));
      c.cost.t_apx = text::parse_double(merged.get<std::string>("t_apx"));
      c.cost.t_cls = text::parse_double(merged.get<std::string>("t_cls"));
      c.cost.t_reload = text::parse_double(merged.get<std::string>("t_reload"));
      c.cost.e_cpu = text::parse_double(merged.get<std::string>("e_cpu"));
      c.cost.e_apx = text::parse_double(merged.get<std::string>("e_apx"));
      c.cost.e_cls = text::parse_double(merged.get<std::string>("e_cls"));
      c.cost.e_reload = text::parse_double(merged.get<std::string>("e_reload"));
      c.cost.buffer_case = runtime::parse_buffer_case(merged.get<std::string>("buffer_case"));
    }
  } catch (const IoError& e) {
    throw ValidationError(fmt::format("config: {}", e.what()));
  } catch (const std::logic_error& e) {  // std::stoull
    throw ValidationError(fmt::format("config: bad integer ({})", e.what()));
  }
}

void apply_config_file(RunConfig& c, const std::filesystem::path& path) {
  apply_config_tree(c, text::read_ini(path));
}

pt::ptree manifest_tree(const RunConfig& c) {
  pt::ptree t;
  pt::ptree run;
  run.put("command", c.command);
  run.put("tool_version", std::string(kToolVersion));
  run.put("benchmark", c.benchmark);
  run.put("pipeline", std::string(to_string(c.pipeline)));
  run.put("n_samples", std::to_string(c.n_samples));
  run.put("seed", std::to_string(c.seed));
  run.put("train_fraction", text::format_double(c.train_fraction));
  run.put("bounds", text::join_doubles(c.bounds, " "));
  run.put("pipelines", join_pipelines(c.pipelines));
  run.put("data", c.data_dir.string());
  run.put("system", c.system_dir.string());
  run.put("out", c.out_dir.string());
  t.add_child("run", run);

  pt::ptree b;
  if (!c.benchmark.empty()) {
    const bench::Benchmark bm = c.resolved_benchmark();
    b.put("error_bound", text::format_double(bm.error_bound));
    b.put("approximator_topology", bm.approximator_topology.shape_string());
    b.put("classifier_topology", bm.classifier_topology.shape_string());
  }
  t.add_child("bench", b);
  t.add_child("trainer", trainer_tree(c.trainer));
  t.add_child("runtime", runtime_tree(c.cost));
  return t;
}

void write_manifest(const std::filesystem::path& dir, const RunConfig& c) {
  text::write_ini(dir / "run.ini", manifest_tree(c));
}

void prepare_output_dir(const std::filesystem::path& dir, bool force) {
  if (dir.empty()) throw UsageError("no output directory given (--out)");
  namespace fs = std::filesystem;
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) throw ValidationError(fmt::format("{} exists and is not a directory", dir.string()));
    if (!fs::is_empty(dir) && !force)
      throw ValidationError(fmt::format("{} is not empty; pass --force to overwrite", dir.string()));
  }
  fs::create_directories(dir);
}

}  // namespace mcma::cli
