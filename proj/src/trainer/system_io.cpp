#include <fstream>

#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "mcma/text.hpp"
#include "mcma/trainer.hpp"

namespace mcma::trainer {
namespace {

constexpr const char* kLogHeader =
    "stage,round,subset_size,safe_fraction,invocation,rmse_normalized,subset_rmse_normalized,note";

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void save_system(const TrainedSystem& sys, const std::filesystem::path& dir) {
  sys.validate();
  std::filesystem::create_directories(dir);

  boost::property_tree::ptree manifest;
  manifest.put("system.format", "mcma-system 1");
  manifest.put("system.architecture", std::string(to_string(sys.architecture)));
  manifest.put("system.allocation", std::string(to_string(sys.allocation)));
  manifest.put("system.benchmark", sys.benchmark);
  manifest.put("system.error_bound", text::format_double(sys.error_bound));
  manifest.put("system.n_approximators", std::to_string(sys.approximators.size()));
  manifest.put("system.n_classifiers", std::to_string(sys.classifiers.size()));
  manifest.put("system.training_rounds", std::to_string(sys.training_log.size()));
  boost::property_tree::ptree config;
  put_config(config, sys.config);
  manifest.add_child("config", config);
  boost::property_tree::ptree warnings;
  for (std::size_t i = 0; i < sys.warnings.size(); ++i) warnings.put(fmt::format("w{}", i), sys.warnings[i]);
  manifest.add_child("warnings", warnings);
  text::write_ini(dir / "manifest.ini", manifest);

  {
    std::ofstream log(dir / "training_log.csv", std::ios::binary);
    if (!log) throw IoError(fmt::format("cannot write {}", (dir / "training_log.csv").string()));
    log << kLogHeader << '\n';
    for (const RoundLog& r : sys.training_log)
      log << r.stage << ',' << r.round << ',' << r.subset_size << ',' << text::format_double(r.safe_fraction) << ','
          << text::format_double(r.invocation) << ',' << text::format_double(r.rmse_normalized) << ','
          << text::format_double(r.subset_rmse_normalized) << ',' << csv_escape(r.note) << '\n';
  }

  for (std::size_t k = 0; k < sys.approximators.size(); ++k)
    nn::save_mlp(dir / fmt::format("approximator_{}.mlp", k + 1), sys.approximators[k]);
  for (std::size_t k = 0; k < sys.classifiers.size(); ++k)
    nn::save_mlp(dir / fmt::format("classifier_{}.mlp", k + 1), sys.classifiers[k]);
}

TrainedSystem load_system(const std::filesystem::path& dir) {
  if (!std::filesystem::exists(dir / "manifest.ini"))
    throw NotFoundError(fmt::format("no trained system at {} (missing manifest.ini)", dir.string()));
  const auto manifest = text::read_ini(dir / "manifest.ini");
  if (text::require(manifest, "system.format") != "mcma-system 1")
    throw IoError(fmt::format("{}: unsupported system format", dir.string()));

  TrainedSystem sys;
  try {
    sys.architecture = parse_architecture(text::require(manifest, "system.architecture"));
    sys.allocation = parse_allocation(text::require(manifest, "system.allocation"));
    sys.config = get_config(manifest.get_child("config"));
  } catch (const ValidationError& e) {
    throw IoError(fmt::format("{}: {}", dir.string(), e.what()));
  }
  sys.benchmark = text::require(manifest, "system.benchmark");
  sys.error_bound = text::parse_double(text::require(manifest, "system.error_bound"));
  const std::size_t n_a = text::parse_index(text::require(manifest, "system.n_approximators"));
  const std::size_t n_c = text::parse_index(text::require(manifest, "system.n_classifiers"));
  if (auto w = manifest.get_child_optional("warnings"))
    for (const auto& kv : *w) sys.warnings.push_back(kv.second.data());

  for (std::size_t k = 1; k <= n_a; ++k)
    sys.approximators.push_back(nn::load_mlp(dir / fmt::format("approximator_{}.mlp", k)));
  for (std::size_t k = 1; k <= n_c; ++k)
    sys.classifiers.push_back(nn::load_mlp(dir / fmt::format("classifier_{}.mlp", k)));

  std::ifstream log(dir / "training_log.csv");
  if (!log) throw NotFoundError(fmt::format("missing {}", (dir / "training_log.csv").string()));
  std::string line;
  std::getline(log, line);
  if (line != kLogHeader) throw IoError("training_log.csv: unexpected header");
  while (std::getline(log, line)) {
    if (line.empty()) continue;
    // The note is last and may itself contain commas inside quotes.
    auto cells = text::split(line, ',');
    if (cells.size() < 8) throw IoError("training_log.csv: short row");
    RoundLog r;
    r.stage = text::parse_index(cells[0]);
    r.round = text::parse_index(cells[1]);
    r.subset_size = text::parse_index(cells[2]);
    r.safe_fraction = text::parse_double(cells[3]);
    r.invocation = text::parse_double(cells[4]);
    r.rmse_normalized = text::parse_double(cells[5]);
    r.subset_rmse_normalized = text::parse_double(cells[6]);
    std::size_t pos = 0;
    for (int i = 0; i < 7; ++i) pos = line.find(',', pos) + 1;
    std::string note = line.substr(pos);
    if (note.size() >= 2 && note.front() == '"') {
      std::string un;
      for (std::size_t i = 1; i + 1 < note.size(); ++i) {
        if (note[i] == '"' && note[i + 1] == '"') ++i;
        un += note[i];
      }
      note = un;
    }
    r.note = note;
    sys.training_log.push_back(std::move(r));
  }
  try {
    sys.validate();
  } catch (const ValidationError& e) {
    throw IoError(fmt::format("{}: {}", dir.string(), e.what()));
  }
  return sys;
}

}  // namespace mcma::trainer
