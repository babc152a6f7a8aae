// Model file layout (text, one token group per line):
//
//   mcma-mlp 1
//   topology 6->8->1
//   hidden_activation sigmoid
//   output_activation linear
//   seed 7
//   layer 0 6 8
//   w <fan_out values>        repeated fan_in times (row-major)
//   b <fan_out values>
//   ...                       one block per layer
//   end
//
// Values are printed with 17 significant digits so a save/load cycle is exact.

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "mcma/nncore.hpp"

namespace mcma::nn {
namespace {

constexpr const char* kMagic = "mcma-mlp";
constexpr int kVersion = 1;

void write_row(std::ostream& os, char tag, const double* values, std::size_t n) {
  os << tag;
  for (std::size_t j = 0; j < n; ++j) os << ' ' << fmt::format("{:.17g}", values[j]);
  os << '\n';
}

std::string expect_line(std::istream& is, std::string_view key) {
  std::string line;
  if (!std::getline(is, line)) throw IoError(fmt::format("model file truncated before '{}'", key));
  if (line.rfind(key, 0) != 0 || line.size() <= key.size() || line[key.size()] != ' ')
    throw IoError(fmt::format("model file: expected '{}', got '{}'", key, line));
  return line.substr(key.size() + 1);
}

std::vector<double> read_row(std::istream& is, char tag, std::size_t n) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("model file truncated inside a layer");
  std::istringstream ss(line);
  char got = 0;
  ss >> got;
  if (got != tag) throw IoError(fmt::format("model file: expected '{}' row", tag));
  std::vector<double> values(n);
  for (double& v : values) {
    std::string token;
    if (!(ss >> token)) throw IoError("model file: row too short");
    try {
      v = std::stod(token);
    } catch (const std::exception&) {
      throw IoError(fmt::format("model file: bad number '{}'", token));
    }
  }
  std::string extra;
  if (ss >> extra) throw IoError("model file: row too long");
  return values;
}

}  // namespace

void write_mlp(std::ostream& os, const Mlp& mlp) {
  const Topology& t = mlp.topology();
  os << kMagic << ' ' << kVersion << '\n';
  os << "topology " << t.shape_string() << '\n';
  os << "hidden_activation " << to_string(t.hidden_activation) << '\n';
  os << "output_activation " << to_string(t.output_activation) << '\n';
  os << "seed " << mlp.seed() << '\n';
  for (std::size_t l = 0; l < mlp.layers().size(); ++l) {
    const Layer& layer = mlp.layers()[l];
    os << "layer " << l << ' ' << layer.fan_in << ' ' << layer.fan_out << '\n';
    for (std::size_t i = 0; i < layer.fan_in; ++i)
      write_row(os, 'w', &layer.weights[i * layer.fan_out], layer.fan_out);
    write_row(os, 'b', layer.biases.data(), layer.fan_out);
  }
  os << "end\n";
}

Mlp read_mlp(std::istream& is) {
  std::string header = expect_line(is, kMagic);
  if (header != std::to_string(kVersion))
    throw IoError(fmt::format("unsupported model format version '{}'", header));

  Topology t;
  try {
    t.layer_sizes = Topology::parse_shape(expect_line(is, "topology"));
    t.hidden_activation = parse_activation(expect_line(is, "hidden_activation"));
    t.output_activation = parse_activation(expect_line(is, "output_activation"));
  } catch (const ValidationError& e) {
    throw IoError(fmt::format("model file: {}", e.what()));
  }
  const std::uint64_t seed = std::stoull(expect_line(is, "seed"));

  std::vector<Layer> layers;
  for (std::size_t l = 0; l + 1 < t.layer_sizes.size(); ++l) {
    std::istringstream ss(expect_line(is, "layer"));
    std::size_t index = 0, fan_in = 0, fan_out = 0;
    if (!(ss >> index >> fan_in >> fan_out) || index != l || fan_in != t.layer_sizes[l] ||
        fan_out != t.layer_sizes[l + 1])
      throw IoError(fmt::format("model file: layer {} header does not match topology", l));
    Layer layer(fan_in, fan_out);
    for (std::size_t i = 0; i < fan_in; ++i) {
      std::vector<double> row = read_row(is, 'w', fan_out);
      std::copy(row.begin(), row.end(), layer.weights.begin() + static_cast<long>(i * fan_out));
    }
    layer.biases = read_row(is, 'b', fan_out);
    layers.push_back(std::move(layer));
  }
  std::string tail;
  if (!std::getline(is, tail) || tail != "end") throw IoError("model file: missing 'end'");
  try {
    return Mlp(std::move(t), std::move(layers), seed);
  } catch (const ValidationError& e) {
    throw IoError(fmt::format("model file: {}", e.what()));
  }
}

void save_mlp(const std::filesystem::path& path, const Mlp& mlp) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(fmt::format("cannot write model file {}", path.string()));
  write_mlp(os, mlp);
  if (!os) throw IoError(fmt::format("failed writing model file {}", path.string()));
}

Mlp load_mlp(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw NotFoundError(fmt::format("model file not found: {}", path.string()));
  return read_mlp(is);
}

}  // namespace mcma::nn
