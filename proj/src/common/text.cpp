#include <charconv>
#include <fstream>

#include <boost/property_tree/ini_parser.hpp>
#include <fmt/format.h>

#include "mcma/error.hpp"
#include "mcma/text.hpp"

namespace mcma::text {

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

std::string join_doubles(std::span<const double> values, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += sep;
    out += format_double(values[i]);
  }
  return out;
}

std::string join_indices(std::span<const std::size_t> values, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(values[i]);
  }
  return out;
}

double parse_double(std::string_view token) {
  while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
  while (!token.empty() && (token.back() == ' ' || token.back() == '\r')) token.remove_suffix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size() || token.empty())
    throw IoError(fmt::format("not a number: '{}'", token));
  return v;
}

std::size_t parse_index(std::string_view token) {
  while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
  while (!token.empty() && (token.back() == ' ' || token.back() == '\r')) token.remove_suffix(1);
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size() || token.empty())
    throw IoError(fmt::format("not a non-negative integer: '{}'", token));
  return v;
}

std::vector<std::size_t> parse_indices(std::string_view text) {
  std::vector<std::size_t> out;
  for (const std::string& tok : split(text, ' '))
    if (!tok.empty()) out.push_back(parse_index(tok));
  return out;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = text.find(sep, start);
    out.emplace_back(text.substr(start, pos == std::string_view::npos ? text.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

boost::property_tree::ptree read_ini(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw NotFoundError(fmt::format("file not found: {}", path.string()));
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw IoError(fmt::format("{}: {}", path.string(), e.message()));
  }
  return tree;
}

void write_ini(const std::filesystem::path& path, const boost::property_tree::ptree& tree) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(fmt::format("cannot write {}", path.string()));
  boost::property_tree::write_ini(os, tree);
  if (!os) throw IoError(fmt::format("failed writing {}", path.string()));
}

std::string require(const boost::property_tree::ptree& tree, const std::string& key) {
  auto v = tree.get_optional<std::string>(key);
  if (!v) throw IoError(fmt::format("missing key '{}'", key));
  return *v;
}

}  // namespace mcma::text
