#pragma once

// Small helpers shared by the plain-text file formats.

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ptree.hpp>

namespace mcma::text {

// 17 significant digits, exact on round trip.
std::string format_double(double v);

std::string join_doubles(std::span<const double> values, std::string_view sep = ",");
std::string join_indices(std::span<const std::size_t> values, std::string_view sep = " ");

double parse_double(std::string_view token);
std::size_t parse_index(std::string_view token);
std::vector<std::size_t> parse_indices(std::string_view text);
std::vector<std::string> split(std::string_view text, char sep);

// INI files via boost::property_tree, with IoError/NotFoundError mapping.
boost::property_tree::ptree read_ini(const std::filesystem::path& path);
void write_ini(const std::filesystem::path& path, const boost::property_tree::ptree& tree);
std::string require(const boost::property_tree::ptree& tree, const std::string& key);

}  // namespace mcma::text
