#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fsde/grid.hpp"

namespace fsde {

inline constexpr int csv_format_version = 1;

/// Shortest text that reads back to the same double.
std::string format_double(double v);

/// Writes `# fsde_lab csv v1`, a header row, then one row per index.
/// All columns must have the same length.
void write_columns_csv(const std::filesystem::path& file, std::span<const std::string> names,
                       std::span<const std::vector<double>> columns);

/// One path as `t,<value_name>`.
void write_path_csv(const std::filesystem::path& file, const TimeGrid& grid, std::span<const double> values,
                    const std::string& value_name = "x");

/// Parses a file written by write_columns_csv; returns the columns in order.
std::vector<std::vector<double>> read_columns_csv(const std::filesystem::path& file, std::vector<std::string>* names);

/// 64-bit FNV-1a, used to tag manifests with the model they came from.
std::uint64_t fnv1a(const std::string& text);

struct Manifest {
  std::string command;
  std::string method;
  std::string model_json;  // canonical JSON text of the model block
  double dt = 0.0;
  std::size_t n_steps = 0;
  std::uint64_t seed = 0;
  std::size_t n_paths = 0;
  std::vector<std::string> files;

  std::string to_json() const;
};

void write_text(const std::filesystem::path& file, const std::string& text);

}  // namespace fsde
