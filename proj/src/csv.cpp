#include "fsde/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fsde/errors.hpp"

namespace fsde {

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw ContractError("could not format a double");
  return std::string(buf, end);
}

namespace {

std::ofstream open_out(const std::filesystem::path& file) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + file.string() + " for writing");
  return out;
}

}  // namespace

void write_columns_csv(const std::filesystem::path& file, std::span<const std::string> names,
                       std::span<const std::vector<double>> columns) {
  if (names.size() != columns.size()) throw ContractError("column names and columns differ in number");
  if (columns.empty()) throw ContractError("no columns to write");
  const std::size_t rows = columns.front().size();
  for (const auto& c : columns)
    if (c.size() != rows) throw ContractError("CSV columns differ in length");
  auto out = open_out(file);
  out << "# fsde_lab csv v" << csv_format_version << '\n';
  for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << names[j];
  out << '\n';
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) out << (j ? "," : "") << format_double(columns[j][i]);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + file.string());
}

void write_path_csv(const std::filesystem::path& file, const TimeGrid& grid, std::span<const double> values,
                    const std::string& value_name) {
  if (values.size() != grid.size()) throw ContractError("path length does not match the grid");
  const std::vector<std::string> names{"t", value_name};
  const std::vector<std::vector<double>> cols{grid.times(), std::vector<double>(values.begin(), values.end())};
  write_columns_csv(file, names, cols);
}

std::vector<std::vector<double>> read_columns_csv(const std::filesystem::path& file,
                                                  std::vector<std::string>* names) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("# fsde_lab csv v", 0) != 0) throw ContractError(file.string() + ": missing version line");
  if (std::stoi(line.substr(16)) != csv_format_version) throw ContractError(file.string() + ": unsupported version");
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  std::vector<std::vector<double>> cols(header.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t j = 0;
    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end) {
      if (j >= cols.size()) throw ContractError(file.string() + ": row has too many cells");
      double v;
      auto [q, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) throw ContractError(file.string() + ": bad number");
      cols[j++].push_back(v);
      p = (q < end && *q == ',') ? q + 1 : q;
    }
    if (j != cols.size()) throw ContractError(file.string() + ": row has too few cells");
  }
  if (names) *names = std::move(header);
  return cols;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string Manifest::to_json() const {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(model_json)));
  nlohmann::json j;
  j["schema_version"] = csv_format_version;
  j["command"] = command;
  j["method"] = method;
  j["model"] = model_json.empty() ? nlohmann::json(nullptr) : nlohmann::json::parse(model_json);
  j["model_hash"] = hash;
  j["grid"] = {{"dt", dt}, {"n_steps", n_steps}};
  j["seed"] = seed;
  j["n_paths"] = n_paths;
  j["streams"] = {{"first", 0}, {"last", n_paths ? n_paths - 1 : 0}};
  j["files"] = files;
  return j.dump(2);
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  auto out = open_out(file);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
  if (!out) throw std::runtime_error("write failed for " + file.string());
}

}  // namespace fsde
