#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dipole/grid_field.hpp"

namespace dipole {

using json = nlohmann::ordered_json;

/// Shortest-safe decimal form: 17 significant digits.
std::string format_number(double v);

/// CSV with a header row and one row per node.
void write_field_csv(const std::filesystem::path& path, const Field& u, std::string_view value_name = "value");
void write_columns_csv(const std::filesystem::path& path, const std::vector<std::string>& headers,
                       const std::vector<std::vector<double>>& columns);

struct CsvTable {
  std::vector<std::string> headers;
  std::vector<std::vector<double>> columns;

  const std::vector<double>& column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

/// Reads (x, value) columns onto the uniform grid they define; throws if the
/// abscissae are not equispaced. The value column is the second one.
Field read_field_csv(const std::filesystem::path& path);

json grid_to_json(const Grid& g);
Grid grid_from_json(const json& j);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);
json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& j);

}  // namespace dipole
