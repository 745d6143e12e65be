#include "dipole/io.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace dipole {

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_columns_csv(const std::filesystem::path& path, const std::vector<std::string>& headers,
                       const std::vector<std::vector<double>>& columns) {
  if (headers.size() != columns.size() || columns.empty()) throw std::invalid_argument("write_columns_csv: header/column mismatch");
  for (const auto& c : columns)
    if (c.size() != columns.front().size()) throw std::invalid_argument("write_columns_csv: ragged columns");
  std::string out;
  for (std::size_t c = 0; c < headers.size(); ++c) out += (c ? "," : "") + headers[c];
  out += '\n';
  for (std::size_t r = 0; r < columns.front().size(); ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out += ',';
      out += format_number(columns[c][r]);
    }
    out += '\n';
  }
  write_text(path, out);
}

void write_field_csv(const std::filesystem::path& path, const Field& u, std::string_view value_name) {
  std::vector<double> xs(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) xs[i] = u.x(i);
  write_columns_csv(path, {"x", std::string(value_name)}, {xs, u.values});
}

const std::vector<double>& CsvTable::column(std::string_view name) const {
  for (std::size_t c = 0; c < headers.size(); ++c)
    if (headers[c] == name) return columns[c];
  throw std::out_of_range("CSV has no column named " + std::string(name));
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV: " + path.string());
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      t.headers.push_back(cell);
    }
  }
  t.columns.resize(t.headers.size());
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    std::istringstream ls(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(ls, cell, ',')) {
      if (c >= t.columns.size()) throw std::runtime_error(path.string() + ": too many cells on row " + std::to_string(row));
      try {
        t.columns[c].push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::runtime_error(path.string() + ": non-numeric cell on row " + std::to_string(row));
      }
      ++c;
    }
    if (c != t.columns.size()) throw std::runtime_error(path.string() + ": short row " + std::to_string(row));
  }
  return t;
}

Field read_field_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  if (t.columns.size() < 2 || t.columns[0].size() < 2) throw std::runtime_error(path.string() + ": need at least two columns and two rows");
  const auto& xs = t.columns[0];
  const double h = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (std::abs(xs[i] - (xs.front() + h * static_cast<double>(i))) > 1e-9 * h) throw std::runtime_error(path.string() + ": abscissae are not equispaced");
  return Field(Grid(xs.front(), h, xs.size()), t.columns[1]);
}

json grid_to_json(const Grid& g) { return json{{"x_min", g.x_min()}, {"x_max", g.x_max()}, {"h", g.h()}}; }

Grid grid_from_json(const json& j) {
  const double lo = j.at("x_min").get<double>();
  const double hi = j.at("x_max").get<double>();
  const double h = j.at("h").get<double>();
  const double n = (hi - lo) / h;
  if (!(h > 0.0) || std::abs(n - std::round(n)) > 1e-9) throw std::invalid_argument("grid JSON: x_max - x_min is not a multiple of h");
  return Grid(lo, h, static_cast<std::size_t>(std::llround(n)) + 1);
}

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 || EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
    throw std::runtime_error("SHA-256 computation failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_text(path)); }

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

json read_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": invalid JSON: " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace dipole
