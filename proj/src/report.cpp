#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "error.hpp"

namespace ideg {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

namespace {

std::string cell_text(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return csv_escape(std::get<std::string>(c));
}

nlohmann::json cell_json(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) {
    if (!std::isfinite(*d)) return format_number(*d);
    return *d;
  }
  if (const auto* i = std::get_if<long long>(&c)) return *i;
  return std::get<std::string>(c);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

std::filesystem::path write_table(const std::filesystem::path& dir, const std::string& stem,
                                  const Table& table, const nlohmann::json& config,
                                  const std::string& format) {
  if (format == "json") {
    nlohmann::json doc;
    doc["config"] = config;
    doc["columns"] = table.columns;
    auto& rows = doc["rows"] = nlohmann::json::array();
    for (const auto& r : table.rows) {
      nlohmann::json row = nlohmann::json::array();
      for (const auto& c : r) row.push_back(cell_json(c));
      rows.push_back(std::move(row));
    }
    const auto path = dir / (stem + ".json");
    write_json(path, doc);
    return path;
  }
  const auto path = dir / (stem + ".csv");
  auto out = open_out(path);
  out << "# config: " << config.dump() << "\r\n";
  for (std::size_t k = 0; k < table.columns.size(); ++k)
    out << (k ? "," : "") << csv_escape(table.columns[k]);
  out << "\r\n";
  for (const auto& r : table.rows) {
    for (std::size_t k = 0; k < r.size(); ++k) out << (k ? "," : "") << cell_text(r[k]);
    out << "\r\n";
  }
  if (!out) throw IoError("write failed: " + path.string());
  return path;
}

Table field_table(const Field& f) {
  Table t{{"t", "x", "value"}, {}};
  const auto& g = f.grid();
  t.rows.reserve(static_cast<std::size_t>(g.M() + 1) * static_cast<std::size_t>(g.N() + 1));
  for (int j = 0; j <= g.M(); ++j)
    for (int i = 0; i <= g.N(); ++i) t.add({g.t(j), g.x(i), f(j, i)});
  return t;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  auto out = open_out(path);
  out << doc.dump(2) << "\n";
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace ideg
