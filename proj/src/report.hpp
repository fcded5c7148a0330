#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "grid.hpp"

namespace ideg {

using Cell = std::variant<double, long long, std::string>;

/// Column-labelled rows, written as CSV or JSON.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) { rows.push_back(std::move(row)); }
};

/// 17 significant digits, "." separator; nan / inf / -inf spelled out.
std::string format_number(double v);

/// RFC-4180 quoting when the text holds a comma, quote or line break.
std::string csv_escape(const std::string& s);

/// Writes `stem`.csv (or `stem`.json when format == "json") into `dir`. CSV files open with
/// one "# config: <json>" provenance line followed by the header row; JSON files carry the
/// config under "config". Returns the written path. Throws IoError.
std::filesystem::path write_table(const std::filesystem::path& dir, const std::string& stem,
                                  const Table& table, const nlohmann::json& config,
                                  const std::string& format);

/// Field export with columns t, x, value.
Table field_table(const Field& f);

/// Writes pretty-printed JSON. Throws IoError.
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace ideg
