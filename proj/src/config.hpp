#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "coefficients.hpp"
#include "control.hpp"
#include "inequalities.hpp"
#include "solvers.hpp"
#include "weights.hpp"

namespace ideg {

/// Resolved run configuration: built-in defaults, then the config file, then `--set`
/// overrides, then the `--out` / `--seed` flags. Every accessor throws ConfigError naming
/// the dotted key at fault.
class RunConfig {
 public:
  /// `overrides` are "dotted.key=value" strings; the value is parsed as JSON when possible
  /// and kept as a string otherwise.
  static RunConfig load(const std::optional<std::filesystem::path>& config_path,
                        const std::vector<std::string>& overrides,
                        const std::optional<std::string>& out_dir = std::nullopt,
                        const std::optional<std::uint64_t>& seed = std::nullopt);
  /// Same as load() with the config document given as JSON text (empty for defaults only).
  static RunConfig from_json_text(const std::string& text, const std::vector<std::string>& overrides,
                                  const std::optional<std::string>& out_dir = std::nullopt,
                                  const std::optional<std::uint64_t>& seed = std::nullopt);

  const nlohmann::json& document() const noexcept { return doc_; }

  double number(const std::string& key) const;
  int integer(const std::string& key) const;
  std::string text(const std::string& key) const;
  bool has_value(const std::string& key) const;

  CoefficientModel coefficient() const;
  /// Weight data with c2 resolved (explicit weight.c2, or (1 + c2_margin) c2_min) and
  /// T = weight.T; s is left at 1.
  WeightParams weight(const CoefficientModel& model) const;
  /// Space grid from grid.N / grid.M with horizon T.
  SpaceTimeGrid grid(const CoefficientModel& model, double T) const;
  PotentialModel potential() const;
  ControlConfig control() const;
  std::vector<double> s_list() const;
  ObservabilitySampleSpec observability_spec() const;
  std::uint64_t seed() const;
  std::filesystem::path out_dir() const;

 private:
  explicit RunConfig(nlohmann::json doc) : doc_(std::move(doc)) {}
  static RunConfig build(const std::string& text, const std::vector<std::string>& overrides,
                         const std::optional<std::string>& out_dir,
                         const std::optional<std::uint64_t>& seed,
                         const std::filesystem::path& base_dir);
  void validate() const;
  const nlohmann::json& at(const std::string& key) const;

  nlohmann::json doc_;
};

/// Built-in defaults (every recognised key).
const nlohmann::json& default_config();

/// Parses the CSV table (x, a, a_prime columns, optional header) used by tabulated models.
Tabulated read_table(const std::filesystem::path& path);

}  // namespace ideg
