#include "config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "error.hpp"

namespace ideg {

using nlohmann::json;

const json& default_config() {
  static const json defaults = json::parse(R"({
    "coefficient": {"kind": "power_law", "alpha": null, "x0": null, "table_path": null,
                    "K": null, "theta": null, "value": 1.0},
    "weight": {"c1": 1.0, "c2": null, "c2_margin": 0.1, "T": 2.0},
    "grid": {"N": 200, "M": 400},
    "potential": {"kind": "zero", "value": 0.0},
    "control": {"omega_lo": 0.2, "omega_hi": 0.5, "epsilon": 0.0, "tol": 0.01,
                "max_iters": 500, "u0": "parabola", "T": 0.5},
    "hp": {"q": 1.5, "p": "distance_power", "N": 1000, "battery_size": 50},
    "carleman": {"s_start": 1.0, "ratio": 1.5, "count": 10, "time_exponent": 1,
                 "compare_potential": 1.0},
    "caccioppoli": {"omega_prime_lo": 0.35, "omega_prime_hi": 0.45, "s_count": 4},
    "observability": {"modes": 10, "random": 10, "power_iters": 20},
    "identity": {"time_exponent": 7, "s_values": [1.0, 10.0]},
    "run": {"seed": 0, "out_dir": "out", "format": "csv"}
  })");
  return defaults;
}

namespace {

json::json_pointer pointer(const std::string& key) {
  std::string p;
  std::stringstream ss(key);
  std::string part;
  while (std::getline(ss, part, '.')) p += "/" + part;
  return json::json_pointer(p);
}

// Rejects keys the defaults do not know; merges `src` into `dst`.
void merge(json& dst, const json& src, const std::string& prefix) {
  if (!src.is_object()) throw ConfigError(prefix.empty() ? "<root>" : prefix, "expected an object");
  for (auto it = src.begin(); it != src.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!dst.contains(it.key())) throw ConfigError(key, "unknown configuration key");
    json& slot = dst[it.key()];
    if (slot.is_object())
      merge(slot, it.value(), key);
    else
      slot = it.value();
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError(assignment, "override must have the form key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  const auto ptr = pointer(key);
  if (!default_config().contains(ptr) || default_config().at(ptr).is_object())
    throw ConfigError(key, "unknown configuration key");
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  doc[ptr] = value;
}

std::string require_text(const json& v, const std::string& key) {
  if (v.is_null()) throw ConfigError(key, "missing required value");
  if (!v.is_string()) throw ConfigError(key, "expected a string");
  return v.get<std::string>();
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text,
                                    const std::vector<std::string>& overrides,
                                    const std::optional<std::string>& out_dir,
                                    const std::optional<std::uint64_t>& seed) {
  return build(text, overrides, out_dir, seed, {});
}

RunConfig RunConfig::load(const std::optional<std::filesystem::path>& config_path,
                          const std::vector<std::string>& overrides,
                          const std::optional<std::string>& out_dir,
                          const std::optional<std::uint64_t>& seed) {
  std::string text;
  std::filesystem::path base;
  if (config_path) {
    std::ifstream in(*config_path);
    if (!in) throw ConfigError("--config", "cannot read " + config_path->string());
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
    base = config_path->parent_path();
  }
  return build(text, overrides, out_dir, seed, base);
}

RunConfig RunConfig::build(const std::string& text, const std::vector<std::string>& overrides,
                           const std::optional<std::string>& out_dir,
                           const std::optional<std::uint64_t>& seed,
                           const std::filesystem::path& base_dir) {
  json doc = default_config();
  if (!text.empty()) {
    json user = json::parse(text, nullptr, false);
    if (user.is_discarded()) throw ConfigError("<config>", "not valid JSON");
    merge(doc, user, "");
  }
  for (const auto& o : overrides) apply_override(doc, o);
  if (out_dir) doc["run"]["out_dir"] = *out_dir;
  if (seed) doc["run"]["seed"] = *seed;
  // Relative table paths resolve against the config file's directory.
  auto& tp = doc["coefficient"]["table_path"];
  if (!base_dir.empty() && tp.is_string()) {
    const std::filesystem::path p = tp.get<std::string>();
    if (p.is_relative()) tp = (base_dir / p).lexically_normal().string();
  }
  RunConfig cfg(std::move(doc));
  cfg.validate();
  return cfg;
}

const json& RunConfig::at(const std::string& key) const {
  const auto ptr = pointer(key);
  if (!doc_.contains(ptr)) throw ConfigError(key, "unknown configuration key");
  return doc_.at(ptr);
}

bool RunConfig::has_value(const std::string& key) const { return !at(key).is_null(); }

double RunConfig::number(const std::string& key) const {
  const json& v = at(key);
  if (v.is_null()) throw ConfigError(key, "missing required value");
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(key, "must be finite");
  return d;
}

int RunConfig::integer(const std::string& key) const {
  const json& v = at(key);
  if (v.is_null()) throw ConfigError(key, "missing required value");
  if (!v.is_number_integer()) throw ConfigError(key, "expected an integer");
  return v.get<int>();
}

std::string RunConfig::text(const std::string& key) const { return require_text(at(key), key); }

Tabulated read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read table " + path.string());
  Tabulated t;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    double vals[3];
    int k = 0;
    bool numeric = true;
    while (std::getline(ss, cell, ',') && k < 3) {
      try {
        std::size_t used = 0;
        vals[k] = std::stod(cell, &used);
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
      ++k;
    }
    if (!numeric && t.nodes.empty()) continue;  // header row
    if (!numeric || k != 3)
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected x,a,a_prime");
    t.nodes.push_back(vals[0]);
    t.a_values.push_back(vals[1]);
    t.a_prime_values.push_back(vals[2]);
  }
  return t;
}

CoefficientModel RunConfig::coefficient() const {
  const std::string kind = text("coefficient.kind");
  const double x0 = number("coefficient.x0");
  if (!(x0 > 0.0 && x0 < 1.0)) throw ConfigError("coefficient.x0", "must lie strictly inside (0,1)");
  std::optional<double> theta;
  if (has_value("coefficient.theta")) theta = number("coefficient.theta");
  try {
    if (kind == "power_law") {
      const double alpha = number("coefficient.alpha");
      if (!(alpha > 0.0 && alpha < 2.0)) throw ConfigError("coefficient.alpha", "must lie in (0,2)");
      if (theta && !(*theta > 0.0 && *theta <= alpha))
        throw ConfigError("coefficient.theta", "must lie in (0, K]");
      return CoefficientModel::power_law(x0, alpha, theta);
    }
    if (kind == "tabulated") {
      const double K = number("coefficient.K");
      if (!(K > 0.0 && K < 2.0)) throw ConfigError("coefficient.K", "must lie in (0,2)");
      if (theta && !(*theta > 0.0 && *theta <= K))
        throw ConfigError("coefficient.theta", "must lie in (0, K]");
      return CoefficientModel::tabulated(x0, read_table(text("coefficient.table_path")), K, theta);
    }
    if (kind == "constant") {
      const double value = number("coefficient.value");
      if (!(value > 0.0)) throw ConfigError("coefficient.value", "must be positive");
      return CoefficientModel::uniform(x0, value);
    }
  } catch (const InvalidModelError& e) {
    throw ConfigError(kind == "tabulated" ? "coefficient.table_path" : "coefficient", e.what());
  } catch (const IoError& e) {
    throw ConfigError("coefficient.table_path", e.what());
  }
  throw ConfigError("coefficient.kind", "expected power_law, tabulated or constant");
}

WeightParams RunConfig::weight(const CoefficientModel& model) const {
  WeightParams p;
  p.T = number("weight.T");
  if (!(p.T > 0.0)) throw ConfigError("weight.T", "must be positive");
  p.c1 = number("weight.c1");
  if (!(p.c1 > 0.0)) throw ConfigError("weight.c1", "must be positive");
  double bound;
  try {
    bound = c2_min(model);
  } catch (const InvalidModelError& e) {
    throw ConfigError("coefficient", e.what());
  }
  if (has_value("weight.c2")) {
    p.c2 = number("weight.c2");
    if (!(p.c2 > bound))
      throw ConfigError("weight.c2", "must exceed c2_min = " + std::to_string(bound));
  } else {
    const double margin = number("weight.c2_margin");
    if (!(margin > 0.0)) throw ConfigError("weight.c2_margin", "must be positive");
    p.c2 = (1.0 + margin) * bound;
  }
  p.s = 1.0;
  return p;
}

SpaceTimeGrid RunConfig::grid(const CoefficientModel& model, double T) const {
  const int N = integer("grid.N");
  if (N < 4) throw ConfigError("grid.N", "must be at least 4");
  const int M = integer("grid.M");
  if (M < 2) throw ConfigError("grid.M", "must be at least 2");
  return SpaceTimeGrid::create(N, M, T, model.x0());
}

PotentialModel RunConfig::potential() const {
  const std::string kind = text("potential.kind");
  if (kind == "zero") return PotentialModel::zero();
  if (kind == "constant") return PotentialModel::constant(number("potential.value"));
  throw ConfigError("potential.kind", "expected zero or constant");
}

ControlConfig RunConfig::control() const {
  ControlConfig c{number("control.omega_lo"), number("control.omega_hi")};
  if (!(c.omega_lo >= 0.0 && c.omega_lo < c.omega_hi))
    throw ConfigError("control.omega_lo", "must satisfy 0 <= omega_lo < omega_hi");
  if (!(c.omega_hi <= 1.0)) throw ConfigError("control.omega_hi", "must be at most 1");
  return c;
}

std::vector<double> RunConfig::s_list() const {
  const double start = number("carleman.s_start");
  if (!(start > 0.0)) throw ConfigError("carleman.s_start", "must be positive");
  const double ratio = number("carleman.ratio");
  if (!(ratio > 1.0)) throw ConfigError("carleman.ratio", "must exceed 1");
  const int count = integer("carleman.count");
  if (count < 3) throw ConfigError("carleman.count", "must be at least 3");
  return geometric_s_list(start, ratio, count);
}

ObservabilitySampleSpec RunConfig::observability_spec() const {
  ObservabilitySampleSpec s;
  s.modes = integer("observability.modes");
  if (s.modes < 0) throw ConfigError("observability.modes", "must be nonnegative");
  s.random = integer("observability.random");
  if (s.random < 0) throw ConfigError("observability.random", "must be nonnegative");
  s.power_iterations = integer("observability.power_iters");
  if (s.power_iterations < 0) throw ConfigError("observability.power_iters", "must be nonnegative");
  if (s.modes + s.random == 0) throw ConfigError("observability.modes", "sample set is empty");
  s.seed = seed();
  return s;
}

std::uint64_t RunConfig::seed() const {
  const json& v = at("run.seed");
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
    throw ConfigError("run.seed", "expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

std::filesystem::path RunConfig::out_dir() const { return text("run.out_dir"); }

void RunConfig::validate() const {
  // Every check runs before any solve; the first failure names its key.
  const CoefficientModel model = coefficient();
  (void)weight(model);
  (void)grid(model, number("weight.T"));
  (void)potential();
  (void)control();
  const double cT = number("control.T");
  if (!(cT > 0.0)) throw ConfigError("control.T", "must be positive");
  if (!(number("control.tol") > 0.0)) throw ConfigError("control.tol", "must be positive");
  if (!(number("control.epsilon") >= 0.0)) throw ConfigError("control.epsilon", "must be nonnegative");
  if (integer("control.max_iters") < 0) throw ConfigError("control.max_iters", "must be nonnegative");
  const std::string u0 = text("control.u0");
  if (u0 != "parabola" && u0 != "sine") throw ConfigError("control.u0", "expected parabola or sine");
  const std::string p = text("hp.p");
  if (p != "distance_power" && p != "carleman_preset")
    throw ConfigError("hp.p", "expected distance_power or carleman_preset");
  if (p == "distance_power") {
    const double q = number("hp.q");
    if (!(q > 1.0 && q < 2.0)) throw ConfigError("hp.q", "must lie in (1,2)");
  }
  if (integer("hp.N") < 4) throw ConfigError("hp.N", "must be at least 4");
  if (integer("hp.battery_size") < 0) throw ConfigError("hp.battery_size", "must be nonnegative");
  (void)s_list();
  if (integer("carleman.time_exponent") < 1)
    throw ConfigError("carleman.time_exponent", "must be at least 1");
  (void)number("carleman.compare_potential");
  if (integer("caccioppoli.s_count") < 1) throw ConfigError("caccioppoli.s_count", "must be at least 1");
  const double olo = number("caccioppoli.omega_prime_lo"), ohi = number("caccioppoli.omega_prime_hi");
  if (!(olo < ohi)) throw ConfigError("caccioppoli.omega_prime_lo", "must be below omega_prime_hi");
  (void)observability_spec();
  if (integer("identity.time_exponent") < 6)
    throw ConfigError("identity.time_exponent", "must be at least 6 (s^3 Theta^3 w^2 integrable in time)");
  const json& sv = at("identity.s_values");
  if (!sv.is_array() || sv.empty()) throw ConfigError("identity.s_values", "expected a nonempty array");
  for (const auto& s : sv)
    if (!s.is_number() || s.get<double>() < 0.0)
      throw ConfigError("identity.s_values", "entries must be nonnegative numbers");
  const std::string fmt = text("run.format");
  if (fmt != "csv" && fmt != "json") throw ConfigError("run.format", "expected csv or json");
  (void)text("run.out_dir");
}

}  // namespace ideg
