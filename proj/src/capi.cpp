#include "ideg/ideg.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "coefficients.hpp"
#include "config.hpp"
#include "error.hpp"
#include "grid.hpp"
#include "solvers.hpp"
#include "weights.hpp"
#include "workflows.hpp"

struct ideg_coefficient {
  ideg::CoefficientModel model;
};
struct ideg_grid {
  ideg::SpaceTimeGrid grid;
};
struct ideg_field {
  ideg::Field field;
};

namespace {

thread_local std::string last_error;
thread_local std::string last_error_key;
thread_local std::string last_summary;

ideg_status fail(ideg_status s, const std::string& what, const std::string& key = {}) {
  last_error = what;
  last_error_key = key;
  return s;
}

// Maps the active exception to a status code.
ideg_status translate() {
  try {
    throw;
  } catch (const ideg::ConfigError& e) {
    return fail(IDEG_CONFIG, e.what(), e.key());
  } catch (const ideg::DomainError& e) {
    return fail(IDEG_DOMAIN, e.what());
  } catch (const ideg::SingularPointError& e) {
    return fail(IDEG_SINGULAR_POINT, e.what());
  } catch (const ideg::InvalidModelError& e) {
    return fail(IDEG_INVALID_MODEL, e.what());
  } catch (const ideg::PreconditionError& e) {
    return fail(IDEG_PRECONDITION, e.what());
  } catch (const ideg::GeometryError& e) {
    return fail(IDEG_GEOMETRY, e.what());
  } catch (const ideg::StepSizeError& e) {
    return fail(IDEG_STEP_SIZE, e.what());
  } catch (const ideg::IoError& e) {
    return fail(IDEG_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(IDEG_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(IDEG_INTERNAL, e.what());
  } catch (...) {
    return fail(IDEG_INTERNAL, "unknown error");
  }
}

template <class F>
ideg_status guarded(F&& f) {
  last_error.clear();
  last_error_key.clear();
  try {
    f();
    return IDEG_OK;
  } catch (...) {
    return translate();
  }
}

std::optional<double> opt_theta(double theta) {
  if (theta < 0.0) return std::nullopt;
  return theta;
}

}  // namespace

extern "C" {

const char* ideg_last_error(void) { return last_error.c_str(); }
const char* ideg_last_error_key(void) { return last_error_key.c_str(); }
const char* ideg_version(void) { return "1.0.0"; }

const char* ideg_status_string(ideg_status status) {
  switch (status) {
    case IDEG_OK: return "ok";
    case IDEG_INVALID_ARGUMENT: return "invalid argument";
    case IDEG_DOMAIN: return "domain error";
    case IDEG_SINGULAR_POINT: return "singular point";
    case IDEG_INVALID_MODEL: return "invalid model";
    case IDEG_PRECONDITION: return "precondition violated";
    case IDEG_GEOMETRY: return "geometry error";
    case IDEG_STEP_SIZE: return "step size error";
    case IDEG_CONFIG: return "configuration error";
    case IDEG_IO: return "i/o error";
    case IDEG_INTERNAL: return "internal error";
  }
  return "unknown status";
}

ideg_status ideg_coefficient_power_law(double x0, double alpha, double theta,
                                       ideg_coefficient** out) {
  if (!out) return fail(IDEG_INVALID_ARGUMENT, "out is null");
  return guarded([&] {
    *out = new ideg_coefficient{ideg::CoefficientModel::power_law(x0, alpha, opt_theta(theta))};
  });
}

ideg_status ideg_coefficient_tabulated(double x0, const double* x, const double* a,
                                       const double* a_prime, size_t rows, double K,
                                       double theta, ideg_coefficient** out) {
  if (!out || !x || !a || !a_prime) return fail(IDEG_INVALID_ARGUMENT, "null pointer argument");
  return guarded([&] {
    ideg::Tabulated t{{x, x + rows}, {a, a + rows}, {a_prime, a_prime + rows}};
    *out = new ideg_coefficient{
        ideg::CoefficientModel::tabulated(x0, std::move(t), K, opt_theta(theta))};
  });
}

ideg_status ideg_coefficient_uniform(double x0, double value, ideg_coefficient** out) {
  if (!out) return fail(IDEG_INVALID_ARGUMENT, "out is null");
  return guarded(
      [&] { *out = new ideg_coefficient{ideg::CoefficientModel::uniform(x0, value)}; });
}

void ideg_coefficient_destroy(ideg_coefficient* c) { delete c; }

ideg_status ideg_coefficient_a(const ideg_coefficient* c, double x, double* out) {
  if (!c || !out) return fail(IDEG_INVALID_ARGUMENT, "null pointer argument");
  return guarded([&] { *out = c->model.a(x); });
}

ideg_status ideg_coefficient_a_prime(const ideg_coefficient* c, double x, double* out) {
  if (!c || !out) return fail(IDEG_INVALID_ARGUMENT, "null pointer argument");
  return guarded([&] { *out = c->model.a_prime(x); });
}

ideg_status ideg_coefficient_K(const ideg_coefficient* c, double* out) {
  if (!c || !out) return fail(IDEG_INVALID_ARGUMENT, "null pointer argument");
  return guarded([&] { *out = c->model.K(); });
}

ideg_status ideg_coefficient_class(const ideg_coefficient* c, int* out) {
  if (!c || !out) return fail(IDEG_INVALID_ARGUMENT, "null pointer argument");
  return guarded([&] {
    *out = c->model.degeneracy_class() == ideg::DegeneracyClass::StronglyDegenerate ? 1 : 0;
  });
}

ideg_status ideg_c2_min(const ideg_coefficient* c, double* out) {
  if (!c || !out) return fail(IDEG_INVALID_ARGUMENT, "null pointer argument");
  return guarded([&] { *out = ideg::c2_min(c->model); });
}

ideg_status ideg_grid_create(int N, int M, double T, double x0, ideg_grid** out) {
  if (!out) return fail(IDEG_INVALID_ARGUMENT, "out is null");
  return guarded([&] { *out = new ideg_grid{ideg::SpaceTimeGrid::create(N, M, T, x0)}; });
}

void ideg_grid_destroy(ideg_grid* g) { delete g; }
int ideg_grid_N(const ideg_grid* g) { return g ? g->grid.N() : -1; }
int ideg_grid_M(const ideg_grid* g) { return g ? g->grid.M() : -1; }
double ideg_grid_T(const ideg_grid* g) { return g ? g->grid.T() : 0.0; }
int ideg_grid_x0_index(const ideg_grid* g) { return g ? g->grid.x0_index() : -1; }

ideg_status ideg_field_create(const ideg_grid* g, ideg_field** out) {
  if (!g || !out) return fail(IDEG_INVALID_ARGUMENT, "null pointer argument");
  return guarded([&] { *out = new ideg_field{ideg::Field(g->grid)}; });
}

void ideg_field_destroy(ideg_field* f) { delete f; }

namespace {
bool in_range(const ideg::Field& f, int j, int i) {
  return j >= 0 && j <= f.grid().M() && i >= 0 && i <= f.grid().N();
}
}  // namespace

ideg_status ideg_field_get(const ideg_field* f, int j, int i, double* out) {
  if (!f || !out) return fail(IDEG_INVALID_ARGUMENT, "null pointer argument");
  if (!in_range(f->field, j, i)) return fail(IDEG_INVALID_ARGUMENT, "index out of range");
  *out = f->field(j, i);
  return IDEG_OK;
}

ideg_status ideg_field_set(ideg_field* f, int j, int i, double value) {
  if (!f) return fail(IDEG_INVALID_ARGUMENT, "field is null");
  if (!in_range(f->field, j, i)) return fail(IDEG_INVALID_ARGUMENT, "index out of range");
  f->field(j, i) = value;
  return IDEG_OK;
}

ideg_status ideg_field_row(const ideg_field* f, int j, double* out, size_t len) {
  if (!f || !out) return fail(IDEG_INVALID_ARGUMENT, "null pointer argument");
  if (!in_range(f->field, j, 0)) return fail(IDEG_INVALID_ARGUMENT, "row out of range");
  const auto row = f->field.row(j);
  if (len != row.size()) return fail(IDEG_INVALID_ARGUMENT, "length must be N+1");
  std::memcpy(out, row.data(), row.size() * sizeof(double));
  return IDEG_OK;
}

ideg_status ideg_solve_forward(const ideg_coefficient* c, const ideg_grid* g, double potential,
                               const double* u0, size_t len, const ideg_field* h,
                               double omega_lo, double omega_hi, ideg_field** out) {
  if (!c || !g || !u0 || !out) return fail(IDEG_INVALID_ARGUMENT, "null pointer argument");
  return guarded([&] {
    const auto pot = potential == 0.0 ? ideg::PotentialModel::zero()
                                      : ideg::PotentialModel::constant(potential);
    ideg::Field u = ideg::solve_forward(c->model, pot, g->grid, {u0, len},
                                        h ? &h->field : nullptr, {omega_lo, omega_hi});
    *out = new ideg_field{std::move(u)};
  });
}

ideg_status ideg_solve_adjoint(const ideg_coefficient* c, const ideg_grid* g, double potential,
                               const double* vT, size_t len, const ideg_field* h,
                               ideg_field** out) {
  if (!c || !g || !vT || !out) return fail(IDEG_INVALID_ARGUMENT, "null pointer argument");
  return guarded([&] {
    const auto pot = potential == 0.0 ? ideg::PotentialModel::zero()
                                      : ideg::PotentialModel::constant(potential);
    ideg::Field v =
        ideg::solve_adjoint(c->model, pot, g->grid, {vT, len}, h ? &h->field : nullptr);
    *out = new ideg_field{std::move(v)};
  });
}

ideg_status ideg_run(const char* subcommand, const char* config_path,
                     const char* const* overrides, size_t n, const char* out_dir, int64_t seed,
                     int* all_pass, char** summary_json) {
  if (!subcommand || !all_pass) return fail(IDEG_INVALID_ARGUMENT, "null pointer argument");
  if (n > 0 && !overrides) return fail(IDEG_INVALID_ARGUMENT, "overrides is null");
  return guarded([&] {
    if (!ideg::is_subcommand(subcommand))
      throw ideg::ConfigError("subcommand", std::string("unknown: ") + subcommand);
    std::vector<std::string> sets(overrides, overrides + n);
    std::optional<std::filesystem::path> path;
    if (config_path) path = config_path;
    std::optional<std::string> dir;
    if (out_dir) dir = out_dir;
    std::optional<std::uint64_t> s;
    if (seed >= 0) s = static_cast<std::uint64_t>(seed);
    const auto cfg = ideg::RunConfig::load(path, sets, dir, s);
    const auto result = ideg::run_workflow(subcommand, cfg);
    *all_pass = result.pass() ? 1 : 0;
    last_summary = ideg::summary_text(result);
    if (summary_json) {
      const std::string text = ideg::summary_json(result, cfg).dump(2);
      char* buf = static_cast<char*>(std::malloc(text.size() + 1));
      if (!buf) throw std::bad_alloc();
      std::memcpy(buf, text.c_str(), text.size() + 1);
      *summary_json = buf;
    }
  });
}

const char* ideg_last_summary_text(void) { return last_summary.c_str(); }

void ideg_string_free(char* s) { std::free(s); }

}  // extern "C"
