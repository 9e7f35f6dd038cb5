#include "velmat/velmat.h"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "commands.hpp"
#include "dsl.hpp"
#include "errors.hpp"
#include "invariants.hpp"
#include "scenario.hpp"
#include "velocity.hpp"

struct velmat_scenario {
  velmat::Scenario scenario;
  std::string source;  // file path or "<string>", prefixed to command errors
};

struct velmat_system {
  velmat::CoefficientSystem sys;
};

namespace {

thread_local std::string g_last_error;

velmat_status fail(velmat_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Runs f, translating exceptions into status codes. context prefixes the
// error message when non-empty.
template <class F>
velmat_status guarded(const std::string& context, F&& f) {
  const std::string pre = context.empty() ? std::string() : context + ": ";
  try {
    g_last_error.clear();
    return f();
  } catch (const velmat::Error& e) {
    return fail(static_cast<velmat_status>(e.code()), pre + e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(VELMAT_SCENARIO_ERROR, pre + e.what());
  } catch (const std::invalid_argument& e) {
    return fail(VELMAT_INVALID_ARGUMENT, pre + e.what());
  } catch (const std::bad_alloc&) {
    return fail(VELMAT_NUMERICAL_ERROR, pre + "out of memory");
  } catch (const std::exception& e) {
    return fail(VELMAT_NUMERICAL_ERROR, pre + e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void put_string(char** out, const std::string& s) {
  if (out) *out = dup_string(s);
}

velmat::RunOptions run_options(const velmat_run_options* opt) {
  velmat::RunOptions r;
  if (opt) {
    r.seed = opt->seed;
    r.strict = opt->strict != 0;
  }
  return r;
}

#define VELMAT_REQUIRE(cond, msg) \
  if (!(cond)) return fail(VELMAT_INVALID_ARGUMENT, msg)

}  // namespace

extern "C" {

const char* velmat_version(void) { return "0.1.0"; }

const char* velmat_last_error(void) { return g_last_error.c_str(); }

velmat_run_options velmat_default_run_options(void) {
  velmat_run_options o;
  o.seed = velmat::kDefaultSeed;
  o.strict = 0;
  o.inject_majorant_fault = 0;
  return o;
}

void velmat_string_free(char* s) { delete[] s; }

velmat_status velmat_scenario_load(const char* path, velmat_scenario** out) {
  VELMAT_REQUIRE(path && out, "velmat_scenario_load: null argument");
  *out = nullptr;
  return guarded("", [&] {
    auto h = std::make_unique<velmat_scenario>(velmat_scenario{velmat::load_scenario(path), path});
    *out = h.release();
    return VELMAT_OK;
  });
}

velmat_status velmat_scenario_parse(const char* json_text, velmat_scenario** out) {
  VELMAT_REQUIRE(json_text && out, "velmat_scenario_parse: null argument");
  *out = nullptr;
  return guarded("<string>", [&] {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
      throw velmat::ScenarioError("invalid JSON at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    auto h = std::make_unique<velmat_scenario>(velmat_scenario{velmat::parse_scenario(doc), "<string>"});
    *out = h.release();
    return VELMAT_OK;
  });
}

velmat_status velmat_scenario_to_json(const velmat_scenario* s, char** json_out) {
  VELMAT_REQUIRE(s && json_out, "velmat_scenario_to_json: null argument");
  return guarded("", [&] {
    put_string(json_out, velmat::to_json(s->scenario).dump(2) + "\n");
    return VELMAT_OK;
  });
}

velmat_status velmat_scenario_set_output_dir(velmat_scenario* s, const char* dir) {
  VELMAT_REQUIRE(s && dir && *dir, "velmat_scenario_set_output_dir: null or empty argument");
  s->scenario.output_dir = dir;
  return VELMAT_OK;
}

void velmat_scenario_free(velmat_scenario* s) { delete s; }

velmat_status velmat_cmd_analyze(const velmat_scenario* s, const velmat_run_options* opt, char** summary_out) {
  VELMAT_REQUIRE(s, "velmat_cmd_analyze: null scenario");
  return guarded(s->source, [&] {
    const auto r = velmat::cmd_analyze(s->scenario, run_options(opt));
    put_string(summary_out, r.summary);
    return static_cast<velmat_status>(r.status);
  });
}

velmat_status velmat_cmd_distance(const velmat_scenario* s, velmat_distance_mode mode, const velmat_run_options* opt,
                                  char** summary_out) {
  VELMAT_REQUIRE(s, "velmat_cmd_distance: null scenario");
  VELMAT_REQUIRE(mode == VELMAT_DISTANCE_GEODESIC || mode == VELMAT_DISTANCE_ARRIVAL,
                 "velmat_cmd_distance: unknown mode");
  return guarded(s->source, [&] {
    const auto m = mode == VELMAT_DISTANCE_ARRIVAL ? velmat::DistanceMode::arrival : velmat::DistanceMode::geodesic;
    const auto r = velmat::cmd_distance(s->scenario, m, run_options(opt));
    put_string(summary_out, r.summary);
    return static_cast<velmat_status>(r.status);
  });
}

velmat_status velmat_cmd_simulate(const velmat_scenario* s, const velmat_run_options* opt, char** summary_out) {
  VELMAT_REQUIRE(s, "velmat_cmd_simulate: null scenario");
  return guarded(s->source, [&] {
    const auto r = velmat::cmd_simulate(s->scenario, run_options(opt));
    put_string(summary_out, r.summary);
    return static_cast<velmat_status>(r.status);
  });
}

velmat_status velmat_cmd_verify(const velmat_run_options* opt, const char* filter, char** table_out,
                                int* failures_out) {
  return guarded("", [&] {
    velmat::VerifyOptions vo;
    if (opt) {
      vo.seed = opt->seed;
      vo.inject_majorant_fault = opt->inject_majorant_fault != 0;
    }
    if (filter) vo.filter = filter;
    const auto rows = velmat::run_invariants(vo);
    int failures = 0;
    for (const auto& r : rows) failures += r.pass ? 0 : 1;
    if (failures_out) *failures_out = failures;
    put_string(table_out, velmat::format_invariant_table(rows));
    return VELMAT_OK;
  });
}

velmat_status velmat_system_builtin(const char* name, const char* params_json, int dim, const double* lower,
                                    const double* upper, velmat_system** out) {
  VELMAT_REQUIRE(name && out && lower && upper, "velmat_system_builtin: null argument");
  VELMAT_REQUIRE(dim >= 1 && dim <= 3, "velmat_system_builtin: dim must be 1, 2 or 3");
  *out = nullptr;
  return guarded(name, [&] {
    velmat::BoxDomain dom;
    dom.dim = dim;
    for (int a = 0; a < dim; ++a) {
      dom.lower[a] = lower[a];
      dom.upper[a] = upper[a];
    }
    dom.check();
    const nlohmann::json params =
        params_json && *params_json ? nlohmann::json::parse(params_json) : nlohmann::json::object();
    auto h = std::make_unique<velmat_system>(velmat_system{velmat::build_system(name, params, dom)});
    *out = h.release();
    return VELMAT_OK;
  });
}

velmat_status velmat_system_from_scenario(const velmat_scenario* s, velmat_system** out) {
  VELMAT_REQUIRE(s && out, "velmat_system_from_scenario: null argument");
  *out = nullptr;
  return guarded(s->source, [&] {
    auto h = std::make_unique<velmat_system>(velmat_system{velmat::build_system(s->scenario)});
    *out = h.release();
    return VELMAT_OK;
  });
}

void velmat_system_free(velmat_system* sys) { delete sys; }

velmat_status velmat_system_dims(const velmat_system* sys, int* dim, size_t* k) {
  VELMAT_REQUIRE(sys, "velmat_system_dims: null system");
  if (dim) *dim = sys->sys.dim();
  if (k) *k = sys->sys.k();
  return VELMAT_OK;
}

velmat_status velmat_system_velocity_matrix(const velmat_system* sys, const double* x, double* m_out) {
  VELMAT_REQUIRE(sys && x && m_out, "velmat_system_velocity_matrix: null argument");
  return guarded("", [&] {
    const int d = sys->sys.dim();
    const velmat::SymMatrix M = velmat::velocity_matrix(sys->sys, {x, static_cast<std::size_t>(d)});
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m_out[i * d + j] = M(i, j);
    return VELMAT_OK;
  });
}

velmat_status velmat_system_char_speed(const velmat_system* sys, const double* x, const double* n, double* speed_out) {
  VELMAT_REQUIRE(sys && x && n && speed_out, "velmat_system_char_speed: null argument");
  return guarded("", [&] {
    const auto d = static_cast<std::size_t>(sys->sys.dim());
    *speed_out = velmat::char_speed(sys->sys, {x, d}, {n, d});
    return VELMAT_OK;
  });
}

velmat_status velmat_system_chernoff(const velmat_system* sys, const double* x, double* lower_out, double* upper_out) {
  VELMAT_REQUIRE(sys && x, "velmat_system_chernoff: null argument");
  return guarded("", [&] {
    const auto b = velmat::chernoff_c(sys->sys, {x, static_cast<std::size_t>(sys->sys.dim())});
    if (lower_out) *lower_out = b.lower;
    if (upper_out) *upper_out = b.upper;
    return VELMAT_OK;
  });
}

velmat_status velmat_system_validate(const velmat_system* sys, int* passed_out, char** report_out) {
  VELMAT_REQUIRE(sys, "velmat_system_validate: null system");
  return guarded("", [&] {
    const auto rep = velmat::validate_system(sys->sys);
    if (passed_out) *passed_out = rep.pass ? 1 : 0;
    std::ostringstream os;
    os << (rep.pass ? "pass" : "fail") << ": " << rep.samples << " samples, worst Hermiticity defect "
       << rep.worst_hermiticity_defect << ", smallest eigenvalue of E " << rep.min_eig_E << "\n";
    for (const auto& f : rep.failures) os << f << "\n";
    put_string(report_out, os.str());
    return VELMAT_OK;
  });
}

velmat_status velmat_expr_eval(const char* expr, const double* x, size_t n, double* value_out) {
  VELMAT_REQUIRE(expr && value_out && (x || n == 0), "velmat_expr_eval: null argument");
  return guarded("", [&] {
    const velmat::dsl::Expr e = velmat::dsl::parse(expr);
    if (static_cast<std::size_t>(e.arity()) > n)
      throw std::invalid_argument("expression uses " + std::to_string(e.arity()) + " coordinates, got " +
                                  std::to_string(n));
    *value_out = velmat::dsl::eval(e, {x, n});
    return VELMAT_OK;
  });
}

}  // extern "C"
