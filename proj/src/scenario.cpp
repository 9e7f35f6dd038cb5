#include "scenario.hpp"

#include <fstream>
#include <sstream>

#include "csv.hpp"
#include "errors.hpp"

namespace velmat {

using nlohmann::json;

std::string_view to_string(Criterion c) { return c == Criterion::metric ? "metric" : "symbol"; }

namespace {

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!obj.is_object()) throw ScenarioError(where + " must be a JSON object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) {
      std::string list;
      for (auto a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
      throw ScenarioError("unknown key '" + key + "' in " + where + " (allowed: " + list + ")");
    }
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ScenarioError("missing key '" + std::string(key) + "' in " + where);
  return *it;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ScenarioError(where + " must be a number");
  return v.get<double>();
}

std::vector<double> numbers(const json& v, const std::string& where) {
  if (!v.is_array()) throw ScenarioError(where + " must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

std::string expr_text(const json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return format_double(v.get<double>());
  throw ScenarioError(where + " must be an expression string or a number");
}

std::vector<std::string> expr_list(const json& v, const std::string& where) {
  if (!v.is_array()) throw ScenarioError(where + " must be an array of expressions");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(expr_text(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

EntryExpr entry_expr(const json& v, const std::string& where) {
  if (v.is_array()) {
    if (v.size() != 2) throw ScenarioError(where + ": complex entries are [re, im]");
    return {expr_text(v[0], where + ".re"), expr_text(v[1], where + ".im")};
  }
  return {expr_text(v, where), "0"};
}

MatrixExpr matrix_expr(const json& v, const std::string& where) {
  if (!v.is_array()) throw ScenarioError(where + " must be an array of rows");
  MatrixExpr m;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string rw = where + "[" + std::to_string(i) + "]";
    if (!v[i].is_array()) throw ScenarioError(rw + " must be an array");
    std::vector<EntryExpr> row;
    for (std::size_t j = 0; j < v[i].size(); ++j) row.push_back(entry_expr(v[i][j], rw + "[" + std::to_string(j) + "]"));
    m.push_back(std::move(row));
  }
  return m;
}

BoxDomain parse_domain(const json& d) {
  check_keys(d, {"lower", "upper", "unbounded"}, "domain");
  BoxDomain dom;
  const auto lo = numbers(require(d, "lower", "domain"), "domain.lower");
  const auto hi = numbers(require(d, "upper", "domain"), "domain.upper");
  if (lo.empty() || lo.size() > 3) throw ScenarioError("domain.lower must have 1 to 3 entries");
  if (hi.size() != lo.size()) throw ScenarioError("domain.lower and domain.upper differ in length");
  dom.dim = static_cast<int>(lo.size());
  for (int a = 0; a < dom.dim; ++a) {
    dom.lower[a] = lo[a];
    dom.upper[a] = hi[a];
  }
  if (auto it = d.find("unbounded"); it != d.end()) {
    if (!it->is_array() || static_cast<int>(it->size()) != dom.dim)
      throw ScenarioError("domain.unbounded must have one entry per axis");
    for (int a = 0; a < dom.dim; ++a) {
      const json& u = (*it)[a];
      if (u.is_boolean()) {
        dom.unbounded_lower[a] = dom.unbounded_upper[a] = u.get<bool>();
      } else if (u.is_array() && u.size() == 2 && u[0].is_boolean() && u[1].is_boolean()) {
        dom.unbounded_lower[a] = u[0].get<bool>();
        dom.unbounded_upper[a] = u[1].get<bool>();
      } else {
        throw ScenarioError("domain.unbounded entries are booleans or [lower, upper] boolean pairs");
      }
    }
  }
  dom.check();
  return dom;
}

Stencil parse_stencil(const json& v) {
  if (!v.is_string()) throw ScenarioError("analysis.stencil must be a string");
  const auto s = v.get<std::string>();
  if (s == "standard") return Stencil::standard;
  if (s == "extended") return Stencil::extended;
  throw ScenarioError("analysis.stencil must be 'standard' or 'extended', got '" + s + "'");
}

AnalysisSpec parse_analysis(const json& a, int dim) {
  check_keys(a, {"delta", "cutoffs", "stencil", "criterion", "probe", "margins"}, "analysis");
  AnalysisSpec s;
  if (a.contains("delta")) s.delta = number(a["delta"], "analysis.delta");
  if (!(s.delta > 0.0 && s.delta < 1.0)) throw ScenarioError("analysis.delta must lie in (0, 1)");
  if (a.contains("cutoffs")) {
    if (!a["cutoffs"].is_number_integer()) throw ScenarioError("analysis.cutoffs must be an integer");
    s.cutoffs = a["cutoffs"].get<int>();
  }
  if (s.cutoffs < 4 || s.cutoffs > 60) throw ScenarioError("analysis.cutoffs must lie in 4..60");
  if (a.contains("stencil")) s.stencil = parse_stencil(a["stencil"]);
  if (a.contains("criterion")) {
    const auto c = a["criterion"].is_string() ? a["criterion"].get<std::string>() : std::string();
    if (c == "metric") s.criterion = Criterion::metric;
    else if (c == "symbol") s.criterion = Criterion::symbol;
    else throw ScenarioError("analysis.criterion must be 'metric' or 'symbol'");
  }
  if (a.contains("probe")) {
    s.probe = numbers(a["probe"], "analysis.probe");
    if (static_cast<int>(s.probe->size()) != dim) throw ScenarioError("analysis.probe must have one entry per axis");
  }
  if (a.contains("margins")) s.margins = numbers(a["margins"], "analysis.margins");
  return s;
}

Complex component(const json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return Complex(v[0].get<double>(), v[1].get<double>());
  throw ScenarioError(where + " must be a number or [re, im]");
}

SimulateSpec parse_simulate(const json& j, int dim) {
  check_keys(j, {"T", "cfl", "pulse", "threshold", "order", "integrator"}, "simulate");
  SimulateSpec s;
  s.T = number(require(j, "T", "simulate"), "simulate.T");
  if (!(s.T >= 0.0)) throw ScenarioError("simulate.T must be nonnegative");
  if (j.contains("cfl")) s.cfl = number(j["cfl"], "simulate.cfl");
  if (!(s.cfl > 0.0 && s.cfl <= 1.0)) throw ScenarioError("simulate.cfl must lie in (0, 1]");
  if (j.contains("threshold")) s.threshold = number(j["threshold"], "simulate.threshold");
  if (!(s.threshold > 0.0 && s.threshold < 1.0)) throw ScenarioError("simulate.threshold must lie in (0, 1)");
  if (j.contains("order")) {
    if (!j["order"].is_number_integer()) throw ScenarioError("simulate.order must be 2 or 4");
    s.order = j["order"].get<int>();
    if (s.order != 2 && s.order != 4) throw ScenarioError("simulate.order must be 2 or 4");
  }
  if (j.contains("integrator")) {
    const auto v = j["integrator"].is_string() ? j["integrator"].get<std::string>() : std::string();
    if (v == "rk4") s.integrator = Integrator::rk4;
    else if (v == "midpoint") s.integrator = Integrator::midpoint;
    else throw ScenarioError("simulate.integrator must be 'rk4' or 'midpoint'");
  }
  const json& p = require(j, "pulse", "simulate");
  check_keys(p, {"center", "sigma", "components"}, "simulate.pulse");
  s.pulse.center = numbers(require(p, "center", "simulate.pulse"), "simulate.pulse.center");
  if (static_cast<int>(s.pulse.center.size()) != dim)
    throw ScenarioError("simulate.pulse.center must have one entry per axis");
  s.pulse.sigma = number(require(p, "sigma", "simulate.pulse"), "simulate.pulse.sigma");
  if (!(s.pulse.sigma > 0.0)) throw ScenarioError("simulate.pulse.sigma must be positive");
  const json& c = require(p, "components", "simulate.pulse");
  if (!c.is_array() || c.empty()) throw ScenarioError("simulate.pulse.components must be a non-empty array");
  for (std::size_t i = 0; i < c.size(); ++i)
    s.pulse.components.push_back(component(c[i], "simulate.pulse.components[" + std::to_string(i) + "]"));
  return s;
}

}  // namespace

Scenario parse_scenario(const json& doc) {
  check_keys(doc, {"system", "domain", "grid", "analysis", "simulate", "output"}, "scenario");
  Scenario s;
  const json& sys = require(doc, "system", "scenario");
  check_keys(sys, {"name", "params"}, "system");
  const json& name = require(sys, "name", "system");
  if (!name.is_string()) throw ScenarioError("system.name must be a string");
  s.system.name = name.get<std::string>();
  if (sys.contains("params")) {
    if (!sys["params"].is_object()) throw ScenarioError("system.params must be an object");
    s.system.params = sys["params"];
  }
  s.domain = parse_domain(require(doc, "domain", "scenario"));
  const json& grid = require(doc, "grid", "scenario");
  check_keys(grid, {"nodes"}, "grid");
  const json& nodes = require(grid, "nodes", "grid");
  if (!nodes.is_array() || static_cast<int>(nodes.size()) != s.domain.dim)
    throw ScenarioError("grid.nodes must have one entry per axis");
  for (const auto& n : nodes) {
    if (!n.is_number_integer() || n.get<long long>() < 8) throw ScenarioError("grid.nodes entries must be integers >= 8");
    s.nodes.push_back(n.get<std::size_t>());
  }
  if (doc.contains("analysis")) s.analysis = parse_analysis(doc["analysis"], s.domain.dim);
  if (doc.contains("simulate")) s.simulate = parse_simulate(doc["simulate"], s.domain.dim);
  if (doc.contains("output")) {
    const json& o = doc["output"];
    check_keys(o, {"dir"}, "output");
    const json& dir = require(o, "dir", "output");
    if (!dir.is_string() || dir.get<std::string>().empty()) throw ScenarioError("output.dir must be a non-empty string");
    s.output_dir = dir.get<std::string>();
  }
  // Surface expression and parameter errors at load time.
  (void)build_system(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  json doc;
  try {
    doc = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ScenarioError(path.string() + ": invalid JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  try {
    return parse_scenario(doc);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

json to_json(const Scenario& s) {
  json doc;
  doc["system"] = {{"name", s.system.name}, {"params", s.system.params}};
  json unb = json::array();
  for (int a = 0; a < s.domain.dim; ++a) unb.push_back({s.domain.unbounded_lower[a], s.domain.unbounded_upper[a]});
  doc["domain"] = {{"lower", std::vector<double>(s.domain.lower.begin(), s.domain.lower.begin() + s.domain.dim)},
                   {"upper", std::vector<double>(s.domain.upper.begin(), s.domain.upper.begin() + s.domain.dim)},
                   {"unbounded", unb}};
  doc["grid"] = {{"nodes", s.nodes}};
  json an = {{"delta", s.analysis.delta},
             {"cutoffs", s.analysis.cutoffs},
             {"stencil", s.analysis.stencil == Stencil::standard ? "standard" : "extended"},
             {"criterion", to_string(s.analysis.criterion)}};
  if (s.analysis.probe) an["probe"] = *s.analysis.probe;
  if (!s.analysis.margins.empty()) an["margins"] = s.analysis.margins;
  doc["analysis"] = an;
  if (s.simulate) {
    const SimulateSpec& m = *s.simulate;
    json comps = json::array();
    for (const Complex& c : m.pulse.components) comps.push_back({c.real(), c.imag()});
    doc["simulate"] = {{"T", m.T},
                       {"cfl", m.cfl},
                       {"threshold", m.threshold},
                       {"order", m.order},
                       {"integrator", m.integrator == Integrator::rk4 ? "rk4" : "midpoint"},
                       {"pulse", {{"center", m.pulse.center}, {"sigma", m.pulse.sigma}, {"components", comps}}}};
  }
  doc["output"] = {{"dir", s.output_dir.string()}};
  return doc;
}

CoefficientSystem build_system(const Scenario& s) { return build_system(s.system.name, s.system.params, s.domain); }

CoefficientSystem build_system(const std::string& name, const json& params, const BoxDomain& dom) {
  const std::string where = "system.params";
  auto expr = [&](const char* key, const char* fallback = nullptr) -> std::string {
    auto it = params.find(key);
    if (it == params.end()) {
      if (fallback) return fallback;
      throw ScenarioError("system '" + name + "' needs parameter '" + key + "'");
    }
    return expr_text(*it, where + "." + key);
  };
  if (name == "telegraph") {
    check_keys(params, {"L", "C"}, where);
    return telegraph(dom, expr("L"), expr("C"));
  }
  if (name == "maxwell_isotropic" || name == "maxwell") {
    check_keys(params, {"eps", "mu"}, where);
    return maxwell_isotropic(dom, expr("eps", "1"), expr("mu", "1"));
  }
  if (name == "maxwell_anisotropic") {
    check_keys(params, {"eps", "mu"}, where);
    const auto eps = expr_list(require(params, "eps", where), where + ".eps");
    const auto mu = expr_list(require(params, "mu", where), where + ".mu");
    return maxwell_anisotropic(dom, eps, mu);
  }
  if (name == "elastic_isotropic") {
    check_keys(params, {"rho", "K", "mu"}, where);
    return elastic_isotropic(dom, expr("rho", "1"), expr("K"), expr("mu"));
  }
  if (name == "elastic") {
    check_keys(params, {"rho", "stiffness"}, where);
    const auto c = expr_list(require(params, "stiffness", where), where + ".stiffness");
    return elastic(dom, expr("rho", "1"), c);
  }
  if (name == "dirac_free") {
    check_keys(params, {"radius"}, where);
    const double r = params.contains("radius") ? number(params["radius"], where + ".radius") : 0.1;
    return dirac_free(dom, r);
  }
  if (name == "custom") {
    check_keys(params, {"k", "E", "A", "V"}, where);
    const json& kj = require(params, "k", where);
    if (!kj.is_number_integer() || kj.get<long long>() < 1) throw ScenarioError(where + ".k must be a positive integer");
    const auto k = kj.get<std::size_t>();
    const MatrixExpr E = matrix_expr(require(params, "E", where), where + ".E");
    const json& aj = require(params, "A", where);
    if (!aj.is_array()) throw ScenarioError(where + ".A must be an array with one matrix per axis");
    std::vector<MatrixExpr> A;
    for (std::size_t j = 0; j < aj.size(); ++j) A.push_back(matrix_expr(aj[j], where + ".A[" + std::to_string(j) + "]"));
    MatrixExpr V;
    if (params.contains("V")) V = matrix_expr(params["V"], where + ".V");
    return custom_system(dom, k, E, A, V);
  }
  throw ScenarioError("unknown system '" + name +
                      "' (known: telegraph, maxwell_isotropic, maxwell_anisotropic, elastic_isotropic, elastic, "
                      "dirac_free, custom)");
}

}  // namespace velmat
