#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "csv.hpp"
#include "diagnostics.hpp"
#include "errors.hpp"

namespace velmat {

using nlohmann::json;

namespace {

bool structured_available(const CoefficientSystem& sys) {
  return (sys.kind() == SystemKind::maxwell && sys.maxwell_medium()) ||
         (sys.kind() == SystemKind::elastic && sys.elastic_medium());
}

std::string hex_seed(std::uint64_t seed) {
  std::ostringstream os;
  os << "0x" << std::hex << seed;
  return os.str();
}

double radical_inverse(std::size_t i, unsigned base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

double dot(const Point& a, const Point& b, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += a[i] * b[i];
  return s;
}

// Points at distance delta from the finite boundary: shifted copies of the
// bounded faces (restricted to the window) and the sphere of radius r + delta
// around the excluded ball.
std::vector<Point> level_set_points(const BoxDomain& dom, double delta, std::size_t per_piece) {
  const int d = dom.dim;
  std::vector<Point> pts;
  for (int a = 0; a < d; ++a)
    for (int side = 0; side < 2; ++side) {
      const bool bounded = side == 0 ? !dom.unbounded_lower[a] : !dom.unbounded_upper[a];
      if (!bounded) continue;
      const double face = side == 0 ? dom.lower[a] + delta : dom.upper[a] - delta;
      for (std::size_t i = 1; i <= per_piece; ++i) {
        Point x{};
        x[a] = face;
        unsigned base = 2;
        for (int b = 0; b < d; ++b) {
          if (b == a) continue;
          const double lo = dom.lower[b] + (dom.unbounded_lower[b] ? 0.0 : delta);
          const double hi = dom.upper[b] - (dom.unbounded_upper[b] ? 0.0 : delta);
          x[b] = lo + (hi - lo) * radical_inverse(i, base);
          base = 3;
        }
        pts.push_back(x);
      }
    }
  if (dom.hole) {
    const double r = dom.hole->radius + delta;
    const Point& c = dom.hole->center;
    for (std::size_t i = 0; i < per_piece; ++i) {
      Point x = c;
      if (d == 2) {
        const double t = 2.0 * std::numbers::pi * (static_cast<double>(i) + 0.5) / static_cast<double>(per_piece);
        x[0] += r * std::cos(t);
        x[1] += r * std::sin(t);
      } else if (d == 3) {
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(per_piece);
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        x[0] += r * rho * std::cos(golden * static_cast<double>(i));
        x[1] += r * rho * std::sin(golden * static_cast<double>(i));
        x[2] += r * z;
      }
      pts.push_back(x);
    }
  }
  std::vector<Point> kept;
  for (const auto& x : pts) {
    const std::span<const double> xs(x.data(), d);
    if (dom.contains(xs) && dom.boundary_distance(xs) >= delta * (1.0 - 1e-9)) kept.push_back(x);
  }
  return kept;
}

struct Probes {
  const Scenario& scenario;
  const CoefficientSystem& sys;
  bool structured;
  int levels;

  SymMatrix M(const Point& x) const {
    const std::span<const double> xs(x.data(), sys.dim());
    return structured ? velocity_matrix_structured(sys, xs) : velocity_matrix(sys, xs);
  }

  bool metric() const { return scenario.analysis.criterion == Criterion::metric; }

  // Speed along the unit direction u at x.
  double speed(const Point& x, const Point& u) const {
    if (metric()) return std::sqrt(std::max(0.0, M(x).quad({u.data(), static_cast<std::size_t>(sys.dim())})));
    return char_speed(sys, {x.data(), static_cast<std::size_t>(sys.dim())}, {u.data(), static_cast<std::size_t>(sys.dim())});
  }

  // Direction-free upper bound on the speed at x.
  double speed_bound(const Point& x) const {
    if (metric()) return std::sqrt(std::max(0.0, M(x).eigenvalues().back()));
    return chernoff_upper(sys, {x.data(), static_cast<std::size_t>(sys.dim())});
  }

  std::string speed_text() const { return metric() ? "sqrt(<u, M u>)" : "||E^-1/2 sigma(x, u) E^-1/2||"; }

  CompletenessVerdict ray(const Point& p, const Point& u, double length, const std::string& name) const {
    RayProblem rp;
    rp.start = 0.0;
    rp.end = length;
    rp.levels = levels;
    rp.criterion = name;
    rp.speed = [&, p, u](double t) {
      Point x = p;
      for (int a = 0; a < sys.dim(); ++a) x[a] += t * u[a];
      return speed(x, u);
    };
    try {
      return ray_completeness(rp);
    } catch (const Error& e) {
      // Zero speed or singular coefficients on the ray: no verdict from it.
      CompletenessVerdict v;
      v.criterion = name;
      v.classification = Classification::inconclusive;
      v.parameters["diagnostic"] = e.what();
      return v;
    }
  }
};

std::string axis_name(int a) { return std::string(1, "xyz"[a]); }

Classification cap_likely(Classification c) {
  return c == Classification::certified_divergent ? Classification::likely_divergent : c;
}

// Lower-bound envelope (may certify), upper-bound rays (may show a finite
// distance) and an optional lattice probe, merged into one verdict.
CompletenessVerdict merge_group(CompletenessVerdict envelope, const std::vector<CompletenessVerdict>& rays,
                                const CompletenessVerdict* lattice) {
  json evidence = json::array();
  evidence.push_back(to_json(envelope));
  for (const auto& r : rays) evidence.push_back(to_json(r));
  if (lattice) evidence.push_back(to_json(*lattice));

  CompletenessVerdict out;
  if (envelope.classification == Classification::certified_divergent) {
    out = envelope;
  } else {
    const CompletenessVerdict* chosen = nullptr;
    for (const auto& r : rays)
      if (r.classification == Classification::likely_convergent) {
        chosen = &r;
        break;
      }
    if (chosen) {
      out = *chosen;
    } else if (lattice && is_divergent(lattice->classification)) {
      out = *lattice;
      out.classification = cap_likely(out.classification);
    } else {
      for (const auto& r : rays)
        if (is_divergent(r.classification)) {
          chosen = &r;
          break;
        }
      if (chosen) {
        out = *chosen;
        out.classification = cap_likely(out.classification);
      } else {
        out = envelope;
        if (out.classification != Classification::likely_divergent) out.classification = Classification::inconclusive;
      }
    }
  }
  out.parameters["evidence"] = std::move(evidence);
  return out;
}

std::vector<double> default_margins(const BoxDomain& dom, const Grid& grid, const Point& probe) {
  const double bd = dom.boundary_distance({probe.data(), static_cast<std::size_t>(dom.dim)});
  double m = 0.5 * std::min(domain_half_width(dom), bd);
  std::vector<double> out;
  while (m >= 0.75 * grid.min_spacing() && out.size() < 32) {
    out.push_back(m);
    m *= 0.5;
  }
  return out;
}

Point choose_probe(const Scenario& s, const BoxDomain& dom, const VelocityField& field) {
  const int d = dom.dim;
  Point p{};
  if (s.analysis.probe) {
    std::copy(s.analysis.probe->begin(), s.analysis.probe->end(), p.begin());
    if (!dom.contains({p.data(), static_cast<std::size_t>(d)}))
      throw ScenarioError("analysis.probe " + format_point({p.data(), static_cast<std::size_t>(d)}) +
                          " is outside the domain");
    return p;
  }
  p = dom.center();
  if (dom.contains({p.data(), static_cast<std::size_t>(d)})) return p;
  std::size_t best = field.grid.size();
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < field.grid.size(); ++n) {
    if (!field.valid[n]) continue;
    const Point q = field.grid.point(n);
    double dd = 0.0;
    for (int a = 0; a < d; ++a) dd += (q[a] - p[a]) * (q[a] - p[a]);
    if (dd < best_d) {
      best_d = dd;
      best = n;
    }
  }
  if (best == field.grid.size()) throw ScenarioError("no grid node lies inside the domain");
  const Point q = field.grid.point(best);
  diag::warn("window centre " + format_point({p.data(), static_cast<std::size_t>(d)}) +
             " is outside the domain; probing from the nearest node " +
             format_point({q.data(), static_cast<std::size_t>(d)}));
  return q;
}

std::string describe_verdict(const CompletenessVerdict& v) {
  std::ostringstream os;
  os << to_string(v.classification) << " by " << v.criterion;
  if (!v.integrals.empty()) {
    os << " (partial integrals " << format_double(v.integrals.front()) << " -> " << format_double(v.integrals.back())
       << " over " << v.integrals.size() << " cutoffs";
    if (v.parameters.contains("extrapolated_limit") && v.parameters["extrapolated_limit"].is_number())
      os << ", extrapolated limit " << format_double(v.parameters["extrapolated_limit"].get<double>());
    os << ")";
  }
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ScenarioError("cannot write " + path.string());
  out << text;
}

std::filesystem::path prepare_output(const Scenario& s) {
  std::error_code ec;
  std::filesystem::create_directories(s.output_dir, ec);
  if (ec) throw ScenarioError("cannot create output directory " + s.output_dir.string() + ": " + ec.message());
  return s.output_dir;
}

}  // namespace

AnalysisResult run_analysis(const Scenario& s, const RunOptions& opt) {
  (void)diag::take_warnings();
  const CoefficientSystem sys = build_system(s);
  // The system's domain may carry more than the scenario's box (the excluded ball of the Dirac demo).
  const BoxDomain& dom = sys.domain();
  const int d = dom.dim;

  const ValidationReport rep = validate_system(sys);
  if (!rep.pass) {
    std::string msg = "system validation failed:";
    for (const auto& f : rep.failures) msg += "\n  " + f;
    throw ValidationError(msg);
  }

  AnalysisResult res;
  const bool structured = structured_available(sys);
  const Grid grid = Grid::cell_centered(dom, s.nodes);
  res.field = majorant(sample_velocity_field(sys, grid, structured), s.analysis.delta);
  res.probe = choose_probe(s, dom, res.field);
  const std::span<const double> probe(res.probe.data(), d);
  res.chernoff = chernoff_c(sys, probe);
  res.fattorini = fattorini_r(sys, probe);

  const Probes pr{s, sys, structured, s.analysis.cutoffs};
  const std::string ds = pr.metric() ? "dx / sqrt(M(x))" : "dx / ||E^-1/2 A E^-1/2||";

  if (d == 1) {
    const double p = res.probe[0];
    for (int side = 0; side < 2; ++side) {
      const bool unbounded = side == 0 ? dom.unbounded_lower[0] : dom.unbounded_upper[0];
      const double end = side == 0 ? dom.lower[0] : dom.upper[0];
      const Point u{side == 0 ? -1.0 : 1.0, 0.0, 0.0};
      std::string label, name;
      CompletenessVerdict v;
      if (unbounded) {
        label = side == 0 ? "-infinity" : "+infinity";
        name = "quadrature of " + ds + " toward " + label;
        v = pr.ray(res.probe, u, std::numeric_limits<double>::infinity(), name);
      } else {
        label = "x = " + format_double(end);
        name = "boundary quadrature of " + ds + " toward " + label;
        v = pr.ray(res.probe, u, std::abs(end - p), name);
      }
      res.ends.push_back({(side == 0 ? "lower end, " : "upper end, ") + label, std::move(v)});
    }
  } else {
    if (dom.has_finite_boundary()) {
      // Every path to the boundary crosses each level set {dist = delta}.
      const double start = dom.boundary_distance(probe);
      std::vector<double> cut, env;
      double prev = start;
      for (int n = 1; n <= s.analysis.cutoffs; ++n) {
        const double dn = start * std::ldexp(1.0, -n);
        double b = 0.0;
        for (double lv : {prev, 0.5 * (prev + dn), dn})
          for (const auto& x : level_set_points(dom, lv, d == 2 ? 48 : 96)) b = std::max(b, pr.speed_bound(x));
        cut.push_back(dn);
        env.push_back(b);
        prev = dn;
      }
      CompletenessVerdict envelope = envelope_completeness(
          cut, env, start,
          "boundary-distance envelope: integral of d(delta) / b(delta), b = sup of the speed bound on "
          "{dist(x, boundary) = delta}");

      std::vector<CompletenessVerdict> rays;
      for (int a = 0; a < d; ++a)
        for (int side = 0; side < 2; ++side) {
          if (side == 0 ? dom.unbounded_lower[a] : dom.unbounded_upper[a]) continue;
          Point u{};
          u[a] = side == 0 ? -1.0 : 1.0;
          const double len = side == 0 ? res.probe[a] - dom.lower[a] : dom.upper[a] - res.probe[a];
          if (dom.hole) {
            Point c = dom.hole->center;
            Point rel{};
            for (int b = 0; b < d; ++b) rel[b] = c[b] - res.probe[b];
            const double t = std::clamp(dot(rel, u, d), 0.0, len);
            double dist2 = 0.0;
            for (int b = 0; b < d; ++b) dist2 += std::pow(res.probe[b] + t * u[b] - c[b], 2);
            if (dist2 < dom.hole->radius * dom.hole->radius) continue;
          }
          rays.push_back(pr.ray(res.probe, u, len,
                                "ray quadrature of |dx| / " + pr.speed_text() + " toward the face " + axis_name(a) +
                                    " = " + format_double(side == 0 ? dom.lower[a] : dom.upper[a])));
        }
      if (dom.hole) {
        Point u{};
        double r = 0.0;
        for (int b = 0; b < d; ++b) {
          u[b] = dom.hole->center[b] - res.probe[b];
          r += u[b] * u[b];
        }
        r = std::sqrt(r);
        if (r > dom.hole->radius) {
          for (int b = 0; b < d; ++b) u[b] /= r;
          rays.push_back(pr.ray(res.probe, u, r - dom.hole->radius,
                                "ray quadrature of |dx| / " + pr.speed_text() + " toward the excluded ball"));
        }
      }

      const MetricField metric = metric_from_majorant(res.field);
      const std::vector<double> margins =
          s.analysis.margins.empty() ? default_margins(dom, grid, res.probe) : s.analysis.margins;
      std::optional<CompletenessVerdict> lattice;
      if (margins.size() >= 3) {
        try {
          lattice = boundary_distance_probe(metric, dom, res.probe, margins, s.analysis.stencil).verdict;
        } catch (const Error& e) {
          diag::warn(std::string("lattice boundary probe skipped: ") + e.what());
        }
      }
      res.ends.push_back({"finite boundary", merge_group(std::move(envelope), rays, lattice ? &*lattice : nullptr)});
    }

    bool any_unbounded = false;
    for (int a = 0; a < d; ++a) any_unbounded = any_unbounded || dom.unbounded_lower[a] || dom.unbounded_upper[a];
    if (any_unbounded) {
      double r0 = 0.0;
      for (int a = 0; a < d; ++a) r0 += res.probe[a] * res.probe[a];
      r0 = std::max(1.0, std::sqrt(r0));
      std::vector<double> radii;
      for (int n = 1; n <= s.analysis.cutoffs; ++n) radii.push_back(r0 * std::ldexp(1.0, n));
      const std::vector<double> env = radial_envelope(sys, radii);
      CompletenessVerdict envelope = envelope_completeness(
          radii, env, r0, "radial growth envelope: integral of dr / b(r), b(r) = sup over |x| <= r of c(x)");
      std::vector<CompletenessVerdict> rays;
      for (int a = 0; a < d; ++a)
        for (int side = 0; side < 2; ++side) {
          if (!(side == 0 ? dom.unbounded_lower[a] : dom.unbounded_upper[a])) continue;
          Point u{};
          u[a] = side == 0 ? -1.0 : 1.0;
          rays.push_back(pr.ray(res.probe, u, std::numeric_limits<double>::infinity(),
                                "ray quadrature of |dx| / " + pr.speed_text() + " toward " +
                                    (side == 0 ? "-" : "+") + axis_name(a) + " infinity"));
        }
      res.ends.push_back({"infinity", merge_group(std::move(envelope), rays, nullptr)});
    }
  }

  if (res.ends.empty()) throw ScenarioError("the domain has no boundary to probe");
  std::size_t weakest = 0;
  for (std::size_t i = 1; i < res.ends.size(); ++i)
    if (divergence_rank(res.ends[i].verdict.classification) < divergence_rank(res.ends[weakest].verdict.classification))
      weakest = i;
  res.overall = res.ends[weakest].verdict;
  const std::vector<std::string> warnings = diag::take_warnings();

  json ends = json::array();
  for (const auto& e : res.ends) {
    json j = to_json(e.verdict);
    j["end"] = e.label;
    ends.push_back(std::move(j));
  }
  json params = {
      {"system", sys.label()},
      {"domain", dom.describe()},
      {"criterion_mode", std::string(to_string(s.analysis.criterion))},
      {"seed", hex_seed(opt.seed)},
      {"probe", std::vector<double>(res.probe.begin(), res.probe.begin() + d)},
      {"delta_requested", s.analysis.delta},
      {"delta_used", res.field.delta},
      {"eps_reg", res.field.eps_reg},
      {"majorant_margin", majorant_margin(res.field)},
      {"degenerate_nodes", res.field.degenerate_nodes},
      {"chernoff_bracket", {res.chernoff.lower, res.chernoff.upper}},
      {"fattorini_r", res.fattorini},
      {"decided_by", res.ends[weakest].label},
      {"ends", ends},
      {"validation",
       {{"samples", rep.samples},
        {"worst_hermiticity_defect", rep.worst_hermiticity_defect},
        {"min_eig_E", rep.min_eig_E}}},
      {"warnings", warnings},
  };
  if (rep.min_eig_stiffness) params["validation"]["min_eig_stiffness"] = *rep.min_eig_stiffness;
  CompletenessVerdict top = res.overall;
  top.parameters = std::move(params);
  res.document = to_json(top);

  std::ostringstream os;
  os << "system: " << sys.label() << "\n";
  os << "domain: " << dom.describe() << "\n";
  os << "grid:";
  for (auto n : s.nodes) os << " " << n;
  os << " nodes, majorant slack " << format_double(res.field.delta) << ", seed " << hex_seed(opt.seed) << "\n";
  os << "probe: " << format_point(probe) << "\n";
  os << "verdict: " << to_string(res.overall.classification) << "\n";
  for (const auto& e : res.ends) os << "  " << e.label << ": " << describe_verdict(e.verdict) << "\n";
  os << "Chernoff speed at the probe in [" << format_double(res.chernoff.lower) << ", "
     << format_double(res.chernoff.upper) << "], Fattorini r = " << format_double(res.fattorini) << "\n";
  if (is_divergent(res.overall.classification)) {
    os << "The boundary lies at infinite distance in the metric <dx, M^-1 dx>: a disturbance starting inside the "
          "domain never reaches it, and the completeness criterion for essential self-adjointness is met";
    if (res.overall.classification == Classification::likely_divergent) os << " (numerically, not certified)";
    os << ".\n";
  } else {
    os << "The completeness criterion is sufficient but not necessary: the verdict '"
       << to_string(res.overall.classification)
       << "' does not show that the operator fails to be essentially self-adjoint.\n";
  }
  if (sys.kind() == SystemKind::dirac) {
    os << "Here M(x) = 4 I, so the excluded ball is reached at finite distance and the criterion does not apply; "
          "the free Dirac operator on R^3 minus the origin is nevertheless essentially self-adjoint, which shows the "
          "criterion is sufficient-not-necessary.\n";
  }
  for (const auto& w : warnings) os << "warning: " << w << "\n";
  res.summary = os.str();
  return res;
}

DistanceField run_distance(const Scenario& s, DistanceMode mode) {
  const CoefficientSystem sys = build_system(s);
  const Grid grid = Grid::cell_centered(sys.domain(), s.nodes);
  VelocityField field = sample_velocity_field(sys, grid, structured_available(sys));
  const Point probe = choose_probe(s, sys.domain(), field);
  const std::size_t src = grid.nearest({probe.data(), static_cast<std::size_t>(grid.dim())});
  if (!field.valid[src]) throw ScenarioError("the probe's nearest grid node lies outside the domain");
  const std::size_t sources[] = {src};
  if (mode == DistanceMode::arrival) {
    DistanceField out = eikonal_arrival(field, sources, s.analysis.stencil);
    out.source = "arrival from " + format_point({probe.data(), static_cast<std::size_t>(grid.dim())});
    return out;
  }
  field = majorant(std::move(field), s.analysis.delta);
  DistanceField out = lattice_geodesic(metric_from_majorant(field), sources, s.analysis.stencil);
  out.source = "geodesic from " + format_point({probe.data(), static_cast<std::size_t>(grid.dim())});
  return out;
}

SimulationResult run_simulation(const Scenario& s, const RunOptions& opt) {
  if (!s.simulate) throw ScenarioError("the scenario has no simulate block");
  (void)diag::take_warnings();
  const SimulateSpec& sim = *s.simulate;
  const CoefficientSystem sys = build_system(s);
  const Grid grid = Grid::cell_centered(sys.domain(), s.nodes);
  const int d = grid.dim();
  const std::span<const double> c(sim.pulse.center.data(), sim.pulse.center.size());
  if (!sys.domain().contains(c)) throw ScenarioError("simulate.pulse.center " + format_point(c) + " is outside the domain");
  if (sim.pulse.components.size() != sys.k())
    throw ScenarioError("simulate.pulse.components has " + std::to_string(sim.pulse.components.size()) +
                        " entries; the system has " + std::to_string(sys.k()) + " components");
  const double h = grid.min_spacing();
  const BoxDomain& dom = sys.domain();
  const double edge = dom.boundary_distance(c);
  double window_edge = std::numeric_limits<double>::infinity();
  for (int a = 0; a < d; ++a) window_edge = std::min({window_edge, c[a] - dom.lower[a], dom.upper[a] - c[a]});
  if (std::min(edge, window_edge) < 4.0 * h)
    throw ScenarioError("simulate.pulse.center must be at least 4 nodes away from the boundary");
  if (std::min(edge, window_edge) < 4.0 * h + 3.0 * sim.pulse.sigma)
    diag::warn("the pulse's 3-sigma support reaches within 4 nodes of the boundary");

  const DiscreteOperator op(sys, grid, sim.order);
  SimulationResult res;
  WaveState state = gaussian_pulse(op, c, sim.pulse.sigma, sim.pulse.components);
  res.initial = state;
  EvolveOptions eo;
  eo.T = sim.T;
  eo.cfl = sim.cfl;
  eo.support_threshold = sim.threshold;
  eo.integrator = sim.integrator;
  res.log = integrate(op, sys, state, eo);
  res.final_state = std::move(state);
  const std::vector<std::string> warnings = diag::take_warnings();

  std::ostringstream os;
  os << "system: " << sys.label() << "\n";
  os << "domain: " << dom.describe() << "\n";
  os << "pulse: centre " << format_point(c) << ", sigma " << format_double(sim.pulse.sigma) << "\n";
  os << "steps: " << res.log.steps << ", dt " << format_double(res.log.dt) << ", T " << format_double(sim.T)
     << ", order " << sim.order << ", " << (sim.integrator == Integrator::rk4 ? "rk4" : "midpoint") << "\n";
  os << "max relative energy drift: " << format_double(res.log.max_relative_energy_drift) << "\n";
  if (!res.log.entries.empty()) {
    const LogEntry& last = res.log.entries.back();
    if (last.support.empty) {
      os << "final support: empty\n";
    } else {
      os << "final support box: " << format_point({last.support.lo.data(), static_cast<std::size_t>(d)}) << " to "
         << format_point({last.support.hi.data(), static_cast<std::size_t>(d)}) << "\n";
    }
  }
  os << "boundary contaminated: " << (res.log.boundary_contaminated ? "yes" : "no") << "\n";
  os << "seed: " << hex_seed(opt.seed) << "\n";
  for (const auto& w : warnings) os << "warning: " << w << "\n";
  res.summary = os.str();
  return res;
}

CommandResult cmd_analyze(const Scenario& s, const RunOptions& opt) {
  AnalysisResult a = run_analysis(s, opt);
  const auto dir = prepare_output(s);
  CommandResult out;
  write_velocity_csv(dir / "velocity.csv", a.field);
  write_text(dir / "verdict.json", a.document.dump(2) + "\n");
  write_text(dir / "summary.txt", a.summary);
  out.files = {dir / "velocity.csv", dir / "verdict.json", dir / "summary.txt"};
  out.summary = std::move(a.summary);
  if (opt.strict && a.overall.classification == Classification::inconclusive) out.status = 4;
  return out;
}

CommandResult cmd_distance(const Scenario& s, DistanceMode mode, const RunOptions&) {
  (void)diag::take_warnings();
  const DistanceField f = run_distance(s, mode);
  const auto dir = prepare_output(s);
  write_distance_csv(dir / "distance.csv", f);
  CommandResult out;
  out.files = {dir / "distance.csv"};
  double far = 0.0;
  std::size_t reached = 0;
  for (double v : f.value)
    if (std::isfinite(v)) {
      far = std::max(far, v);
      ++reached;
    }
  std::ostringstream os;
  os << f.source << ": " << reached << " nodes reached, largest value " << format_double(far) << "\n";
  for (const auto& w : diag::take_warnings()) os << "warning: " << w << "\n";
  out.summary = os.str();
  return out;
}

CommandResult cmd_simulate(const Scenario& s, const RunOptions& opt) {
  SimulationResult r = run_simulation(s, opt);
  const auto dir = prepare_output(s);
  write_evolution_csv(dir / "evolution.csv", r.log, s.domain.dim);
  write_snapshot_csv(dir / "snapshot_initial.csv", r.initial);
  write_snapshot_csv(dir / "snapshot_final.csv", r.final_state);
  write_text(dir / "summary.txt", r.summary);
  CommandResult out;
  out.files = {dir / "evolution.csv", dir / "snapshot_initial.csv", dir / "snapshot_final.csv", dir / "summary.txt"};
  out.summary = std::move(r.summary);
  return out;
}

}  // namespace velmat
