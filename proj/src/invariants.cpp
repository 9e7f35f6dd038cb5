#include "invariants.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <optional>
#include <functional>
#include <regex>
#include <sstream>

#include "csv.hpp"
#include "dsl.hpp"
#include "errors.hpp"
#include "evolve.hpp"
#include "geometry.hpp"
#include "velocity.hpp"

namespace velmat {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

Matrix random_hermitian(Rng& rng, std::size_t k) {
  Matrix m(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    m(i, i) = uniform(rng, -1.0, 1.0);
    for (std::size_t j = i + 1; j < k; ++j) {
      m(i, j) = Complex(uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0));
      m(j, i) = std::conj(m(i, j));
    }
  }
  return m;
}

// R R^T + floor I with R uniform in [-1, 1].
Matrix random_spd_real(Rng& rng, std::size_t n, double floor) {
  Matrix r(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) r(i, j) = uniform(rng, -1.0, 1.0);
  Matrix s = r * r.transpose();
  for (std::size_t i = 0; i < n; ++i) s(i, i) += floor;
  return s;
}

std::vector<std::string> upper_entries(const Matrix& m) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i; j < m.cols(); ++j) out.push_back(format_double(m(i, j).real()));
  return out;
}

BoxDomain box(int dim, double lo, double hi) {
  BoxDomain d;
  d.dim = dim;
  for (int a = 0; a < 3; ++a) {
    d.lower[a] = a < dim ? lo : 0.0;
    d.upper[a] = a < dim ? hi : 1.0;
  }
  return d;
}

Point random_point(Rng& rng, const BoxDomain& d) {
  Point p{};
  for (int a = 0; a < d.dim; ++a) p[a] = uniform(rng, d.lower[a], d.upper[a]);
  return p;
}

Point random_direction(Rng& rng, int dim) {
  std::normal_distribution<double> g;
  Point u{};
  double n = 0.0;
  do {
    n = 0.0;
    for (int a = 0; a < dim; ++a) {
      u[a] = g(rng);
      n += u[a] * u[a];
    }
  } while (n < 1e-8);
  n = std::sqrt(n);
  for (int a = 0; a < dim; ++a) u[a] /= n;
  return u;
}

// A randomly chosen built-in system with variable (or anisotropic) media.
CoefficientSystem random_system(Rng& rng) {
  const int which = std::uniform_int_distribution<int>(0, 4)(rng);
  const double a = uniform(rng, 0.1, 0.6), b = uniform(rng, 0.5, 3.0);
  std::ostringstream f;
  f << "1 + " << format_double(a) << " * sin(" << format_double(b) << " * x)";
  switch (which) {
    case 0:
      return telegraph(box(1, -1.0, 1.0), f.str(), "2 + cos(x)");
    case 1:
      return maxwell_isotropic(box(2, -1.0, 1.0), f.str(), "1.5 + 0.5 * tanh(y)");
    case 2: {
      const Matrix eps = random_spd_real(rng, 3, 0.3), mu = random_spd_real(rng, 3, 0.3);
      const auto e = upper_entries(eps), m = upper_entries(mu);
      return maxwell_anisotropic(box(3, -1.0, 1.0), e, m);
    }
    case 3:
      return elastic_isotropic(box(2, -1.0, 1.0), f.str(), "3 + x * y", "1 + 0.2 * cos(y)");
    default: {
      const auto c = upper_entries(random_spd_real(rng, 6, 0.5));
      return elastic(box(3, -1.0, 1.0), format_double(uniform(rng, 0.5, 2.0)), c);
    }
  }
}

struct Check {
  double residual = 0.0;
  std::string detail;
  void observe(double r, const std::string& where = {}) {
    if (!(r <= residual) || std::isnan(r)) {
      residual = std::isnan(r) ? std::numeric_limits<double>::infinity() : r;
      if (!where.empty()) detail = where;
    }
  }
};

struct Invariant {
  std::string id;
  double tolerance;
  std::function<void(Check&, Rng&, const VerifyOptions&)> run;
};

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

double sym_rel(const SymMatrix& a, const SymMatrix& b) {
  double num = 0.0, den = 0.0;
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j) {
      num = std::max(num, std::abs(a(i, j) - b(i, j)));
      den = std::max(den, std::abs(b(i, j)));
    }
  return num / std::max(den, 1e-300);
}

// ---- matkernel ------------------------------------------------------------

void eig_reconstruction(Check& c, Rng& rng, const VerifyOptions&) {
  for (int t = 0; t < 200; ++t) {
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
    const Matrix h = random_hermitian(rng, k);
    const auto e = eig_herm(HermitianMatrix(h));
    Matrix d(k, k);
    for (std::size_t i = 0; i < k; ++i) d(i, i) = e.values[i];
    const Matrix back = e.vectors * d * e.vectors.adjoint();
    c.observe((back - h).frobenius_norm() / std::max(h.frobenius_norm(), 1e-300));
    c.observe((e.vectors.adjoint() * e.vectors - Matrix::identity(k)).frobenius_norm());
    for (std::size_t i = 1; i < k; ++i) c.observe(std::max(0.0, e.values[i - 1] - e.values[i]));
  }
}

void spd_functions(Check& c, Rng& rng, const VerifyOptions&) {
  for (int t = 0; t < 200; ++t) {
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
    Matrix h = random_hermitian(rng, k);
    h = h * h;
    for (std::size_t i = 0; i < k; ++i) h(i, i) += 0.2;
    const SPDMatrix s{HermitianMatrix(h)};
    const Matrix r = spd_sqrt(s).matrix(), ir = spd_inv_sqrt(s).matrix(), inv = spd_inverse(s).matrix();
    const double n = h.frobenius_norm();
    c.observe((r * r - h).frobenius_norm() / n);
    c.observe((ir * h * ir - Matrix::identity(k)).frobenius_norm() / std::sqrt(static_cast<double>(k)));
    c.observe((inv * h - Matrix::identity(k)).frobenius_norm() / std::sqrt(static_cast<double>(k)));
  }
}

// ---- systems --------------------------------------------------------------

void builtin_validation(Check& c, Rng& rng, const VerifyOptions&) {
  for (int t = 0; t < 10; ++t) {
    const CoefficientSystem sys = random_system(rng);
    const ValidationReport rep = validate_system(sys, 64);
    c.observe(rep.pass ? rep.worst_hermiticity_defect : 1.0, sys.label());
  }
}

void canonical_form(Check& c, Rng& rng, const VerifyOptions&) {
  for (int t = 0; t < 10; ++t) {
    const CoefficientSystem sys = random_system(rng);
    const CoefficientSystem can = canonicalize(sys);
    for (int s = 0; s < 10; ++s) {
      const Point x = random_point(rng, sys.domain());
      const std::span<const double> xs(x.data(), sys.dim());
      const Coefficients a = sys.eval(xs), b = can.eval(xs);
      const Matrix B = spd_inv_sqrt(a.E).matrix();
      c.observe((b.E.matrix() - Matrix::identity(sys.k())).frobenius_norm(), sys.label());
      for (int j = 0; j < sys.dim(); ++j) {
        const Matrix expect = B * a.A[j].matrix() * B;
        c.observe((b.A[j].matrix() - expect).frobenius_norm() / std::max(expect.frobenius_norm(), 1e-300),
                  sys.label());
      }
      // M is a function of the canonical principal parts only.
      c.observe(sym_rel(velocity_matrix(can, xs), velocity_matrix(sys, xs)), sys.label());
    }
  }
}

// ---- velocity -------------------------------------------------------------

void trace_identity(Check& c, Rng& rng, const VerifyOptions&) {
  for (int t = 0; t < 20; ++t) {
    const CoefficientSystem sys = random_system(rng);
    for (int s = 0; s < 10; ++s) {
      const Point x = random_point(rng, sys.domain());
      const Point n = random_direction(rng, sys.dim());
      const std::span<const double> xs(x.data(), sys.dim()), ns(n.data(), sys.dim());
      const auto At = canonical_principal_parts(sys, xs);
      Matrix sig(sys.k(), sys.k());
      for (int j = 0; j < sys.dim(); ++j) sig += Complex(n[j]) * At[j].matrix();
      const double f2 = sig.frobenius_norm() * sig.frobenius_norm();
      c.observe(rel(velocity_matrix(sys, xs).quad(ns), f2), sys.label());
    }
  }
}

void chernoff_sandwich(Check& c, Rng& rng, const VerifyOptions&) {
  for (int t = 0; t < 20; ++t) {
    const CoefficientSystem sys = random_system(rng);
    const double k = static_cast<double>(sys.k());
    for (int s = 0; s < 10; ++s) {
      const Point x = random_point(rng, sys.domain());
      const Point n = random_direction(rng, sys.dim());
      const std::span<const double> xs(x.data(), sys.dim()), ns(n.data(), sys.dim());
      const double cs = char_speed(sys, xs, ns);
      const double q = velocity_matrix(sys, xs).quad(ns);
      // ||sigma~||^2 <= <n, M n> <= k ||sigma~||^2
      const double scale = std::max(q, 1e-300);
      c.observe(std::max(0.0, cs * cs - q) / scale, sys.label());
      c.observe(std::max(0.0, q - k * cs * cs) / scale, sys.label());
    }
  }
}

void fattorini_sandwich(Check& c, Rng& rng, const VerifyOptions&) {
  for (int t = 0; t < 20; ++t) {
    const CoefficientSystem sys = random_system(rng);
    const double d = sys.dim();
    for (int s = 0; s < 5; ++s) {
      const Point x = random_point(rng, sys.domain());
      const std::span<const double> xs(x.data(), sys.dim());
      const double r = fattorini_r(sys, xs);
      const Bracket b = chernoff_c(sys, xs);
      const double scale = std::max(r, 1e-300);
      c.observe(std::max(0.0, b.lower - b.upper) / scale, sys.label());
      c.observe(std::max(0.0, r - b.upper) / scale, sys.label());
      c.observe(std::max(0.0, b.lower - std::sqrt(d) * r) / scale, sys.label());
      for (int j = 0; j < sys.dim(); ++j) {
        Point e{};
        e[j] = 1.0;
        c.observe(std::max(0.0, char_speed(sys, xs, {e.data(), static_cast<std::size_t>(sys.dim())}) - b.upper) / scale,
                  sys.label());
      }
    }
  }
}

void majorant_dominates(Check& c, Rng& rng, const VerifyOptions& opt) {
  for (int t = 0; t < 6; ++t) {
    const CoefficientSystem sys = random_system(rng);
    std::vector<std::size_t> nodes(sys.dim(), sys.dim() == 1 ? 256 : sys.dim() == 2 ? 32 : 10);
    VelocityField f = majorant(sample_velocity_field(sys, Grid::cell_centered(sys.domain(), nodes)), 0.1);
    if (opt.inject_majorant_fault)
      for (auto& m : f.majorant) m = 0.9 * m;
    // Violation = max(0, -lambda_min(M_hat - M)) relative to ||M||.
    for (std::size_t n = 0; n < f.grid.size(); ++n) {
      if (!f.valid[n]) continue;
      const double lam = (f.majorant[n] - f.M[n]).eigenvalues().front();
      c.observe(std::max(0.0, -lam) / std::max(f.M[n].norm(), 1e-300), sys.label());
    }
  }
}

void structured_agreement(Check& c, Rng& rng, const VerifyOptions&) {
  for (int t = 0; t < 20; ++t) {
    CoefficientSystem sys = random_system(rng);
    if (sys.kind() != SystemKind::maxwell && sys.kind() != SystemKind::elastic) continue;
    for (int s = 0; s < 5; ++s) {
      const Point x = random_point(rng, sys.domain());
      const std::span<const double> xs(x.data(), sys.dim());
      c.observe(sym_rel(velocity_matrix_structured(sys, xs), velocity_matrix(sys, xs)), sys.label());
    }
  }
}

void closed_forms(Check& c, Rng& rng, const VerifyOptions&) {
  for (int t = 0; t < 20; ++t) {
    const double L = uniform(rng, 0.1, 10.0), C = uniform(rng, 0.1, 10.0);
    const double e = uniform(rng, 0.1, 10.0);
    const double rho = uniform(rng, 0.1, 10.0), K = uniform(rng, 0.1, 10.0), mu = uniform(rng, 0.1, 10.0);
    const Point x{0.5, 0.5, 0.5};
    const auto tel = telegraph(box(1, 0.0, 1.0), format_double(L), format_double(C));
    c.observe(rel(velocity_matrix(tel, {x.data(), 1})(0, 0), 2.0 / (L * C)), "telegraph");
    const auto mx = maxwell_isotropic(box(3, 0.0, 1.0), format_double(e), format_double(mu));
    const auto el = elastic_isotropic(box(3, 0.0, 1.0), format_double(rho), format_double(K), format_double(mu));
    c.observe(sym_rel(velocity_matrix(mx, {x.data(), 3}), SymMatrix::identity(3, 4.0 / (e * mu))), "maxwell");
    c.observe(sym_rel(velocity_matrix(el, {x.data(), 3}), SymMatrix::identity(3, 2.0 / rho * (K + 10.0 * mu / 3.0))),
              "elastic");
  }
}

// ---- geometry -------------------------------------------------------------

void classifier_power_law(Check& c, Rng&, const VerifyOptions&) {
  for (double p : {0.25, 0.5, 0.9, 1.0, 1.5, 2.0, 3.0}) {
    RayProblem rp;
    rp.start = 1.0;
    rp.end = 0.0;
    rp.speed = [p](double t) { return std::pow(t, p); };
    const CompletenessVerdict v = ray_completeness(rp);
    const bool ok = is_divergent(v.classification) == power_law_divergent(p) &&
                    (p != 1.0 || v.classification == Classification::certified_divergent);
    c.observe(ok ? 0.0 : 1.0, "p = " + format_double(p));
  }
}

void geodesic_bounds(Check& c, Rng& rng, const VerifyOptions&) {
  // Constant metric G: lattice distance >= continuum distance, and within the
  // worst-case 8-neighbour factor for isotropic G.
  for (int t = 0; t < 3; ++t) {
    const std::size_t n = 41;
    const Grid g = Grid::vertex(2, {0.0, 0.0, 0.0}, {1.0, 1.0, 0.0}, std::vector<std::size_t>{n, n});
    MetricField m{g, std::vector<SymMatrix>(g.size()), std::vector<char>(g.size(), 1), false};
    const Matrix G = random_spd_real(rng, 2, 0.2);
    SymMatrix s(2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) s(i, j) = G(i, j).real();
    std::fill(m.G.begin(), m.G.end(), s);
    const std::size_t src[] = {g.index(n / 2, n / 2)};
    const DistanceField d = lattice_geodesic(m, src);
    const Point p0 = g.point(src[0]);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Point p = g.point(i);
      const double dx[2] = {p[0] - p0[0], p[1] - p0[1]};
      const double exact = std::sqrt(s.quad(dx));
      if (exact == 0.0) continue;
      c.observe(std::max(0.0, exact - d.value[i]) / exact);
    }
  }
}

void arrival_causality(Check& c, Rng& rng, const VerifyOptions&) {
  for (int t = 0; t < 3; ++t) {
    const CoefficientSystem sys = random_system(rng);
    if (sys.dim() == 3) continue;
    std::vector<std::size_t> nodes(sys.dim(), sys.dim() == 1 ? 256 : 48);
    const VelocityField f = sample_velocity_field(sys, Grid::cell_centered(sys.domain(), nodes));
    double vmax = 0.0;
    for (const auto& m : f.M) vmax = std::max(vmax, std::sqrt(m.eigenvalues().back()));
    const std::size_t src[] = {f.grid.size() / 2 + (sys.dim() == 2 ? nodes[0] / 2 : 0)};
    const DistanceField d = eikonal_arrival(f, src);
    const Point p0 = f.grid.point(src[0]);
    for (std::size_t i = 0; i < f.grid.size(); ++i) {
      const Point p = f.grid.point(i);
      double r = 0.0;
      for (int a = 0; a < sys.dim(); ++a) r += (p[a] - p0[a]) * (p[a] - p0[a]);
      const double bound = std::sqrt(r) / vmax;
      if (bound > 0.0) c.observe(std::max(0.0, bound - d.value[i]) / bound, sys.label());
    }
  }
}

// ---- evolve ---------------------------------------------------------------

void operator_symmetry(Check& c, Rng& rng, const VerifyOptions&) {
  for (int t = 0; t < 6; ++t) {
    const CoefficientSystem sys = random_system(rng);
    if (sys.dim() == 3) continue;
    std::vector<std::size_t> nodes(sys.dim(), sys.dim() == 1 ? 64 : 16);
    for (int order : {2, 4}) {
      const DiscreteOperator op(sys, Grid::cell_centered(sys.domain(), nodes), order);
      std::vector<Complex> u(op.size()), v(op.size());
      for (auto& z : u) z = Complex(uniform(rng, -1, 1), uniform(rng, -1, 1));
      for (auto& z : v) z = Complex(uniform(rng, -1, 1), uniform(rng, -1, 1));
      const auto Du = op.apply(u), Dv = op.apply(v);
      // <u, D v>_E = <D u, v>_E
      const Complex a = op.inner(u, Dv), b = op.inner(Du, v);
      c.observe(std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}), sys.label());
    }
  }
}

void energy_drift(Check& c, Rng& rng, const VerifyOptions&) {
  for (int t = 0; t < 2; ++t) {
    const CoefficientSystem sys = random_system(rng);
    if (sys.dim() != 1) {
      --t;
      continue;
    }
    const DiscreteOperator op(sys, Grid::cell_centered(sys.domain(), std::vector<std::size_t>{256}), 2);
    const double centre[] = {0.0};
    const Complex comps[] = {1.0, 0.5};
    WaveState st = gaussian_pulse(op, centre, 0.08, comps);
    EvolveOptions eo;
    eo.T = 0.3;
    const EvolutionLog log = integrate(op, sys, st, eo);
    c.observe(log.max_relative_energy_drift, sys.label());
  }
}

void finite_speed(Check& c, Rng&, const VerifyOptions&) {
  const auto sys = telegraph(box(1, -1.0, 1.0), "1", "1");
  const DiscreteOperator op(sys, Grid::cell_centered(sys.domain(), std::vector<std::size_t>{512}), 2);
  const double centre[] = {0.0};
  const Complex comps[] = {1.0, 0.0};
  WaveState st = gaussian_pulse(op, centre, 0.03, comps);
  const SupportBox s0 = support_box(op, st.psi, 1e-3, max_density(op, st.psi));
  EvolveOptions eo;
  eo.T = 0.4;
  const double ref = max_density(op, st.psi);
  integrate(op, sys, st, eo);
  const SupportBox s1 = support_box(op, st.psi, 1e-3, ref);
  // Characteristic speed 1: growth beyond T per side is numerical spreading.
  const double h = op.grid().min_spacing();
  const double grow = std::max(s0.lo[0] - s1.lo[0], s1.hi[0] - s0.hi[0]) - eo.T;
  c.observe(std::max(0.0, grow) / h);
}

// ---- dsl ------------------------------------------------------------------

void dsl_roundtrip(Check& c, Rng& rng, const VerifyOptions&) {
  for (int t = 0; t < 1000; ++t) {
    const std::string src = random_expression_source(rng, 5);
    const dsl::Expr a = dsl::parse(src);
    const dsl::Expr b = dsl::parse(dsl::print(a));
    c.observe(dsl::same_tree(*a.root(), *b.root()) ? 0.0 : 1.0, src);
  }
}

void dsl_deterministic(Check& c, Rng& rng, const VerifyOptions&) {
  for (int t = 0; t < 300; ++t) {
    const dsl::Expr e = dsl::parse(random_expression_source(rng, 4));
    const double x[3] = {uniform(rng, -2, 2), uniform(rng, -2, 2), uniform(rng, -2, 2)};
    double a = 0.0, b = 0.0;
    bool fa = false, fb = false;
    try {
      a = dsl::eval(e, x);
    } catch (const DomainError&) {
      fa = true;
    }
    try {
      b = dsl::eval(e, x);
    } catch (const DomainError&) {
      fb = true;
    }
    const bool same = fa == fb && (fa || std::memcmp(&a, &b, sizeof a) == 0);
    c.observe(same ? 0.0 : 1.0, dsl::print(e));
  }
}

const std::vector<Invariant>& registry() {
  static const std::vector<Invariant> r = {
      {"matkernel.eig_reconstruction", 1e-12, eig_reconstruction},
      {"matkernel.spd_functions", 1e-11, spd_functions},
      {"systems.builtin_validation", 1e-13, builtin_validation},
      {"systems.canonical_form", 1e-10, canonical_form},
      {"velocity.closed_forms", 1e-12, closed_forms},
      {"velocity.trace_identity", 1e-12, trace_identity},
      {"velocity.chernoff_sandwich", 1e-12, chernoff_sandwich},
      {"velocity.fattorini_sandwich", 1e-12, fattorini_sandwich},
      {"velocity.majorant_dominates", 1e-12, majorant_dominates},
      {"velocity.structured_agreement", 1e-10, structured_agreement},
      {"geometry.classifier_power_law", 0.0, classifier_power_law},
      {"geometry.geodesic_lower_bound", 1e-12, geodesic_bounds},
      {"geometry.arrival_causality", 1e-12, arrival_causality},
      {"evolve.operator_symmetry", 1e-12, operator_symmetry},
      {"evolve.energy_drift", 1e-6, energy_drift},
      {"evolve.finite_speed", 3.0, finite_speed},
      {"dsl.roundtrip", 0.0, dsl_roundtrip},
      {"dsl.deterministic", 0.0, dsl_deterministic},
  };
  return r;
}

}  // namespace

std::vector<std::string> invariant_ids() {
  std::vector<std::string> out;
  for (const auto& i : registry()) out.push_back(i.id);
  return out;
}

std::vector<InvariantResult> run_invariants(const VerifyOptions& opt) {
  std::optional<std::regex> re;
  if (!opt.filter.empty()) {
    try {
      re.emplace(opt.filter);
    } catch (const std::regex_error& e) {
      throw std::invalid_argument("invalid filter regex '" + opt.filter + "': " + e.what());
    }
  }
  std::vector<InvariantResult> out;
  std::size_t index = 0;
  for (const auto& inv : registry()) {
    ++index;
    if (re && !std::regex_match(inv.id, *re)) continue;
    InvariantResult r;
    r.id = inv.id;
    r.module = inv.id.substr(0, inv.id.find('.'));
    r.tolerance = inv.tolerance;
    // Each invariant gets its own stream so filtering does not change results.
    Rng rng(opt.seed + 0x9e3779b97f4a7c15ULL * index);
    Check c;
    try {
      inv.run(c, rng, opt);
      r.residual = c.residual;
      r.detail = c.detail;
      r.pass = c.residual <= inv.tolerance;
    } catch (const std::exception& e) {
      r.residual = std::numeric_limits<double>::infinity();
      r.detail = std::string("exception: ") + e.what();
      r.pass = false;
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_invariant_table(const std::vector<InvariantResult>& rows) {
  std::size_t w = 9;
  for (const auto& r : rows) w = std::max(w, r.id.size());
  std::ostringstream os;
  auto pad = [](std::string s, std::size_t n) {
    s.resize(std::max(n, s.size()), ' ');
    return s;
  };
  os << pad("invariant", w) << "  " << pad("module", 9) << "  " << pad("residual", 24) << "  " << pad("tolerance", 24)
     << "  result\n";
  for (const auto& r : rows) {
    os << pad(r.id, w) << "  " << pad(r.module, 9) << "  " << pad(format_double(r.residual), 24) << "  "
       << pad(format_double(r.tolerance), 24) << "  " << (r.pass ? "PASS" : "FAIL");
    if (!r.pass && !r.detail.empty()) os << "  (" << r.detail << ")";
    os << "\n";
  }
  return os.str();
}

std::string random_expression_source(std::mt19937_64& rng, int depth) {
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  auto sp = [&] { return pick(3) == 0 ? std::string(" ") : std::string(); };
  if (depth <= 0 || pick(4) == 0) {
    switch (pick(6)) {
      case 0:
        return std::to_string(pick(100));
      case 1: {
        std::ostringstream os;
        os << pick(1000) << "." << pick(1000);
        return os.str();
      }
      case 2: {
        std::ostringstream os;
        os << (1 + pick(9)) << "e" << (pick(2) ? "-" : "") << pick(12);
        return os.str();
      }
      case 3:
        return pick(2) ? "pi" : "e";
      default:
        return std::string(1, "xyz"[pick(3)]);
    }
  }
  auto atom = [&](int d) {
    const std::string s = random_expression_source(rng, d);
    const bool simple = std::all_of(s.begin(), s.end(), [](char ch) { return std::isalnum(static_cast<unsigned char>(ch)) || ch == '.'; });
    return simple ? s : "(" + s + ")";
  };
  static const char* unary_fns[] = {"sin", "cos", "tan", "exp", "log", "sqrt", "abs", "tanh"};
  static const char* binary_fns[] = {"min", "max", "pow"};
  switch (pick(7)) {
    case 0:
      return random_expression_source(rng, depth - 1) + sp() + "+" + sp() + random_expression_source(rng, depth - 1);
    case 1:
      return random_expression_source(rng, depth - 1) + sp() + "-" + sp() + atom(depth - 1);
    case 2:
      return atom(depth - 1) + sp() + (pick(2) ? "*" : "/") + sp() + atom(depth - 1);
    case 3:
      return "-" + sp() + atom(depth - 1);
    case 4:
      return atom(depth - 1) + sp() + "^" + sp() + (pick(3) == 0 ? "-" : "") + atom(depth - 1);
    case 5:
      return std::string(unary_fns[pick(8)]) + "(" + sp() + random_expression_source(rng, depth - 1) + sp() + ")";
    default:
      return std::string(binary_fns[pick(3)]) + "(" + random_expression_source(rng, depth - 1) + "," + sp() +
             random_expression_source(rng, depth - 1) + ")";
  }
}

}  // namespace velmat
