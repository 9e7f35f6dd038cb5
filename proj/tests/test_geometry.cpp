#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "errors.hpp"
#include "geometry.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace velmat;
using testing_helpers::box;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

MetricField constant_metric(const Grid& g, const SymMatrix& G) {
  MetricField m;
  m.grid = g;
  m.G.assign(g.size(), G);
  m.passable.assign(g.size(), 1);
  return m;
}

SymMatrix sym2(double a, double b, double c) {
  SymMatrix s(2);
  s(0, 0) = a;
  s(0, 1) = s(1, 0) = b;
  s(1, 1) = c;
  return s;
}

double edge_length(const MetricField& m, std::size_t u, std::size_t v) {
  const Point pu = m.grid.point(u), pv = m.grid.point(v);
  const int d = m.grid.dim();
  double dx[3] = {};
  for (int a = 0; a < d; ++a) dx[a] = pv[a] - pu[a];
  double q = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) q += dx[i] * 0.5 * (m.G[u](i, j) + m.G[v](i, j)) * dx[j];
  return std::sqrt(q);
}

// Bellman-Ford over the same lattice graph: relax every edge until nothing
// changes.
std::vector<double> bellman_ford(const MetricField& m, std::size_t source, Stencil st) {
  const Grid& g = m.grid;
  std::vector<double> dist(g.size(), kInf);
  dist[source] = 0.0;
  const auto offs = stencil_offsets(g.dim(), st);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t u = 0; u < g.size(); ++u) {
      if (!std::isfinite(dist[u])) continue;
      const auto iu = g.unravel(u);
      for (const auto& o : offs) {
        long c[3];
        bool inside = true;
        for (int a = 0; a < 3; ++a) {
          c[a] = static_cast<long>(iu[a]) + o[a];
          if (c[a] < 0 || c[a] >= static_cast<long>(g.nodes(a))) inside = false;
        }
        if (!inside) continue;
        const std::size_t v = g.index(c[0], c[1], c[2]);
        const double cand = dist[u] + edge_length(m, u, v);
        if (cand < dist[v]) {
          dist[v] = cand;
          changed = true;
        }
      }
    }
  }
  return dist;
}

}  // namespace

TEST_CASE("ray completeness examples") {
  RayProblem flat;
  flat.speed = [](double) { return 1.0; };
  flat.start = 0.0;
  CHECK(ray_completeness(flat).classification == Classification::certified_divergent);

  RayProblem sq;
  sq.speed = [](double t) { return t * t; };
  sq.start = 1.0;
  const auto v = ray_completeness(sq);
  CHECK(v.classification == Classification::likely_convergent);
  // Exact tail: integral from 1 to T of t^-2 = 1 - 1/T.
  for (std::size_t i = 0; i < v.cutoffs.size(); ++i)
    CHECK(v.integrals[i] == doctest::Approx(1.0 - 1.0 / v.cutoffs[i]).epsilon(1e-9));
  CHECK(v.parameters.at("extrapolated_limit").get<double>() == doctest::Approx(1.0).epsilon(1e-6));

  RayProblem lin;
  lin.speed = [](double t) { return t; };
  lin.start = 0.5;
  lin.end = 0.0;
  CHECK(ray_completeness(lin).classification == Classification::certified_divergent);

  RayProblem bad = flat;
  bad.speed = [](double t) { return 1.0 - t; };
  CHECK_THROWS_AS(ray_completeness(bad), DomainError);
}

TEST_CASE("partial integrals are nondecreasing and match closed forms") {
  for (double p : {0.5, 0.9, 1.0, 1.5, 2.0}) {
    RayProblem r;
    r.speed = [p](double d) { return std::pow(d, p); };
    r.start = 0.5;
    r.end = 0.0;
    const auto v = ray_completeness(r);
    for (std::size_t i = 0; i < v.cutoffs.size(); ++i) {
      const double t = v.cutoffs[i];
      const double exact = p == 1.0 ? std::log(0.5 / t) : (std::pow(0.5, 1 - p) - std::pow(t, 1 - p)) / (1 - p);
      CHECK(v.integrals[i] == doctest::Approx(exact).epsilon(1e-8));
      if (i) CHECK(v.integrals[i] >= v.integrals[i - 1]);
    }
    const bool divergent = is_divergent(v.classification);
    CHECK(divergent == power_law_divergent(p));
    if (p == 1.0) CHECK(v.classification == Classification::certified_divergent);
    if (p < 1.0) CHECK(v.classification == Classification::likely_convergent);
  }
  CHECK(power_law_divergent(1.0));
  CHECK(power_law_divergent(2.0));
  CHECK_FALSE(power_law_divergent(0.999));
}

TEST_CASE("classification is invariant under scaling the speed") {
  for (double p : {0.5, 1.0, 2.0}) {
    RayProblem r;
    r.start = 0.5;
    r.end = 0.0;
    r.speed = [p](double d) { return std::pow(d, p); };
    const auto base = ray_completeness(r).classification;
    for (double a : {1e-3, 0.5, 7.0, 1e4}) {
      r.speed = [p, a](double d) { return a * std::pow(d, p); };
      CHECK(ray_completeness(r).classification == base);
    }
  }
}

TEST_CASE("lattice geodesic: unit metric, 8-neighbour stencil") {
  const std::array<std::size_t, 3> n{8, 8, 1};
  const Grid g(2, n, {0, 0, 0}, {1, 1, 1});
  const auto m = constant_metric(g, SymMatrix::identity(2));
  const std::size_t src[] = {0};
  const auto f = lattice_geodesic(m, src);
  CHECK(f.value[g.index(3, 4)] == doctest::Approx(3 * std::sqrt(2.0) + 1).epsilon(1e-14));
  CHECK(f.value[0] == 0.0);
  const auto bf = bellman_ford(m, 0, Stencil::standard);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(f.value[i] == doctest::Approx(bf[i]).epsilon(1e-14));
  const std::size_t none[] = {0};
  CHECK_THROWS(lattice_geodesic(m, std::span<const std::size_t>(none, 0)));
}

TEST_CASE("lattice geodesic agrees with Bellman-Ford on a variable anisotropic metric") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.2, 2.0), c(-0.3, 0.3);
  const std::array<std::size_t, 3> n{9, 7, 1};
  const Grid g(2, n, {0, 0, 0}, {0.1, 0.2, 1});
  MetricField m = constant_metric(g, SymMatrix::identity(2));
  for (auto& G : m.G) G = sym2(u(rng), c(rng), u(rng));
  for (Stencil st : {Stencil::standard, Stencil::extended}) {
    const std::size_t src[] = {g.index(4, 3)};
    const auto f = lattice_geodesic(m, src, st);
    const auto bf = bellman_ford(m, src[0], st);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(f.value[i] == doctest::Approx(bf[i]).epsilon(1e-13));
  }
}

TEST_CASE("anisotropic diagonal metric") {
  // G = diag(1/4, 1): the x-axis is traversed at speed 2.
  const std::array<std::size_t, 3> n{33, 9, 1};
  const Grid g(2, n, {0, -0.25, 0}, {1.0 / 32, 1.0 / 16, 1});
  const auto m = constant_metric(g, sym2(0.25, 0, 1));
  const std::size_t src[] = {g.index(0, 4)};
  const auto f = lattice_geodesic(m, src);
  CHECK(f.value[g.index(32, 4)] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("stencil consistency for constant metrics") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.8, 1.25), c(-0.1, 0.1);
  const std::array<std::size_t, 3> n{41, 41, 1};
  const Grid g(2, n, {0, 0, 0}, {1, 1, 1});
  for (int t = 0; t < 5; ++t) {
    const SymMatrix G = sym2(u(rng), c(rng), u(rng));
    const auto m = constant_metric(g, G);
    const std::size_t src[] = {g.index(20, 20)};
    const auto f = lattice_geodesic(m, src);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (i == src[0]) continue;
      const Point p = g.point(i);
      const double dx[] = {p[0] - 20, p[1] - 20};
      const double exact = std::sqrt(G.quad(dx));
      // Isotropic bound holds exactly only for G = I; for mild anisotropy
      // the ratio stays above 1 and within the anisotropic stencil angle.
      CHECK(f.value[i] / exact >= 1.0 - 1e-12);
      CHECK(f.value[i] / exact <= 1.25);
    }
  }
  const auto m = constant_metric(g, SymMatrix::identity(2));
  const std::size_t src[] = {g.index(20, 20)};
  const auto f = lattice_geodesic(m, src);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i == src[0]) continue;
    const Point p = g.point(i);
    const double exact = std::hypot(p[0] - 20, p[1] - 20);
    CHECK(f.value[i] / exact <= 1.0 / std::cos(M_PI / 8) + 1e-9);
  }
}

TEST_CASE("3-D 26-neighbour stencil") {
  const std::array<std::size_t, 3> n{9, 9, 9};
  const Grid g(3, n, {0, 0, 0}, {1, 1, 1});
  MetricField m;
  m.grid = g;
  m.G.assign(g.size(), SymMatrix::identity(3));
  m.passable.assign(g.size(), 1);
  const std::size_t src[] = {0};
  const auto f = lattice_geodesic(m, src);
  CHECK(f.value[g.index(2, 2, 2)] == doctest::Approx(2 * std::sqrt(3.0)));
  CHECK(f.value[g.index(3, 1, 0)] == doctest::Approx(std::sqrt(2.0) + 2));
}

TEST_CASE("metric monotonicity") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.2, 2.0), c(-0.3, 0.3), e(0.0, 1.0);
  const std::array<std::size_t, 3> n{15, 15, 1};
  const Grid g(2, n, {0, 0, 0}, {1, 1, 1});
  MetricField small = constant_metric(g, SymMatrix::identity(2)), big = small;
  for (std::size_t i = 0; i < g.size(); ++i) {
    small.G[i] = sym2(u(rng), c(rng), u(rng));
    big.G[i] = small.G[i] + sym2(e(rng), 0.0, e(rng));
  }
  const std::size_t src[] = {g.index(7, 7)};
  const auto a = lattice_geodesic(small, src), b = lattice_geodesic(big, src);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(b.value[i] >= a.value[i]);
}

TEST_CASE("distance field invariants and tie-break determinism") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  const std::array<std::size_t, 3> n{20, 20, 1};
  const Grid g(2, n, {0, 0, 0}, {0.05, 0.05, 1});
  MetricField m = constant_metric(g, SymMatrix::identity(2));
  for (auto& G : m.G) G = sym2(u(rng), 0.0, u(rng));
  const std::size_t fwd[] = {g.index(2, 3), g.index(15, 11), g.index(9, 18)};
  const std::size_t rev[] = {fwd[2], fwd[1], fwd[0]};
  const auto a = lattice_geodesic(m, fwd), b = lattice_geodesic(m, rev);
  CHECK(a.value == b.value);
  for (auto s : fwd) CHECK(a.value[s] == 0.0);
  const auto offs = stencil_offsets(2, Stencil::standard);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto ij = g.unravel(i);
    for (const auto& o : offs) {
      const long x = static_cast<long>(ij[0]) + o[0], y = static_cast<long>(ij[1]) + o[1];
      if (x < 0 || y < 0 || x >= 20 || y >= 20) continue;
      const std::size_t j = g.index(x, y);
      CHECK(std::abs(a.value[i] - a.value[j]) <= edge_length(m, i, j) + 1e-9);
    }
  }
}

TEST_CASE("eikonal arrival") {
  const std::array<std::size_t, 3> n1{101, 1, 1};
  const Grid g1(1, n1, {0, 0, 0}, {0.01, 1, 1});
  const std::vector<double> speed(g1.size(), 2.0);
  const std::vector<char> valid(g1.size(), 1);
  const std::size_t src[] = {0};
  const auto a = eikonal_arrival(g1, speed, valid, src);
  for (std::size_t i = 0; i < g1.size(); ++i) CHECK(a.value[i] == doctest::Approx(g1.point(i)[0] / 2).epsilon(1e-12));

  // Telegraph with c = 1: <n, M n> = 2, arrival |x| / sqrt(2).
  const auto sys = telegraph(box({-1}, {1}), "1", "1");
  const std::size_t n256[] = {256};
  const auto field = sample_velocity_field(sys, Grid::cell_centered(sys.domain(), n256));
  const std::size_t mid[] = {128};
  const auto t = eikonal_arrival(field, mid);
  for (std::size_t i = 0; i < 256; ++i) {
    const double dx = std::abs(field.grid.point(i)[0] - field.grid.point(128)[0]);
    CHECK(t.value[i] == doctest::Approx(dx / std::sqrt(2.0)).epsilon(1e-12));
  }

  const std::array<std::size_t, 3> n2{8, 8, 1};
  const Grid g2(2, n2, {0, 0, 0}, {1, 1, 1});
  const std::vector<double> one(g2.size(), 1.0);
  const std::vector<char> v2(g2.size(), 1);
  const auto b = eikonal_arrival(g2, one, v2, src);
  CHECK(b.value[g2.index(3, 4)] == doctest::Approx(3 * std::sqrt(2.0) + 1));

  std::vector<double> blocked(g1.size(), 1.0);
  blocked[50] = 0.0;
  const auto c = eikonal_arrival(g1, blocked, valid, src);
  CHECK(std::isinf(c.value[60]));
}

TEST_CASE("boundary distance probe") {
  const std::array<std::size_t, 3> n{1u << 16, 1, 1};
  const double h = 1.0 / static_cast<double>(n[0]);
  const Grid g(1, n, {0.5 * h, 0, 0}, {h, 1, 1});
  const BoxDomain dom = box({0}, {1});
  std::vector<double> margins;
  for (double m = 0.25; m >= 0.75 * h; m *= 0.5) margins.push_back(m);

  SUBCASE("constant metric: finite limit") {
    const auto metric = constant_metric(g, SymMatrix::identity(1, 0.5));
    const auto r = boundary_distance_probe(metric, dom, {0.5, 0, 0}, margins);
    CHECK(r.verdict.classification == Classification::likely_convergent);
    for (std::size_t i = 1; i < r.distances.size(); ++i) CHECK(r.distances[i] >= r.distances[i - 1]);
    CHECK(r.verdict.parameters.at("extrapolated_limit").get<double>() ==
          doctest::Approx(0.5 / std::sqrt(2.0)).epsilon(1e-3));
  }
  SUBCASE("c = x(1 - x): logarithmic growth") {
    MetricField metric = constant_metric(g, SymMatrix::identity(1));
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = g.point(i)[0], c = x * (1 - x);
      metric.G[i] = SymMatrix::identity(1, 1.0 / (2 * c * c));
    }
    const auto r = boundary_distance_probe(metric, dom, {0.5, 0, 0}, margins);
    CHECK(is_divergent(r.verdict.classification));
    // Quadrature oracle for the distance to the margin set.
    for (std::size_t i = 0; i + 2 < r.margins.size(); ++i) {
      const double m = r.margins[i];
      const double exact = oracle::simpson([](double x) { return 1.0 / (std::sqrt(2.0) * x * (1 - x)); }, m, 0.5);
      CHECK(r.distances[i] == doctest::Approx(exact).epsilon(0.02));
    }
  }
  SUBCASE("margin wider than the half-width") {
    const auto metric = constant_metric(g, SymMatrix::identity(1));
    const double too_big[] = {0.6, 0.1};
    CHECK_THROWS_AS(boundary_distance_probe(metric, dom, {0.5, 0, 0}, too_big), ScenarioError);
  }
}
