#include <cmath>
#include <random>

#include "diagnostics.hpp"
#include "doctest.h"
#include "errors.hpp"
#include "helpers.hpp"
#include "oracles.hpp"
#include "velocity.hpp"

using namespace velmat;
using testing_helpers::box;
using testing_helpers::mexpr;
using testing_helpers::unbounded;

namespace {

// M_jl = Tr(E^{-1} A^j E^{-1} A^l), the cyclic rearrangement of the
// defining trace, with E^{-1} by Gauss-Jordan.
SymMatrix velocity_oracle(const CoefficientSystem& sys, std::span<const double> x) {
  const auto raw = sys.eval_raw(x);
  const Matrix einv = oracle::inverse(raw.E);
  const int d = sys.dim();
  SymMatrix m(d);
  for (int j = 0; j < d; ++j)
    for (int l = 0; l < d; ++l) m(j, l) = (einv * raw.A[j] * einv * raw.A[l]).trace().real();
  return m;
}

double max_diff(const SymMatrix& a, const SymMatrix& b) {
  double m = 0.0;
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

}  // namespace

TEST_CASE("telegraph: M = 2 / (L C)") {
  const auto sys = telegraph(box({0}, {1}), "1 + x", "2 - x^2");
  for (double xv : {0.1, 0.5, 0.9}) {
    const double x[] = {xv};
    const double expect = 2.0 / ((1 + xv) * (2 - xv * xv));
    CHECK(velocity_matrix(sys, x)(0, 0) == doctest::Approx(expect).epsilon(1e-14));
    const double n[] = {1.0};
    CHECK(char_speed(sys, x, n) == doctest::Approx(std::sqrt(expect / 2)).epsilon(1e-14));
  }
}

TEST_CASE("maxwell isotropic: M = 4 / (eps mu) I") {
  const auto sys = maxwell_isotropic(box({-1, -1, -1}, {1, 1, 1}), "2 + x", "1 + y^2");
  const double x[] = {0.3, 0.6, -0.1};
  const double c2 = 1.0 / (2.3 * 1.36);
  const SymMatrix M = velocity_matrix(sys, x);
  CHECK(max_diff(M, SymMatrix::identity(3, 4 * c2)) < 1e-13);
  CHECK(max_diff(M, velocity_oracle(sys, x)) < 1e-13);
  const double n[] = {0.6, 0.0, 0.8};
  CHECK(char_speed(sys, x, n) == doctest::Approx(std::sqrt(c2)).epsilon(1e-12));
}

TEST_CASE("elastic isotropic (1, 1, 0.3): M = 4 I") {
  const auto sys = elastic_isotropic(box({0, 0, 0}, {1, 1, 1}), "1", "1", "0.3");
  const double x[] = {0.2, 0.4, 0.6};
  CHECK(max_diff(velocity_matrix(sys, x), SymMatrix::identity(3, 4.0)) < 1e-12);
  CHECK(max_diff(velocity_matrix_structured(sys, x), SymMatrix::identity(3, 4.0)) < 1e-12);
}

TEST_CASE("structured path: anisotropic Maxwell") {
  const std::vector<std::string> eps{"1", "0", "0", "2", "0", "3"}, mu{"1", "0", "0", "1", "0", "1"};
  const auto sys = maxwell_anisotropic(box({0, 0, 0}, {1, 1, 1}), eps, mu);
  const double x[] = {0.5, 0.5, 0.5};
  CHECK(velocity_matrix_structured(sys, x)(0, 0) == doctest::Approx(5.0 / 3.0).epsilon(1e-14));
  CHECK(max_diff(velocity_matrix_structured(sys, x), velocity_matrix(sys, x)) < 1e-13);
  CHECK(max_diff(velocity_matrix(sys, x), velocity_oracle(sys, x)) < 1e-13);
  CHECK(max_diff(velocity_matrix_structured(maxwell_isotropic(box({0, 0, 0}, {1, 1, 1}), "1", "1"), x),
                 SymMatrix::identity(3, 4.0)) < 1e-14);
  CHECK_THROWS_AS(velocity_matrix_structured(telegraph(box({0}, {1}), "1", "1"), x), UnsupportedError);
}

TEST_CASE("general path agrees with the trace oracle on a custom system") {
  const auto sys = custom_system(box({0, 0}, {1, 1}), 2, mexpr({{"2 + x", "0.3"}, {"0.3", "1 + y"}}),
                                 {mexpr({{"1", "x"}, {"x", "-1"}}), mexpr({{"0", "1 + y"}, {"1 + y", "x*y"}})}, {});
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int t = 0; t < 50; ++t) {
    const double x[] = {u(rng), u(rng)};
    const SymMatrix M = velocity_matrix(sys, x);
    CHECK(max_diff(M, velocity_oracle(sys, x)) < 1e-12 * M.norm());
    CHECK(M.eigenvalues().front() >= -1e-12 * M.norm());
  }
}

TEST_CASE("char_speed sandwich and Dirac speed") {
  const auto dirac = dirac_free(unbounded(box({-2, -2, -2}, {2, 2, 2})), 0.1);
  const double x[] = {1.0, 0.3, -0.5};
  CHECK(max_diff(velocity_matrix(dirac, x), SymMatrix::identity(3, 4.0)) < 1e-14);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  for (int t = 0; t < 20; ++t) {
    double n[] = {g(rng), g(rng), g(rng)};
    const double len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
    for (double& v : n) v /= len;
    CHECK(char_speed(dirac, x, n) == doctest::Approx(1.0).epsilon(1e-13));
    // Exact speed via the explicit symbol and the oracle norm.
    const Matrix s = symbol(dirac, x, n).matrix();
    CHECK(oracle::spectral_norm(s) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("Chernoff bracket and Fattorini radius") {
  const auto tel = canonicalize(telegraph(box({0}, {1}), "2", "2"));
  const double x1[] = {0.5};
  const auto bt = chernoff_c(tel, x1);
  CHECK(bt.lower == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(bt.upper == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(fattorini_r(telegraph(box({0}, {1}), "1", "1"), x1) == doctest::Approx(1.0));

  const double x3[] = {0.5, 0.5, 0.5};
  const auto mw = maxwell_isotropic(box({0, 0, 0}, {1, 1, 1}), "1", "1");
  const auto bm = chernoff_c(mw, x3);
  CHECK(bm.lower == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bm.upper == doctest::Approx(std::min(2.0, std::sqrt(3.0))).epsilon(1e-12));
  CHECK(fattorini_r(mw, x3) == doctest::Approx(1.0).epsilon(1e-12));

  // sqrt(lambda_max M) = 2 and sqrt(3) r = sqrt(3): the tighter end wins.
  const auto dirac = dirac_free(unbounded(box({-2, -2, -2}, {2, 2, 2})), 0.1);
  const double xd[] = {1.0, 0.0, 0.0};
  const auto bd = chernoff_c(dirac, xd);
  CHECK(bd.lower == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bd.upper == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
  CHECK(fattorini_r(dirac, xd) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(chernoff_upper(dirac, xd) == bd.upper);
}

TEST_CASE("radial envelope") {
  const auto lin = custom_system(unbounded(box({-1}, {1})), 2, mexpr({{"1", "0"}, {"0", "1"}}),
                                 {mexpr({{"0", "x"}, {"x", "0"}})}, {});
  const std::vector<double> radii{0.5, 1.0, 2.0, 4.0, 8.0};
  const auto b = radial_envelope(lin, radii);
  for (std::size_t i = 0; i < radii.size(); ++i) CHECK(b[i] == doctest::Approx(radii[i]).epsilon(1e-9));

  const auto quad = custom_system(unbounded(box({-1}, {1})), 2, mexpr({{"1", "0"}, {"0", "1"}}),
                                  {mexpr({{"0", "1 + x^2"}, {"1 + x^2", "0"}})}, {});
  const auto bq = radial_envelope(quad, radii);
  for (std::size_t i = 0; i < radii.size(); ++i) CHECK(bq[i] == doctest::Approx(1 + radii[i] * radii[i]).epsilon(1e-9));

  const auto flat = radial_envelope(dirac_free(unbounded(box({-2, -2, -2}, {2, 2, 2})), 0.1), radii);
  for (double v : flat) CHECK(v == doctest::Approx(std::sqrt(3.0)));

  CHECK_THROWS_AS(radial_envelope(telegraph(box({0}, {1}), "1", "1"), radii), UnsupportedError);
}

TEST_CASE("majorant") {
  const std::size_t n64[] = {64};
  SUBCASE("constant M") {
    const auto sys = telegraph(box({0}, {1}), "0.5", "2");  // M = 2
    const auto f = majorant(sample_velocity_field(sys, Grid::cell_centered(sys.domain(), n64)), 0.1);
    CHECK(f.eps_reg == doctest::Approx(2e-12));
    for (std::size_t i = 0; i < f.M.size(); ++i)
      CHECK(f.majorant[i](0, 0) == doctest::Approx(1.1 * 2.0 + 2e-12).epsilon(1e-14));
  }
  SUBCASE("M = 2 x^2 is dominated node-wise") {
    const auto sys = custom_system(box({-1}, {1}), 2, mexpr({{"1", "0"}, {"0", "1"}}),
                                   {mexpr({{"0", "x"}, {"x", "0"}})}, {});
    const auto f = majorant(sample_velocity_field(sys, Grid::cell_centered(sys.domain(), n64)), 0.1);
    for (std::size_t i = 0; i < f.M.size(); ++i) {
      const double xv = f.grid.point(i)[0];
      CHECK(f.M[i](0, 0) == doctest::Approx(2 * xv * xv).epsilon(1e-13));
      CHECK(f.majorant[i](0, 0) >= f.M[i](0, 0));
    }
    CHECK(majorant_margin(f) >= 0.0);
  }
  SUBCASE("M = 0 gives eps_reg I and a warning") {
    diag::take_warnings();
    const auto sys = custom_system(box({0, 0}, {1, 1}), 2, mexpr({{"1", "0"}, {"0", "1"}}),
                                   {mexpr({{"0", "0"}, {"0", "0"}}), mexpr({{"0", "0"}, {"0", "0"}})}, {});
    const std::size_t n[] = {16, 16};
    const auto f = majorant(sample_velocity_field(sys, Grid::cell_centered(sys.domain(), n)), 0.1);
    for (const auto& m : f.majorant) CHECK(max_diff(m, SymMatrix::identity(2, f.eps_reg)) == 0.0);
    CHECK(f.degenerate_nodes == 256);
    CHECK_FALSE(diag::take_warnings().empty());
  }
  SUBCASE("bad slack") {
    const auto sys = telegraph(box({0}, {1}), "1", "1");
    CHECK_THROWS(majorant(sample_velocity_field(sys, Grid::cell_centered(sys.domain(), n64)), 1.5));
  }
}

TEST_CASE("scaling A by s multiplies M by s^2") {
  for (double s : {0.5, 3.0, -2.0}) {
    const std::string a = std::to_string(s);
    const auto base = custom_system(box({0, 0}, {1, 1}), 2, mexpr({{"1 + x", "0"}, {"0", "2"}}),
                                    {mexpr({{"1", "y"}, {"y", "0"}}), mexpr({{"0", "1"}, {"1", "x"}})}, {});
    const auto scaled = custom_system(
        box({0, 0}, {1, 1}), 2, mexpr({{"1 + x", "0"}, {"0", "2"}}),
        {mexpr({{a.c_str(), (a + "*y").c_str()}, {(a + "*y").c_str(), "0"}}),
         mexpr({{"0", a.c_str()}, {a.c_str(), (a + "*x").c_str()}})},
        {});
    const double x[] = {0.3, 0.8};
    const SymMatrix m1 = velocity_matrix(base, x), m2 = velocity_matrix(scaled, x);
    CHECK(max_diff(s * s * m1, m2) < 1e-12 * m2.norm());
  }
}
