#pragma once

// Semi-discretisation of i dPsi/dt = D Psi on a cell-centred grid and explicit
// time stepping.

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "grid.hpp"
#include "systems.hpp"

namespace velmat {

/// k x k matrices sampled on every node, stored only at the union of their
/// nonzero positions (and once when identical on all nodes).
struct SparseMatrixField {
  std::size_t k = 0;
  std::vector<std::uint16_t> row, col;  // sparsity pattern
  std::vector<Complex> values;          // nnz per node, or nnz total when constant
  bool constant = true;

  std::size_t nnz() const { return row.size(); }
  const Complex* at(std::size_t node) const { return values.data() + (constant ? 0 : node * nnz()); }
  /// y += M(node) x
  void multiply_add(std::size_t node, const Complex* x, Complex* y) const;
};

/// Discrete operator
///   D Psi = E^{-1} [ -(i/2) sum_j (A^j d_j Psi + d_j (A^j Psi)) + V Psi ]
/// with antisymmetric central differences d_j (2nd or 4th order) and zero
/// values outside the grid and on nodes outside the domain.
class DiscreteOperator {
 public:
  DiscreteOperator(const CoefficientSystem& sys, const Grid& grid, int order = 2);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t k() const noexcept { return k_; }
  int order() const noexcept { return order_; }
  std::size_t size() const noexcept { return grid_.size() * k_; }
  const std::vector<char>& valid() const noexcept { return valid_; }

  void apply(std::span<const Complex> psi, std::span<Complex> out) const;
  std::vector<Complex> apply(std::span<const Complex> psi) const;

  /// Pointwise <psi, E psi> at a node.
  double density(std::span<const Complex> psi, std::size_t node) const;
  /// h^d sum_n <psi(n), E(n) psi(n)>  (uniform cell weights).
  double energy(std::span<const Complex> psi) const;
  /// h^d sum_n <u(n), E(n) v(n)>.
  Complex inner(std::span<const Complex> u, std::span<const Complex> v) const;
  /// E(node) applied to a k-vector.
  void apply_E(std::size_t node, const Complex* x, Complex* y) const;

 private:
  Grid grid_;
  std::size_t k_;
  int order_;
  std::vector<char> valid_;
  SparseMatrixField E_, Einv_, V_;
  std::vector<SparseMatrixField> A_;
  mutable std::vector<Complex> q_, w_;  // scratch; apply is not reentrant per instance
};

struct WaveState {
  Grid grid;
  std::size_t k = 0;
  std::vector<Complex> psi;  // node-major: psi[node * k + c]
  double t = 0.0;
};

/// comps * exp(-|x - center|^2 / (2 sigma^2)) on every valid node.
WaveState gaussian_pulse(const DiscreteOperator& op, std::span<const double> center, double sigma,
                         std::span<const Complex> comps);

/// dt = cfl * min_h / max_nodes sqrt(lambda_max M). Throws NumericalError when
/// M vanishes on the whole grid.
double cfl_dt(const CoefficientSystem& sys, const Grid& grid, double cfl);

struct SupportBox {
  bool empty = true;
  std::array<double, 3> lo{}, hi{};
  std::array<std::size_t, 3> lo_index{}, hi_index{};
};

/// Smallest box of nodes with density >= threshold^2 * reference_density.
SupportBox support_box(const DiscreteOperator& op, std::span<const Complex> psi, double threshold,
                       double reference_density);

double max_density(const DiscreteOperator& op, std::span<const Complex> psi);

enum class Integrator { rk4, midpoint };

struct EvolveOptions {
  double T = 1.0;
  double cfl = 0.4;
  double dt = 0.0;  // 0: use cfl_dt
  double support_threshold = 1e-8;
  Integrator integrator = Integrator::rk4;
  std::size_t log_every = 0;  // 0: max(1, steps / 1000)
  std::vector<std::size_t> probes;
  double probe_threshold = 1e-8;
};

struct LogEntry {
  double t = 0.0;
  double energy = 0.0;
  SupportBox support;
  double boundary_margin = 0.0;  // distance from the support box to the grid edge
  double max_abs = 0.0;
};

struct EvolutionLog {
  std::vector<LogEntry> entries;
  double dt = 0.0;
  std::size_t steps = 0;
  double max_relative_energy_drift = 0.0;
  bool boundary_contaminated = false;
  std::vector<double> arrival;  // per probe; +inf if never reached
};

/// Integrates dPsi/dt = -i D Psi from state.t to state.t + T. Throws
/// NumericalError with the step index if the state stops being finite.
EvolutionLog integrate(const DiscreteOperator& op, const CoefficientSystem& sys, WaveState& state,
                       const EvolveOptions& opt);

/// First time the density at each probe node reaches probe_threshold^2 times
/// the initial maximum density (linear interpolation between steps).
std::vector<double> arrival_time(const DiscreteOperator& op, const CoefficientSystem& sys, const WaveState& state0,
                                 std::span<const std::size_t> probes, double threshold, double T, double cfl = 0.4);

}  // namespace velmat
