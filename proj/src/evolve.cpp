#include "evolve.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "diagnostics.hpp"
#include "errors.hpp"
#include "velocity.hpp"

namespace velmat {

void SparseMatrixField::multiply_add(std::size_t node, const Complex* x, Complex* y) const {
  const Complex* v = at(node);
  for (std::size_t e = 0; e < row.size(); ++e) y[row[e]] += v[e] * x[col[e]];
}

namespace {

/// Collects per-node k x k matrices in two passes: the first finds the
/// union sparsity pattern and whether all nodes agree, the second stores.
class FieldBuilder {
 public:
  explicit FieldBuilder(std::size_t k) : k_(k), mask_(k * k, 0) {}

  void observe(const Matrix& m) {
    if (!seen_) {
      first_ = m;
      seen_ = true;
    } else if (constant_) {
      for (std::size_t i = 0; i < k_ * k_; ++i)
        if (m.data()[i] != first_.data()[i]) {
          constant_ = false;
          break;
        }
    }
    for (std::size_t i = 0; i < k_ * k_; ++i)
      if (m.data()[i] != Complex(0.0)) mask_[i] = 1;
  }

  SparseMatrixField start(std::size_t nodes) const {
    SparseMatrixField f;
    f.k = k_;
    f.constant = constant_;
    for (std::size_t i = 0; i < k_ * k_; ++i)
      if (mask_[i]) {
        f.row.push_back(static_cast<std::uint16_t>(i / k_));
        f.col.push_back(static_cast<std::uint16_t>(i % k_));
      }
    f.values.assign((constant_ ? 1 : nodes) * f.nnz(), Complex(0.0));
    if (constant_ && seen_) store(f, 0, first_);
    return f;
  }

  static void store(SparseMatrixField& f, std::size_t node, const Matrix& m) {
    Complex* v = f.values.data() + (f.constant ? 0 : node * f.nnz());
    for (std::size_t e = 0; e < f.nnz(); ++e) v[e] = m(f.row[e], f.col[e]);
  }

  bool constant() const { return constant_; }

 private:
  std::size_t k_;
  std::vector<char> mask_;
  Matrix first_;
  bool seen_ = false;
  bool constant_ = true;
};

struct NodeData {
  Matrix E, Einv, V;
  std::vector<Matrix> A;
};

NodeData node_data(const CoefficientSystem& sys, std::span<const double> x) {
  const Coefficients c = sys.eval(x);
  NodeData d;
  d.E = c.E.matrix();
  d.Einv = sys.canonical() ? Matrix::identity(sys.k()) : spd_inverse(c.E).matrix();
  d.V = c.V.matrix();
  for (const auto& a : c.A) d.A.push_back(a.matrix());
  return d;
}

}  // namespace

DiscreteOperator::DiscreteOperator(const CoefficientSystem& sys, const Grid& grid, int order)
    : grid_(grid), k_(sys.k()), order_(order) {
  if (order != 2 && order != 4) throw std::invalid_argument("difference order must be 2 or 4");
  if (grid.dim() != sys.dim()) throw ScenarioError("grid dimension does not match the system dimension");
  const std::size_t N = grid.size();
  valid_.assign(N, 0);
  std::size_t nvalid = 0;
  for (std::size_t n = 0; n < N; ++n) {
    const Point p = grid.point(n);
    if (sys.domain().contains(std::span<const double>(p.data(), grid.dim()))) {
      valid_[n] = 1;
      ++nvalid;
    }
  }
  if (nvalid == 0) throw ScenarioError("no grid node lies inside the domain");

  FieldBuilder bE(k_), bEi(k_), bV(k_);
  std::vector<FieldBuilder> bA(sys.dim(), FieldBuilder(k_));
  for (std::size_t n = 0; n < N; ++n) {
    if (!valid_[n]) continue;
    const Point p = grid.point(n);
    const NodeData d = node_data(sys, std::span<const double>(p.data(), grid.dim()));
    bE.observe(d.E);
    bEi.observe(d.Einv);
    bV.observe(d.V);
    for (int j = 0; j < sys.dim(); ++j) bA[j].observe(d.A[j]);
  }
  E_ = bE.start(N);
  Einv_ = bEi.start(N);
  V_ = bV.start(N);
  for (auto& b : bA) A_.push_back(b.start(N));
  bool all_constant = E_.constant && Einv_.constant && V_.constant;
  for (const auto& a : A_) all_constant = all_constant && a.constant;
  if (!all_constant) {
    for (std::size_t n = 0; n < N; ++n) {
      if (!valid_[n]) continue;
      const Point p = grid.point(n);
      const NodeData d = node_data(sys, std::span<const double>(p.data(), grid.dim()));
      if (!E_.constant) FieldBuilder::store(E_, n, d.E);
      if (!Einv_.constant) FieldBuilder::store(Einv_, n, d.Einv);
      if (!V_.constant) FieldBuilder::store(V_, n, d.V);
      for (int j = 0; j < sys.dim(); ++j)
        if (!A_[j].constant) FieldBuilder::store(A_[j], n, d.A[j]);
    }
  }
  q_.resize(N * k_);
  w_.resize(N * k_);
}

void DiscreteOperator::apply(std::span<const Complex> psi, std::span<Complex> out) const {
  const std::size_t N = grid_.size(), k = k_;
  if (psi.size() != N * k || out.size() != N * k) throw std::invalid_argument("apply: state size does not match the grid");
  std::fill(w_.begin(), w_.end(), Complex(0.0));
  const auto& shape = grid_.shape();
  std::vector<Complex> dpsi_buf(k);
  Complex* dpsi = dpsi_buf.data();
  for (int axis = 0; axis < grid_.dim(); ++axis) {
    const SparseMatrixField& A = A_[axis];
    if (A.nnz() == 0) continue;
    std::fill(q_.begin(), q_.end(), Complex(0.0));
    for (std::size_t n = 0; n < N; ++n)
      if (valid_[n]) A.multiply_add(n, psi.data() + n * k, q_.data() + n * k);

    const double h = grid_.spacing(axis);
    const long stride = static_cast<long>(grid_.stride(axis));
    const long len = static_cast<long>(shape[axis]);
    // Antisymmetric weights: d u_n = sum_o c_o (u_{n+o} - u_{n-o}).
    double c[2] = {1.0 / (2.0 * h), 0.0};
    int reach = 1;
    if (order_ == 4) {
      c[0] = 8.0 / (12.0 * h);
      c[1] = -1.0 / (12.0 * h);
      reach = 2;
    }
    std::size_t n = 0;
    for (std::size_t i2 = 0; i2 < shape[2]; ++i2)
      for (std::size_t i1 = 0; i1 < shape[1]; ++i1)
        for (std::size_t i0 = 0; i0 < shape[0]; ++i0, ++n) {
          if (!valid_[n]) continue;
          const long pos = static_cast<long>(axis == 0 ? i0 : axis == 1 ? i1 : i2);
          Complex* w = w_.data() + n * k;
          for (std::size_t a = 0; a < k; ++a) dpsi[a] = 0.0;
          for (int o = 1; o <= reach; ++o) {
            const double co = c[o - 1];
            if (pos + o < len) {
              const std::size_t m = static_cast<std::size_t>(static_cast<long>(n) + o * stride) * k;
              for (std::size_t a = 0; a < k; ++a) {
                dpsi[a] += co * psi[m + a];
                w[a] += co * q_[m + a];
              }
            }
            if (pos - o >= 0) {
              const std::size_t m = static_cast<std::size_t>(static_cast<long>(n) - o * stride) * k;
              for (std::size_t a = 0; a < k; ++a) {
                dpsi[a] -= co * psi[m + a];
                w[a] -= co * q_[m + a];
              }
            }
          }
          A.multiply_add(n, dpsi, w);
        }
  }
  // out = E^{-1} ( -(i/2) W + V psi )
  const Complex mhalf_i(0.0, -0.5);
  std::vector<Complex> r(k);
  for (std::size_t n = 0; n < N; ++n) {
    Complex* o = out.data() + n * k;
    if (!valid_[n]) {
      std::fill(o, o + k, Complex(0.0));
      continue;
    }
    for (std::size_t a = 0; a < k; ++a) r[a] = mhalf_i * w_[n * k + a];
    V_.multiply_add(n, psi.data() + n * k, r.data());
    std::fill(o, o + k, Complex(0.0));
    Einv_.multiply_add(n, r.data(), o);
  }
}

std::vector<Complex> DiscreteOperator::apply(std::span<const Complex> psi) const {
  std::vector<Complex> out(psi.size());
  apply(psi, out);
  return out;
}

void DiscreteOperator::apply_E(std::size_t node, const Complex* x, Complex* y) const {
  std::fill(y, y + k_, Complex(0.0));
  E_.multiply_add(node, x, y);
}

double DiscreteOperator::density(std::span<const Complex> psi, std::size_t node) const {
  if (!valid_[node]) return 0.0;
  Complex ex[16];
  std::vector<Complex> big;
  Complex* y = ex;
  if (k_ > 16) {
    big.resize(k_);
    y = big.data();
  }
  apply_E(node, psi.data() + node * k_, y);
  double acc = 0.0;
  for (std::size_t a = 0; a < k_; ++a) acc += (std::conj(psi[node * k_ + a]) * y[a]).real();
  return acc;
}

Complex DiscreteOperator::inner(std::span<const Complex> u, std::span<const Complex> v) const {
  std::vector<Complex> y(k_);
  Complex acc = 0.0;
  for (std::size_t n = 0; n < grid_.size(); ++n) {
    if (!valid_[n]) continue;
    apply_E(n, v.data() + n * k_, y.data());
    for (std::size_t a = 0; a < k_; ++a) acc += std::conj(u[n * k_ + a]) * y[a];
  }
  return acc * grid_.cell_volume();
}

double DiscreteOperator::energy(std::span<const Complex> psi) const {
  double acc = 0.0;
  for (std::size_t n = 0; n < grid_.size(); ++n) acc += density(psi, n);
  return acc * grid_.cell_volume();
}

WaveState gaussian_pulse(const DiscreteOperator& op, std::span<const double> center, double sigma,
                         std::span<const Complex> comps) {
  const Grid& g = op.grid();
  if (static_cast<int>(center.size()) != g.dim()) throw ScenarioError("pulse center has the wrong dimension");
  if (comps.size() != op.k())
    throw ScenarioError("pulse needs " + std::to_string(op.k()) + " components, got " + std::to_string(comps.size()));
  if (!(sigma > 0.0)) throw ScenarioError("pulse width sigma must be positive");
  WaveState s{g, op.k(), std::vector<Complex>(op.size()), 0.0};
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (!op.valid()[n]) continue;
    const Point p = g.point(n);
    double r2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) r2 += (p[a] - center[a]) * (p[a] - center[a]);
    const double amp = std::exp(-r2 / (2.0 * sigma * sigma));
    for (std::size_t c = 0; c < op.k(); ++c) s.psi[n * op.k() + c] = amp * comps[c];
  }
  return s;
}

double cfl_dt(const CoefficientSystem& sys, const Grid& grid, double cfl) {
  if (!(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument("cfl factor must lie in (0, 1]");
  double vmax = 0.0;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const Point p = grid.point(n);
    const std::span<const double> x(p.data(), grid.dim());
    if (!sys.domain().contains(x)) continue;
    vmax = std::max(vmax, velocity_matrix(sys, x).eigenvalues().back());
  }
  if (!(vmax > 0.0))
    throw NumericalError("velocity matrix vanishes on the whole grid: no propagation, so the CFL step is unbounded; set dt explicitly");
  return cfl * grid.min_spacing() / std::sqrt(vmax);
}

double max_density(const DiscreteOperator& op, std::span<const Complex> psi) {
  double m = 0.0;
  for (std::size_t n = 0; n < op.grid().size(); ++n) m = std::max(m, op.density(psi, n));
  return m;
}

SupportBox support_box(const DiscreteOperator& op, std::span<const Complex> psi, double threshold,
                       double reference_density) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw std::invalid_argument("support threshold must lie in (0, 1)");
  const Grid& g = op.grid();
  SupportBox box;
  if (!(reference_density > 0.0)) return box;
  const double cut = threshold * threshold * reference_density;
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (op.density(psi, n) < cut) continue;
    const auto ijk = g.unravel(n);
    for (int a = 0; a < g.dim(); ++a) {
      if (box.empty || ijk[a] < box.lo_index[a]) box.lo_index[a] = ijk[a];
      if (box.empty || ijk[a] > box.hi_index[a]) box.hi_index[a] = ijk[a];
    }
    box.empty = false;
  }
  if (!box.empty)
    for (int a = 0; a < g.dim(); ++a) {
      box.lo[a] = g.coord(box.lo_index[a], a);
      box.hi[a] = g.coord(box.hi_index[a], a);
    }
  return box;
}

namespace {

bool all_finite(std::span<const Complex> v) {
  for (const Complex& z : v)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

// out = -i D psi
void rhs(const DiscreteOperator& op, std::span<const Complex> psi, std::span<Complex> out) {
  op.apply(psi, out);
  for (Complex& z : out) z = Complex(z.imag(), -z.real());
}

double edge_margin(const Grid& g, const SupportBox& b) {
  if (b.empty) return std::numeric_limits<double>::infinity();
  double m = std::numeric_limits<double>::infinity();
  for (int a = 0; a < g.dim(); ++a) {
    const double lo_edge = g.origin(a) - 0.5 * g.spacing(a);
    const double hi_edge = g.coord(g.nodes(a) - 1, a) + 0.5 * g.spacing(a);
    m = std::min({m, b.lo[a] - lo_edge, hi_edge - b.hi[a]});
  }
  return m;
}

bool near_edge(const Grid& g, const SupportBox& b, std::size_t nodes) {
  if (b.empty) return false;
  for (int a = 0; a < g.dim(); ++a)
    if (b.lo_index[a] < nodes || b.hi_index[a] + nodes >= g.nodes(a)) return true;
  return false;
}

}  // namespace

EvolutionLog integrate(const DiscreteOperator& op, const CoefficientSystem& sys, WaveState& state,
                       const EvolveOptions& opt) {
  if (state.psi.size() != op.size()) throw std::invalid_argument("integrate: state does not match the operator grid");
  if (!(opt.T >= 0.0)) throw std::invalid_argument("integrate: final time must be nonnegative");
  if (!all_finite(state.psi)) throw NumericalError("initial state has non-finite entries");
  EvolutionLog log;
  const Grid& g = op.grid();
  const double ref = max_density(op, state.psi);
  const double e0 = op.energy(state.psi);

  double dt = opt.dt;
  if (!(dt > 0.0)) {
    if (ref == 0.0) dt = opt.T > 0 ? opt.T : 1.0;  // zero state stays zero
    else dt = cfl_dt(sys, g, opt.cfl);
  }
  const std::size_t steps = opt.T > 0.0 ? static_cast<std::size_t>(std::ceil(opt.T / dt - 1e-12)) : 0;
  if (steps > 0) dt = opt.T / static_cast<double>(steps);
  log.dt = dt;
  log.steps = steps;
  const std::size_t every = opt.log_every ? opt.log_every : std::max<std::size_t>(1, steps / 1000);

  auto record = [&]() {
    LogEntry e;
    e.t = state.t;
    e.energy = op.energy(state.psi);
    e.support = support_box(op, state.psi, opt.support_threshold, ref);
    e.boundary_margin = edge_margin(g, e.support);
    for (const Complex& z : state.psi) e.max_abs = std::max(e.max_abs, std::abs(z));
    if (e0 > 0.0) log.max_relative_energy_drift = std::max(log.max_relative_energy_drift, std::abs(e.energy - e0) / e0);
    if (near_edge(g, e.support, 4)) log.boundary_contaminated = true;
    log.entries.push_back(std::move(e));
  };
  record();
  if (!log.entries.front().support.empty && near_edge(g, log.entries.front().support, 4))
    diag::warn("initial state comes within 4 nodes of the grid edge");

  // Probe arrival bookkeeping.
  const double probe_cut = opt.probe_threshold * opt.probe_threshold * ref;
  log.arrival.assign(opt.probes.size(), std::numeric_limits<double>::infinity());
  std::vector<double> prev_density(opt.probes.size());
  for (std::size_t i = 0; i < opt.probes.size(); ++i) {
    if (opt.probes[i] >= g.size()) throw std::invalid_argument("probe node index out of range");
    prev_density[i] = op.density(state.psi, opt.probes[i]);
    if (ref > 0.0 && prev_density[i] >= probe_cut) log.arrival[i] = state.t;
  }

  const std::size_t M = op.size();
  std::vector<Complex> k1(M), k2(M), k3(M), k4(M), tmp(M), prev(M);
  const double t0 = state.t;
  for (std::size_t s = 1; s <= steps; ++s) {
    auto& y = state.psi;
    if (opt.integrator == Integrator::rk4) {
      rhs(op, y, k1);
      for (std::size_t i = 0; i < M; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
      rhs(op, tmp, k2);
      for (std::size_t i = 0; i < M; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
      rhs(op, tmp, k3);
      for (std::size_t i = 0; i < M; ++i) tmp[i] = y[i] + dt * k3[i];
      rhs(op, tmp, k4);
      for (std::size_t i = 0; i < M; ++i) y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    } else {
      // Implicit midpoint by fixed-point iteration: Y = y + dt f((y + Y) / 2).
      prev = y;
      std::vector<Complex>& Y = k4;
      Y = y;
      bool converged = false;
      for (int it = 0; it < 200 && !converged; ++it) {
        for (std::size_t i = 0; i < M; ++i) tmp[i] = 0.5 * (prev[i] + Y[i]);
        rhs(op, tmp, k1);
        double diff = 0.0, norm = 0.0;
        for (std::size_t i = 0; i < M; ++i) {
          const Complex nv = prev[i] + dt * k1[i];
          diff = std::max(diff, std::abs(nv - Y[i]));
          norm = std::max(norm, std::abs(nv));
          Y[i] = nv;
        }
        converged = diff <= 1e-14 * std::max(norm, 1e-300);
      }
      if (!converged) throw NumericalError("implicit midpoint iteration did not converge at step " + std::to_string(s));
      y = Y;
    }
    state.t = t0 + dt * static_cast<double>(s);
    if (!all_finite(y)) {
      std::ostringstream os;
      os << "instability: non-finite state at step " << s << " (t = " << state.t << "); retry with a smaller cfl, e.g. "
         << 0.5 * opt.cfl;
      throw NumericalError(os.str());
    }
    for (std::size_t i = 0; i < opt.probes.size(); ++i) {
      const double d = op.density(y, opt.probes[i]);
      if (std::isinf(log.arrival[i]) && ref > 0.0 && d >= probe_cut) {
        const double f = (probe_cut - prev_density[i]) / (d - prev_density[i]);
        log.arrival[i] = state.t - dt + std::clamp(f, 0.0, 1.0) * dt;
      }
      prev_density[i] = d;
    }
    if (s % every == 0 || s == steps) record();
  }
  return log;
}

std::vector<double> arrival_time(const DiscreteOperator& op, const CoefficientSystem& sys, const WaveState& state0,
                                 std::span<const std::size_t> probes, double threshold, double T, double cfl) {
  WaveState s = state0;
  EvolveOptions opt;
  opt.T = T;
  opt.cfl = cfl;
  opt.probes.assign(probes.begin(), probes.end());
  opt.probe_threshold = threshold;
  return integrate(op, sys, s, opt).arrival;
}

}  // namespace velmat
