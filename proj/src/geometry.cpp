#include "geometry.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "diagnostics.hpp"
#include "errors.hpp"

namespace velmat {

std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::certified_divergent: return "certified-divergent";
    case Classification::likely_divergent: return "likely-divergent";
    case Classification::likely_convergent: return "likely-convergent";
    case Classification::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

int divergence_rank(Classification c) {
  switch (c) {
    case Classification::certified_divergent: return 3;
    case Classification::likely_divergent: return 2;
    case Classification::inconclusive: return 1;
    case Classification::likely_convergent: return 0;
  }
  return 1;
}

bool is_divergent(Classification c) {
  return c == Classification::certified_divergent || c == Classification::likely_divergent;
}

namespace {

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

nlohmann::json array_json(const std::vector<double>& v) {
  auto a = nlohmann::json::array();
  for (double x : v) a.push_back(finite_or_null(x));
  return a;
}

}  // namespace

nlohmann::json to_json(const CompletenessVerdict& v) {
  return nlohmann::json{{"classification", to_string(v.classification)},
                        {"criterion", v.criterion},
                        {"cutoffs", array_json(v.cutoffs)},
                        {"integrals", array_json(v.integrals)},
                        {"parameters", v.parameters}};
}

CompletenessVerdict classify_increments(std::vector<double> cutoffs, std::vector<double> integrals,
                                        std::string criterion, std::size_t tail) {
  CompletenessVerdict v;
  v.criterion = std::move(criterion);
  v.cutoffs = std::move(cutoffs);
  v.integrals = std::move(integrals);
  const auto& I = v.integrals;
  for (double x : I)
    if (!std::isfinite(x)) {
      v.parameters["diagnostic"] = "non-finite partial integral";
      return v;
    }
  std::vector<double> inc(I.size());
  for (std::size_t i = 0; i < I.size(); ++i) inc[i] = i == 0 ? I[0] : I[i] - I[i - 1];
  const double eps = 1e-14 * std::max(std::abs(I.empty() ? 0.0 : I.back()), 1e-300);
  std::vector<double> ratios;
  for (std::size_t i = 1; i < inc.size(); ++i) ratios.push_back((inc[i] + eps) / (inc[i - 1] + eps));
  const std::size_t n = std::min(tail, ratios.size());
  if (n < 2) {
    v.parameters["diagnostic"] = "too few cutoffs to classify";
    return v;
  }
  std::vector<double> t(ratios.end() - static_cast<long>(n), ratios.end());
  const double lo = *std::min_element(t.begin(), t.end());
  const double hi = *std::max_element(t.begin(), t.end());
  std::vector<double> sorted = t;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[n / 2];
  v.parameters["tail_ratios"] = t;
  v.parameters["min_tail_ratio"] = lo;
  v.parameters["max_tail_ratio"] = hi;
  if (lo >= 0.99) {
    v.classification = Classification::certified_divergent;
    v.parameters["rule"] = "every tail increment at least 0.99 of its predecessor (const/t or const/delta lower bound)";
  } else if (hi <= 0.97) {
    v.classification = Classification::likely_convergent;
    // Geometric tail with the largest of the last three ratios.
    double r = 0.0;
    for (std::size_t i = n >= 3 ? n - 3 : 0; i < n; ++i) r = std::max(r, t[i]);
    v.parameters["extrapolated_limit"] = I.back() + inc.back() * r / (1.0 - r);
    v.parameters["rule"] = "increments decay geometrically (ratio <= 0.97)";
  } else if (median >= 0.97) {
    v.classification = Classification::likely_divergent;
    v.parameters["rule"] = "increments do not decay geometrically (median ratio >= 0.97)";
  } else {
    v.parameters["rule"] = "mixed increment ratios";
  }
  return v;
}

std::vector<double> ray_cutoffs(double start, double end, int levels) {
  std::vector<double> T;
  for (int n = 1; n <= levels; ++n) {
    if (std::isinf(end)) {
      const double step = std::max(std::abs(start), 1.0) * (std::ldexp(1.0, n) - 1.0);
      T.push_back(end > 0 ? start + step : start - step);
    } else {
      T.push_back(end - (end - start) * std::ldexp(1.0, -n));
    }
  }
  return T;
}

CompletenessVerdict ray_completeness(const RayProblem& p) {
  if (!p.speed) throw std::invalid_argument("ray_completeness: speed profile is empty");
  if (!std::isfinite(p.start) || p.start == p.end) throw std::invalid_argument("ray_completeness: bad interval");
  const auto T = ray_cutoffs(p.start, p.end, p.levels);
  auto inv = [&](double t) {
    const double s = p.speed(t);
    if (!(s > 0.0) || !std::isfinite(s)) {
      std::ostringstream os;
      os << "speed must be positive and finite on the open interval; s(" << t << ") = " << s;
      throw DomainError(os.str());
    }
    return 1.0 / s;
  };
  std::vector<double> I;
  double acc = 0.0, a = p.start;
  std::string diagnostic;
  for (std::size_t n = 0; n < T.size(); ++n) {
    double lo = std::min(a, T[n]), hi = std::max(a, T[n]);
    double err = 0.0;
    // Integrate over u in [0, 1] so the tolerance does not depend on the segment's scale.
    const double w = hi - lo;
    auto unit = [&](double u) { return w * inv(lo + u * w); };
    const double seg = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(unit, 0.0, 1.0, 10, 1e-9, &err);
    if (!(err <= 1e-4 * std::abs(seg) + 1e-300) && diagnostic.empty()) {
      std::ostringstream os;
      os << "quadrature error estimate " << err << " on segment " << n + 1;
      diagnostic = os.str();
    }
    acc += seg;
    I.push_back(acc);
    a = T[n];
  }
  CompletenessVerdict v = classify_increments(T, I, p.criterion);
  v.parameters["start"] = p.start;
  v.parameters["end"] = std::isfinite(p.end) ? nlohmann::json(p.end) : nlohmann::json(p.end > 0 ? "+inf" : "-inf");
  if (!diagnostic.empty()) {
    v.classification = Classification::inconclusive;
    v.parameters["diagnostic"] = diagnostic;
  }
  return v;
}

CompletenessVerdict envelope_completeness(std::span<const double> cutoffs, std::span<const double> envelope,
                                          double start, std::string criterion) {
  if (cutoffs.size() != envelope.size()) throw std::invalid_argument("envelope_completeness: size mismatch");
  std::vector<double> I;
  double acc = 0.0, a = start;
  for (std::size_t n = 0; n < cutoffs.size(); ++n) {
    const double b = envelope[n];
    if (!(b > 0.0)) {
      CompletenessVerdict v;
      v.criterion = std::move(criterion);
      v.classification = Classification::certified_divergent;
      v.parameters["rule"] = "symbol envelope vanishes: no propagation";
      return v;
    }
    acc += std::abs(cutoffs[n] - a) / b;
    I.push_back(acc);
    a = cutoffs[n];
  }
  CompletenessVerdict v = classify_increments(std::vector<double>(cutoffs.begin(), cutoffs.end()), I, std::move(criterion));
  v.parameters["envelope"] = std::vector<double>(envelope.begin(), envelope.end());
  return v;
}

bool power_law_divergent(double p) { return p >= 1.0; }

std::vector<std::array<int, 3>> stencil_offsets(int dim, Stencil s) {
  std::vector<std::array<int, 3>> out;
  if (dim == 1) return {{1, 0, 0}, {-1, 0, 0}};
  if (dim == 2) {
    for (int j = -1; j <= 1; ++j)
      for (int i = -1; i <= 1; ++i)
        if (i || j) out.push_back({i, j, 0});
    if (s == Stencil::extended)
      for (auto [i, j] : {std::pair{1, 2}, {2, 1}, {-1, 2}, {-2, 1}, {1, -2}, {2, -1}, {-1, -2}, {-2, -1}})
        out.push_back({i, j, 0});
    return out;
  }
  for (int k = -1; k <= 1; ++k)
    for (int j = -1; j <= 1; ++j)
      for (int i = -1; i <= 1; ++i)
        if (i || j || k) out.push_back({i, j, k});
  return out;
}

namespace {

/// Dijkstra with a binary heap and lazy deletion. Ties pop in node-index
/// order, so the result does not depend on how sources are listed.
template <class EdgeCost>
std::vector<double> dijkstra(const Grid& g, std::span<const std::size_t> sources, std::span<const char> passable,
                             Stencil stencil, EdgeCost cost) {
  if (sources.empty()) throw std::invalid_argument("distance computation needs at least one source node");
  const auto offsets = stencil_offsets(g.dim(), stencil);
  std::vector<double> dist(g.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (std::size_t s : sources) {
    if (s >= g.size()) throw std::invalid_argument("source node index out of range");
    if (!passable[s]) throw ScenarioError("source node " + std::to_string(s) + " is outside the domain or impassable");
    dist[s] = 0.0;
    heap.push({0.0, s});
  }
  const auto& shape = g.shape();
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    const auto ijk = g.unravel(u);
    for (const auto& o : offsets) {
      long q[3];
      bool inside = true;
      for (int a = 0; a < 3; ++a) {
        q[a] = static_cast<long>(ijk[a]) + o[a];
        if (q[a] < 0 || q[a] >= static_cast<long>(shape[a])) inside = false;
      }
      if (!inside) continue;
      const std::size_t v = g.index(q[0], q[1], q[2]);
      if (!passable[v]) continue;
      const double w = cost(u, v, o);
      if (!std::isfinite(w)) continue;
      const double nd = d + w;
      if (nd < dist[v]) {
        dist[v] = nd;
        heap.push({nd, v});
      }
    }
  }
  return dist;
}

std::string describe_sources(const Grid& g, std::span<const std::size_t> sources) {
  std::ostringstream os;
  os << sources.size() << " source node(s), first at ";
  const Point p = g.point(sources.front());
  os << format_point(std::span<const double>(p.data(), g.dim()));
  return os.str();
}

}  // namespace

MetricField metric_from_majorant(const VelocityField& field) {
  if (!field.has_majorant()) throw std::invalid_argument("metric_from_majorant: field has no majorant");
  MetricField m;
  m.grid = field.grid;
  m.G.assign(field.M.size(), SymMatrix(field.grid.dim()));
  m.passable = field.valid;
  m.degenerate = field.degenerate_nodes > 0;
  const double cap = 1.0 / field.eps_reg;
  for (std::size_t i = 0; i < field.M.size(); ++i) {
    if (!field.valid[i]) continue;
    SymMatrix G = field.majorant[i].inverse();
    for (double& x : G.a) x = std::clamp(x, -cap, cap);
    m.G[i] = G;
  }
  if (m.degenerate) diag::warn("metric is degenerate where M vanishes; entries capped at 1/eps_reg");
  return m;
}

DistanceField lattice_geodesic(const MetricField& metric, std::span<const std::size_t> sources, Stencil stencil) {
  const Grid& g = metric.grid;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!metric.passable[i]) continue;
    if (!(metric.G[i].eigenvalues().front() > 0.0)) {
      const Point p = g.point(i);
      throw NumericalError("metric is not positive definite at node " + std::to_string(i) + " " +
                           format_point(std::span<const double>(p.data(), g.dim())));
    }
  }
  const int d = g.dim();
  DistanceField out;
  out.grid = g;
  out.value = dijkstra(g, sources, metric.passable, stencil, [&](std::size_t u, std::size_t v, const std::array<int, 3>& o) {
    double dx[3];
    for (int a = 0; a < d; ++a) dx[a] = o[a] * g.spacing(a);
    const SymMatrix mid = 0.5 * (metric.G[u] + metric.G[v]);
    return std::sqrt(std::max(0.0, mid.quad(std::span<const double>(dx, d))));
  });
  out.source = describe_sources(g, sources);
  return out;
}

DistanceField eikonal_arrival(const Grid& g, std::span<const double> speed, std::span<const char> valid,
                              std::span<const std::size_t> sources, Stencil stencil) {
  if (speed.size() != g.size() || valid.size() != g.size())
    throw std::invalid_argument("eikonal_arrival: field size does not match the grid");
  double smax = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (valid[i]) smax = std::max(smax, speed[i]);
  std::vector<char> passable(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) passable[i] = valid[i] && speed[i] >= 1e-12 * smax && speed[i] > 0.0;
  const int d = g.dim();
  DistanceField out;
  out.grid = g;
  out.value = dijkstra(g, sources, passable, stencil, [&](std::size_t u, std::size_t v, const std::array<int, 3>& o) {
    double len2 = 0.0;
    for (int a = 0; a < d; ++a) len2 += (o[a] * g.spacing(a)) * (o[a] * g.spacing(a));
    return std::sqrt(len2) / (0.5 * (speed[u] + speed[v]));
  });
  out.source = describe_sources(g, sources);
  return out;
}

DistanceField eikonal_arrival(const VelocityField& field, std::span<const std::size_t> sources, Stencil stencil) {
  const Grid& g = field.grid;
  const int d = g.dim();
  double smax = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (field.valid[i]) smax = std::max(smax, std::sqrt(std::max(0.0, field.M[i].eigenvalues().back())));
  const double floor = 1e-12 * smax;
  DistanceField out;
  out.grid = g;
  out.value = dijkstra(g, sources, field.valid, stencil, [&](std::size_t u, std::size_t v, const std::array<int, 3>& o) {
    double dx[3], len2 = 0.0;
    for (int a = 0; a < d; ++a) {
      dx[a] = o[a] * g.spacing(a);
      len2 += dx[a] * dx[a];
    }
    const double len = std::sqrt(len2);
    for (int a = 0; a < d; ++a) dx[a] /= len;
    const SymMatrix mid = 0.5 * (field.M[u] + field.M[v]);
    const double s = std::sqrt(std::max(0.0, mid.quad(std::span<const double>(dx, d))));
    if (!(s > floor) || s == 0.0) return std::numeric_limits<double>::infinity();
    return len / s;
  });
  out.source = describe_sources(g, sources);
  return out;
}

double domain_half_width(const BoxDomain& dom) {
  double w = std::numeric_limits<double>::infinity();
  for (int a = 0; a < dom.dim; ++a)
    if (!dom.unbounded_lower[a] && !dom.unbounded_upper[a]) w = std::min(w, 0.5 * dom.extent(a));
  return w;
}

ProbeResult boundary_distance_probe(const MetricField& metric, const BoxDomain& dom, const Point& probe,
                                    std::span<const double> margins, Stencil stencil) {
  const Grid& g = metric.grid;
  if (!dom.has_finite_boundary()) throw UnsupportedError("boundary_distance_probe: the domain has no finite boundary");
  if (margins.empty()) throw ScenarioError("boundary_distance_probe: margins list is empty");
  const double hw = domain_half_width(dom);
  for (std::size_t i = 0; i < margins.size(); ++i) {
    if (!(margins[i] > 0.0)) throw ScenarioError("margins must be positive");
    if (i && !(margins[i] < margins[i - 1])) throw ScenarioError("margins must be strictly decreasing");
  }
  if (margins.front() > hw) {
    std::ostringstream os;
    os << "margin " << margins.front() << " exceeds the domain half-width " << hw;
    throw ScenarioError(os.str());
  }
  const std::span<const double> px(probe.data(), g.dim());
  if (!dom.contains(px)) throw ScenarioError("probe point " + format_point(px) + " is not inside the domain");
  const std::size_t src = g.nearest(px);
  const std::size_t sources[1] = {src};
  const DistanceField df = lattice_geodesic(metric, sources, stencil);

  std::vector<double> bd(g.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!metric.passable[i]) continue;
    const Point p = g.point(i);
    bd[i] = dom.boundary_distance(std::span<const double>(p.data(), g.dim()));
  }
  ProbeResult r;
  std::size_t skipped = 0;
  for (double m : margins) {
    double best = std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (bd[i] <= m) {
        any = true;
        best = std::min(best, df.value[i]);
      }
    if (!any) {
      ++skipped;
      continue;
    }
    r.margins.push_back(m);
    r.distances.push_back(best);
  }
  if (skipped) diag::warn(std::to_string(skipped) + " boundary margin(s) finer than the grid were skipped");
  r.verdict = classify_increments(r.margins, r.distances, "lattice boundary distance", r.distances.size());
  r.verdict.parameters["probe"] = std::vector<double>(px.begin(), px.end());
  r.verdict.parameters["degenerate_metric"] = metric.degenerate;
  return r;
}

}  // namespace velmat
