#pragma once

// Completeness probes for the metric ds^2 = <dx, M_hat^{-1} dx>: 1-D
// quadrature of dt / s(t) toward an end, lattice Dijkstra distances and
// first-arrival times.

#include <array>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "grid.hpp"
#include "velocity.hpp"

namespace velmat {

enum class Classification { certified_divergent, likely_divergent, likely_convergent, inconclusive };

std::string_view to_string(Classification c);
/// Ordering used to combine verdicts: the overall verdict is the weakest
/// (lowest rank) one.
int divergence_rank(Classification c);
bool is_divergent(Classification c);

struct CompletenessVerdict {
  Classification classification = Classification::inconclusive;
  std::string criterion;
  std::vector<double> cutoffs;
  std::vector<double> integrals;  // cumulative, nondecreasing
  nlohmann::json parameters = nlohmann::json::object();
};

nlohmann::json to_json(const CompletenessVerdict& v);

/// Classifies an increasing sequence of partial integrals (or distances) by
/// the ratio of successive increments over the last `tail` ratios:
/// all >= 0.99 -> certified-divergent; all <= 0.97 -> likely-convergent with
/// a geometric-tail extrapolated limit; mostly >= 0.97 -> likely-divergent;
/// otherwise inconclusive. Extra fields go into verdict.parameters.
CompletenessVerdict classify_increments(std::vector<double> cutoffs, std::vector<double> integrals,
                                        std::string criterion, std::size_t tail = 12);

struct RayProblem {
  std::function<double(double)> speed;  // s(t) > 0 on the open interval
  double start = 0.0;
  double end = std::numeric_limits<double>::infinity();  // may be +-inf or below start
  int levels = 24;
  std::string criterion = "ray quadrature";
};

/// Cutoffs T_1..T_n approaching the end: end - (end - start) 2^-n for a finite
/// end, start +- max(|start|, 1) (2^n - 1) for an infinite one.
std::vector<double> ray_cutoffs(double start, double end, int levels);

/// Partial integrals of |dt| / s(t) from start to each cutoff (adaptive
/// Gauss-Kronrod per segment) and their classification. Throws DomainError
/// when s <= 0 at a sample.
CompletenessVerdict ray_completeness(const RayProblem& p);

/// Variant for a nondecreasing step envelope b: each segment contributes the
/// lower bound (T_n - T_{n-1}) / b(T_n).
CompletenessVerdict envelope_completeness(std::span<const double> cutoffs, std::span<const double> envelope,
                                          double start, std::string criterion);

/// Expected verdict for s(delta) = delta^p near a boundary: divergent iff p >= 1.
bool power_law_divergent(double p);

enum class Stencil { standard, extended };

/// Neighbour offsets: 1-D {+-1}; 2-D 8 neighbours (16 with knight moves
/// when extended); 3-D 26 neighbours.
std::vector<std::array<int, 3>> stencil_offsets(int dim, Stencil s);

struct MetricField {
  Grid grid;
  std::vector<SymMatrix> G;
  std::vector<char> passable;
  bool degenerate = false;
};

/// G = M_hat^{-1} at every valid node, eigenvalues capped at 1 / eps_reg.
MetricField metric_from_majorant(const VelocityField& field);

struct DistanceField {
  Grid grid;
  std::vector<double> value;  // +inf where unreachable
  std::string source;
};

/// Dijkstra over the lattice; edge length sqrt(<dx, G_mid dx>) with G_mid the
/// average of the end-point metrics. Throws on empty sources or a non-SPD
/// passable node.
DistanceField lattice_geodesic(const MetricField& metric, std::span<const std::size_t> sources,
                               Stencil stencil = Stencil::standard);

/// First-arrival times for a scalar node speed; edge time = length / mean of
/// the end-point speeds. Nodes slower than 1e-12 max speed are impassable.
DistanceField eikonal_arrival(const Grid& grid, std::span<const double> speed, std::span<const char> valid,
                              std::span<const std::size_t> sources, Stencil stencil = Stencil::standard);

/// First-arrival times for the direction-dependent speed sqrt(<n, M n>), M
/// averaged over the edge end points.
DistanceField eikonal_arrival(const VelocityField& field, std::span<const std::size_t> sources,
                              Stencil stencil = Stencil::standard);

struct ProbeResult {
  std::vector<double> margins;    // usable margins, decreasing
  std::vector<double> distances;  // geodesic distance to nodes within each margin
  CompletenessVerdict verdict;
};

/// Distances from the probe to the lattice nodes within each margin of the
/// finite boundary, classified as a partial-integral sequence.
ProbeResult boundary_distance_probe(const MetricField& metric, const BoxDomain& domain, const Point& probe,
                                    std::span<const double> margins, Stencil stencil = Stencil::standard);

/// Largest admissible margin: half the smallest bounded extent (or +inf).
double domain_half_width(const BoxDomain& domain);

}  // namespace velmat
