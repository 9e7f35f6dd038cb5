#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "evolve.hpp"
#include "geometry.hpp"
#include "grid.hpp"
#include "systems.hpp"

namespace velmat {

inline constexpr std::uint64_t kDefaultSeed = 0x5eed;

struct SystemSpec {
  std::string name;
  nlohmann::json params = nlohmann::json::object();
};

enum class Criterion { metric, symbol };

struct AnalysisSpec {
  double delta = 0.1;
  int cutoffs = 24;
  Stencil stencil = Stencil::standard;
  Criterion criterion = Criterion::metric;
  std::optional<std::vector<double>> probe;
  std::vector<double> margins;  // empty: derived from the grid
};

struct PulseSpec {
  std::vector<double> center;
  double sigma = 0.05;
  std::vector<Complex> components;
};

struct SimulateSpec {
  double T = 1.0;
  double cfl = 0.4;
  PulseSpec pulse;
  double threshold = 1e-8;
  int order = 2;
  Integrator integrator = Integrator::rk4;
};

struct Scenario {
  SystemSpec system;
  BoxDomain domain;
  std::vector<std::size_t> nodes;
  AnalysisSpec analysis;
  std::optional<SimulateSpec> simulate;
  std::filesystem::path output_dir = "out";
};

/// Parses a scenario document. Unknown keys anywhere are errors.
Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::filesystem::path& path);
/// Canonical JSON form with every default spelled out; parse_scenario of the
/// result reproduces the scenario.
nlohmann::json to_json(const Scenario& s);

CoefficientSystem build_system(const Scenario& s);
/// Built-in (or custom) system from a name, a params object and a domain.
CoefficientSystem build_system(const std::string& name, const nlohmann::json& params, const BoxDomain& domain);

std::string_view to_string(Criterion c);

}  // namespace velmat
