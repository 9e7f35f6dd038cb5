#pragma once

// The analyze / distance / simulate pipelines behind the command-line tool.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "evolve.hpp"
#include "geometry.hpp"
#include "scenario.hpp"
#include "velocity.hpp"

namespace velmat {

enum class DistanceMode { geodesic, arrival };

struct RunOptions {
  std::uint64_t seed = kDefaultSeed;
  bool strict = false;
};

/// One boundary group ("lower end", "finite boundary", "infinity") and the
/// verdict that decided it.
struct EndVerdict {
  std::string label;
  CompletenessVerdict verdict;
};

struct AnalysisResult {
  CompletenessVerdict overall;
  std::vector<EndVerdict> ends;
  Point probe{};
  Bracket chernoff;
  double fattorini = 0.0;
  VelocityField field;
  nlohmann::json document;  // contents of verdict.json
  std::string summary;
};

/// Validates the system, samples M and its majorant on the scenario grid and
/// runs the completeness probes toward every part of the boundary.
AnalysisResult run_analysis(const Scenario& s, const RunOptions& opt = {});

/// Distances from the probe node (geodesic: metric M_hat^{-1}; arrival:
/// first-arrival times for the speed sqrt(<n, M n>)).
DistanceField run_distance(const Scenario& s, DistanceMode mode);

struct SimulationResult {
  EvolutionLog log;
  WaveState initial;
  WaveState final_state;
  std::string summary;
};

/// Gaussian pulse evolution as described by the scenario's simulate block.
SimulationResult run_simulation(const Scenario& s, const RunOptions& opt = {});

struct CommandResult {
  int status = 0;  // 0, or 4 for an inconclusive verdict under strict mode
  std::string summary;
  std::vector<std::filesystem::path> files;
};

/// Writes velocity.csv, verdict.json and summary.txt into the output dir.
CommandResult cmd_analyze(const Scenario& s, const RunOptions& opt = {});
/// Writes distance.csv.
CommandResult cmd_distance(const Scenario& s, DistanceMode mode, const RunOptions& opt = {});
/// Writes evolution.csv, snapshot_initial.csv, snapshot_final.csv and summary.txt.
CommandResult cmd_simulate(const Scenario& s, const RunOptions& opt = {});

}  // namespace velmat
