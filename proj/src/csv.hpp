#pragma once

// RFC-4180 CSV output with round-trip exact numbers (17 significant digits).

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "evolve.hpp"
#include "geometry.hpp"
#include "velocity.hpp"

namespace velmat {

/// Shortest text that reads back to the same double at 17 significant
/// digits; "inf", "-inf" and "nan" for non-finite values.
std::string format_double(double v);

class CsvWriter {
 public:
  /// Opens (truncating) the file; throws Error on failure.
  explicit CsvWriter(const std::filesystem::path& path);

  void header(const std::vector<std::string>& names);
  void row(const std::vector<double>& values);

 private:
  void line(const std::vector<std::string>& cells);
  std::ofstream out_;
  std::filesystem::path path_;
};

/// Quotes a cell if it contains a comma, quote or line break.
std::string csv_escape(std::string_view cell);

/// x1..xd, M11, M12, .., Mdd (upper triangle) for every node inside the domain.
void write_velocity_csv(const std::filesystem::path& path, const VelocityField& field);
/// x1..xd, value.
void write_distance_csv(const std::filesystem::path& path, const DistanceField& field);
/// t, energy, supp_lo_1, supp_hi_1, .., boundary_margin, max_abs.
void write_evolution_csv(const std::filesystem::path& path, const EvolutionLog& log, int dim);
/// x1..xd, then Re and Im of every component.
void write_snapshot_csv(const std::filesystem::path& path, const WaveState& state);

}  // namespace velmat
