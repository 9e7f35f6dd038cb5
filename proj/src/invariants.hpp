#pragma once

// Property checks run by the verify command.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "scenario.hpp"

namespace velmat {

struct InvariantResult {
  std::string id;  // "<module>.<name>"
  std::string module;
  double residual = 0.0;  // worst observed
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = kDefaultSeed;
  std::string filter;  // ECMAScript regex matched against the whole id; empty selects all
  /// Test fixture: scales the majorant by 0.9 before it is checked.
  bool inject_majorant_fault = false;
};

std::vector<std::string> invariant_ids();

/// Runs the selected invariants. Throws std::invalid_argument on a bad regex.
std::vector<InvariantResult> run_invariants(const VerifyOptions& opt);

/// Plain-text table: id, module, residual, tolerance, PASS/FAIL.
std::string format_invariant_table(const std::vector<InvariantResult>& rows);

/// Random expression source text over x, y, z with every grammar construct;
/// used for parse/print round-trip checks.
std::string random_expression_source(std::mt19937_64& rng, int depth);

}  // namespace velmat
