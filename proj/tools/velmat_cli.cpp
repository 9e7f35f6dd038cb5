#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "velmat/velmat.h"

namespace {

// Exit codes: 0 ok, 1 verify failures, 2 scenario or argument error,
// 3 numerical failure, 4 inconclusive verdict under --strict.
int exit_code(velmat_status s) {
  switch (s) {
    case VELMAT_OK:
      return 0;
    case VELMAT_INVALID_ARGUMENT:
    case VELMAT_SCENARIO_ERROR:
      return 2;
    case VELMAT_NUMERICAL_ERROR:
      return 3;
    case VELMAT_INCONCLUSIVE:
      return 4;
  }
  return 3;
}

int report(velmat_status s, char* text) {
  if (text) {
    std::fputs(text, stdout);
    velmat_string_free(text);
  }
  if (s != VELMAT_OK && s != VELMAT_INCONCLUSIVE) std::cerr << "error: " << velmat_last_error() << "\n";
  if (s == VELMAT_INCONCLUSIVE) std::cerr << "verdict is inconclusive (--strict)\n";
  return exit_code(s);
}

enum class Command { analyze, distance, simulate };

struct Ctx {
  velmat_run_options opt;
  velmat_distance_mode mode = VELMAT_DISTANCE_GEODESIC;
};

int run_scenario_command(Command cmd, const std::string& path, const std::string& out_dir, const Ctx& ctx) {
  velmat_scenario* sc = nullptr;
  velmat_status s = velmat_scenario_load(path.c_str(), &sc);
  if (s != VELMAT_OK) return report(s, nullptr);
  if (!out_dir.empty()) velmat_scenario_set_output_dir(sc, out_dir.c_str());
  char* text = nullptr;
  switch (cmd) {
    case Command::analyze:
      s = velmat_cmd_analyze(sc, &ctx.opt, &text);
      break;
    case Command::distance:
      s = velmat_cmd_distance(sc, ctx.mode, &ctx.opt, &text);
      break;
    case Command::simulate:
      s = velmat_cmd_simulate(sc, &ctx.opt, &text);
      break;
  }
  velmat_scenario_free(sc);
  return report(s, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Velocity-matrix completeness analysis for first-order symmetric systems"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(velmat_version()));

  Ctx ctx{velmat_default_run_options()};
  std::uint64_t seed = ctx.opt.seed;
  bool strict = false;
  std::string out_dir;
  app.add_option("--seed", seed, "Seed for randomized checks (default 0x5eed)");
  app.add_flag("--strict", strict, "Exit 4 when the verdict is inconclusive");
  app.add_option("--output-dir", out_dir, "Override output.dir of the scenario");

  std::string path;
  auto* analyze = app.add_subcommand("analyze", "Velocity field, majorant and completeness verdict");
  analyze->add_option("scenario", path, "Scenario JSON file")->required()->check(CLI::ExistingFile);

  auto* distance = app.add_subcommand("distance", "Distance field from the probe node");
  distance->add_option("scenario", path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  std::string mode = "geodesic";
  distance->add_option("--mode", mode, "geodesic or arrival")->check(CLI::IsMember({"geodesic", "arrival"}));

  auto* simulate = app.add_subcommand("simulate", "Gaussian pulse evolution");
  simulate->add_option("scenario", path, "Scenario JSON file")->required()->check(CLI::ExistingFile);

  auto* verify = app.add_subcommand("verify", "Run the invariant suite");
  std::string filter;
  bool inject = false;
  verify->add_option("--filter", filter, "Regex over invariant ids, e.g. 'velocity.*'");
  verify->add_flag("--inject-fault", inject, "Scale the majorant by 0.9 before checking it")->group("");

  // Allow --seed/--strict after the subcommand too.
  for (auto* sub : {analyze, distance, simulate, verify}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  ctx.opt.seed = seed;
  ctx.opt.strict = strict ? 1 : 0;
  ctx.opt.inject_majorant_fault = inject ? 1 : 0;
  ctx.mode = mode == "arrival" ? VELMAT_DISTANCE_ARRIVAL : VELMAT_DISTANCE_GEODESIC;

  if (*verify) {
    char* table = nullptr;
    int failures = 0;
    const velmat_status s = velmat_cmd_verify(&ctx.opt, filter.c_str(), &table, &failures);
    if (s != VELMAT_OK) return report(s, table);
    report(s, table);
    std::cout << (failures == 0 ? "all invariants pass" : std::to_string(failures) + " invariant(s) failed") << "\n";
    return failures == 0 ? 0 : 1;
  }

  const Command cmd = *analyze ? Command::analyze : *distance ? Command::distance : Command::simulate;
  return run_scenario_command(cmd, path, out_dir, ctx);
}
