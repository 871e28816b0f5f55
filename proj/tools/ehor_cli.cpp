// Command-line driver: analytic model and/or simulation over a source-power sweep, CSV out.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "ehor/errors.hpp"
#include "ehor/report.hpp"
#include "ehor/scenario.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitConvergence = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ehor::ScenarioError("cannot open scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_summary(std::FILE* to, const std::vector<ehor::ReportRow>& rows) {
  for (const auto& r : rows) {
    std::fprintf(to, "P_s = %6.2f dBm", r.p_s_dbm);
    if (r.analytic) std::fprintf(to, "  OP %.5f  tau %.5f  Tc %.4f", r.analytic->op, r.analytic->tau, r.analytic->tc_cost);
    if (r.mrc) std::fprintf(to, "  | mrc OP %.5f +- %.5f", r.mrc->op, r.mrc->op_se);
    if (r.non_mrc) std::fprintf(to, "  | non-mrc OP %.5f +- %.5f", r.non_mrc->op, r.non_mrc->op_se);
    std::fprintf(to, "\n");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-relay energy-harvesting network: outage, throughput and slot cost"};

  std::string scenario_path, mode = "analytic", sim_mode = "mrc", sweep, out_path;
  std::uint64_t slots = 1000000, warmup = ehor::kDefaultWarmup, seed = 1;
  std::size_t bins = 0;
  app.add_option("--scenario", scenario_path, "scenario file (key = value lines)")->required();
  app.add_option("--mode", mode, "analytic | simulate | both")
      ->check(CLI::IsMember({"analytic", "simulate", "both"}));
  app.add_option("--slots", slots, "simulated slots per run, warmup included")->check(CLI::PositiveNumber);
  app.add_option("--warmup", warmup, "slots discarded before statistics");
  app.add_option("--seed", seed, "RNG seed");
  app.add_option("--bins", bins, "overrides the scenario's SNR bin count")->check(CLI::PositiveNumber);
  app.add_option("--sweep", sweep, "source power sweep start:stop:step (dBm)");
  app.add_option("--sim-mode", sim_mode, "mrc | non_mrc | both")->check(CLI::IsMember({"mrc", "non_mrc", "both"}));
  app.add_option("--out", out_path, "CSV output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    ehor::Scenario sc = ehor::load_scenario(read_file(scenario_path));
    if (bins) sc.bins = bins;
    if (warmup >= slots) throw ehor::ScenarioError("--warmup must be smaller than --slots");

    ehor::ReportConfig cfg;
    cfg.mode = mode == "analytic" ? ehor::RunMode::Analytic
               : mode == "simulate" ? ehor::RunMode::Simulate
                                    : ehor::RunMode::Both;
    cfg.sim_mrc = sim_mode != "non_mrc";
    cfg.sim_non_mrc = sim_mode != "mrc";
    cfg.sim.slots = slots;
    cfg.sim.warmup = warmup;
    cfg.sim.seed = seed;
    if (!sweep.empty()) cfg.sweep = ehor::parse_sweep(sweep);

    const auto rows = ehor::run_report(sc, cfg);
    const std::string csv = ehor::format_csv(rows, cfg);
    if (out_path.empty()) {
      std::cout << csv << std::flush;
      print_summary(stderr, rows);
    } else {
      std::ofstream out(out_path, std::ios::binary);
      if (!out) throw ehor::ScenarioError("cannot write '" + out_path + "'");
      out << csv;
      print_summary(stdout, rows);
    }
  } catch (const ehor::ScenarioError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ehor::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
