// Command-line runner: one scenario in one mode, or a parameter sweep.
//
// Exit codes: 0 success, 1 bad arguments or configuration, 2 solver failure,
// 3 cannot write outputs.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "xlayer/csv.hpp"
#include "xlayer/error.hpp"
#include "xlayer/experiment.hpp"

namespace {

enum Exit { kOk = 0, kBadInput = 1, kSolver = 2, kOutput = 3 };

void print_summary(const xlayer::RunOutput& out) {
  const xlayer::RunRecord& r = out.record;
  std::printf("mode          %s\n", r.label.c_str());
  std::printf("seed          %llu\n", static_cast<unsigned long long>(r.seed));
  std::printf("scenario      %016llx\n", static_cast<unsigned long long>(r.scenario_hash));
  std::printf("nodes/links   %d/%d\n", out.artifacts.topology.num_nodes(), out.artifacts.topology.num_links());
  std::printf("min rate      %.6g Kbps\n", r.objective_kbps);
  std::printf("total power   %.6g W (%.3f dBm)\n", r.total_power_w, r.total_power_dbm);
  std::printf("iterations    %d (%s)\n", r.iterations, r.converged ? "converged" : "not converged");
  std::printf("worst viol.   %.3g\n", r.worst_violation);
  std::printf("constraints   %s\n", out.artifacts.report.to_string().c_str());
  std::printf("runtime       %.3f s\n", r.runtime_s);
}

int run_single(const std::string& config, const std::string& mode, const std::string& out_dir,
               const xlayer::RunOverrides& overrides) {
  const xlayer::RunOutput out = xlayer::run_scenario(config, xlayer::parse_mode(mode), out_dir, overrides);
  print_summary(out);
  return kOk;
}

int run_sweep(const std::string& config, const std::string& sweep_path, const std::string& out_dir,
              std::optional<int> replications, const xlayer::RunOverrides& overrides) {
  xlayer::SweepSpec spec = xlayer::load_sweep(sweep_path);
  if (replications) spec.replications = *replications;
  if (overrides.seed) spec.seed_base = *overrides.seed;
  spec.validate();
  xlayer::RunOverrides base_overrides = overrides;
  base_overrides.seed.reset();
  const xlayer::ScenarioConfig base = xlayer::apply_overrides(xlayer::load_scenario(config), base_overrides);

  const xlayer::SweepResult result = xlayer::sweep(spec, base);

  std::filesystem::create_directories(out_dir);
  const char* variable = xlayer::to_string(spec.variable);
  std::ofstream summary(std::filesystem::path(out_dir) / "sweep_summary.csv");
  std::ofstream runs(std::filesystem::path(out_dir) / "runs.csv");
  if (!summary || !runs) throw std::filesystem::filesystem_error("cannot write sweep outputs", out_dir,
                                                                  std::make_error_code(std::errc::io_error));
  xlayer::write_sweep_summary_csv(summary, result.rows, variable);
  xlayer::write_runs_csv(runs, result.runs, variable);

  std::printf("%-12s %-20s %5s %5s %14s %14s %12s\n", variable, "mode", "runs", "fail", "rate_kbps", "power_w",
              "power_dbm");
  for (const xlayer::SweepRow& row : result.rows) {
    std::printf("%-12g %-20s %5d %5d %14.6g %14.6g %12.3f\n", row.value, row.label.c_str(), row.runs, row.failures,
                row.rate_mean_kbps, row.power_mean_w, row.power_mean_dbm);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint routing, power and bandwidth allocation for multi-hop wireless networks"};
  std::string config, mode = "reference", sweep_path, out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> replications, max_iters;
  std::optional<double> rho;
  app.add_option("--config", config, "Scenario JSON")->required();
  app.add_option("--mode", mode, "Solver for a single run")
      ->check(CLI::IsMember({"reference", "layered", "device", "direct"}));
  app.add_option("--sweep", sweep_path, "Sweep JSON; runs a sweep instead of a single scenario");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--seed", seed, "Placement seed (sweeps: seed base)");
  app.add_option("--replications", replications, "Replications per sweep cell")->check(CLI::PositiveNumber);
  app.add_option("--max-iters", max_iters, "Iteration cap for every solver")->check(CLI::PositiveNumber);
  app.add_option("--rho", rho, "ADMM penalty")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  xlayer::RunOverrides overrides{seed, max_iters, rho};
  try {
    if (!sweep_path.empty()) return run_sweep(config, sweep_path, out_dir, replications, overrides);
    return run_single(config, mode, out_dir, overrides);
  } catch (const xlayer::SolverError& e) {
    std::fprintf(stderr, "solver error (%s): %s\n", xlayer::to_string(e.kind()), e.what());
    return kSolver;
  } catch (const xlayer::InfeasibleDensity& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kSolver;
  } catch (const xlayer::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kBadInput;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kOutput;
  }
}
