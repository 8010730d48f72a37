#ifndef XLAYER_EXPERIMENT_HPP_
#define XLAYER_EXPERIMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "xlayer/admm_common.hpp"
#include "xlayer/channel.hpp"
#include "xlayer/device_admm.hpp"
#include "xlayer/reference.hpp"
#include "xlayer/scenario.hpp"
#include "xlayer/solution.hpp"
#include "xlayer/topology.hpp"

namespace xlayer {

enum class Mode { kReference, kLayered, kDevice, kDirect };

const char* to_string(Mode mode);
Mode parse_mode(const std::string& text);  // throws InvalidArgument

// FNV-1a over the canonical JSON dump of the scenario.
std::uint64_t scenario_hash(const ScenarioConfig& config);

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> max_iters;
  std::optional<double> rho;
};

ScenarioConfig apply_overrides(ScenarioConfig config, const RunOverrides& overrides);

struct RunRecord {
  std::uint64_t scenario_hash = 0;
  Mode mode = Mode::kReference;
  std::string label;  // mode plus reuse, e.g. "reference f=3"
  double value = 0.0; // sweep value; 0 outside sweeps
  std::uint64_t seed = 0;
  double objective_kbps = 0.0;
  double total_power_dbm = 0.0;
  double total_power_w = 0.0;
  int iterations = 0;
  bool converged = false;
  double worst_violation = 0.0;
  double group_slack = 0.0;  // never written to CSV
  double runtime_s = 0.0;  // never written to CSV
  std::string error;       // non-empty when the run failed

  bool ok() const { return error.empty(); }
};

struct RunArtifacts {
  NetworkTopology topology;  // direct topology in direct mode
  ChannelModel channel;
  GlobalSolution solution;
  ConstraintReport report;
  std::vector<ReferenceRound> reference_trace;
  std::vector<AdmmTraceRow> layered_trace;
  std::vector<DeviceTraceRow> device_trace;
  std::optional<MessageLog> messages;
};

struct RunOutput {
  RunRecord record;
  RunArtifacts artifacts;
};

// Builds the topology for the configured seed and runs one solver. Solver
// errors propagate.
RunOutput run_mode(const ScenarioConfig& config, Mode mode);

// Loads and validates the scenario, runs it, and only then writes
// topology.csv, solution.csv and trace.csv (plus messages.jsonl in device
// mode) into out_dir. Nothing is written when loading or solving fails.
RunOutput run_scenario(const std::filesystem::path& config_path, Mode mode, const std::filesystem::path& out_dir,
                       const RunOverrides& overrides = {});
void write_artifacts(const RunOutput& output, const std::filesystem::path& out_dir);

struct ModeSpec {
  Mode mode = Mode::kReference;
  std::optional<ReuseFactor> reuse;  // overrides the scenario's reuse factor

  std::string label() const;
};

struct SweepSpec {
  enum class Variable { kPmaxDbm, kReuse, kNodes, kRho };
  Variable variable = Variable::kPmaxDbm;
  std::vector<double> values;  // reuse 0 means no reuse
  std::vector<ModeSpec> modes;
  int replications = 30;
  std::uint64_t seed_base = 1;

  void validate() const;
};

const char* to_string(SweepSpec::Variable variable);

// {"variable": "P_max_dBm" | "reuse" | "num_nodes" | "rho", "values": [...],
//  "modes": ["direct", {"mode": "reference", "reuse": 3}, ...],
//  "replications": 30, "seed_base": 100}
SweepSpec sweep_from_json(const nlohmann::json& j);
SweepSpec load_sweep(const std::filesystem::path& path);

struct SweepRow {
  double value = 0.0;
  std::string label;
  int runs = 0;
  int failures = 0;
  double rate_mean_kbps = 0.0;
  double rate_std_kbps = 0.0;
  double power_mean_w = 0.0;
  double power_std_w = 0.0;
  double power_mean_dbm = 0.0;  // of the mean in watts
};

struct SweepResult {
  std::vector<RunRecord> runs;
  std::vector<SweepRow> rows;  // one per (value, mode), in spec order
};

// Replication r of every cell uses seed seed_base + r, so all modes and
// values see the same node placements. Failed runs are kept in runs and left
// out of the aggregates.
SweepResult sweep(const SweepSpec& spec, const ScenarioConfig& base);

struct QuantizeResult {
  GlobalSolution solution;
  double objective_before = 0.0;  // min rate, Mbps
  double objective_after = 0.0;
  std::vector<int> zeroed;  // links whose bandwidth rounded down to zero
};

// Floors every bandwidth to a multiple of grid (MHz) and re-optimizes power
// and routing with the bandwidths held fixed. grid = 0 returns the input.
QuantizeResult quantize_bandwidths(const NetworkTopology& topology, const ChannelModel& channel,
                                   const GlobalSolution& solution, double grid, const ReferenceOptions& options = {});

// floor(w / grid) * grid, tolerant to representation error just below a
// multiple.
Eigen::VectorXd floor_to_grid(const Eigen::VectorXd& bandwidth, double grid);

}  // namespace xlayer

#endif  // XLAYER_EXPERIMENT_HPP_
