#include "xlayer/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "xlayer/csv.hpp"
#include "xlayer/error.hpp"
#include "xlayer/layered_admm.hpp"

namespace xlayer {

using Eigen::VectorXd;
using nlohmann::json;

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::kReference: return "reference";
    case Mode::kLayered: return "layered";
    case Mode::kDevice: return "device";
    case Mode::kDirect: return "direct";
  }
  return "?";
}

Mode parse_mode(const std::string& text) {
  if (text == "reference") return Mode::kReference;
  if (text == "layered") return Mode::kLayered;
  if (text == "device") return Mode::kDevice;
  if (text == "direct") return Mode::kDirect;
  throw InvalidArgument("unknown mode '" + text + "' (expected reference, layered, device or direct)");
}

std::uint64_t scenario_hash(const ScenarioConfig& config) {
  const std::string text = scenario_to_json(config).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

ScenarioConfig apply_overrides(ScenarioConfig config, const RunOverrides& overrides) {
  if (overrides.seed) config.rng_seed = *overrides.seed;
  if (overrides.max_iters) {
    config.layered.max_iters = *overrides.max_iters;
    config.device.admm.max_iters = *overrides.max_iters;
    config.reference.max_scp_iters = *overrides.max_iters;
  }
  if (overrides.rho) {
    config.layered.rho = *overrides.rho;
    config.device.admm.rho = *overrides.rho;
  }
  config.validate();
  return config;
}

namespace {

ReferenceOptions reference_options(const ScenarioConfig& c) {
  ReferenceOptions o;
  o.tol = c.reference.tol;
  o.max_scp_iters = c.reference.max_scp_iters;
  return o;
}

std::string reuse_label(const ReuseFactor& f) { return f.is_finite() ? "f=" + f.to_string() : "f=inf"; }

}  // namespace

RunOutput run_mode(const ScenarioConfig& config, Mode mode) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  RunOutput out;
  RunRecord& rec = out.record;
  RunArtifacts& art = out.artifacts;
  rec.scenario_hash = scenario_hash(config);
  rec.mode = mode;
  rec.label = mode == Mode::kDirect ? "direct" : std::string(to_string(mode)) + " " + reuse_label(config.reuse);
  rec.seed = config.rng_seed;

  NetworkTopology topology = build_topology(config, config.rng_seed);
  if (mode == Mode::kDirect) {
    art.topology = make_direct_topology(topology);
    art.channel = make_direct_channel(art.topology, config);
  } else {
    art.topology = std::move(topology);
    art.channel = make_channel(art.topology, config);
  }

  switch (mode) {
    case Mode::kReference:
    case Mode::kDirect: {
      const ReferenceOptions o = reference_options(config);
      ReferenceResult r = mode == Mode::kDirect ? solve_direct(art.topology, art.channel, o)
                                                : solve_joint(art.topology, art.channel, o);
      art.solution = std::move(r.solution);
      art.reference_trace = std::move(r.history);
      break;
    }
    case Mode::kLayered: {
      LayeredOptions o;
      o.admm = config.layered;
      LayeredResult r = run_layered(art.topology, art.channel, o);
      art.solution = std::move(r.solution);
      art.layered_trace = std::move(r.trace);
      break;
    }
    case Mode::kDevice: {
      DeviceOptions o;
      o.admm = config.device.admm;
      o.partial_update_iters = config.device.partial_update_iters;
      o.skip_probability = config.device.skip_probability;
      o.plane_budget = config.device.plane_budget;
      o.bandwidth_penalty_scale = config.device.bandwidth_penalty_scale;
      o.seed = config.rng_seed;
      o.events = config.events;
      DeviceAdmm admm(art.topology, art.channel, o);
      DeviceResult r = admm.run();
      // Events mutate the node-side channel; report against what the nodes saw last.
      art.channel = admm.channel();
      art.solution = std::move(r.solution);
      art.device_trace = std::move(r.trace);
      art.messages = std::move(r.messages);
      break;
    }
  }

  if (config.quantization_grid > 0.0) {
    const bool converged = art.solution.converged;
    const int iterations = art.solution.iterations;
    QuantizeResult q = quantize_bandwidths(art.topology, art.channel, art.solution, config.quantization_grid,
                                           reference_options(config));
    art.solution = std::move(q.solution);
    art.solution.converged = converged;
    art.solution.iterations = iterations;
  }

  art.report = verify_solution(art.solution, art.topology, art.channel);
  rec.objective_kbps = art.solution.min_rate * 1e3;
  rec.total_power_w = art.solution.total_power;
  rec.total_power_dbm = watts_to_dbm(art.solution.total_power);
  rec.iterations = art.solution.iterations;
  rec.converged = art.solution.converged;
  rec.worst_violation = art.report.worst();
  rec.group_slack = art.report.group_slack;
  rec.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

void write_artifacts(const RunOutput& output, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto open = [&](const char* name) {
    std::ofstream f(out_dir / name);
    if (!f) throw Error("cannot write " + (out_dir / name).string());
    return f;
  };
  const RunArtifacts& a = output.artifacts;
  {
    std::ofstream f = open("topology.csv");
    write_topology_csv(f, a.topology, a.channel);
  }
  {
    std::ofstream f = open("solution.csv");
    write_solution_csv(f, a.topology, a.channel, a.solution);
  }
  {
    std::ofstream f = open("trace.csv");
    switch (output.record.mode) {
      case Mode::kReference:
      case Mode::kDirect: write_reference_trace_csv(f, a.reference_trace); break;
      case Mode::kLayered: write_layered_trace_csv(f, a.layered_trace); break;
      case Mode::kDevice: write_device_trace_csv(f, a.device_trace); break;
    }
  }
  if (a.messages) {
    std::ofstream f = open("messages.jsonl");
    a.messages->write_jsonl(f);
  }
}

RunOutput run_scenario(const std::filesystem::path& config_path, Mode mode, const std::filesystem::path& out_dir,
                       const RunOverrides& overrides) {
  const ScenarioConfig config = apply_overrides(load_scenario(config_path), overrides);
  RunOutput out = run_mode(config, mode);
  write_artifacts(out, out_dir);
  return out;
}

std::string ModeSpec::label() const {
  if (mode == Mode::kDirect) return "direct";
  std::string s = to_string(mode);
  if (reuse) s += " " + reuse_label(*reuse);
  return s;
}

const char* to_string(SweepSpec::Variable variable) {
  switch (variable) {
    case SweepSpec::Variable::kPmaxDbm: return "P_max_dBm";
    case SweepSpec::Variable::kReuse: return "reuse";
    case SweepSpec::Variable::kNodes: return "num_nodes";
    case SweepSpec::Variable::kRho: return "rho";
  }
  return "?";
}

void SweepSpec::validate() const {
  if (values.empty()) throw InvalidArgument("sweep: values must not be empty");
  if (modes.empty()) throw InvalidArgument("sweep: modes must not be empty");
  if (replications < 1) throw InvalidArgument("sweep: replications must be >= 1");
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidArgument("sweep: values must be finite");
    if (variable == Variable::kReuse && v != 0.0 && (v <= 2.0 || v != std::floor(v))) {
      throw InvalidArgument("sweep: reuse values must be integers > 2, or 0 for no reuse");
    }
    if (variable == Variable::kNodes && (v < 1.0 || v != std::floor(v))) {
      throw InvalidArgument("sweep: num_nodes values must be positive integers");
    }
    if (variable == Variable::kRho && !(v > 0.0)) throw InvalidArgument("sweep: rho values must be positive");
  }
}

namespace {

ReuseFactor reuse_from_json(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "none") return ReuseFactor::none();
    throw InvalidArgument("sweep: reuse must be an integer or \"inf\"");
  }
  return ReuseFactor::finite(j.get<int>());
}

ModeSpec mode_from_json(const json& j) {
  ModeSpec m;
  if (j.is_string()) {
    m.mode = parse_mode(j.get<std::string>());
    return m;
  }
  if (!j.is_object() || !j.contains("mode")) throw InvalidArgument("sweep: each mode needs a \"mode\" key");
  for (const auto& [key, value] : j.items()) {
    if (key != "mode" && key != "reuse") throw InvalidArgument("sweep: unknown mode key '" + key + "'");
  }
  m.mode = parse_mode(j.at("mode").get<std::string>());
  if (j.contains("reuse")) m.reuse = reuse_from_json(j.at("reuse"));
  return m;
}

}  // namespace

SweepSpec sweep_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("sweep: expected a JSON object");
  SweepSpec s;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "variable") {
        const std::string v = value.get<std::string>();
        if (v == "P_max_dBm") {
          s.variable = SweepSpec::Variable::kPmaxDbm;
        } else if (v == "reuse") {
          s.variable = SweepSpec::Variable::kReuse;
        } else if (v == "num_nodes") {
          s.variable = SweepSpec::Variable::kNodes;
        } else if (v == "rho") {
          s.variable = SweepSpec::Variable::kRho;
        } else {
          throw InvalidArgument("sweep: unknown variable '" + v + "'");
        }
      } else if (key == "values") {
        for (const json& x : value) {
          if (s.variable == SweepSpec::Variable::kReuse && x.is_string()) {
            reuse_from_json(x);
            s.values.push_back(0.0);
          } else {
            s.values.push_back(x.get<double>());
          }
        }
      } else if (key == "modes") {
        for (const json& m : value) s.modes.push_back(mode_from_json(m));
      } else if (key == "replications") {
        s.replications = value.get<int>();
      } else if (key == "seed_base") {
        s.seed_base = value.get<std::uint64_t>();
      } else {
        throw InvalidArgument("sweep: unknown key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("sweep: ") + e.what());
  }
  s.validate();
  return s;
}

SweepSpec load_sweep(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw InvalidArgument("cannot open sweep file " + path.string());
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
  return sweep_from_json(j);
}

namespace {

ScenarioConfig apply_value(ScenarioConfig c, SweepSpec::Variable variable, double value) {
  switch (variable) {
    case SweepSpec::Variable::kPmaxDbm: c.P_max = dbm_to_watts(value); break;
    case SweepSpec::Variable::kReuse:
      c.reuse = value == 0.0 ? ReuseFactor::none() : ReuseFactor::finite(static_cast<int>(value));
      break;
    case SweepSpec::Variable::kNodes: c.num_nodes = static_cast<int>(value); break;
    case SweepSpec::Variable::kRho:
      c.layered.rho = value;
      c.device.admm.rho = value;
      break;
  }
  return c;
}

void mean_std(const std::vector<double>& xs, double& mean, double& sd) {
  mean = 0.0;
  sd = 0.0;
  if (xs.empty()) return;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

SweepResult sweep(const SweepSpec& spec, const ScenarioConfig& base) {
  spec.validate();
  SweepResult result;
  for (double value : spec.values) {
    const ScenarioConfig at_value = apply_value(base, spec.variable, value);
    for (const ModeSpec& mode : spec.modes) {
      ScenarioConfig cell = at_value;
      if (mode.reuse) cell.reuse = *mode.reuse;
      SweepRow row;
      row.value = value;
      row.label = mode.label();
      std::vector<double> rates, powers;
      for (int r = 0; r < spec.replications; ++r) {
        cell.rng_seed = spec.seed_base + static_cast<std::uint64_t>(r);
        RunRecord rec;
        try {
          rec = run_mode(cell, mode.mode).record;
        } catch (const std::exception& e) {
          rec.scenario_hash = scenario_hash(cell);
          rec.mode = mode.mode;
          rec.seed = cell.rng_seed;
          rec.error = e.what();
          if (rec.error.empty()) rec.error = "unknown error";
        }
        rec.label = row.label;
        rec.value = value;
        if (rec.ok()) {
          ++row.runs;
          rates.push_back(rec.objective_kbps);
          powers.push_back(rec.total_power_w);
        } else {
          ++row.failures;
        }
        result.runs.push_back(std::move(rec));
      }
      mean_std(rates, row.rate_mean_kbps, row.rate_std_kbps);
      mean_std(powers, row.power_mean_w, row.power_std_w);
      row.power_mean_dbm = row.runs > 0 ? watts_to_dbm(row.power_mean_w) : 0.0;
      result.rows.push_back(row);
    }
  }
  return result;
}

VectorXd floor_to_grid(const VectorXd& bandwidth, double grid) {
  if (!(grid > 0.0)) throw InvalidArgument("floor_to_grid: grid must be positive");
  VectorXd out(bandwidth.size());
  for (Eigen::Index i = 0; i < bandwidth.size(); ++i) {
    const double k = std::floor(std::max(bandwidth[i], 0.0) / grid + 1e-9);
    out[i] = k * grid;
  }
  return out;
}

QuantizeResult quantize_bandwidths(const NetworkTopology& topology, const ChannelModel& channel,
                                   const GlobalSolution& solution, double grid, const ReferenceOptions& options) {
  if (grid < 0.0) throw InvalidArgument("quantize_bandwidths: grid must be non-negative");
  QuantizeResult out;
  out.objective_before = solution.min_rate;
  if (grid == 0.0) {
    out.solution = solution;
    out.objective_after = solution.min_rate;
    return out;
  }
  const VectorXd w = floor_to_grid(solution.bandwidth, grid);
  std::vector<int> keep;
  for (Eigen::Index l = 0; l < w.size(); ++l) {
    if (w[l] > 0.0) {
      keep.push_back(static_cast<int>(l));
    } else if (solution.bandwidth[l] > 0.0) {
      out.zeroed.push_back(static_cast<int>(l));
    }
  }
  // Links without spectrum carry nothing; solve on the rest and map back.
  const NetworkTopology sub = subset_links(topology, keep);
  ChannelModel sub_channel = channel;
  sub_channel.gain.clear();
  sub_channel.noise.clear();
  VectorXd sub_w(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    sub_channel.gain.push_back(channel.gain[keep[i]]);
    sub_channel.noise.push_back(channel.noise[keep[i]]);
    sub_w[static_cast<Eigen::Index>(i)] = w[keep[i]];
  }
  const int L = topology.num_links();
  VectorXd x = VectorXd::Zero(L), p = VectorXd::Zero(L);
  VectorXd classes;
  bool stranded = false;
  for (int n = 1; n < sub.num_nodes(); ++n) stranded = stranded || sub.out_links[n].empty();
  if (!stranded) {
    ReferenceOptions o = options;
    o.fixed_bandwidth = sub_w;
    o.throw_on_stall = false;
    const GlobalSolution s = solve_joint(sub, sub_channel, o).solution;
    for (std::size_t i = 0; i < keep.size(); ++i) {
      x[keep[i]] = s.flow[static_cast<Eigen::Index>(i)];
      p[keep[i]] = s.power[static_cast<Eigen::Index>(i)];
    }
    classes = s.class_bandwidth;
  }
  // A user with no spectrum left has rate zero, and so does the minimum.
  out.solution = assemble_solution(topology, channel, x, p, w, classes);
  out.objective_after = out.solution.min_rate;
  return out;
}

}  // namespace xlayer
