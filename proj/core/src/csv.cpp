#include "xlayer/csv.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

#include "xlayer/capacity.hpp"

namespace xlayer {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";  // folds -0
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {

std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void write_topology_csv(std::ostream& out, const NetworkTopology& topology, const ChannelModel& channel) {
  out << "kind,id,x_m,y_m,group,src,dst,length_m,gain\n";
  for (int n = 0; n < topology.num_nodes(); ++n) {
    const Point& a = topology.positions[n];
    out << "node," << n << ',' << format_number(a.x) << ',' << format_number(a.y) << ',' << topology.group_of[n]
        << ",,,,\n";
  }
  for (int l = 0; l < topology.num_links(); ++l) {
    const Link& k = topology.links[l];
    out << "link," << l << ",,,," << k.src << ',' << k.dst << ',' << format_number(k.length) << ','
        << format_number(channel.gain[l]) << '\n';
  }
}

void write_solution_csv(std::ostream& out, const NetworkTopology& topology, const ChannelModel& channel,
                        const GlobalSolution& solution) {
  out << "link,src,dst,flow_mbps,power_w,bandwidth_mhz,capacity_mbps\n";
  for (int l = 0; l < topology.num_links(); ++l) {
    const Link& k = topology.links[l];
    const double c = capacity(solution.bandwidth[l], solution.power[l], channel.link(l));
    out << l << ',' << k.src << ',' << k.dst << ',' << format_number(solution.flow[l]) << ','
        << format_number(solution.power[l]) << ',' << format_number(solution.bandwidth[l]) << ','
        << format_number(c) << '\n';
  }
  out << "summary,,," << format_number(solution.min_rate) << ',' << format_number(solution.total_power) << ','
      << format_number(solution.bandwidth.sum()) << ",\n";
}

void write_reference_trace_csv(std::ostream& out, std::span<const ReferenceRound> rows) {
  out << "round,upper_bound,lower_bound,max_violation,cuts\n";
  for (const ReferenceRound& r : rows) {
    out << r.round << ',' << format_number(r.upper_bound) << ',' << format_number(r.lower_bound) << ','
        << format_number(r.max_violation) << ',' << r.cuts << '\n';
  }
}

void write_layered_trace_csv(std::ostream& out, std::span<const AdmmTraceRow> rows) {
  out << "iteration,objective_mbps,primal_residual,dual_residual,primal_threshold,dual_threshold\n";
  for (const AdmmTraceRow& r : rows) {
    out << r.iteration << ',' << format_number(r.objective) << ',' << format_number(r.primal_residual) << ','
        << format_number(r.dual_residual) << ',' << format_number(r.primal_threshold) << ','
        << format_number(r.dual_threshold) << '\n';
  }
}

void write_device_trace_csv(std::ostream& out, std::span<const DeviceTraceRow> rows) {
  out << "iteration,epoch,objective_mbps,h1,h2,s1,s2,h1_threshold,h2_threshold,s1_threshold,s2_threshold,"
         "updated_nodes,stale_nodes\n";
  for (const DeviceTraceRow& r : rows) {
    out << r.iteration << ',' << r.epoch << ',' << format_number(r.objective) << ',' << format_number(r.h1) << ','
        << format_number(r.h2) << ',' << format_number(r.s1) << ',' << format_number(r.s2) << ','
        << format_number(r.h1_threshold) << ',' << format_number(r.h2_threshold) << ','
        << format_number(r.s1_threshold) << ',' << format_number(r.s2_threshold) << ',' << r.updated_nodes << ','
        << r.stale_nodes << '\n';
  }
}

void write_runs_csv(std::ostream& out, std::span<const RunRecord> runs, const char* variable) {
  out << "scenario_hash,mode," << variable
      << ",seed,objective_kbps,total_power_dbm,total_power_w,iterations,converged,worst_violation,error\n";
  for (const RunRecord& r : runs) {
    out << r.scenario_hash << ',' << quoted(r.label.empty() ? to_string(r.mode) : r.label) << ','
        << format_number(r.value) << ',' << r.seed << ',';
    if (r.ok()) {
      out << format_number(r.objective_kbps) << ',' << format_number(r.total_power_dbm) << ','
          << format_number(r.total_power_w) << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << ','
          << format_number(r.worst_violation) << ",\n";
    } else {
      out << ",,,,,," << quoted(r.error) << '\n';
    }
  }
}

void write_sweep_summary_csv(std::ostream& out, std::span<const SweepRow> rows, const char* variable) {
  out << variable
      << ",mode,runs,failures,rate_mean_kbps,rate_std_kbps,power_mean_w,power_std_w,power_mean_dbm\n";
  for (const SweepRow& r : rows) {
    out << format_number(r.value) << ',' << quoted(r.label) << ',' << r.runs << ',' << r.failures << ','
        << format_number(r.rate_mean_kbps) << ',' << format_number(r.rate_std_kbps) << ','
        << format_number(r.power_mean_w) << ',' << format_number(r.power_std_w) << ','
        << format_number(r.power_mean_dbm) << '\n';
  }
}

}  // namespace xlayer
