#ifndef XLAYER_CSV_HPP_
#define XLAYER_CSV_HPP_

#include <iosfwd>
#include <span>
#include <string>

#include "xlayer/admm_common.hpp"
#include "xlayer/channel.hpp"
#include "xlayer/device_admm.hpp"
#include "xlayer/experiment.hpp"
#include "xlayer/reference.hpp"
#include "xlayer/solution.hpp"
#include "xlayer/topology.hpp"

namespace xlayer {

// Shortest decimal that round-trips, so output is byte-stable across runs.
std::string format_number(double value);

// One table: node rows (id, x, y, group) followed by link rows (id, src, dst,
// length, gain); columns that do not apply to a row are left empty.
void write_topology_csv(std::ostream& out, const NetworkTopology& topology, const ChannelModel& channel);
// Per-link rows, then a summary row whose flow column holds the min rate and
// whose power and bandwidth columns hold the totals.
void write_solution_csv(std::ostream& out, const NetworkTopology& topology, const ChannelModel& channel,
                        const GlobalSolution& solution);
void write_reference_trace_csv(std::ostream& out, std::span<const ReferenceRound> rows);
void write_layered_trace_csv(std::ostream& out, std::span<const AdmmTraceRow> rows);
void write_device_trace_csv(std::ostream& out, std::span<const DeviceTraceRow> rows);
void write_runs_csv(std::ostream& out, std::span<const RunRecord> runs, const char* variable);
void write_sweep_summary_csv(std::ostream& out, std::span<const SweepRow> rows, const char* variable);

}  // namespace xlayer

#endif  // XLAYER_CSV_HPP_
