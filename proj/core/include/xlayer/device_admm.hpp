#ifndef XLAYER_DEVICE_ADMM_HPP_
#define XLAYER_DEVICE_ADMM_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "xlayer/admm_common.hpp"
#include "xlayer/channel.hpp"
#include "xlayer/scenario.hpp"
#include "xlayer/solution.hpp"
#include "xlayer/tangent_planes.hpp"
#include "xlayer/topology.hpp"

namespace xlayer {

// Everything a node knows about its own outgoing links.
struct NodeChannel {
  std::vector<LinkChannel> links;
  double gamma = 0.0;  // +inf when inactive
  double p_max = 0.0;
  double epsilon_power = 0.0;
};

struct NodeSolution {
  Eigen::VectorXd t, p, w;  // per outgoing link
  double b = 0.0;
  double max_violation = 0.0;  // max t_l - c(w_l, p_l) before refinement
  bool stale = false;          // QP failed; caller keeps the previous values
};

// minimize rho/2 |t - flow_target|^2 + rho_b/2 (b - bandwidth_target)^2 + epsilon sum p
// s.t. t_l <= plane model, sum p <= P_max, p_l <= gamma w_l, sum w = b, all >= 0.
// planes holds one model per outgoing link (same order as local.links); models
// whose violation exceeds refine_tol get a plane at the solution, and the QP
// is re-solved up to max_rounds times while planes keep being added. rho_b
// defaults to rho when bandwidth_rho <= 0.
NodeSolution node_subproblem(const NodeChannel& local, const Eigen::VectorXd& flow_target, double bandwidth_target,
                             double rho, std::span<TangentPlaneModel> planes, double refine_tol = 1e-5,
                             const QpOptions& qp = {}, double bandwidth_rho = 0.0, int max_rounds = 1);

// Users grouped for the CU2 projection. group_of_user[i] is the 1-based group
// of user i + 1; class_of_group[g - 1] its bandwidth class.
struct GroupStructure {
  std::vector<int> group_of_user;
  std::vector<int> class_of_group;
  int num_classes = 0;
  double w_max = 0.0;

  static GroupStructure from(const NetworkTopology& topology, const ChannelModel& channel);
};

struct BandwidthProjection {
  Eigen::VectorXd v;                // per user
  Eigen::VectorXd class_bandwidth;  // per class, sums to W_max
  Eigen::VectorXd group_bandwidth;  // W_g, index g - 1
};

// argmin |v - point|^2 s.t. sum_{n in G_g} v_n <= W_class(g), sum_c W_c = W_max,
// v >= 0, with point = b - y. Solved by water-filling over the classes: each
// class's marginal value of bandwidth is twice the sum of its groups'
// capped-simplex water levels, and the level is found by bisection. When the
// clamped point fits, the spare spectrum is split evenly across classes.
BandwidthProjection bandwidth_projection(const Eigen::VectorXd& point, const GroupStructure& groups);

// u += x - t, y += v - b
void device_dual_updates(Eigen::VectorXd& u, Eigen::VectorXd& y, const Eigen::VectorXd& x, const Eigen::VectorXd& t,
                         const Eigen::VectorXd& v, const Eigen::VectorXd& b);

struct DeviceTraceRow {
  int iteration = 0;
  int epoch = 0;           // number of channel events applied so far
  double objective = 0.0;  // min rate of the restored iterate, Mbps
  double h1 = 0.0, h2 = 0.0, s1 = 0.0, s2 = 0.0;
  double h1_threshold = 0.0, h2_threshold = 0.0, s1_threshold = 0.0, s2_threshold = 0.0;
  int updated_nodes = 0;
  int stale_nodes = 0;
};

bool stopping_check(const DeviceTraceRow& row);

// One iteration of traffic. CU1 broadcasts x + u (one value per link), CU2
// broadcasts v + y (one per user), every node that updated broadcasts t on its
// outgoing links and b. snapshot_ids holds, per node that updated, the id of
// the CU broadcast it read.
struct MessageRecord {
  int iteration = 0;
  int cu1_values = 0;
  int cu2_values = 0;
  std::uint64_t broadcast_id = 0;
  std::vector<int> nodes;         // nodes that broadcast this iteration
  std::vector<int> node_values;   // |O(n)| + 1 per broadcasting node
  std::vector<std::uint64_t> snapshot_ids;

  int node_value_total() const;
  std::size_t bytes() const;  // 8 bytes per value
  bool snapshot_consistent() const;
};

class MessageLog {
 public:
  void append(MessageRecord record) { records_.push_back(std::move(record)); }
  const std::vector<MessageRecord>& records() const { return records_; }
  bool snapshot_consistent() const;
  // One JSON object per line.
  void write_jsonl(std::ostream& out) const;

 private:
  std::vector<MessageRecord> records_;
};

struct DeviceOptions {
  // rho = 0.5; eps_rel is ten times tighter than the layered default because
  // the bandwidth threshold scales with |v|, which the first group dominates.
  AdmmSettings admm{0.5, 500, 1e-4, 1e-4};
  // Penalty on the bandwidth consensus is rho * bandwidth_penalty_scale.
  // Bandwidths are in MHz and flows in Mbps; at equal penalties the
  // bandwidth block moves about ten times too slowly.
  double bandwidth_penalty_scale = 0.1;
  bool reroute = true;  // see restore_feasibility
  double initial_flow = 1.0;       // t0
  double initial_bandwidth = 1.0;  // b0
  int partial_update_iters = 5;
  double skip_probability = 0.5;
  std::uint64_t seed = 1;          // drives the partial-update draws
  std::size_t plane_budget = TangentPlaneModel::kDefaultBudget;
  double refine_tol = 1e-5;
  int node_refine_rounds = 1;  // QP solves per node per iteration
  std::vector<ChannelEvent> events;
  bool reset_planes_on_event = true;
  QpOptions qp;
};

struct DeviceResult {
  GlobalSolution solution;
  std::vector<DeviceTraceRow> trace;
  MessageLog messages;
  bool converged = false;
  int iterations = 0;
  // Iterations needed to meet the stopping rule, counted from the start of
  // each epoch (cold start, then after each channel event); -1 if never met.
  std::vector<int> epoch_iterations;
};

class DeviceAdmm {
 public:
  DeviceAdmm(const NetworkTopology& topology, const ChannelModel& channel, DeviceOptions options = {});

  // One iteration of the CU, node and dual phases. Returns the stopping test.
  bool step();
  DeviceResult run();

  // Applies an event to the node-local channel state.
  void apply_event(const ChannelEvent& event);

  const ChannelModel& channel() const { return channel_; }
  const Eigen::VectorXd& x() const { return x_; }
  const Eigen::VectorXd& t() const { return t_; }
  const Eigen::VectorXd& v() const { return v_; }
  const Eigen::VectorXd& b() const { return b_; }
  int iteration() const { return k_; }
  const std::vector<DeviceTraceRow>& trace() const { return trace_; }
  const MessageLog& messages() const { return log_; }
  NodeChannel node_channel(int n) const;
  GlobalSolution current_solution() const;

 private:
  const NetworkTopology& topology_;
  ChannelModel channel_;
  DeviceOptions options_;
  GroupStructure groups_;
  Eigen::VectorXd x_, v_, t_, b_, u_, y_, p_, w_, classes_;
  std::vector<std::vector<TangentPlaneModel>> planes_;  // per node, per outgoing link
  std::vector<DeviceTraceRow> trace_;
  MessageLog log_;
  Rng rng_;
  int k_ = 0;
  int epoch_ = 0;
  std::size_t next_event_ = 0;
};

DeviceResult run_device_admm(const NetworkTopology& topology, const ChannelModel& channel,
                             const DeviceOptions& options = {});

// Scales each group's powers and bandwidths by min(1, W_g / load) so the
// group constraints hold, then passes the flows through restore_feasibility.
GlobalSolution restore_device_solution(const NetworkTopology& topology, const ChannelModel& channel,
                                       const Eigen::VectorXd& x, const Eigen::VectorXd& t, Eigen::VectorXd p,
                                       Eigen::VectorXd w, const Eigen::VectorXd& class_bandwidth,
                                       bool reroute = true, const QpOptions& qp = {});

struct PruneResult {
  NetworkTopology topology;
  std::vector<int> kept;     // original indices of the surviving links
  std::vector<int> removed;
  std::vector<int> flagged;  // below the floor but needed for connectivity
};

// Drops links whose flow is below flow_floor, lightest first, unless the
// removal would cut some user off from the destination.
PruneResult prune_links(const NetworkTopology& topology, const Eigen::VectorXd& flow, double flow_floor);

}  // namespace xlayer

#endif  // XLAYER_DEVICE_ADMM_HPP_
