#ifndef XLAYER_REFERENCE_HPP_
#define XLAYER_REFERENCE_HPP_

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "xlayer/channel.hpp"
#include "xlayer/qp.hpp"
#include "xlayer/solution.hpp"
#include "xlayer/topology.hpp"

namespace xlayer {

struct ReferenceOptions {
  double tol = 1e-6;
  int max_scp_iters = 200;
  // Extra initial cuts per link at log-spaced SNR ratios.
  bool seed_cuts = true;
  // When set, bandwidths are pinned to these values (used by quantization).
  // Every entry must be positive; drop zero-bandwidth links beforehand.
  std::optional<Eigen::VectorXd> fixed_bandwidth;
  // Throw SolverError when max_scp_iters is hit; otherwise return the best
  // feasible point flagged non-converged.
  bool throw_on_stall = true;
  QpOptions qp;
};

struct ReferenceRound {
  int round = 0;
  double upper_bound = 0.0;   // outer-model optimum
  double lower_bound = 0.0;   // best exactly feasible objective so far
  double max_violation = 0.0; // max_l x_l - c(w_l, p_l) at the model optimum
  int cuts = 0;
};

struct ReferenceResult {
  GlobalSolution solution;
  std::vector<ReferenceRound> history;
  double upper_bound = 0.0;
  double lower_bound = 0.0;
};

// Maximizes min_n r_n - epsilon sum p over the joint routing, power and
// bandwidth constraints by Kelley cutting planes on the capacity
// constraints. Every round also solves the max-min routing LP for the
// current (p, w), which yields an exactly feasible point; the search stops
// when that lower bound meets the outer-model bound, or when the capacity
// violation and the bound change both drop below tol.
ReferenceResult solve_joint(const NetworkTopology& topology, const ChannelModel& channel,
                            const ReferenceOptions& options = {});

// Direct-mode baseline: requires a topology in which every user has a single
// link to the destination and a channel without reuse or power cap (see
// make_direct_topology and make_direct_channel).
ReferenceResult solve_direct(const NetworkTopology& direct_topology, const ChannelModel& direct_channel,
                             const ReferenceOptions& options = {});

struct RoutingLpResult {
  Eigen::VectorXd flow;
  double min_rate = 0.0;
};

// max nu  s.t.  (A x)_n >= nu for users, 0 <= x <= cap.
RoutingLpResult max_min_routing(const NetworkTopology& topology, const Eigen::VectorXd& link_capacity,
                                const QpOptions& qp = {});

}  // namespace xlayer

#endif  // XLAYER_REFERENCE_HPP_
