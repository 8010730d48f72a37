#ifndef XLAYER_SOLUTION_HPP_
#define XLAYER_SOLUTION_HPP_

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "xlayer/channel.hpp"
#include "xlayer/topology.hpp"

namespace xlayer {

// Units: flows and rates in Mbps, power in W, bandwidth in MHz.
struct GlobalSolution {
  Eigen::VectorXd flow;             // x, per link
  Eigen::VectorXd power;            // p, per link
  Eigen::VectorXd bandwidth;        // w, per link
  Eigen::VectorXd injected;         // r = A x, per node
  Eigen::VectorXd node_bandwidth;   // v, per node (0 for the destination)
  Eigen::VectorXd class_bandwidth;  // one entry per bandwidth class
  Eigen::VectorXd group_bandwidth;  // W_g, index g - 1
  double min_rate = 0.0;            // min over users of r_n
  double total_power = 0.0;
  bool converged = true;
  int iterations = 0;

  // min_rate - epsilon * total_power
  double objective(double epsilon) const { return min_rate - epsilon * total_power; }
};

// Fills the derived fields from (x, p, w) and the class bandwidths. When
// class_bandwidth is empty each class gets its largest group load and any
// remaining spectrum is split evenly across classes.
GlobalSolution assemble_solution(const NetworkTopology& topology, const ChannelModel& channel, Eigen::VectorXd flow,
                                 Eigen::VectorXd power, Eigen::VectorXd bandwidth,
                                 Eigen::VectorXd class_bandwidth = {});

// Hands each group's unused share W_g - sum v_n to the flow-carrying links of
// the group, in proportion to their bandwidth. Capacity and the power cap
// only get looser, so feasibility and the objective are preserved while the
// group constraints become tight.
void fill_group_bandwidth(GlobalSolution& solution, const NetworkTopology& topology, const ChannelModel& channel);

// Worst violation per constraint family. Power families are relative to
// P_max (absolute when P_max = 0), bandwidth families relative to W_max,
// flow and capacity absolute in Mbps.
struct ConstraintReport {
  double flow_conservation = 0.0;  // |A x - r|, plus negative user rates
  double capacity = 0.0;           // x - c(w, p)
  std::optional<double> power_cap; // p - gamma w; absent when gamma is inactive
  double node_power = 0.0;         // sum p - P_max
  double group_bandwidth = 0.0;    // sum v - W_g
  double total_bandwidth = 0.0;    // |sum_classes W - W_max|
  double reuse_tie = 0.0;          // |W_g - W_class(g)|
  double nonnegativity = 0.0;
  double group_slack = 0.0;        // largest W_g - sum v over flow-carrying groups

  double worst() const;
  bool ok(double tol) const { return worst() <= tol; }
  std::string to_string() const;
};

ConstraintReport verify_solution(const GlobalSolution& solution, const NetworkTopology& topology,
                                 const ChannelModel& channel);

}  // namespace xlayer

#endif  // XLAYER_SOLUTION_HPP_
