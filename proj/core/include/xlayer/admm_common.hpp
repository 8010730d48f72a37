#ifndef XLAYER_ADMM_COMMON_HPP_
#define XLAYER_ADMM_COMMON_HPP_

#include <vector>

#include <Eigen/Dense>

#include "xlayer/channel.hpp"
#include "xlayer/qp.hpp"
#include "xlayer/solution.hpp"
#include "xlayer/tangent_planes.hpp"
#include "xlayer/topology.hpp"

namespace xlayer {

// sqrt(dim) * eps_abs + eps_rel * scale
double residual_threshold(int dim, double eps_abs, double eps_rel, double scale);

struct RoutingQpResult {
  Eigen::VectorXd flow;
  double min_rate = 0.0;  // nu at the optimum
};

// maximize nu - rho/2 |x - target|^2  s.t.  (A x)_n >= nu for users, x >= 0.
// This is both the network-layer step (target = t - u) and the CU1 routing
// subproblem.
RoutingQpResult solve_routing_qp(const NetworkTopology& topology, const Eigen::VectorXd& target, double rho,
                                 const QpOptions& qp = {});

// Fresh per-link plane models holding the zero-SNR plane and the plane at
// (gamma w_bar, w_bar), w_bar = W_max / L (P_max instead of gamma w_bar when
// the power cap is inactive).
std::vector<TangentPlaneModel> initial_plane_models(const ChannelModel& channel, std::size_t budget);
void seed_plane_model(TangentPlaneModel& model, const ChannelModel& channel);

// Clips flows to min(x, t, c(w, p)) and rebuilds the derived fields. With
// reroute set, the clipped flows are then replaced by the max-min routing over
// the capacities c(w, p) whenever that does better: a clip on a relay link
// otherwise comes straight out of the relay's own rate.
GlobalSolution restore_feasibility(const NetworkTopology& topology, const ChannelModel& channel,
                                   const Eigen::VectorXd& x, const Eigen::VectorXd& t, const Eigen::VectorXd& p,
                                   const Eigen::VectorXd& w, const Eigen::VectorXd& class_bandwidth,
                                   bool reroute = true, const QpOptions& qp = {});

struct AdmmTraceRow {
  int iteration = 0;
  double objective = 0.0;  // min rate of the restored iterate, Mbps
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double primal_threshold = 0.0;
  double dual_threshold = 0.0;
};

}  // namespace xlayer

#endif  // XLAYER_ADMM_COMMON_HPP_
