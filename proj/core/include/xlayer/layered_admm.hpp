#ifndef XLAYER_LAYERED_ADMM_HPP_
#define XLAYER_LAYERED_ADMM_HPP_

#include <vector>

#include <Eigen/Dense>

#include "xlayer/admm_common.hpp"
#include "xlayer/channel.hpp"
#include "xlayer/scenario.hpp"
#include "xlayer/solution.hpp"
#include "xlayer/tangent_planes.hpp"
#include "xlayer/topology.hpp"

namespace xlayer {

struct LayeredOptions {
  AdmmSettings admm;               // rho defaults to 1
  double initial_flow = 1.0;       // t0
  double inner_tol = 1e-5;         // SCP tolerance inside the physical step
  int max_inner_iters = 100;
  std::size_t plane_budget = TangentPlaneModel::kDefaultBudget;
  bool reroute = true;  // see restore_feasibility
  QpOptions qp;
};

struct PhysicalStepResult {
  Eigen::VectorXd t, p, w, class_bandwidth;
  int scp_iterations = 0;
  double max_violation = 0.0;  // max_l t_l - c(w_l, p_l)
};

// minimize epsilon sum p + rho/2 |t - target|^2 over t <= c(w, p) and the
// power, bandwidth and reuse constraints, with target = x + u. The capacity
// is replaced by each link's plane model, refined at the iterate until the
// violation falls below inner_tol. Throws SolverError if that takes more
// than max_inner_iters rounds.
PhysicalStepResult physical_layer_step(const NetworkTopology& topology, const ChannelModel& channel,
                                       const Eigen::VectorXd& target, double rho,
                                       std::vector<TangentPlaneModel>& planes, double inner_tol, int max_inner_iters,
                                       const QpOptions& qp = {});

// u += x - t
void dual_step(Eigen::VectorXd& u, const Eigen::VectorXd& x, const Eigen::VectorXd& t);

struct LayeredResult {
  GlobalSolution solution;
  std::vector<AdmmTraceRow> trace;
  bool converged = false;
  int iterations = 0;
};

class LayeredAdmm {
 public:
  LayeredAdmm(const NetworkTopology& topology, const ChannelModel& channel, LayeredOptions options = {});

  // One sweep: network layer, physical layer, dual update. Returns true once
  // both residuals are below their thresholds.
  bool step();
  LayeredResult run();

  const Eigen::VectorXd& x() const { return x_; }
  const Eigen::VectorXd& t() const { return t_; }
  const Eigen::VectorXd& u() const { return u_; }
  int iteration() const { return k_; }
  GlobalSolution current_solution() const;

 private:
  const NetworkTopology& topology_;
  const ChannelModel& channel_;
  LayeredOptions options_;
  Eigen::VectorXd x_, t_, u_, p_, w_, classes_;
  std::vector<TangentPlaneModel> planes_;
  std::vector<AdmmTraceRow> trace_;
  int k_ = 0;
};

LayeredResult run_layered(const NetworkTopology& topology, const ChannelModel& channel,
                          const LayeredOptions& options = {});

}  // namespace xlayer

#endif  // XLAYER_LAYERED_ADMM_HPP_
