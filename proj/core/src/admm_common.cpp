#include "xlayer/admm_common.hpp"

#include <algorithm>
#include <cmath>

#include "xlayer/capacity.hpp"
#include "xlayer/error.hpp"
#include "xlayer/reference.hpp"

namespace xlayer {

using Eigen::VectorXd;

double residual_threshold(int dim, double eps_abs, double eps_rel, double scale) {
  return std::sqrt(static_cast<double>(dim)) * eps_abs + eps_rel * scale;
}

RoutingQpResult solve_routing_qp(const NetworkTopology& topology, const VectorXd& target, double rho,
                                 const QpOptions& qp) {
  if (!(rho > 0.0)) throw InvalidArgument("solve_routing_qp: rho must be positive");
  const int L = topology.num_links();
  if (target.size() != L) throw InvalidArgument("solve_routing_qp: target needs one entry per link");
  RoutingQpResult out;
  if (topology.num_users() == 0) {
    out.flow = target.cwiseMax(0.0);
    return out;
  }
  QpBuilder b;
  const int nu = b.add_variable(QpBuilder::kFree);
  const int x0 = b.add_variables(L);
  b.add_linear(nu, -1.0);
  for (int l = 0; l < L; ++l) {
    b.add_quadratic(x0 + l, x0 + l, rho);
    b.add_linear(x0 + l, -rho * target[l]);
  }
  for (int n = 1; n < topology.num_nodes(); ++n) {
    std::vector<Term> row{{nu, 1.0}};
    for (int l : topology.out_links[n]) row.push_back({x0 + l, -1.0});
    for (int l : topology.in_links[n]) row.push_back({x0 + l, 1.0});
    b.add_inequality(row, 0.0);
  }
  const QpSolution sol = solve_qp(b.build(), qp);
  out.flow = sol.x.segment(x0, L).cwiseMax(0.0);
  out.min_rate = sol.x[nu];
  return out;
}

void seed_plane_model(TangentPlaneModel& model, const ChannelModel& channel) {
  const int L = std::max(channel.num_links(), 1);
  const double w_bar = channel.w_max / L;
  model.clear();
  model.refine(0.0, 0.0);
  if (channel.gamma_active()) {
    model.refine(channel.gamma * w_bar, w_bar);
  } else if (channel.p_max > 0.0) {
    model.refine(channel.p_max, w_bar);
  }
}

std::vector<TangentPlaneModel> initial_plane_models(const ChannelModel& channel, std::size_t budget) {
  std::vector<TangentPlaneModel> models;
  models.reserve(static_cast<std::size_t>(channel.num_links()));
  for (int l = 0; l < channel.num_links(); ++l) {
    models.emplace_back(channel.link(l), budget);
    seed_plane_model(models.back(), channel);
  }
  return models;
}

GlobalSolution restore_feasibility(const NetworkTopology& topology, const ChannelModel& channel, const VectorXd& x,
                                   const VectorXd& t, const VectorXd& p, const VectorXd& w,
                                   const VectorXd& class_bandwidth, bool reroute, const QpOptions& qp) {
  const int L = topology.num_links();
  VectorXd clipped(L), cap(L);
  for (int l = 0; l < L; ++l) {
    cap[l] = capacity(std::max(w[l], 0.0), std::max(p[l], 0.0), channel.link(l));
    clipped[l] = std::max(0.0, std::min({x[l], t[l], cap[l]}));
  }
  if (reroute && topology.num_users() > 0) {
    const VectorXd r = topology.incidence.cast<double>() * clipped;
    const double clipped_rate = r.tail(topology.num_nodes() - 1).minCoeff();
    try {
      RoutingLpResult routed = max_min_routing(topology, cap, qp);
      if (routed.min_rate > clipped_rate) clipped = std::move(routed.flow);
    } catch (const SolverError&) {
      // keep the clipped flows
    }
  }
  GlobalSolution s = assemble_solution(topology, channel, clipped, p.cwiseMax(0.0), w.cwiseMax(0.0), class_bandwidth);
  fill_group_bandwidth(s, topology, channel);
  return s;
}

}  // namespace xlayer
