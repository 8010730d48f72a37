#include "xlayer/layered_admm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "xlayer/capacity.hpp"
#include "xlayer/error.hpp"

namespace xlayer {

using Eigen::VectorXd;

PhysicalStepResult physical_layer_step(const NetworkTopology& topology, const ChannelModel& channel,
                                       const VectorXd& target, double rho, std::vector<TangentPlaneModel>& planes,
                                       double inner_tol, int max_inner_iters, const QpOptions& qp) {
  const int L = topology.num_links();
  const int C = channel.num_classes();
  if (target.size() != L || static_cast<int>(planes.size()) != L) {
    throw InvalidArgument("physical_layer_step: target and plane models need one entry per link");
  }
  PhysicalStepResult out;
  out.class_bandwidth = VectorXd::Constant(C, C > 0 ? channel.w_max / C : 0.0);
  if (channel.p_max <= 0.0 || L == 0) {
    out.t = VectorXd::Zero(L);
    out.p = VectorXd::Zero(L);
    out.w = VectorXd::Zero(L);
    return out;
  }
  const double ps = channel.p_max;

  for (int round = 1; round <= max_inner_iters; ++round) {
    QpBuilder b;
    const int t0 = b.add_variables(L);
    const int p0 = b.add_variables(L);
    const int w0 = b.add_variables(L);
    const int c0 = b.add_variables(C);
    for (int l = 0; l < L; ++l) {
      b.add_quadratic(t0 + l, t0 + l, rho);
      b.add_linear(t0 + l, -rho * target[l]);
      b.add_linear(p0 + l, channel.epsilon_power * ps);
      for (const TangentPlane& pl : planes[l].planes()) {
        b.add_inequality({{t0 + l, 1.0}, {p0 + l, -pl.d_power * ps}, {w0 + l, -pl.d_bandwidth}}, pl.intercept);
      }
      if (channel.gamma_active()) b.add_inequality({{p0 + l, ps}, {w0 + l, -channel.gamma}}, 0.0);
    }
    for (int n = 1; n < topology.num_nodes(); ++n) {
      if (topology.out_links[n].empty()) continue;
      std::vector<Term> row;
      for (int l : topology.out_links[n]) row.push_back({p0 + l, 1.0});
      b.add_inequality(row, 1.0);
    }
    for (int g = 1; g <= topology.num_groups; ++g) {
      std::vector<Term> row{{c0 + channel.class_of_group(g), -1.0}};
      for (int n = 1; n < topology.num_nodes(); ++n) {
        if (topology.group_of[n] != g) continue;
        for (int l : topology.out_links[n]) row.push_back({w0 + l, 1.0});
      }
      b.add_inequality(row, 0.0);
    }
    {
      std::vector<Term> row;
      for (int c = 0; c < C; ++c) row.push_back({c0 + c, 1.0});
      b.add_equality(row, channel.w_max);
    }
    const QpSolution sol = solve_qp(b.build(), qp);
    out.t = sol.x.segment(t0, L).cwiseMax(0.0);
    out.p = (ps * sol.x.segment(p0, L)).cwiseMax(0.0);
    out.w = sol.x.segment(w0, L).cwiseMax(0.0);
    out.class_bandwidth = sol.x.segment(c0, C).cwiseMax(0.0);
    out.scp_iterations = round;

    out.max_violation = 0.0;
    bool refined = false;
    for (int l = 0; l < L; ++l) {
      const double viol = out.t[l] - capacity(out.w[l], out.p[l], planes[l].link());
      out.max_violation = std::max(out.max_violation, viol);
      planes[l].mark_tight(out.p[l], out.w[l]);
      if (viol > inner_tol && planes[l].refine(out.p[l], out.w[l])) refined = true;
    }
    if (out.max_violation <= inner_tol || !refined) return out;
  }
  std::ostringstream msg;
  msg << "physical_layer_step: SCP did not reach violation " << inner_tol << " in " << max_inner_iters
      << " rounds (last " << out.max_violation << ")";
  throw SolverError(SolverFailure::kNotConverged, msg.str());
}

void dual_step(VectorXd& u, const VectorXd& x, const VectorXd& t) { u += x - t; }

LayeredAdmm::LayeredAdmm(const NetworkTopology& topology, const ChannelModel& channel, LayeredOptions options)
    : topology_(topology), channel_(channel), options_(options) {
  if (!(options_.admm.rho > 0.0)) throw InvalidArgument("LayeredAdmm: rho must be positive");
  const int L = topology.num_links();
  x_ = VectorXd::Zero(L);
  t_ = VectorXd::Constant(L, options_.initial_flow);
  u_ = VectorXd::Zero(L);
  p_ = VectorXd::Zero(L);
  w_ = VectorXd::Zero(L);
  const int C = channel.num_classes();
  classes_ = VectorXd::Constant(C, C > 0 ? channel.w_max / C : 0.0);
  planes_ = initial_plane_models(channel, options_.plane_budget);
}

GlobalSolution LayeredAdmm::current_solution() const {
  return restore_feasibility(topology_, channel_, x_, t_, p_, w_, classes_, options_.reroute, options_.qp);
}

bool LayeredAdmm::step() {
  const double rho = options_.admm.rho;
  const int L = topology_.num_links();
  x_ = solve_routing_qp(topology_, t_ - u_, rho, options_.qp).flow;
  const VectorXd t_prev = t_;
  PhysicalStepResult phys = physical_layer_step(topology_, channel_, x_ + u_, rho, planes_, options_.inner_tol,
                                                options_.max_inner_iters, options_.qp);
  t_ = std::move(phys.t);
  p_ = std::move(phys.p);
  w_ = std::move(phys.w);
  classes_ = std::move(phys.class_bandwidth);
  dual_step(u_, x_, t_);
  ++k_;

  AdmmTraceRow row;
  row.iteration = k_;
  row.primal_residual = (x_ - t_).norm();
  row.dual_residual = rho * (t_ - t_prev).norm();
  row.primal_threshold = residual_threshold(L, options_.admm.eps_abs, options_.admm.eps_rel,
                                            std::max(x_.norm(), t_.norm()));
  row.dual_threshold = residual_threshold(L, options_.admm.eps_abs, options_.admm.eps_rel, rho * u_.norm());
  row.objective = current_solution().min_rate;
  trace_.push_back(row);
  return row.primal_residual <= row.primal_threshold && row.dual_residual <= row.dual_threshold;
}

LayeredResult LayeredAdmm::run() {
  LayeredResult result;
  if (topology_.num_users() == 0) {
    result.solution = current_solution();
    result.converged = true;
    return result;
  }
  // Best iterate by normalized residual, reported if the budget runs out.
  double best_score = std::numeric_limits<double>::infinity();
  GlobalSolution best;
  while (k_ < options_.admm.max_iters) {
    if (step()) {
      result.converged = true;
      break;
    }
    const AdmmTraceRow& row = trace_.back();
    const double score =
        std::max(row.primal_residual / row.primal_threshold, row.dual_residual / row.dual_threshold);
    if (score < best_score) {
      best_score = score;
      best = current_solution();
    }
  }
  result.solution = result.converged ? current_solution() : best;
  result.solution.converged = result.converged;
  result.solution.iterations = k_;
  result.iterations = k_;
  result.trace = trace_;
  return result;
}

LayeredResult run_layered(const NetworkTopology& topology, const ChannelModel& channel,
                          const LayeredOptions& options) {
  LayeredAdmm admm(topology, channel, options);
  return admm.run();
}

}  // namespace xlayer
