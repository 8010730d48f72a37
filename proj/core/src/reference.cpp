#include "xlayer/reference.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "xlayer/capacity.hpp"
#include "xlayer/error.hpp"
#include "xlayer/tangent_planes.hpp"

namespace xlayer {

using Eigen::VectorXd;

namespace {

constexpr std::size_t kUnboundedBudget = 1u << 20;

void add_user_rate_rows(QpBuilder& b, const NetworkTopology& topology, int nu, int x0) {
  for (int n = 1; n < topology.num_nodes(); ++n) {
    std::vector<Term> row{{nu, 1.0}};
    for (int l : topology.out_links[n]) row.push_back({x0 + l, -1.0});
    for (int l : topology.in_links[n]) row.push_back({x0 + l, 1.0});
    b.add_inequality(row, 0.0);
  }
}

void seed_planes(TangentPlaneModel& model, const ChannelModel& channel, int L, bool log_spaced) {
  const LinkChannel& link = model.link();
  model.refine(0.0, 0.0);  // zero-SNR plane through the origin
  const double w_bar = channel.w_max / std::max(L, 1);
  if (channel.gamma_active()) {
    model.refine(channel.gamma * w_bar, w_bar);
  } else if (channel.p_max > 0.0) {
    model.refine(channel.p_max, w_bar);
  }
  if (!log_spaced) return;
  for (int k = 0; k < 15; ++k) {
    const double s = std::pow(10.0, -3.0 + 7.0 * k / 14.0);
    model.refine(s * link.noise / link.gain, 1.0);
  }
}

struct MasterPoint {
  VectorXd x, p, w, classes;
  double nu = 0.0;
  double value = 0.0;  // nu - epsilon sum p
};

// With min_rate unset the master maximizes nu - epsilon sum p; otherwise it
// minimizes sum p subject to every user rate staying above min_rate.
MasterPoint solve_master(const NetworkTopology& topology, const ChannelModel& channel,
                         const std::vector<TangentPlaneModel>& models, const ReferenceOptions& options,
                         std::optional<double> min_rate = std::nullopt) {
  const int L = topology.num_links();
  const int C = channel.num_classes();
  const double ps = channel.p_max;  // p = ps * p_hat
  QpBuilder b;
  const int nu = b.add_variable(min_rate ? *min_rate : QpBuilder::kFree);
  const int x0 = b.add_variables(L);
  const int p0 = b.add_variables(L);
  const int w0 = b.add_variables(L);
  const int c0 = b.add_variables(C);
  if (min_rate) {
    for (int l = 0; l < L; ++l) b.add_linear(p0 + l, 1.0);
  } else {
    b.add_linear(nu, -1.0);
    for (int l = 0; l < L; ++l) b.add_linear(p0 + l, channel.epsilon_power * ps);
  }

  add_user_rate_rows(b, topology, nu, x0);
  for (int l = 0; l < L; ++l) {
    for (const TangentPlane& pl : models[l].planes()) {
      b.add_inequality({{x0 + l, 1.0}, {p0 + l, -pl.d_power * ps}, {w0 + l, -pl.d_bandwidth}}, pl.intercept);
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
  if (options.fixed_bandwidth) {
    for (int l = 0; l < L; ++l) {
      const double wl = (*options.fixed_bandwidth)[l];
      if (!(wl > 0.0)) throw InvalidArgument("solve_joint: fixed bandwidths must be positive");
      b.add_equality({{w0 + l, 1.0}}, wl);
    }
  }

  const QpSolution sol = solve_qp(b.build(), options.qp);
  MasterPoint m;
  m.nu = sol.x[nu];
  m.x = sol.x.segment(x0, L).cwiseMax(0.0);
  m.p = (ps * sol.x.segment(p0, L)).cwiseMax(0.0);
  m.w = sol.x.segment(w0, L).cwiseMax(0.0);
  m.classes = sol.x.segment(c0, C).cwiseMax(0.0);
  m.value = m.nu - channel.epsilon_power * m.p.sum();
  return m;
}

void check_inputs(const NetworkTopology& topology, const ChannelModel& channel) {
  if (channel.num_links() != topology.num_links()) {
    throw InvalidArgument("reference solver: channel and topology disagree on the number of links");
  }
  if (channel.num_groups != topology.num_groups) {
    throw InvalidArgument("reference solver: channel and topology disagree on the number of groups");
  }
  if (!(channel.w_max > 0.0)) throw InvalidArgument("reference solver: W_max must be positive");
  for (int n = 1; n < topology.num_nodes(); ++n) {
    if (topology.out_links[n].empty()) {
      throw SolverError(SolverFailure::kInfeasible,
                        "reference solver: user " + std::to_string(n) + " has no outgoing link");
    }
  }
}

}  // namespace

RoutingLpResult max_min_routing(const NetworkTopology& topology, const VectorXd& cap, const QpOptions& qp) {
  const int L = topology.num_links();
  RoutingLpResult out;
  out.flow = VectorXd::Zero(L);
  if (topology.num_users() == 0) return out;
  QpBuilder b;
  const int nu = b.add_variable(QpBuilder::kFree);
  const int x0 = b.add_variables(L);
  b.add_linear(nu, -1.0);
  add_user_rate_rows(b, topology, nu, x0);
  for (int l = 0; l < L; ++l) b.add_inequality({{x0 + l, 1.0}}, std::max(cap[l], 0.0));
  const QpSolution sol = solve_qp(b.build(), qp);
  out.flow = sol.x.segment(x0, L).cwiseMax(0.0).cwiseMin(cap.cwiseMax(0.0));
  const VectorXd r = topology.incidence.cast<double>() * out.flow;
  out.min_rate = r.tail(topology.num_nodes() - 1).minCoeff();
  return out;
}

ReferenceResult solve_joint(const NetworkTopology& topology, const ChannelModel& channel,
                            const ReferenceOptions& options) {
  check_inputs(topology, channel);
  const int L = topology.num_links();
  const int C = channel.num_classes();
  ReferenceResult result;

  if (topology.num_users() == 0 || channel.p_max <= 0.0) {
    // Nothing to route, or no power to route it with.
    VectorXd classes = VectorXd::Constant(C, C > 0 ? channel.w_max / C : 0.0);
    VectorXd w = VectorXd::Zero(L);
    if (options.fixed_bandwidth) w = *options.fixed_bandwidth;
    result.solution = assemble_solution(topology, channel, VectorXd::Zero(L), VectorXd::Zero(L), w, classes);
    return result;
  }

  std::vector<TangentPlaneModel> models;
  models.reserve(static_cast<std::size_t>(L));
  for (int l = 0; l < L; ++l) {
    models.emplace_back(channel.link(l), kUnboundedBudget);
    seed_planes(models.back(), channel, L, options.seed_cuts);
  }

  double best_lb = -std::numeric_limits<double>::infinity();
  GlobalSolution best;
  double prev_ub = std::numeric_limits<double>::infinity();
  bool converged = false;
  int round = 0;
  for (; round < options.max_scp_iters; ++round) {
    const MasterPoint m = solve_master(topology, channel, models, options);

    VectorXd cap(L);
    double max_violation = 0.0;
    for (int l = 0; l < L; ++l) {
      cap[l] = capacity(m.w[l], m.p[l], channel.link(l));
      max_violation = std::max(max_violation, m.x[l] - cap[l]);
    }
    const RoutingLpResult routed = max_min_routing(topology, cap, options.qp);
    const double lb = routed.min_rate - channel.epsilon_power * m.p.sum();
    if (lb > best_lb) {
      best_lb = lb;
      best = assemble_solution(topology, channel, routed.flow, m.p, m.w, m.classes);
    }

    int added = 0;
    for (int l = 0; l < L; ++l) {
      if (m.x[l] - cap[l] > 0.1 * options.tol && models[l].refine(m.p[l], m.w[l])) ++added;
    }
    result.history.push_back({round, m.value, best_lb, max_violation, added});
    result.upper_bound = m.value;

    const double scale = std::max(std::abs(m.value), 1e-9);
    const bool gap_closed = m.value - best_lb <= options.tol * scale;
    const bool stalled = max_violation <= options.tol && std::abs(prev_ub - m.value) <= options.tol * scale;
    if (gap_closed || stalled || added == 0) {
      converged = true;
      ++round;
      break;
    }
    prev_ub = m.value;
  }
  result.lower_bound = best_lb;

  if (!converged && options.throw_on_stall) {
    std::ostringstream msg;
    msg << "solve_joint: cutting planes did not converge in " << options.max_scp_iters
        << " rounds (upper bound " << result.upper_bound << ", lower bound " << best_lb << ", last violation "
        << (result.history.empty() ? 0.0 : result.history.back().max_violation) << ")";
    throw SolverError(SolverFailure::kNotConverged, msg.str());
  }

  // Hold the certified min rate and minimize total power. With epsilon this
  // small the first phase leaves sum p below the solver tolerance.
  if (converged && best.min_rate > 0.0) {
    const double target = best.min_rate * (1.0 - options.tol);
    double best_power = best.total_power;
    for (int k = 0; k < options.max_scp_iters; ++k) {
      MasterPoint m;
      try {
        m = solve_master(topology, channel, models, options, target);
      } catch (const SolverError&) {
        break;
      }
      VectorXd cap(L);
      for (int l = 0; l < L; ++l) cap[l] = capacity(m.w[l], m.p[l], channel.link(l));
      const RoutingLpResult routed = max_min_routing(topology, cap, options.qp);
      if (routed.min_rate >= best.min_rate * (1.0 - 10.0 * options.tol) && m.p.sum() < best_power) {
        best_power = m.p.sum();
        best = assemble_solution(topology, channel, routed.flow, m.p, m.w, m.classes);
      }
      int added = 0;
      for (int l = 0; l < L; ++l) {
        if (m.x[l] - cap[l] > 0.1 * options.tol && models[l].refine(m.p[l], m.w[l])) ++added;
      }
      const double lower = m.p.sum();
      if (added == 0 || best_power - lower <= 1e-4 * std::max(best_power, 1e-300)) break;
    }
  }
  if (!options.fixed_bandwidth) fill_group_bandwidth(best, topology, channel);
  best.converged = converged;
  best.iterations = round;
  result.solution = std::move(best);
  return result;
}

ReferenceResult solve_direct(const NetworkTopology& topology, const ChannelModel& channel,
                             const ReferenceOptions& options) {
  for (int n = 1; n < topology.num_nodes(); ++n) {
    const auto& out = topology.out_links[n];
    if (out.size() != 1 || topology.links[out.front()].dst != 0) {
      throw InvalidArgument("solve_direct: every user needs exactly one link, to the destination");
    }
  }
  if (channel.gamma_active() || channel.reuse.is_finite()) {
    throw InvalidArgument("solve_direct: direct mode has no reuse and no per-link power cap");
  }
  return solve_joint(topology, channel, options);
}

}  // namespace xlayer
