#include "xlayer/device_admm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <nlohmann/json.hpp>

#include "xlayer/capacity.hpp"
#include "xlayer/error.hpp"
#include "xlayer/projection.hpp"

namespace xlayer {

using Eigen::VectorXd;

NodeSolution node_subproblem(const NodeChannel& local, const VectorXd& flow_target, double bandwidth_target,
                             double rho, std::span<TangentPlaneModel> planes, double refine_tol, const QpOptions& qp,
                             double bandwidth_rho, int max_rounds) {
  if (bandwidth_rho <= 0.0) bandwidth_rho = rho;
  const int m = static_cast<int>(local.links.size());
  if (m == 0) throw InvalidArgument("node_subproblem: node has no outgoing link");
  if (flow_target.size() != m || static_cast<int>(planes.size()) != m) {
    throw InvalidArgument("node_subproblem: need one target and one plane model per outgoing link");
  }
  if (!(rho > 0.0)) throw InvalidArgument("node_subproblem: rho must be positive");
  NodeSolution out;
  if (local.p_max <= 0.0) {
    out.t = VectorXd::Zero(m);
    out.p = VectorXd::Zero(m);
    out.b = std::max(bandwidth_target, 0.0);
    out.w = VectorXd::Constant(m, out.b / m);
    return out;
  }

  const double ps = local.p_max;
  const bool capped = std::isfinite(local.gamma);
  for (int round = 1; round <= std::max(max_rounds, 1); ++round) {
    QpBuilder q;
    const int t0 = q.add_variables(m);
    const int p0 = q.add_variables(m);
    const int w0 = q.add_variables(m);
    const int bv = q.add_variable();
    q.add_quadratic(bv, bv, bandwidth_rho);
    q.add_linear(bv, -bandwidth_rho * bandwidth_target);
    std::vector<Term> power_row, bw_row{{bv, -1.0}};
    for (int i = 0; i < m; ++i) {
      q.add_quadratic(t0 + i, t0 + i, rho);
      q.add_linear(t0 + i, -rho * flow_target[i]);
      q.add_linear(p0 + i, local.epsilon_power * ps);
      for (const TangentPlane& pl : planes[i].planes()) {
        q.add_inequality({{t0 + i, 1.0}, {p0 + i, -pl.d_power * ps}, {w0 + i, -pl.d_bandwidth}}, pl.intercept);
      }
      if (capped) q.add_inequality({{p0 + i, ps}, {w0 + i, -local.gamma}}, 0.0);
      power_row.push_back({p0 + i, 1.0});
      bw_row.push_back({w0 + i, 1.0});
    }
    q.add_inequality(power_row, 1.0);
    q.add_equality(bw_row, 0.0);

    QpSolution sol;
    try {
      sol = solve_qp(q.build(), qp);
    } catch (const SolverError&) {
      out.stale = true;
      return out;
    }
    out.t = sol.x.segment(t0, m).cwiseMax(0.0);
    out.p = (ps * sol.x.segment(p0, m)).cwiseMax(0.0);
    out.w = sol.x.segment(w0, m).cwiseMax(0.0);
    out.b = out.w.sum();
    out.max_violation = 0.0;
    bool refined = false;
    for (int i = 0; i < m; ++i) {
      const double viol = out.t[i] - capacity(out.w[i], out.p[i], local.links[i]);
      out.max_violation = std::max(out.max_violation, viol);
      planes[i].mark_tight(out.p[i], out.w[i]);
      if (viol > refine_tol && planes[i].refine(out.p[i], out.w[i])) refined = true;
    }
    if (!refined) break;
  }
  return out;
}

GroupStructure GroupStructure::from(const NetworkTopology& topology, const ChannelModel& channel) {
  GroupStructure s;
  for (int n = 1; n < topology.num_nodes(); ++n) s.group_of_user.push_back(topology.group_of[n]);
  for (int g = 1; g <= topology.num_groups; ++g) s.class_of_group.push_back(channel.class_of_group(g));
  s.num_classes = channel.num_classes();
  s.w_max = channel.w_max;
  return s;
}

namespace {

struct ClassView {
  std::vector<VectorXd> points;  // one per group of the class
  double demand = 0.0;           // smallest W at which no group is clipped

  double marginal(double cap) const {
    double s = 0.0;
    for (const VectorXd& p : points) s += capped_simplex_threshold(p, cap);
    return 2.0 * s;
  }

  // Smallest W with marginal(W) <= level.
  double allocation(double level) const {
    if (marginal(0.0) <= level) return 0.0;
    double lo = 0.0, hi = demand;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, demand); ++it) {
      const double mid = 0.5 * (lo + hi);
      (marginal(mid) <= level ? hi : lo) = mid;
    }
    return hi;
  }
};

}  // namespace

BandwidthProjection bandwidth_projection(const VectorXd& point, const GroupStructure& groups) {
  const int users = static_cast<int>(groups.group_of_user.size());
  const int M = static_cast<int>(groups.class_of_group.size());
  const int C = groups.num_classes;
  if (point.size() != users) throw InvalidArgument("bandwidth_projection: need one entry per user");
  if (C <= 0) throw InvalidArgument("bandwidth_projection: no bandwidth classes");

  std::vector<std::vector<int>> members(static_cast<std::size_t>(M));
  for (int i = 0; i < users; ++i) members[groups.group_of_user[i] - 1].push_back(i);

  std::vector<ClassView> classes(static_cast<std::size_t>(C));
  for (int g = 0; g < M; ++g) {
    VectorXd p(static_cast<Eigen::Index>(members[g].size()));
    for (std::size_t k = 0; k < members[g].size(); ++k) p[static_cast<Eigen::Index>(k)] = point[members[g][k]];
    ClassView& cv = classes[groups.class_of_group[g]];
    cv.demand = std::max(cv.demand, p.cwiseMax(0.0).sum());
    cv.points.push_back(std::move(p));
  }

  VectorXd W(C);
  double total_demand = 0.0;
  for (const ClassView& cv : classes) total_demand += cv.demand;
  if (total_demand <= groups.w_max) {
    const double spare = (groups.w_max - total_demand) / C;
    for (int c = 0; c < C; ++c) W[c] = classes[c].demand + spare;
  } else {
    double lo = 0.0, hi = 0.0;
    for (const ClassView& cv : classes) hi = std::max(hi, cv.marginal(0.0));
    auto allocated = [&](double level) {
      double s = 0.0;
      for (const ClassView& cv : classes) s += cv.allocation(level);
      return s;
    };
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      (allocated(mid) > groups.w_max ? lo : hi) = mid;
    }
    for (int c = 0; c < C; ++c) W[c] = classes[c].allocation(hi);
    W.array() += (groups.w_max - W.sum()) / C;
    W = W.cwiseMax(0.0);
  }

  BandwidthProjection out;
  out.class_bandwidth = W;
  out.group_bandwidth.resize(M);
  out.v = VectorXd::Zero(users);
  for (int g = 0; g < M; ++g) {
    const double cap = W[groups.class_of_group[g]];
    out.group_bandwidth[g] = cap;
    VectorXd p(static_cast<Eigen::Index>(members[g].size()));
    for (std::size_t k = 0; k < members[g].size(); ++k) p[static_cast<Eigen::Index>(k)] = point[members[g][k]];
    const VectorXd proj = project_capped_simplex(p, cap);
    for (std::size_t k = 0; k < members[g].size(); ++k) out.v[members[g][k]] = proj[static_cast<Eigen::Index>(k)];
  }
  return out;
}

void device_dual_updates(VectorXd& u, VectorXd& y, const VectorXd& x, const VectorXd& t, const VectorXd& v,
                         const VectorXd& b) {
  u += x - t;
  y += v - b;
}

bool stopping_check(const DeviceTraceRow& row) {
  return row.h1 <= row.h1_threshold && row.h2 <= row.h2_threshold && row.s1 <= row.s1_threshold &&
         row.s2 <= row.s2_threshold;
}

int MessageRecord::node_value_total() const {
  int s = 0;
  for (int v : node_values) s += v;
  return s;
}

std::size_t MessageRecord::bytes() const {
  return 8u * static_cast<std::size_t>(cu1_values + cu2_values + node_value_total());
}

bool MessageRecord::snapshot_consistent() const {
  return std::all_of(snapshot_ids.begin(), snapshot_ids.end(), [&](std::uint64_t id) { return id == broadcast_id; });
}

bool MessageLog::snapshot_consistent() const {
  return std::all_of(records_.begin(), records_.end(), [](const MessageRecord& r) { return r.snapshot_consistent(); });
}

void MessageLog::write_jsonl(std::ostream& out) const {
  for (const MessageRecord& r : records_) {
    nlohmann::json j{{"iteration", r.iteration},       {"cu1_values", r.cu1_values},
                     {"cu2_values", r.cu2_values},     {"broadcast_id", r.broadcast_id},
                     {"nodes", r.nodes},               {"node_values", r.node_values},
                     {"node_value_total", r.node_value_total()}, {"bytes", r.bytes()},
                     {"snapshot_consistent", r.snapshot_consistent()}};
    out << j.dump() << '\n';
  }
}

DeviceAdmm::DeviceAdmm(const NetworkTopology& topology, const ChannelModel& channel, DeviceOptions options)
    : topology_(topology), channel_(channel), options_(std::move(options)), rng_(options_.seed) {
  if (!(options_.admm.rho > 0.0)) throw InvalidArgument("DeviceAdmm: rho must be positive");
  if (channel.num_links() != topology.num_links()) {
    throw InvalidArgument("DeviceAdmm: channel and topology disagree on the number of links");
  }
  for (std::size_t i = 1; i < options_.events.size(); ++i) {
    if (options_.events[i].iteration <= options_.events[i - 1].iteration) {
      throw InvalidArgument("DeviceAdmm: event iterations must be strictly increasing");
    }
  }
  for (int n = 1; n < topology.num_nodes(); ++n) {
    if (topology.out_links[n].empty()) {
      throw InvalidArgument("DeviceAdmm: user " + std::to_string(n) + " has no outgoing link");
    }
  }
  groups_ = GroupStructure::from(topology, channel);
  const int L = topology.num_links();
  const int U = topology.num_users();
  x_ = VectorXd::Zero(L);
  t_ = VectorXd::Constant(L, options_.initial_flow);
  u_ = VectorXd::Zero(L);
  v_ = VectorXd::Zero(U);
  b_ = VectorXd::Constant(U, options_.initial_bandwidth);
  y_ = VectorXd::Zero(U);
  p_ = VectorXd::Zero(L);
  w_ = VectorXd::Zero(L);
  const int C = channel.num_classes();
  classes_ = VectorXd::Constant(C, C > 0 ? channel.w_max / C : 0.0);

  planes_.resize(static_cast<std::size_t>(topology.num_nodes()));
  for (int n = 1; n < topology.num_nodes(); ++n) {
    for (int l : topology.out_links[n]) {
      planes_[n].emplace_back(channel_.link(l), options_.plane_budget);
      seed_plane_model(planes_[n].back(), channel_);
    }
  }
}

NodeChannel DeviceAdmm::node_channel(int n) const {
  NodeChannel nc;
  for (int l : topology_.out_links[n]) nc.links.push_back(channel_.link(l));
  nc.gamma = channel_.gamma;
  nc.p_max = channel_.p_max;
  nc.epsilon_power = channel_.epsilon_power;
  return nc;
}

void DeviceAdmm::apply_event(const ChannelEvent& event) {
  const int U = topology_.num_users();
  std::vector<double> factors = event.factors;
  if (factors.empty()) {
    Rng draw(event.seed);
    for (int i = 0; i < U; ++i) factors.push_back(draw.uniform(event.min_factor, event.max_factor));
  } else if (static_cast<int>(factors.size()) != U) {
    throw InvalidArgument("apply_event: need one factor per user");
  }
  for (int n = 1; n < topology_.num_nodes(); ++n) {
    const double f = factors[n - 1];
    for (std::size_t k = 0; k < topology_.out_links[n].size(); ++k) {
      const int l = topology_.out_links[n][k];
      if (event.kind == ChannelEvent::Kind::kScaleNoise) {
        channel_.noise[l] *= f;
      } else {
        channel_.gain[l] *= f;
      }
      TangentPlaneModel& model = planes_[n][k];
      if (options_.reset_planes_on_event) {
        model.reset(channel_.link(l));
        seed_plane_model(model, channel_);
      } else {
        TangentPlaneModel fresh(channel_.link(l), model.budget());
        for (const TangentPlane& pl : model.planes()) fresh.refine(pl.anchor_power, pl.anchor_bandwidth);
        model = std::move(fresh);
      }
    }
  }
  ++epoch_;
}

GlobalSolution DeviceAdmm::current_solution() const {
  return restore_device_solution(topology_, channel_, x_, t_, p_, w_, classes_, options_.reroute, options_.qp);
}

bool DeviceAdmm::step() {
  const double rho = options_.admm.rho;
  const double rho_b = rho * options_.bandwidth_penalty_scale;
  const int L = topology_.num_links();
  const int U = topology_.num_users();
  const std::uint64_t broadcast_id = static_cast<std::uint64_t>(k_) + 1;

  // CU phase, both units reading the previous snapshot.
  x_ = solve_routing_qp(topology_, t_ - u_, rho, options_.qp).flow;
  const BandwidthProjection bw = bandwidth_projection(b_ - y_, groups_);
  v_ = bw.v;
  classes_ = bw.class_bandwidth;
  const VectorXd flow_broadcast = x_ + u_;
  const VectorXd bandwidth_broadcast = v_ + y_;

  MessageRecord msg;
  msg.iteration = k_ + 1;
  msg.cu1_values = L;
  msg.cu2_values = U;
  msg.broadcast_id = broadcast_id;

  // Node phase.
  const VectorXd t_prev = t_;
  const VectorXd b_prev = b_;
  const bool partial = k_ < options_.partial_update_iters && options_.skip_probability > 0.0;
  int updated = 0, stale = 0;
  for (int n = 1; n < topology_.num_nodes(); ++n) {
    if (partial && rng_.uniform() < options_.skip_probability) continue;
    const std::vector<int>& out = topology_.out_links[n];
    VectorXd target(static_cast<Eigen::Index>(out.size()));
    for (std::size_t k = 0; k < out.size(); ++k) target[static_cast<Eigen::Index>(k)] = flow_broadcast[out[k]];
    const NodeSolution s = node_subproblem(node_channel(n), target, bandwidth_broadcast[n - 1], rho, planes_[n],
                                           options_.refine_tol, options_.qp, rho_b,
                                           options_.node_refine_rounds);
    if (s.stale) {
      ++stale;
      continue;
    }
    for (std::size_t k = 0; k < out.size(); ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      t_[out[k]] = s.t[i];
      p_[out[k]] = s.p[i];
      w_[out[k]] = s.w[i];
    }
    b_[n - 1] = s.b;
    ++updated;
    msg.nodes.push_back(n);
    msg.node_values.push_back(static_cast<int>(out.size()) + 1);
    msg.snapshot_ids.push_back(broadcast_id);
  }
  log_.append(std::move(msg));

  device_dual_updates(u_, y_, x_, t_, v_, b_);
  ++k_;

  DeviceTraceRow row;
  row.iteration = k_;
  row.epoch = epoch_;
  row.h1 = (x_ - t_).norm();
  row.h2 = (v_ - b_).norm();
  row.s1 = rho * (t_ - t_prev).norm();
  row.s2 = rho_b * (b_ - b_prev).norm();
  const AdmmSettings& a = options_.admm;
  row.h1_threshold = residual_threshold(L, a.eps_abs, a.eps_rel, std::max(x_.norm(), t_.norm()));
  row.h2_threshold = residual_threshold(U, a.eps_abs, a.eps_rel, std::max(v_.norm(), b_.norm()));
  row.s1_threshold = residual_threshold(L, a.eps_abs, a.eps_rel, rho * u_.norm());
  row.s2_threshold = residual_threshold(U, a.eps_abs, a.eps_rel, rho_b * y_.norm());
  row.updated_nodes = updated;
  row.stale_nodes = stale;
  row.objective = current_solution().min_rate;
  trace_.push_back(row);
  // Skipped nodes leave stale copies behind, so the test is only meaningful
  // once every node has updated.
  return !partial && stale == 0 && stopping_check(row);
}

DeviceResult DeviceAdmm::run() {
  DeviceResult result;
  if (topology_.num_users() == 0) {
    result.solution = current_solution();
    result.converged = true;
    result.epoch_iterations.push_back(0);
    return result;
  }
  result.epoch_iterations.assign(options_.events.size() + 1, -1);
  double best_score = std::numeric_limits<double>::infinity();
  GlobalSolution best;
  int epoch_start = 0;
  while (k_ < options_.admm.max_iters) {
    const bool stop = step();
    if (stop && result.epoch_iterations[epoch_] < 0) result.epoch_iterations[epoch_] = k_ - epoch_start;
    const bool events_pending = next_event_ < options_.events.size();
    if (events_pending && k_ >= options_.events[next_event_].iteration) {
      apply_event(options_.events[next_event_++]);
      epoch_start = k_;
      best_score = std::numeric_limits<double>::infinity();
      continue;
    }
    if (stop && !events_pending) {
      result.converged = true;
      break;
    }
    if (!events_pending) {
      const DeviceTraceRow& r = trace_.back();
      const double score = std::max({r.h1 / r.h1_threshold, r.h2 / r.h2_threshold, r.s1 / r.s1_threshold,
                                     r.s2 / r.s2_threshold});
      if (score < best_score) {
        best_score = score;
        best = current_solution();
      }
    }
  }
  result.solution = result.converged || best.flow.size() == 0 ? current_solution() : best;
  result.solution.converged = result.converged;
  result.solution.iterations = k_;
  result.iterations = k_;
  result.trace = trace_;
  result.messages = log_;
  return result;
}

DeviceResult run_device_admm(const NetworkTopology& topology, const ChannelModel& channel,
                             const DeviceOptions& options) {
  DeviceAdmm admm(topology, channel, options);
  return admm.run();
}

GlobalSolution restore_device_solution(const NetworkTopology& topology, const ChannelModel& channel,
                                       const VectorXd& x, const VectorXd& t, VectorXd p, VectorXd w,
                                       const VectorXd& class_bandwidth, bool reroute, const QpOptions& qp) {
  p = p.cwiseMax(0.0);
  w = w.cwiseMax(0.0);
  for (int g = 1; g <= topology.num_groups; ++g) {
    double load = 0.0;
    for (int n = 1; n < topology.num_nodes(); ++n) {
      if (topology.group_of[n] != g) continue;
      for (int l : topology.out_links[n]) load += w[l];
    }
    const double cap = class_bandwidth[channel.class_of_group(g)];
    if (load <= cap) continue;
    const double s = cap / load;
    for (int n = 1; n < topology.num_nodes(); ++n) {
      if (topology.group_of[n] != g) continue;
      for (int l : topology.out_links[n]) {
        w[l] *= s;
        p[l] *= s;
      }
    }
  }
  return restore_feasibility(topology, channel, x, t, p, w, class_bandwidth, reroute, qp);
}

PruneResult prune_links(const NetworkTopology& topology, const VectorXd& flow, double flow_floor) {
  const int L = topology.num_links();
  if (flow.size() != L) throw InvalidArgument("prune_links: need one flow per link");
  if (flow_floor < 0.0) throw InvalidArgument("prune_links: flow floor must be non-negative");
  std::vector<bool> keep(static_cast<std::size_t>(L), true);
  std::vector<int> candidates;
  for (int l = 0; l < L; ++l) {
    if (flow[l] < flow_floor) candidates.push_back(l);
  }
  std::stable_sort(candidates.begin(), candidates.end(), [&](int a, int b) { return flow[a] < flow[b]; });

  auto kept_indices = [&] {
    std::vector<int> k;
    for (int l = 0; l < L; ++l) {
      if (keep[l]) k.push_back(l);
    }
    return k;
  };
  PruneResult out;
  for (int l : candidates) {
    keep[l] = false;
    if (all_users_connected(subset_links(topology, kept_indices()))) {
      out.removed.push_back(l);
    } else {
      keep[l] = true;
      out.flagged.push_back(l);
    }
  }
  std::sort(out.removed.begin(), out.removed.end());
  out.kept = kept_indices();
  out.topology = subset_links(topology, out.kept);
  return out;
}

}  // namespace xlayer
