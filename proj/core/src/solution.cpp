#include "xlayer/solution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "xlayer/capacity.hpp"
#include "xlayer/error.hpp"

namespace xlayer {

using Eigen::VectorXd;

namespace {

constexpr double kFlowEpsilon = 1e-9;

void refresh_derived(GlobalSolution& s, const NetworkTopology& topology) {
  const int n_nodes = topology.num_nodes();
  s.injected = topology.incidence.cast<double>() * s.flow;
  s.node_bandwidth = VectorXd::Zero(n_nodes);
  for (int l = 0; l < topology.num_links(); ++l) s.node_bandwidth[topology.links[l].src] += s.bandwidth[l];
  s.min_rate = 0.0;
  if (n_nodes > 1) s.min_rate = s.injected.tail(n_nodes - 1).minCoeff();
  s.total_power = s.power.sum();
}

VectorXd group_loads(const GlobalSolution& s, const NetworkTopology& topology) {
  VectorXd load = VectorXd::Zero(topology.num_groups);
  for (int n = 1; n < topology.num_nodes(); ++n) load[topology.group_of[n] - 1] += s.node_bandwidth[n];
  return load;
}

}  // namespace

GlobalSolution assemble_solution(const NetworkTopology& topology, const ChannelModel& channel, VectorXd flow,
                                 VectorXd power, VectorXd bandwidth, VectorXd class_bandwidth) {
  const int L = topology.num_links();
  if (flow.size() != L || power.size() != L || bandwidth.size() != L) {
    throw InvalidArgument("assemble_solution: per-link vectors must have one entry per link");
  }
  GlobalSolution s;
  s.flow = std::move(flow);
  s.power = std::move(power);
  s.bandwidth = std::move(bandwidth);
  refresh_derived(s, topology);

  const int classes = channel.num_classes();
  if (class_bandwidth.size() == 0) {
    const VectorXd load = group_loads(s, topology);
    class_bandwidth = VectorXd::Zero(classes);
    for (int g = 1; g <= topology.num_groups; ++g) {
      const int c = channel.class_of_group(g);
      class_bandwidth[c] = std::max(class_bandwidth[c], load[g - 1]);
    }
    const double spare = channel.w_max - class_bandwidth.sum();
    if (spare > 0.0 && classes > 0) class_bandwidth.array() += spare / classes;
  } else if (class_bandwidth.size() != classes) {
    throw InvalidArgument("assemble_solution: class bandwidth vector has the wrong size");
  }
  s.class_bandwidth = std::move(class_bandwidth);
  s.group_bandwidth = VectorXd::Zero(topology.num_groups);
  for (int g = 1; g <= topology.num_groups; ++g) s.group_bandwidth[g - 1] = s.class_bandwidth[channel.class_of_group(g)];
  return s;
}

void fill_group_bandwidth(GlobalSolution& s, const NetworkTopology& topology, const ChannelModel&) {
  const VectorXd load = group_loads(s, topology);
  for (int g = 1; g <= topology.num_groups; ++g) {
    const double spare = s.group_bandwidth[g - 1] - load[g - 1];
    if (!(spare > 0.0)) continue;
    std::vector<int> carrying;
    double carried_bw = 0.0;
    for (int n = 1; n < topology.num_nodes(); ++n) {
      if (topology.group_of[n] != g) continue;
      for (int l : topology.out_links[n]) {
        if (s.flow[l] > kFlowEpsilon) {
          carrying.push_back(l);
          carried_bw += s.bandwidth[l];
        }
      }
    }
    if (carrying.empty()) continue;
    for (int l : carrying) {
      const double share = carried_bw > 0.0 ? s.bandwidth[l] / carried_bw : 1.0 / static_cast<double>(carrying.size());
      s.bandwidth[l] += spare * share;
    }
  }
  refresh_derived(s, topology);
}

double ConstraintReport::worst() const {
  return std::max({flow_conservation, capacity, power_cap.value_or(0.0), node_power, group_bandwidth,
                   total_bandwidth, reuse_tie, nonnegativity});
}

std::string ConstraintReport::to_string() const {
  std::ostringstream out;
  out << "flow_conservation=" << flow_conservation << " capacity=" << capacity;
  if (power_cap) out << " power_cap=" << *power_cap;
  out << " node_power=" << node_power << " group_bandwidth=" << group_bandwidth
      << " total_bandwidth=" << total_bandwidth << " reuse_tie=" << reuse_tie << " nonnegativity=" << nonnegativity
      << " group_slack=" << group_slack;
  return out.str();
}

ConstraintReport verify_solution(const GlobalSolution& s, const NetworkTopology& topology,
                                 const ChannelModel& channel) {
  ConstraintReport rep;
  const int L = topology.num_links();
  const int n_nodes = topology.num_nodes();
  const double p_scale = channel.p_max > 0.0 ? channel.p_max : 1.0;
  const double w_scale = channel.w_max;

  const VectorXd r = topology.incidence.cast<double>() * s.flow;
  if (s.injected.size() == n_nodes) {
    rep.flow_conservation = (r - s.injected).cwiseAbs().maxCoeff();
  } else {
    rep.flow_conservation = std::numeric_limits<double>::infinity();
  }
  for (int n = 1; n < n_nodes; ++n) rep.flow_conservation = std::max(rep.flow_conservation, -r[n]);

  for (int l = 0; l < L; ++l) {
    rep.nonnegativity = std::max({rep.nonnegativity, -s.flow[l], -s.power[l] / p_scale, -s.bandwidth[l] / w_scale});
    const double c = capacity(std::max(s.bandwidth[l], 0.0), std::max(s.power[l], 0.0), channel.link(l));
    rep.capacity = std::max(rep.capacity, s.flow[l] - c);
  }
  if (channel.gamma_active()) {
    double worst = 0.0;
    for (int l = 0; l < L; ++l) worst = std::max(worst, (s.power[l] - channel.gamma * s.bandwidth[l]) / p_scale);
    rep.power_cap = worst;
  }
  VectorXd load = VectorXd::Zero(topology.num_groups);
  VectorXd group_flow = VectorXd::Zero(topology.num_groups);
  for (int n = 1; n < n_nodes; ++n) {
    double p_sum = 0.0, v_sum = 0.0, f_sum = 0.0;
    for (int l : topology.out_links[n]) {
      p_sum += s.power[l];
      v_sum += s.bandwidth[l];
      f_sum += s.flow[l];
    }
    rep.node_power = std::max(rep.node_power, (p_sum - channel.p_max) / p_scale);
    load[topology.group_of[n] - 1] += v_sum;
    group_flow[topology.group_of[n] - 1] += f_sum;
  }
  for (int g = 1; g <= topology.num_groups; ++g) {
    const double wg = s.group_bandwidth.size() == topology.num_groups ? s.group_bandwidth[g - 1] : 0.0;
    rep.group_bandwidth = std::max(rep.group_bandwidth, (load[g - 1] - wg) / w_scale);
    const int c = channel.class_of_group(g);
    const double wc = c < s.class_bandwidth.size() ? s.class_bandwidth[c] : 0.0;
    rep.reuse_tie = std::max(rep.reuse_tie, std::abs(wg - wc) / w_scale);
    rep.nonnegativity = std::max(rep.nonnegativity, -wg / w_scale);
    if (group_flow[g - 1] > kFlowEpsilon) rep.group_slack = std::max(rep.group_slack, (wg - load[g - 1]) / w_scale);
  }
  if (s.class_bandwidth.size() != channel.num_classes()) {
    rep.total_bandwidth = std::numeric_limits<double>::infinity();
  } else {
    rep.total_bandwidth = std::abs(s.class_bandwidth.sum() - channel.w_max) / w_scale;
  }
  return rep;
}

}  // namespace xlayer
