#ifndef XLAYER_TESTS_HELPERS_HPP_
#define XLAYER_TESTS_HELPERS_HPP_

#include <cmath>
#include <numbers>
#include <vector>

#include "xlayer/channel.hpp"
#include "xlayer/scenario.hpp"
#include "xlayer/topology.hpp"

namespace xlayer::testing {

inline double deg(double d) { return d * std::numbers::pi / 180.0; }

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// The 12-node instance class used for the convergence experiments.
inline ScenarioConfig small_instance_config() {
  ScenarioConfig c;
  c.num_nodes = 12;
  c.sector_angle = deg(45.0);
  c.theta = deg(10.0);
  c.K = 0.1;
  c.alpha = 1.0;
  c.rng_seed = 11;
  return c;
}

// 45-node, 60 degree sector used for the power sweeps.
inline ScenarioConfig sweep_instance_config() {
  ScenarioConfig c;
  c.num_nodes = 45;
  c.sector_radius = 210.0;
  c.sector_angle = deg(60.0);
  c.group_width = 30.0;
  c.theta = deg(15.0);
  c.K = 0.05;
  c.alpha = 30.0;
  c.P_max = dbm_to_watts(0.0);
  return c;
}

// Users on the positive x axis at the given radii, linked as a chain toward
// the destination. Group g holds the user at index g - 1.
inline NetworkTopology chain_topology(const std::vector<double>& radii) {
  std::vector<Point> pos{{0.0, 0.0}};
  std::vector<int> group{0};
  std::vector<Link> links;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    pos.push_back({radii[i], 0.0});
    group.push_back(static_cast<int>(i) + 1);
    const int src = static_cast<int>(i) + 1;
    const int dst = static_cast<int>(i);
    links.push_back({src, dst, radii[i] - (i == 0 ? 0.0 : radii[i - 1])});
  }
  return make_topology(std::move(pos), std::move(group), static_cast<int>(radii.size()), std::move(links));
}

// Channel with explicit per-link gains, shared noise and no reuse.
inline ChannelModel explicit_channel(const NetworkTopology& topology, std::vector<double> gains, double noise,
                                     double p_max, double w_max, double gamma = INFINITY) {
  ChannelModel ch;
  ch.gain = std::move(gains);
  ch.noise.assign(ch.gain.size(), noise);
  ch.gamma = gamma;
  ch.p_max = p_max;
  ch.w_max = w_max;
  ch.reuse = ReuseFactor::none();
  ch.num_groups = topology.num_groups;
  return ch;
}

}  // namespace xlayer::testing

#endif  // XLAYER_TESTS_HELPERS_HPP_
