#include "xlayer/channel.hpp"

#include <algorithm>
#include <cmath>

#include "xlayer/error.hpp"

namespace xlayer {

double channel_gain(double distance, double K, double l0, double a) {
  if (!(distance > 0.0)) throw InvalidArgument("channel_gain: distance must be positive");
  if (!(K > 0.0) || !(l0 > 0.0)) throw InvalidArgument("channel_gain: K and l0 must be positive");
  return K * std::pow(l0 / distance, a);
}

double bandwidth_coefficient(double alpha, double N0, double K, double l0, double a, ReuseFactor f, double d) {
  if (!f.is_finite()) return std::numeric_limits<double>::infinity();
  const double d_int = (f.value() - 2) * d;
  return alpha * N0 / channel_gain(d_int, K, l0, a);
}

int ChannelModel::num_classes() const {
  if (!reuse.is_finite()) return num_groups;
  return std::min(reuse.value(), num_groups);
}

int ChannelModel::class_of_group(int g) const {
  if (g < 1 || g > num_groups) throw InvalidArgument("class_of_group: group out of range");
  if (!reuse.is_finite()) return g - 1;
  return (g - 1) % reuse.value();
}

namespace {

ChannelModel base_channel(const NetworkTopology& topology, const ScenarioConfig& config) {
  ChannelModel ch;
  ch.gain.reserve(topology.links.size());
  for (const Link& link : topology.links) {
    ch.gain.push_back(channel_gain(link.length, config.K, config.l0, config.pathloss_exponent));
  }
  ch.noise.assign(topology.links.size(), config.N0);
  ch.p_max = config.P_max;
  ch.w_max = config.W_max;
  ch.num_groups = topology.num_groups;
  ch.log_base = config.log_base;
  ch.epsilon_power = config.epsilon_power;
  return ch;
}

}  // namespace

ChannelModel make_channel(const NetworkTopology& topology, const ScenarioConfig& config) {
  ChannelModel ch = base_channel(topology, config);
  ch.reuse = config.reuse;
  ch.gamma = bandwidth_coefficient(config.alpha, config.N0, config.K, config.l0, config.pathloss_exponent,
                                   config.reuse, config.group_width);
  return ch;
}

ChannelModel make_direct_channel(const NetworkTopology& direct_topology, const ScenarioConfig& config) {
  ChannelModel ch = base_channel(direct_topology, config);
  ch.reuse = ReuseFactor::none();
  ch.gamma = std::numeric_limits<double>::infinity();
  return ch;
}

}  // namespace xlayer
