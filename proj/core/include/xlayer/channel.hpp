#ifndef XLAYER_CHANNEL_HPP_
#define XLAYER_CHANNEL_HPP_

#include <cmath>
#include <limits>
#include <vector>

#include "xlayer/capacity.hpp"
#include "xlayer/scenario.hpp"
#include "xlayer/topology.hpp"

namespace xlayer {

// q = K (l0 / distance)^a.
double channel_gain(double distance, double K, double l0, double a);

// gamma = alpha N0 / (K (l0 / d_int)^a) with d_int = (f - 2) d, in W/MHz;
// +inf for the no-reuse factor.
double bandwidth_coefficient(double alpha, double N0, double K, double l0, double a, ReuseFactor f, double d);

// Per-link channel state plus the shared resource limits. Noise is kept per
// link because channel events rescale it node by node.
struct ChannelModel {
  std::vector<double> gain;
  std::vector<double> noise;
  double gamma = std::numeric_limits<double>::infinity();
  double p_max = 0.0;
  double w_max = 0.0;
  ReuseFactor reuse = ReuseFactor::none();
  int num_groups = 0;
  double log_base = 2.0;
  double epsilon_power = 1e-6;

  bool gamma_active() const { return std::isfinite(gamma); }
  LinkChannel link(int l) const { return {gain[l], noise[l], log_base}; }
  int num_links() const { return static_cast<int>(gain.size()); }

  // Bandwidth classes: group g (1-based) belongs to class (g - 1) mod f,
  // and there are min(f, M) classes (M without reuse).
  int num_classes() const;
  int class_of_group(int g) const;
};

ChannelModel make_channel(const NetworkTopology& topology, const ScenarioConfig& config);

// Direct-mode channel over make_direct_topology(topology): no reuse and no
// per-link power cap.
ChannelModel make_direct_channel(const NetworkTopology& direct_topology, const ScenarioConfig& config);

}  // namespace xlayer

#endif  // XLAYER_CHANNEL_HPP_
