#ifndef XLAYER_TOPOLOGY_HPP_
#define XLAYER_TOPOLOGY_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "xlayer/scenario.hpp"

namespace xlayer {

struct Point {
  double x = 0.0;
  double y = 0.0;

  double radius() const;
  double angle() const;  // polar angle in [0, 2 pi)
};

double distance(const Point& a, const Point& b);
// Absolute difference of polar angles about the origin, wrapped to [0, pi].
double angular_separation(const Point& a, const Point& b);

struct Link {
  int src = 0;
  int dst = 0;
  double length = 0.0;
};

// Node 0 is the destination at the origin and belongs to group 0; users are
// nodes 1..N-1 in groups 1..M.
struct NetworkTopology {
  std::vector<Point> positions;
  std::vector<int> group_of;
  int num_groups = 0;
  std::vector<Link> links;
  Eigen::MatrixXi incidence;  // N x L
  std::vector<std::vector<int>> out_links;
  std::vector<std::vector<int>> in_links;

  int num_nodes() const { return static_cast<int>(positions.size()); }
  int num_users() const { return num_nodes() > 0 ? num_nodes() - 1 : 0; }
  int num_links() const { return static_cast<int>(links.size()); }
  std::vector<int> group_members(int g) const;

  // Rebuilds incidence and adjacency lists from `links`.
  void rebuild_indices();
};

// Deterministic [0, 1) doubles independent of the standard library's
// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

inline constexpr int kMaxPlacementAttempts = 10000;

// Destination at the origin plus num_nodes - 1 users uniform in area over the
// sector [0, sector_angle). Resamples until every group holds a user; throws
// InfeasibleDensity after kMaxPlacementAttempts.
std::vector<Point> generate_nodes(const ScenarioConfig& config, Rng& rng);

// Group 1 is rho <= 2d, group g > 1 is (2d + (g-2) d, 2d + (g-1) d]. Users
// beyond sector_radius are rejected.
std::vector<int> assign_groups(std::span<const Point> positions, double d, double sector_radius);

// Candidate links i -> j with j one group closer, angular separation < theta
// and length < d_th; group-1 users get the single link to node 0. Throws
// DisconnectedNode for a user without outgoing links.
std::vector<Link> assign_links(std::span<const Point> positions, std::span<const int> group_of, double theta,
                               double d_th);

Eigen::MatrixXi build_incidence(std::span<const Link> links, int num_nodes);

NetworkTopology make_topology(std::vector<Point> positions, std::vector<int> group_of, int num_groups,
                              std::vector<Link> links);

// Full pipeline seeded from config.rng_seed. Placements that leave a user
// disconnected are redrawn, sharing the kMaxPlacementAttempts budget.
NetworkTopology build_topology(const ScenarioConfig& config);
NetworkTopology build_topology(const ScenarioConfig& config, std::uint64_t seed);

// Same nodes with every user linked straight to the destination.
NetworkTopology make_direct_topology(const NetworkTopology& topology);

// Keeps only the listed links (in order).
NetworkTopology subset_links(const NetworkTopology& topology, std::span<const int> keep);

// True when every user has a directed path to node 0.
bool all_users_connected(const NetworkTopology& topology);

}  // namespace xlayer

#endif  // XLAYER_TOPOLOGY_HPP_
