#include "xlayer/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "xlayer/error.hpp"

namespace xlayer {

double Point::radius() const { return std::hypot(x, y); }

double Point::angle() const {
  double a = std::atan2(y, x);
  if (a < 0.0) a += 2.0 * std::numbers::pi;
  return a;
}

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

double angular_separation(const Point& a, const Point& b) {
  double diff = std::abs(a.angle() - b.angle());
  if (diff > std::numbers::pi) diff = 2.0 * std::numbers::pi - diff;
  return diff;
}

std::vector<int> NetworkTopology::group_members(int g) const {
  std::vector<int> members;
  for (int n = 0; n < num_nodes(); ++n) {
    if (group_of[n] == g) members.push_back(n);
  }
  return members;
}

void NetworkTopology::rebuild_indices() {
  incidence = build_incidence(links, num_nodes());
  out_links.assign(positions.size(), {});
  in_links.assign(positions.size(), {});
  for (int l = 0; l < num_links(); ++l) {
    out_links[links[l].src].push_back(l);
    in_links[links[l].dst].push_back(l);
  }
}

namespace {

int group_for_radius(double rho, double d, int num_groups) {
  if (rho <= 2.0 * d) return 1;
  // Closed upper boundary: a node exactly on a boundary joins the inner group.
  const double k = (rho - 2.0 * d) / d;
  int g = static_cast<int>(std::ceil(k)) + 1;
  const double nearest = std::round(k);
  if (std::abs(k - nearest) <= 1e-12 * std::max(1.0, k)) g = static_cast<int>(nearest) + 1;
  return std::min(g, num_groups);
}

int groups_for(double sector_radius, double d) {
  if (sector_radius <= 2.0 * d) return 1;
  return group_for_radius(sector_radius, d, std::numeric_limits<int>::max());
}

}  // namespace

std::vector<int> assign_groups(std::span<const Point> positions, double d, double sector_radius) {
  if (positions.empty()) throw InvalidArgument("assign_groups: no positions");
  if (!(d > 0.0)) throw InvalidArgument("assign_groups: group width must be positive");
  const int num_groups = groups_for(sector_radius, d);
  std::vector<int> group_of(positions.size(), 0);
  for (std::size_t n = 1; n < positions.size(); ++n) {
    const double rho = positions[n].radius();
    if (rho > sector_radius * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "assign_groups: node " << n << " at radius " << rho << " lies beyond the sector radius "
          << sector_radius;
      throw InvalidArgument(msg.str());
    }
    group_of[n] = group_for_radius(rho, d, num_groups);
  }
  return group_of;
}

std::vector<Point> generate_nodes(const ScenarioConfig& config, Rng& rng) {
  config.validate();
  const int num_groups = config.num_groups();
  const int users = config.num_nodes - 1;
  std::vector<Point> positions(static_cast<std::size_t>(config.num_nodes));
  if (users == 0) return positions;
  if (users < num_groups) {
    throw InfeasibleDensity("generate_nodes: " + std::to_string(users) + " users cannot occupy " +
                            std::to_string(num_groups) + " groups");
  }
  for (int attempt = 0; attempt < kMaxPlacementAttempts; ++attempt) {
    for (int n = 1; n <= users; ++n) {
      const double r = config.sector_radius * std::sqrt(rng.uniform());
      const double phi = config.sector_angle * rng.uniform();
      positions[n] = {r * std::cos(phi), r * std::sin(phi)};
    }
    const std::vector<int> groups = assign_groups(positions, config.group_width, config.sector_radius);
    std::vector<bool> occupied(static_cast<std::size_t>(num_groups) + 1, false);
    for (int n = 1; n <= users; ++n) occupied[groups[n]] = true;
    if (std::all_of(occupied.begin() + 1, occupied.end(), [](bool b) { return b; })) return positions;
  }
  throw InfeasibleDensity("generate_nodes: no placement with every group occupied after " +
                          std::to_string(kMaxPlacementAttempts) + " attempts");
}

std::vector<Link> assign_links(std::span<const Point> positions, std::span<const int> group_of, double theta,
                               double d_th) {
  if (positions.size() != group_of.size()) throw InvalidArgument("assign_links: size mismatch");
  std::vector<Link> links;
  const int n_nodes = static_cast<int>(positions.size());
  for (int i = 1; i < n_nodes; ++i) {
    const int g = group_of[i];
    std::size_t before = links.size();
    if (g == 1) {
      links.push_back({i, 0, distance(positions[i], positions[0])});
      continue;
    }
    for (int j = 1; j < n_nodes; ++j) {
      if (group_of[j] != g - 1) continue;
      if (!(angular_separation(positions[i], positions[j]) < theta)) continue;
      const double len = distance(positions[i], positions[j]);
      if (!(len < d_th)) continue;
      links.push_back({i, j, len});
    }
    if (links.size() == before) {
      throw DisconnectedNode(i, "assign_links: node " + std::to_string(i) + " (group " + std::to_string(g) +
                                    ") has no outgoing link");
    }
  }
  return links;
}

Eigen::MatrixXi build_incidence(std::span<const Link> links, int num_nodes) {
  Eigen::MatrixXi a = Eigen::MatrixXi::Zero(num_nodes, static_cast<Eigen::Index>(links.size()));
  for (std::size_t l = 0; l < links.size(); ++l) {
    if (links[l].src < 0 || links[l].src >= num_nodes || links[l].dst < 0 || links[l].dst >= num_nodes) {
      throw InvalidArgument("build_incidence: link " + std::to_string(l) + " references an invalid node");
    }
    a(links[l].src, static_cast<Eigen::Index>(l)) = 1;
    a(links[l].dst, static_cast<Eigen::Index>(l)) = -1;
  }
  return a;
}

NetworkTopology make_topology(std::vector<Point> positions, std::vector<int> group_of, int num_groups,
                              std::vector<Link> links) {
  NetworkTopology t;
  t.positions = std::move(positions);
  t.group_of = std::move(group_of);
  t.num_groups = num_groups;
  t.links = std::move(links);
  t.rebuild_indices();
  return t;
}

NetworkTopology build_topology(const ScenarioConfig& config) { return build_topology(config, config.rng_seed); }

NetworkTopology build_topology(const ScenarioConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  const int num_groups = config.num_groups();
  if (config.num_nodes == 1) return make_topology({Point{}}, {0}, num_groups, {});
  for (int attempt = 0; attempt < kMaxPlacementAttempts; ++attempt) {
    std::vector<Point> positions = generate_nodes(config, rng);
    std::vector<int> groups = assign_groups(positions, config.group_width, config.sector_radius);
    try {
      std::vector<Link> links = assign_links(positions, groups, config.theta, config.d_th());
      return make_topology(std::move(positions), std::move(groups), num_groups, std::move(links));
    } catch (const DisconnectedNode&) {
      continue;
    }
  }
  throw InfeasibleDensity("build_topology: no connected placement after " + std::to_string(kMaxPlacementAttempts) +
                          " attempts; widen theta or d_th");
}

NetworkTopology make_direct_topology(const NetworkTopology& topology) {
  std::vector<Link> links;
  for (int n = 1; n < topology.num_nodes(); ++n) {
    links.push_back({n, 0, distance(topology.positions[n], topology.positions[0])});
  }
  return make_topology(topology.positions, topology.group_of, topology.num_groups, std::move(links));
}

NetworkTopology subset_links(const NetworkTopology& topology, std::span<const int> keep) {
  std::vector<Link> links;
  links.reserve(keep.size());
  for (int l : keep) links.push_back(topology.links.at(static_cast<std::size_t>(l)));
  return make_topology(topology.positions, topology.group_of, topology.num_groups, std::move(links));
}

bool all_users_connected(const NetworkTopology& topology) {
  const int n = topology.num_nodes();
  std::vector<bool> reach(static_cast<std::size_t>(n), false);
  if (n == 0) return true;
  reach[0] = true;
  // Reverse BFS from the destination over incoming links.
  std::vector<int> frontier{0};
  while (!frontier.empty()) {
    const int v = frontier.back();
    frontier.pop_back();
    for (int l : topology.in_links[v]) {
      const int u = topology.links[l].src;
      if (!reach[u]) {
        reach[u] = true;
        frontier.push_back(u);
      }
    }
  }
  return std::all_of(reach.begin(), reach.end(), [](bool b) { return b; });
}

}  // namespace xlayer
