#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "xlayer/capacity.hpp"
#include "xlayer/device_admm.hpp"
#include "xlayer/projection.hpp"
#include "xlayer/reference.hpp"

using namespace xlayer;
using Eigen::VectorXd;
using xlayer::testing::chain_topology;
using xlayer::testing::explicit_channel;
using xlayer::testing::rel_err;

namespace {

NodeChannel one_link_node(double p_max) {
  NodeChannel n;
  n.links = {LinkChannel{1e-9, 1e-11, 2.0}};
  n.gamma = INFINITY;
  n.p_max = p_max;
  n.epsilon_power = 1e-6;
  return n;
}

std::vector<TangentPlaneModel> seeded(const NodeChannel& node) {
  std::vector<TangentPlaneModel> m;
  for (const LinkChannel& l : node.links) {
    m.emplace_back(l, 10);
    m.back().refine(0.0, 0.0);
    m.back().refine(node.p_max, 1.0);
  }
  return m;
}

}  // namespace

TEST_SUITE("admm-device") {

TEST_CASE("node subproblem: interior targets are reproduced") {
  const NodeChannel node = one_link_node(0.1);
  auto planes = seeded(node);
  VectorXd tg(1);
  tg << 0.5;
  const NodeSolution s = node_subproblem(node, tg, 2.0, 0.5, planes);
  CHECK_FALSE(s.stale);
  CHECK(s.t[0] == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(s.b == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(s.w.sum() == doctest::Approx(s.b).epsilon(1e-9));
}

TEST_CASE("node subproblem: frontier targets end on a refined plane") {
  const NodeChannel node = one_link_node(0.1);
  auto planes = seeded(node);
  VectorXd tg(1);
  tg << 100.0;
  NodeSolution s;
  for (int k = 0; k < 30; ++k) s = node_subproblem(node, tg, 2.0, 0.5, planes);
  const double c = capacity(s.w[0], s.p[0], node.links[0]);
  CHECK(s.t[0] == doctest::Approx(c).epsilon(1e-4));
  CHECK(s.p[0] == doctest::Approx(0.1).epsilon(1e-6));
  CHECK(planes[0].value(s.p[0], s.w[0]) == doctest::Approx(c).epsilon(1e-4));
}

TEST_CASE("node subproblem: no power") {
  const NodeChannel node = one_link_node(0.0);
  auto planes = seeded(one_link_node(0.1));
  VectorXd tg(1);
  tg << 3.0;
  const NodeSolution s = node_subproblem(node, tg, 1.5, 0.5, planes);
  CHECK(s.t[0] == 0.0);
  CHECK(s.p[0] == 0.0);
  CHECK(s.b == 1.5);
  const NodeSolution neg = node_subproblem(node, tg, -1.0, 0.5, planes);
  CHECK(neg.b == 0.0);
}

TEST_CASE("bandwidth projection: one group reduces to the capped simplex") {
  GroupStructure g;
  g.group_of_user = {1, 1, 1};
  g.class_of_group = {0};
  g.num_classes = 1;
  g.w_max = 10.0;
  VectorXd pt(3);
  pt << 8.0, 5.0, -1.0;
  const BandwidthProjection p = bandwidth_projection(pt, g);
  CHECK((p.v - project_capped_simplex(pt, 10.0)).norm() < 1e-12);
  CHECK(p.class_bandwidth[0] == doctest::Approx(10.0));
}

TEST_CASE("bandwidth projection: symmetric classes share evenly") {
  GroupStructure g;
  g.group_of_user = {1, 2};
  g.class_of_group = {0, 1};
  g.num_classes = 2;
  g.w_max = 10.0;
  VectorXd pt(2);
  pt << 9.0, 9.0;
  const BandwidthProjection p = bandwidth_projection(pt, g);
  CHECK(p.class_bandwidth[0] == doctest::Approx(5.0).epsilon(1e-10));
  CHECK(p.class_bandwidth[1] == doctest::Approx(5.0).epsilon(1e-10));
  pt << 1.0, 2.0;
  const BandwidthProjection spare = bandwidth_projection(pt, g);
  CHECK(spare.v.isApprox(pt));
  CHECK(spare.class_bandwidth.sum() == doctest::Approx(10.0));
}

TEST_CASE("dual updates") {
  VectorXd u = VectorXd::Zero(2), y = VectorXd::Zero(1), x(2), t(2), v(1), b(1);
  x << 1, 2;
  t << 0.5, 2.5;
  v << 3;
  b << 3;
  device_dual_updates(u, y, x, t, v, b);
  CHECK(u[0] == doctest::Approx(0.5));
  CHECK(u[1] == doctest::Approx(-0.5));
  CHECK(y[0] == 0.0);
  device_dual_updates(u, y, t, t, b, b);
  CHECK(u[0] == doctest::Approx(0.5));
}

TEST_CASE("stopping check") {
  DeviceTraceRow r;
  CHECK(stopping_check(r));
  r.h1_threshold = r.h2_threshold = r.s1_threshold = r.s2_threshold = 1e-3;
  r.s2 = 2e-3;
  CHECK_FALSE(stopping_check(r));
  r.s2 = 0.0;
  r.h1 = 2e-3;
  CHECK_FALSE(stopping_check(r));
}

TEST_CASE("run: agrees with the reference and keeps its books") {
  ScenarioConfig c = xlayer::testing::small_instance_config();
  const NetworkTopology t = build_topology(c);
  const ChannelModel ch = make_channel(t, c);
  const double ref = solve_joint(t, ch).solution.min_rate;
  const DeviceResult r = run_device_admm(t, ch);
  CHECK(r.converged);
  CHECK(rel_err(r.solution.min_rate, ref) <= 1e-2);
  CHECK(verify_solution(r.solution, t, ch).ok(1e-4));
  CHECK(r.messages.snapshot_consistent());
  CHECK(static_cast<int>(r.messages.records().size()) == r.iterations);
  int node_values = 0;
  for (int n = 1; n < t.num_nodes(); ++n) node_values += static_cast<int>(t.out_links[n].size()) + 1;
  for (const MessageRecord& m : r.messages.records()) {
    CHECK(m.cu1_values == t.num_links());
    CHECK(m.cu2_values == t.num_users());
    if (m.iteration > DeviceOptions{}.partial_update_iters) CHECK(m.node_value_total() == node_values);
    CHECK(m.node_value_total() <= node_values);
  }
  std::ostringstream jsonl;
  r.messages.write_jsonl(jsonl);
  const std::string text = jsonl.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == r.iterations);
}

TEST_CASE("run: partial updates do not move the limit") {
  ScenarioConfig c = xlayer::testing::small_instance_config();
  const NetworkTopology t = build_topology(c);
  const ChannelModel ch = make_channel(t, c);
  DeviceOptions none;
  none.partial_update_iters = 0;
  const double strict = run_device_admm(t, ch, none).solution.min_rate;
  const double partial = run_device_admm(t, ch).solution.min_rate;
  CHECK(rel_err(partial, strict) <= 1e-2);
}

TEST_CASE("events rescale the noise of each user's links") {
  ScenarioConfig c = xlayer::testing::small_instance_config();
  const NetworkTopology t = build_topology(c);
  const ChannelModel ch = make_channel(t, c);
  DeviceAdmm admm(t, ch);
  ChannelEvent e;
  e.factors.assign(t.num_users(), 2.0);
  admm.apply_event(e);
  for (int l = 0; l < t.num_links(); ++l) CHECK(admm.channel().noise[l] == doctest::Approx(2.0 * ch.noise[l]));
  CHECK(admm.channel().gamma == ch.gamma);
}

TEST_CASE("prune links") {
  const NetworkTopology t = chain_topology({50.0, 90.0});
  VectorXd flow(2);
  flow << 1.0, 0.5;
  CHECK(prune_links(t, flow, 0.01).removed.empty());
  CHECK(prune_links(t, flow, 0.0).kept.size() == 2);

  std::vector<Point> pos{{0, 0}, {50, 0}, {50, 5}, {90, 2}};
  const NetworkTopology d = make_topology(pos, {0, 1, 1, 2}, 2, {{1, 0, 50}, {2, 0, 50}, {3, 1, 40}, {3, 2, 40}});
  VectorXd f(4);
  f << 0.2, 0.1, 0.008, 0.1;
  const PruneResult p = prune_links(d, f, 0.01);
  CHECK(p.removed == std::vector<int>{2});
  CHECK(p.topology.num_links() == 3);
  f << 0.2, 0.1, 0.008, 0.005;
  const PruneResult q = prune_links(d, f, 0.01);
  CHECK(q.removed.size() == 1);
  CHECK(q.flagged.size() == 1);
  CHECK(all_users_connected(q.topology));
}

}
