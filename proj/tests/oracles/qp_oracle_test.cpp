#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "xlayer/admm_common.hpp"
#include "xlayer/device_admm.hpp"
#include "xlayer/projection.hpp"
#include "xlayer/qp.hpp"

using namespace xlayer;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// min 0.5 x'Px + c'x  s.t.  Gx <= h, x >= 0, by trying every active set.
double enumerate_active_sets(const MatrixXd& P, const VectorXd& c, const MatrixXd& G, const VectorXd& h) {
  const int n = static_cast<int>(c.size());
  MatrixXd rows(G.rows() + n, n);
  rows << G, -MatrixXd::Identity(n, n);
  VectorXd rhs(G.rows() + n);
  rhs << h, VectorXd::Zero(n);
  const int m = static_cast<int>(rows.rows());
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    std::vector<int> act;
    for (int i = 0; i < m; ++i) {
      if (mask & (1u << i)) act.push_back(i);
    }
    const int k = static_cast<int>(act.size());
    if (k > n) continue;
    MatrixXd K = MatrixXd::Zero(n + k, n + k);
    VectorXd r(n + k);
    K.topLeftCorner(n, n) = P;
    r.head(n) = -c;
    for (int j = 0; j < k; ++j) {
      K.block(0, n + j, n, 1) = rows.row(act[j]).transpose();
      K.block(n + j, 0, 1, n) = rows.row(act[j]);
      r[n + j] = rhs[act[j]];
    }
    Eigen::FullPivLU<MatrixXd> lu(K);
    if (lu.rank() < n + k) continue;
    const VectorXd sol = lu.solve(r);
    const VectorXd x = sol.head(n);
    if ((rows * x - rhs).maxCoeff() > 1e-10) continue;
    if (k > 0 && sol.tail(k).minCoeff() < -1e-10) continue;
    best = std::min(best, 0.5 * x.dot(P * x) + c.dot(x));
  }
  return best;
}

QpOptions tight() {
  QpOptions o;
  o.tol = 1e-12;
  o.max_iterations = 200;
  return o;
}

VectorXd qp_capped_simplex(const VectorXd& point, double cap) {
  QpBuilder b;
  const int n = static_cast<int>(point.size());
  const int v = b.add_variables(n);
  std::vector<Term> row;
  for (int i = 0; i < n; ++i) {
    b.add_quadratic(v + i, v + i, 2.0);
    b.add_linear(v + i, -2.0 * point[i]);
    row.push_back({v + i, 1.0});
  }
  b.add_inequality(row, cap);
  return solve_qp(b.build(), tight()).x;
}

}  // namespace

TEST_SUITE("oracle-qp") {

TEST_CASE("interior-point QP matches active-set enumeration") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.1, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 5;
    MatrixXd B(n, n);
    for (int i = 0; i < n * n; ++i) B.data()[i] = nd(rng);
    const MatrixXd P = B.transpose() * B;
    VectorXd c(n);
    for (int i = 0; i < n; ++i) c[i] = 3.0 * nd(rng);
    MatrixXd G(3, n);
    for (int i = 0; i < 3 * n; ++i) G.data()[i] = nd(rng);
    VectorXd x0(n);
    for (int i = 0; i < n; ++i) x0[i] = ud(rng);
    VectorXd h = G * x0;
    for (int i = 0; i < 3; ++i) h[i] += ud(rng);

    QpBuilder b;
    const int x = b.add_variables(n);
    for (int i = 0; i < n; ++i) {
      b.add_linear(x + i, c[i]);
      for (int j = 0; j < n; ++j) {
        if (j >= i) b.add_quadratic(x + i, x + j, P(i, j));
      }
    }
    for (int r = 0; r < 3; ++r) {
      std::vector<Term> row;
      for (int i = 0; i < n; ++i) row.push_back({x + i, G(r, i)});
      b.add_inequality(row, h[r]);
    }
    const QpProblem qp = b.build();
    const QpSolution s = solve_qp(qp, tight());
    const double oracle = enumerate_active_sets(P, c, G, h);
    CAPTURE(trial);
    CHECK(std::abs(s.objective - oracle) <= 1e-8 * (1.0 + std::abs(oracle)));
    const KktResiduals k = kkt_residuals(qp, s);
    CHECK(k.equality <= 1e-9);
    CHECK(k.inequality <= 1e-9);
    CHECK(k.stationarity <= 1e-8);
  }
}

TEST_CASE("capped simplex projection matches the QP") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd(1.0, 3.0);
  std::uniform_int_distribution<int> dim(1, 20);
  std::uniform_real_distribution<double> cap(0.0, 15.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = dim(rng);
    VectorXd pt(n);
    for (int i = 0; i < n; ++i) pt[i] = nd(rng);
    const double c = cap(rng);
    CHECK((project_capped_simplex(pt, c) - qp_capped_simplex(pt, c)).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(capped_simplex_distance2(pt, c) ==
          doctest::Approx((project_capped_simplex(pt, c) - pt).squaredNorm()).epsilon(1e-12));
  }
}

TEST_CASE("group bandwidth projection matches the coupled QP") {
  std::mt19937_64 rng(19);
  std::normal_distribution<double> nd(1.5, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    GroupStructure g;
    const int f = 3 + trial % 2;
    const int M = 6;
    g.num_classes = f;
    g.w_max = 10.0;
    for (int k = 1; k <= M; ++k) g.class_of_group.push_back((k - 1) % f);
    for (int k = 1; k <= M; ++k) {
      const int members = 1 + static_cast<int>(rng() % 3);
      for (int j = 0; j < members; ++j) g.group_of_user.push_back(k);
    }
    const int U = static_cast<int>(g.group_of_user.size());
    VectorXd pt(U);
    for (int i = 0; i < U; ++i) pt[i] = nd(rng) * (trial % 3 == 0 ? 0.3 : 1.0);

    QpBuilder b;
    const int v = b.add_variables(U);
    const int w = b.add_variables(f);
    for (int i = 0; i < U; ++i) {
      b.add_quadratic(v + i, v + i, 2.0);
      b.add_linear(v + i, -2.0 * pt[i]);
    }
    for (int k = 1; k <= M; ++k) {
      std::vector<Term> row{{w + g.class_of_group[k - 1], -1.0}};
      for (int i = 0; i < U; ++i) {
        if (g.group_of_user[i] == k) row.push_back({v + i, 1.0});
      }
      b.add_inequality(row, 0.0);
    }
    std::vector<Term> total;
    for (int c = 0; c < f; ++c) total.push_back({w + c, 1.0});
    b.add_equality(total, g.w_max);
    const QpSolution s = solve_qp(b.build(), tight());

    const BandwidthProjection p = bandwidth_projection(pt, g);
    CAPTURE(trial);
    CHECK((p.v - s.x.head(U)).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(p.class_bandwidth.sum() == doctest::Approx(g.w_max).epsilon(1e-12));
    for (int k = 1; k <= M; ++k) {
      double load = 0.0;
      for (int i = 0; i < U; ++i) {
        if (g.group_of_user[i] == k) load += p.v[i];
      }
      CHECK(load <= p.class_bandwidth[g.class_of_group[k - 1]] + 1e-12);
      CHECK(p.group_bandwidth[k - 1] == p.class_bandwidth[g.class_of_group[k - 1]]);
    }
  }
}

TEST_CASE("routing step on the four-node example") {
  // Links 1->0, 2->1, 3->1 and target (3, 1, 1): all three rates balance at
  // a = 1 + 1/(11 rho) on the relays and 3a on the trunk.
  const NetworkTopology t = make_topology({{0, 0}, {50, 0}, {100, 5}, {100, -5}}, {0, 1, 2, 2}, 2,
                                          {{1, 0, 50}, {2, 1, 50}, {3, 1, 50}});
  VectorXd target(3);
  target << 3, 1, 1;
  for (double rho : {0.5, 1.0, 4.0}) {
    const RoutingQpResult r = solve_routing_qp(t, target, rho, tight());
    const double a = 1.0 + 1.0 / (11.0 * rho);
    CHECK(r.flow[0] == doctest::Approx(3.0 * a).epsilon(1e-9));
    CHECK(r.flow[1] == doctest::Approx(a).epsilon(1e-9));
    CHECK(r.flow[2] == doctest::Approx(a).epsilon(1e-9));
    CHECK(r.min_rate == doctest::Approx(a).epsilon(1e-9));
  }
}

}
