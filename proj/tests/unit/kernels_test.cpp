#include <doctest.h>

#include <random>

#include "xlayer/capacity.hpp"
#include "xlayer/error.hpp"
#include "xlayer/projection.hpp"
#include "xlayer/qp.hpp"
#include "xlayer/tangent_planes.hpp"

using namespace xlayer;
using Eigen::VectorXd;

TEST_SUITE("convex-kernels") {

TEST_CASE("capacity: closed forms") {
  const LinkChannel unit{1.0, 1.0, 2.0};
  CHECK(capacity(1.0, 1.0, unit) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(capacity(0.0, 5.0, unit) == 0.0);
  CHECK(capacity(2.0, 2.0, unit) == doctest::Approx(2.0 * capacity(1.0, 1.0, unit)).epsilon(1e-15));
  CHECK(capacity(3.0, 0.0, unit) == 0.0);
  const LinkChannel nat{1.0, 1.0, std::exp(1.0)};
  CHECK(capacity(1.0, std::exp(1.0) - 1.0, nat) == doctest::Approx(1.0));
  CHECK_THROWS_AS(capacity(-1.0, 1.0, unit), InvalidArgument);
  CHECK_THROWS_AS(capacity(1.0, -1.0, unit), InvalidArgument);
}

TEST_CASE("capacity gradient: limits and signs") {
  const LinkChannel link{2e-7, 1e-11, 2.0};
  const CapacityGradient z = capacity_gradient_at_zero_snr(link);
  CHECK(z.d_power == doctest::Approx(link.gain / (link.noise * std::log(2.0))));
  CHECK(z.d_bandwidth == 0.0);
  const CapacityGradient tiny = capacity_gradient(1.0, 1e-12, link);
  CHECK(tiny.d_power == doctest::Approx(z.d_power).epsilon(1e-6));
  CHECK(tiny.d_bandwidth == doctest::Approx(0.0).epsilon(1e-6));
  CHECK_THROWS_AS(capacity_gradient(0.0, 1.0, link), InvalidArgument);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(1e-3, 10.0);
  for (int i = 0; i < 200; ++i) {
    const CapacityGradient g = capacity_gradient(u(rng), u(rng) * 1e-3, link);
    CHECK(g.d_power >= 0.0);
    CHECK(g.d_bandwidth >= 0.0);
  }
}

TEST_CASE("capacity gradient: central differences at the unit point") {
  const LinkChannel unit{1.0, 1.0, 2.0};
  const double h = 1e-5;
  const CapacityGradient g = capacity_gradient(1.0, 1.0, unit);
  const double dp = (capacity(1.0, 1.0 + h, unit) - capacity(1.0, 1.0 - h, unit)) / (2 * h);
  const double dw = (capacity(1.0 + h, 1.0, unit) - capacity(1.0 - h, 1.0, unit)) / (2 * h);
  CHECK(std::abs(g.d_power - dp) < 1e-6);
  CHECK(std::abs(g.d_bandwidth - dw) < 1e-6);
  // s = 1: dc/dp = 1/(2 ln 2), dc/dw = 1 - 1/(2 ln 2)
  CHECK(g.d_power == doctest::Approx(0.7213475204444817).epsilon(1e-14));
  CHECK(g.d_bandwidth == doctest::Approx(0.2786524795555183).epsilon(1e-14));
}

TEST_CASE("capacity: joint concavity on random pairs") {
  const LinkChannel link{1e-6, 1e-11, 2.0};
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uw(0.0, 10.0), up(0.0, 1.0), ul(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double w1 = uw(rng), p1 = up(rng), w2 = uw(rng), p2 = up(rng), lam = ul(rng);
    const double mid = capacity(lam * w1 + (1 - lam) * w2, lam * p1 + (1 - lam) * p2, link);
    CHECK(mid >= lam * capacity(w1, p1, link) + (1 - lam) * capacity(w2, p2, link) - 1e-12 * (1 + std::abs(mid)));
  }
}

TEST_CASE("tangent planes: tangency, idempotence, budget") {
  const LinkChannel link{1e-6, 1e-11, 2.0};
  TangentPlaneModel m(link, 3);
  CHECK(std::isinf(m.value(1.0, 1.0)));
  CHECK(m.refine(0.1, 2.0));
  CHECK(m.value(0.1, 2.0) == doctest::Approx(capacity(2.0, 0.1, link)).epsilon(1e-12));
  CHECK_FALSE(m.refine(0.1, 2.0));
  CHECK_FALSE(m.refine(0.2, 4.0));  // same ray
  CHECK(m.size() == 1);
  CHECK(m.refine(0.3, 1.0));
  CHECK(m.refine(0.01, 5.0));
  CHECK(m.refine(0.5, 0.5));
  CHECK(m.size() == 3);
  CHECK(m.value(0.5, 0.5) == doctest::Approx(capacity(0.5, 0.5, link)).epsilon(1e-12));
  m.clear();
  CHECK(m.empty());
}

TEST_CASE("tangent planes: outer approximation at random points") {
  const LinkChannel link{1e-6, 1e-11, 2.0};
  TangentPlaneModel m(link, 10);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uw(1e-3, 10.0), up(0.0, 1.0);
  for (int i = 0; i < 10; ++i) m.refine(up(rng), uw(rng));
  for (int i = 0; i < 100; ++i) {
    const double w = uw(rng), p = up(rng);
    CHECK(m.value(p, w) >= capacity(w, p, link) - 1e-12);
  }
}

TEST_CASE("tangent planes: zero-SNR anchor") {
  const LinkChannel link{1e-6, 1e-11, 2.0};
  TangentPlaneModel m(link);
  CHECK(m.refine(0.0, 0.0));
  const TangentPlane& pl = m.planes()[0];
  CHECK(pl.d_power == doctest::Approx(capacity_gradient_at_zero_snr(link).d_power));
  CHECK(pl.d_bandwidth == 0.0);
  CHECK(pl.intercept == 0.0);
}

TEST_CASE("qp: clamped projection") {
  QpBuilder b;
  const int x = b.add_variables(2);
  for (int i = 0; i < 2; ++i) b.add_quadratic(x + i, x + i, 2.0);
  b.add_linear(x, -2.0);
  b.add_linear(x + 1, 2.0);
  const QpSolution s = solve_qp(b.build());
  CHECK(s.x[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(s.x[1]) < 1e-8);
}

TEST_CASE("qp: symmetric sum constraint") {
  QpBuilder b;
  const int x = b.add_variables(2);
  for (int i = 0; i < 2; ++i) {
    b.add_quadratic(x + i, x + i, 2.0);
    b.add_linear(x + i, -12.0);
  }
  b.add_inequality({{x, 1.0}, {x + 1, 1.0}}, 10.0);
  const QpProblem p = b.build();
  const QpSolution s = solve_qp(p);
  CHECK(s.x[0] == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(s.x[1] == doctest::Approx(5.0).epsilon(1e-9));
  const KktResiduals k = kkt_residuals(p, s);
  CHECK(k.equality <= 1e-9);
  CHECK(k.inequality <= 1e-9);
  CHECK(k.stationarity <= 1e-8);
}

TEST_CASE("qp: infeasible and unbounded problems") {
  {
    QpBuilder b;
    const int x = b.add_variable();
    b.add_inequality({{x, 1.0}}, -1.0);
    CHECK_THROWS_AS(solve_qp(b.build()), SolverError);
  }
  {
    QpBuilder b;
    const int x = b.add_variable(QpBuilder::kFree);
    b.add_linear(x, 1.0);
    try {
      solve_qp(b.build());
      FAIL("expected SolverError");
    } catch (const SolverError& e) {
      CHECK(e.kind() != SolverFailure::kInfeasible);
    }
  }
}

TEST_CASE("qp: dimension checks") {
  QpProblem p;
  p.linear = VectorXd::Zero(2);
  p.lower = VectorXd::Zero(3);
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
}

TEST_CASE("capped simplex projection: examples") {
  VectorXd a(2), b(2), c(2);
  a << 8, 2;
  b << 12, 2;
  c << 6, 6;
  CHECK(project_capped_simplex(a, 10.0).isApprox(a));
  VectorXd eb(2), ec(2);
  eb << 10, 0;
  ec << 5, 5;
  CHECK((project_capped_simplex(b, 10.0) - eb).norm() < 1e-12);
  CHECK((project_capped_simplex(c, 10.0) - ec).norm() < 1e-12);
  CHECK(capped_simplex_threshold(b, 10.0) == doctest::Approx(2.0));
  CHECK(capped_simplex_threshold(a, 10.0) == 0.0);
  VectorXd neg(3);
  neg << -1, 3, -2;
  VectorXd en(3);
  en << 0, 3, 0;
  CHECK((project_capped_simplex(neg, 10.0) - en).norm() < 1e-12);
  CHECK(project_capped_simplex(b, 0.0).isZero());
}

}
