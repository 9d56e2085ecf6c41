#include "doctest.h"

#include "smcf/errors.hpp"
#include "smcf/renormalized_flow.hpp"
#include "smcf/solutions_barriers.hpp"

#include <cmath>
#include <numbers>

using namespace smcf;

TEST_SUITE("renormalized_flow") {

TEST_CASE("rescaled time") {
  CHECK(rescaled_time(0.0) == 0.0);
  CHECK(rescale_factor(0.0) == 1.0);
  const double t1 = 0.5 * (std::exp(2.0) - 1.0);
  CHECK(rescaled_time(t1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(time_from_rescaled(1.0) == doctest::Approx(t1).epsilon(1e-15));
  CHECK_THROWS_AS(rescale_factor(-0.1), RangeError);
}

TEST_CASE("rescaled expander profile") {
  const double t = 1.5;
  const auto d = DomainSpec::interval(-8, 8, 256, BoundaryKind::Neumann);
  GraphState s = GraphState::zeros(d, 1, t);
  const Grid g(d);
  for (std::size_t node = 0; node < g.size(); ++node) {
    const double x[1] = {g.coord(node, 0)};
    s.u[node] = hyperbolic_expander(x, t, 1);
  }
  const RescaledState r = rescale(s);
  CHECK(r.lambda == doctest::Approx(0.5));
  std::size_t valid = 0;
  for (std::size_t node = 0; node < g.size(); ++node) {
    if (!r.valid[node]) {
      CHECK(std::isnan(r.u_tilde.u[node]));
      continue;
    }
    ++valid;
    const double xt = g.coord(node, 0);
    CHECK(r.u_tilde.u[node] == doctest::Approx(std::sqrt(xt * xt + 2.0 * t / (1.0 + 2.0 * t))).epsilon(1e-6));
  }
  CHECK(valid == 129);
  const GraphState back = unrescale(r);
  for (std::size_t node = 0; node < g.size(); ++node)
    if (std::abs(g.coord(node, 0)) < 3.5) CHECK(back.u[node] == doctest::Approx(s.u[node]).epsilon(1e-5));
}

TEST_CASE("analytic self-expander has zero defect") {
  // birth -1/2: the fixed point of the rescaled flow, sampled at t = 0.
  for (int n = 1; n <= 3; ++n) {
    const double x[3] = {0.3, -0.7, 0.2};
    const Jet jet = hyperbolic_expander_jet({x, std::size_t(n)}, 0.0, n, -0.5);
    const AmbientVector X(std::vector<double>(x, x + n),
                          {hyperbolic_expander({x, std::size_t(n)}, 0.0, n, -0.5)});
    CHECK(std::abs(self_expander_defect(jet, X, Signature(n, 1))) <= 1e-12);
  }
}

TEST_CASE("discrete residual on the sampled expander") {
  const auto d = DomainSpec::interval(-4, 4, 512, BoundaryKind::Neumann);
  GraphState s = GraphState::zeros(d, 1, 0.0);
  const Grid g(d);
  for (std::size_t node = 0; node < g.size(); ++node) {
    const double x[1] = {g.coord(node, 0)};
    s.u[node] = hyperbolic_expander(x, 0.0, 1, -0.5);
  }
  const auto rep = expander_residual_report(s, 2.0);
  CHECK(rep.sup_residual < 1e-6);
  CHECK(rep.core_nodes == 257);
  CHECK(expander_residual(GraphState::zeros(d, 2)) == 0.0);
  const auto off = DomainSpec::interval(0.5, 4, 64, BoundaryKind::Neumann);
  CHECK_THROWS_AS(expander_residual_report(GraphState::zeros(off, 1), 0.25), PreconditionError);
}

TEST_CASE("cone data") {
  ConeProfile p;
  p.a = Eigen::VectorXd::Constant(1, 0.5);
  p.B = Eigen::MatrixXd::Zero(1, 1);
  CHECK(p.lipschitz() == doctest::Approx(0.5));
  const auto d = DomainSpec::interval(-20, 20, 400, BoundaryKind::Neumann);
  const GraphState s = cone_initial_data(p, 1.0, d);
  const Grid g(d);
  const double ten[1] = {10.0};
  const auto node = g.node_at(ten);
  REQUIRE(node);
  CHECK(s.u[*node] == doctest::Approx(0.5 * 100.0 / std::sqrt(101.0)).epsilon(1e-14));
  CHECK(std::abs(s.u[*node] - 5.0) < 0.025);
  // Tail: |u0 - U| decreases over the last three rings.
  const std::size_t N = g.size();
  double prev = 1e9;
  for (std::size_t k = N - 3; k < N; ++k) {
    const double x = g.coord(k, 0);
    const double gap = std::abs(s.u[k] - 0.5 * std::abs(x));
    CHECK(gap < prev);
    prev = gap;
  }

  ConeProfile zero;
  zero.a = Eigen::VectorXd::Zero(2);
  zero.B = Eigen::MatrixXd::Zero(1, 2);
  for (double v : cone_initial_data(zero, 1.0, d).u) CHECK(v == 0.0);

  ConeProfile steep;
  steep.a = Eigen::VectorXd::Constant(1, 0.6);
  steep.B = Eigen::MatrixXd::Constant(1, 1, 0.5);
  CHECK(steep.lipschitz() == doctest::Approx(1.1));
  CHECK_THROWS_AS(cone_initial_data(steep, 1.0, d), PreconditionError);
}

TEST_CASE("cone lipschitz bound in two dimensions") {
  ConeProfile p;
  p.a = Eigen::VectorXd::Constant(1, 0.3);
  p.B = Eigen::MatrixXd(2, 1);
  p.B << 0.4, 0.0;
  // |D U| = |0.3 w + (0.4, 0)| is largest along w = e_1.
  CHECK(p.lipschitz() == doctest::Approx(0.7).epsilon(1e-9));
}

}
