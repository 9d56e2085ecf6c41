#include "doctest.h"

#include "smcf/errors.hpp"
#include "smcf/flow_engine.hpp"
#include "smcf/solutions_barriers.hpp"

#include <cmath>
#include <numbers>

using namespace smcf;

namespace {

GraphState cosine(int cells, double amp = 0.1) {
  const auto d = DomainSpec::interval(0, 1, cells, BoundaryKind::Neumann);
  GraphState s = GraphState::zeros(d, 1);
  const Grid g(d);
  for (std::size_t node = 0; node < g.size(); ++node) s.u[node] = amp * std::cos(std::numbers::pi * g.coord(node, 0));
  return s;
}

BoundaryFunction reaper_boundary() {
  return [](std::span<const double> x, double t, std::span<double> out) { out[0] = grim_reaper(x[0], t); };
}

GraphState reaper_state(double lo, double hi, int cells) {
  const auto d = DomainSpec::interval(lo, hi, cells, BoundaryKind::ExactTracking);
  GraphState s = GraphState::zeros(d, 1);
  const Grid g(d);
  for (std::size_t node = 0; node < g.size(); ++node) s.u[node] = grim_reaper(g.coord(node, 0), 0.0);
  return s;
}

}  // namespace

TEST_SUITE("flow_engine") {

TEST_CASE("enum spellings") {
  CHECK(scheme_from_string("heun") == Scheme::Heun);
  CHECK(to_string(Scheme::CrankNicolson) == "cn");
  CHECK(flow_mode_from_string(to_string(FlowMode::Dirichlet)) == FlowMode::Dirichlet);
  CHECK_THROWS_AS(scheme_from_string("rk4"), ConfigError);
}

TEST_CASE("cfl step size") {
  const auto d = DomainSpec::interval(0, 1, 10, BoundaryKind::Neumann);
  GraphState flat = GraphState::zeros(d, 1);
  CHECK(cfl_dt(flat, 0.5) == doctest::Approx(0.0025).epsilon(1e-14));

  GraphState tilted = flat;
  const Grid g(d);
  for (std::size_t node = 0; node < g.size(); ++node) tilted.u[node] = 0.6 * g.coord(node, 0);
  CHECK(cfl_dt(tilted, 0.5) / cfl_dt(flat, 0.5) == doctest::Approx(0.64).epsilon(1e-12));

  double prev = cfl_dt(flat, 1.0);
  for (double slope : {0.5, 0.9, 0.99, 0.999}) {
    for (std::size_t node = 0; node < g.size(); ++node) tilted.u[node] = slope * g.coord(node, 0);
    const double dt = cfl_dt(tilted, 1.0);
    CHECK(dt < prev);
    prev = dt;
  }
  for (std::size_t node = 0; node < g.size(); ++node) tilted.u[node] = 1.01 * g.coord(node, 0);
  CHECK_THROWS_AS(cfl_dt(tilted, 1.0), SpacelikeViolation);
}

TEST_CASE("planes are static") {
  const auto d = DomainSpec::box({{0, 1}, {0, 1}}, {8, 8}, BoundaryKind::Neumann);
  GraphState s = GraphState::zeros(d, 2);
  for (auto& v : s.u) v = 0.3;
  for (Scheme sc : {Scheme::Euler, Scheme::Heun}) {
    const GraphState next = step(s, 1e-3, sc);
    CHECK(next.u == s.u);
    CHECK(next.t == doctest::Approx(1e-3));
  }
  CHECK_THROWS_AS(step(s, 1.0, Scheme::Heun), PreconditionError);
}

TEST_CASE("one heun step tracks the grim reaper") {
  const GraphState s = reaper_state(-5, 5, 1280);
  StepContext ctx{reaper_boundary()};
  const double dt = 1e-4;
  // Explicit stability on [-5, 5] at this spacing needs dt below about 4e-9;
  // take as many stable substeps as fit into 1e-4 on a shorter stretch.
  const GraphState short_s = reaper_state(-2, 2, 512);
  const double sub = cfl_dt(short_s, 0.8);
  const int count = static_cast<int>(std::ceil(dt / sub));
  GraphState cur = short_s;
  for (int k = 0; k < count; ++k) cur = step(cur, dt / count, Scheme::Heun, ctx);
  const Grid g(cur.domain);
  double err = 0.0;
  for (std::size_t node = 0; node < g.size(); ++node)
    err = std::max(err, std::abs(cur.u[node] - grim_reaper(g.coord(node, 0), dt)));
  CHECK(err < 1e-6);
  CHECK_THROWS_AS(step(s, dt, Scheme::Heun, ctx), PreconditionError);
}

TEST_CASE("expander flow converges at second order") {
  double err[2];
  for (int k = 0; k < 2; ++k) {
    const auto d = DomainSpec::interval(-1, 1, 32 << k, BoundaryKind::ExactTracking);
    GraphState s = GraphState::zeros(d, 1, 0.1);
    const Grid g(d);
    for (std::size_t node = 0; node < g.size(); ++node) s.u[node] = std::sqrt(std::pow(g.coord(node, 0), 2) + 0.2);
    FlowConfig cfg;
    cfg.mode = FlowMode::Dirichlet;
    cfg.t_end = 0.2;
    cfg.snapshot_every = 0.1;
    cfg.steady_state_tol = 1e-30;
    FlowMonitors mon;
    mon.exact_boundary = [](std::span<const double> x, double t, std::span<double> out) {
      out[0] = hyperbolic_expander(x, t, 1);
    };
    const Trajectory tr = run(cfg, s, mon);
    const GraphState& f = tr.final_state();
    CHECK(f.t == doctest::Approx(0.2).epsilon(1e-14));
    err[k] = 0.0;
    for (std::size_t node = 0; node < g.size(); ++node) {
      const double x[1] = {g.coord(node, 0)};
      err[k] = std::max(err[k], std::abs(f.u[node] - hyperbolic_expander(x, 0.2, 1)));
    }
  }
  CHECK(std::log2(err[0] / err[1]) == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("neumann cosine run flattens") {
  FlowConfig cfg;
  cfg.t_end = 5.0;
  cfg.snapshot_every = 0.5;
  cfg.steady_state_tol = 1e-6;
  const Trajectory tr = run(cfg, cosine(64));
  CHECK(tr.steady_state_reached);
  const GraphState& f = tr.final_state();
  double lo = 1e9, hi = -1e9;
  for (double v : f.u) lo = std::min(lo, v), hi = std::max(hi, v);
  CHECK(hi - lo < 1e-4);
  for (std::size_t i = 1; i < tr.diagnostics.size(); ++i) CHECK(tr.diagnostics[i].t > tr.diagnostics[i - 1].t);
  for (std::size_t i = 1; i < tr.snapshots.size(); ++i) CHECK(tr.snapshots[i].t > tr.snapshots[i - 1].t);
}

TEST_CASE("dirichlet runs reach the linear interpolant") {
  const auto d = DomainSpec::interval(0, 1, 64, BoundaryKind::Dirichlet);
  const Grid g(d);
  GraphState s = GraphState::zeros(d, 1);
  for (std::size_t node = 0; node < g.size(); ++node) {
    const double x = g.coord(node, 0);
    s.u[node] = 0.5 * x + 0.1 * std::sin(std::numbers::pi * x);
  }
  s.dirichlet_data = s.u;
  FlowConfig cfg;
  cfg.mode = FlowMode::Dirichlet;
  cfg.t_end = 5.0;
  cfg.snapshot_every = 0.5;
  cfg.steady_state_tol = 1e-8;
  const Trajectory tr = run(cfg, s);
  double err = 0.0;
  for (std::size_t node = 0; node < g.size(); ++node)
    err = std::max(err, std::abs(tr.final_state().u[node] - 0.5 * g.coord(node, 0)));
  CHECK(err < 1e-5);
  CHECK(tr.final_state().u.front() == 0.0);
  CHECK(tr.final_state().u.back() == 0.5);

  GraphState lin = s;
  for (std::size_t node = 0; node < g.size(); ++node) lin.u[node] = 0.5 * g.coord(node, 0);
  lin.dirichlet_data = lin.u;
  cfg.t_end = 0.25;
  cfg.steady_state_tol = 1e-30;
  const Trajectory still = run(cfg, lin);
  for (std::size_t node = 0; node < g.size(); ++node)
    CHECK(std::abs(still.final_state().u[node] - lin.u[node]) < 1e-10 * 0.25);

  GraphState bad = s;
  (*bad.dirichlet_data).back() = 1.2;
  bad.u.back() = 1.2;
  CHECK_THROWS_AS(run(cfg, bad), PreconditionError);
}

TEST_CASE("parabolic scaling is reproduced by the discrete flow") {
  // u_l(x, t) = l u(x / l, t / l^2) is again a solution; the explicit scheme
  // commutes with the scaling when the grid and time step scale with it.
  const double l = 2.0;
  GraphState a = cosine(32);
  GraphState b = a;
  b.domain = DomainSpec::interval(0, l, 32, BoundaryKind::Neumann);
  for (auto& v : b.u) v *= l;
  const double dt = 0.5 * cfl_dt(a, 1.0);
  for (int k = 0; k < 50; ++k) {
    a = step(a, dt, Scheme::Heun);
    b = step(b, l * l * dt, Scheme::Heun);
  }
  for (std::size_t i = 0; i < a.u.size(); ++i) CHECK(b.u[i] == doctest::Approx(l * a.u[i]).epsilon(1e-12));
}

TEST_CASE("runs are deterministic") {
  FlowConfig cfg;
  cfg.t_end = 0.1;
  cfg.snapshot_every = 0.02;
  const Trajectory a = run(cfg, cosine(48));
  const Trajectory b = run(cfg, cosine(48));
  REQUIRE(a.snapshots.size() == b.snapshots.size());
  for (std::size_t i = 0; i < a.snapshots.size(); ++i) CHECK(a.snapshots[i].u == b.snapshots[i].u);
  CHECK(a.snapshots.size() == 6);
}

TEST_CASE("entire mode on zero data") {
  const auto d = DomainSpec::interval(-12, 12, 96, BoundaryKind::Neumann);
  FlowConfig cfg;
  cfg.mode = FlowMode::Entire;
  cfg.entire_radii = {2, 4};
  cfg.entire_lambda = 1.0;
  cfg.t_end = 0.2;
  const EntireResult r = entire_solve(cfg, GraphState::zeros(d, 1));
  REQUIRE(r.discrepancies.size() == 1);
  CHECK(r.discrepancies[0] == 0.0);
  CHECK(r.converged);
  for (double v : r.trajectory.final_state().u) CHECK(v == 0.0);
}

TEST_CASE("grim reaper data leaves the spacelike guard before the radius ladder") {
  // tanh x is within 1e-6 of the light cone for |x| > 7.6, so a ladder
  // reaching R = 20 cannot be started from log cosh x.
  const auto d = DomainSpec::interval(-22, 22, 352, BoundaryKind::Neumann);
  GraphState s = GraphState::zeros(d, 1);
  const Grid g(d);
  for (std::size_t node = 0; node < g.size(); ++node) s.u[node] = grim_reaper(g.coord(node, 0), 0.0);
  FlowConfig cfg;
  cfg.mode = FlowMode::Entire;
  cfg.entire_radii = {5, 10, 20};
  cfg.t_end = 0.5;
  CHECK_THROWS_AS(entire_solve(cfg, s), SpacelikeViolation);
}

TEST_CASE("implicit scheme needs a fixed step") {
  FlowConfig cfg;
  cfg.scheme = Scheme::CrankNicolson;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.fixed_dt = 1e-3;
  CHECK_NOTHROW(cfg.validate());
}

}
