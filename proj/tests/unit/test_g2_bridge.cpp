#include "doctest.h"

#include "smcf/errors.hpp"
#include "smcf/g2_bridge.hpp"

#include <algorithm>
#include <cmath>

using namespace smcf;

namespace {

// Wedge product of two 2-forms on R^4 evaluated on dy0^dy1^dy2^dy3,
// expanded from the antisymmetric component arrays.
double wedge_oracle(const Form2OnT4& a, const Form2OnT4& b) {
  double A[4][4] = {}, B[4][4] = {};
  auto fill = [](double M[4][4], const Form2OnT4& f) {
    const int idx[6][2] = {{0, 1}, {0, 2}, {0, 3}, {2, 3}, {3, 1}, {1, 2}};
    for (int k = 0; k < 6; ++k) {
      M[idx[k][0]][idx[k][1]] += f.c[k];
      M[idx[k][1]][idx[k][0]] -= f.c[k];
    }
  };
  fill(A, a);
  fill(B, b);
  // (a ^ b)_{0123} = sum over permutations sigma of sign(sigma) a_{s0 s1} b_{s2 s3} / 4
  double sum = 0.0;
  int p[4] = {0, 1, 2, 3};
  auto sign = [](const int* q) {
    int s = 1;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        if (q[i] > q[j]) s = -s;
    return s;
  };
  do {
    sum += sign(p) * A[p[0]][p[1]] * B[p[2]][p[3]];
  } while (std::next_permutation(p, p + 4));
  return sum / 4.0;
}

// Affine part plus amp times a quadratic (degree 2) or cubic (degree 3)
// perturbation.
GraphState graph33(int cells, double amp, int degree = 2) {
  const auto d = DomainSpec::box({{0, 1}, {0, 1}, {0, 1}}, {cells, cells, cells}, BoundaryKind::Dirichlet);
  GraphState s = GraphState::zeros(d, 3);
  const Grid g(d);
  for (std::size_t node = 0; node < g.size(); ++node) {
    const auto x = g.coords(node);
    s.u[node * 3 + 0] = 0.2 * x[0] - 0.1 * x[2] + 1.0;
    s.u[node * 3 + 1] = 0.3 * x[1];
    s.u[node * 3 + 2] = -0.1 * x[0] + 0.15 * x[2];
    if (degree == 2) {
      s.u[node * 3 + 0] += amp * x[0] * x[1];
      s.u[node * 3 + 2] += amp * (x[2] * x[2] - x[0] * x[1]);
    } else if (degree == 3) {
      s.u[node * 3 + 0] += amp * x[0] * x[0] * x[1];
      s.u[node * 3 + 2] += amp * (x[2] * x[2] * x[2] - x[0] * x[1] * x[1]);
    }
  }
  return s;
}

}  // namespace

TEST_SUITE("g2_bridge") {

TEST_CASE("wedge pairing of the standard forms") {
  const auto om = omega_basis();
  const auto ob = omega_bar_basis();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      CHECK(wedge_pairing(om[i], om[j]) == (i == j ? 2.0 : 0.0));
      CHECK(wedge_pairing(ob[i], ob[j]) == (i == j ? -2.0 : 0.0));
      CHECK(wedge_pairing(om[i], ob[j]) == 0.0);
      CHECK(wedge_oracle(om[i], om[j]) == doctest::Approx(wedge_pairing(om[i], om[j])));
      CHECK(wedge_oracle(ob[i], om[j]) == doctest::Approx(wedge_pairing(ob[i], om[j])));
    }
  Form2OnT4 a{{0.3, -1.0, 0.5, 2.0, 0.1, -0.7}}, b{{1.1, 0.2, -0.4, 0.0, 0.9, 0.6}};
  CHECK(wedge_oracle(a, b) == doctest::Approx(wedge_pairing(a, b)).epsilon(1e-14));
}

TEST_CASE("identity immersion gives phi0") {
  const auto d = DomainSpec::box({{0, 1}, {0, 1}, {0, 1}}, {4, 4, 4}, BoundaryKind::Dirichlet);
  const G2Form phi = immersion_to_phi(GraphState::zeros(d, 3));
  const G2Form ref = phi0(d);
  CHECK(phi.vol == ref.vol);
  CHECK(phi.slot == ref.slot);
  const auto comps = phi_components(phi);
  CHECK(comps.size() == 35);
  CHECK(comps.at("x1x2x3")[0] == -1.0);
  CHECK(comps.at("x1y0y1")[0] == 1.0);
  CHECK(comps.at("x1y2y3")[0] == 1.0);
  CHECK(comps.at("x2y0y2")[0] == 1.0);
  CHECK(comps.at("x2y1y3")[0] == -1.0);
  CHECK(comps.at("x3y1y2")[0] == 1.0);
  CHECK(comps.at("x1x2y0")[0] == 0.0);
  CHECK(check_closed(ref) == 0.0);
}

TEST_CASE("translates give the same structure") {
  GraphState s = graph33(6, 0.1);
  const G2Form a = immersion_to_phi(s);
  for (auto& v : s.u) v += 2.5;
  const G2Form b = immersion_to_phi(s);
  for (std::size_t node = 0; node < a.vol.size(); ++node) {
    CHECK(a.vol[node] == doctest::Approx(b.vol[node]).epsilon(1e-13));
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 6; ++k)
        CHECK(a.slot[node][i].c[k] == doctest::Approx(b.slot[node][i].c[k]).epsilon(1e-12));
  }
}

TEST_CASE("closedness") {
  CHECK(check_closed(immersion_to_phi(graph33(6, 0.0, 1))) < 1e-14);
  // The interior products are linear in Du and centred differences commute,
  // so the discrete d vanishes up to rounding for any graph.
  CHECK(check_closed(immersion_to_phi(graph33(8, 0.2, 2))) < 1e-12);
  CHECK(check_closed(immersion_to_phi(graph33(8, 0.05, 3))) < 1e-12);
  CHECK(check_closed(immersion_to_phi(graph33(16, 0.05, 3))) < 1e-12);
}

TEST_CASE("positivity fails off the spacelike cone") {
  const auto d = DomainSpec::box({{0, 1}, {0, 1}, {0, 1}}, {4, 4, 4}, BoundaryKind::Dirichlet);
  GraphState s = GraphState::zeros(d, 3);
  const Grid g(d);
  for (std::size_t node = 0; node < g.size(); ++node) s.u[node * 3 + 1] = 1.2 * g.coord(node, 0);
  CHECK_THROWS_AS(immersion_to_phi(s), SpacelikeViolation);
  CHECK_THROWS_AS(immersion_to_phi(GraphState::zeros(DomainSpec::interval(0, 1, 4, BoundaryKind::Neumann), 3)),
                  DimensionError);
}

TEST_CASE("torsion") {
  const auto d = DomainSpec::box({{0, 1}, {0, 1}, {0, 1}}, {4, 4, 4}, BoundaryKind::Dirichlet);
  const TorsionField flat = torsion(GraphState::zeros(d, 3));
  CHECK(flat.sup_H_norm2 == 0.0);
  const GraphState s = graph33(6, 0.2);
  const TorsionField t = torsion(s);
  CHECK(t.sup_H_norm2 > 0.0);
  const Grid g(s.domain);
  for (std::size_t node = 0; node < g.size(); node += 7) {
    const auto f = geometry_frame(derivatives(s, node), s.position(node), Signature(3, 3));
    CHECK(t.H_norm2[node] == f.H_norm2);
    for (int a = 0; a < 3; ++a) CHECK(t.H[node * 3 + a] == f.H_graph(a));
  }
}

}
