#include "smcf/g2_bridge.hpp"

#include "smcf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace smcf {

Form2OnT4 Form2OnT4::operator+(const Form2OnT4& o) const {
  Form2OnT4 r;
  for (int k = 0; k < 6; ++k) r.c[k] = c[k] + o.c[k];
  return r;
}

Form2OnT4 Form2OnT4::operator*(double s) const {
  Form2OnT4 r;
  for (int k = 0; k < 6; ++k) r.c[k] = c[k] * s;
  return r;
}

double wedge_pairing(const Form2OnT4& a, const Form2OnT4& b) {
  // dy0^dy_i pairs with the complementary dy_j^dy_k, each with sign +1.
  return a.c[0] * b.c[3] + a.c[3] * b.c[0] + a.c[1] * b.c[4] + a.c[4] * b.c[1] +
         a.c[2] * b.c[5] + a.c[5] * b.c[2];
}

std::array<Form2OnT4, 3> omega_basis() {
  return {Form2OnT4{{1, 0, 0, 1, 0, 0}}, Form2OnT4{{0, 1, 0, 0, 1, 0}},
          Form2OnT4{{0, 0, 1, 0, 0, 1}}};
}

std::array<Form2OnT4, 3> omega_bar_basis() {
  return {Form2OnT4{{1, 0, 0, -1, 0, 0}}, Form2OnT4{{0, 1, 0, 0, -1, 0}},
          Form2OnT4{{0, 0, 1, 0, 0, -1}}};
}

namespace {

void require_33(const GraphState& X) {
  X.validate();
  if (X.domain.n() != 3 || X.m != 3) {
    std::ostringstream os;
    os << "G2 bridge needs (n, m) = (3, 3), got (" << X.domain.n() << ", " << X.m << ")";
    throw DimensionError(os.str());
  }
}

void require_spacelike(const InverseMetric& im, std::size_t node) {
  if (!(im.lambda_max < 1.0 - kSpacelikeGuard)) {
    std::ostringstream os;
    os << "phi is not positive: the immersion is not spacelike at node " << node;
    throw SpacelikeViolation(os.str(), im.lambda_max, static_cast<std::ptrdiff_t>(node));
  }
}

}  // namespace

G2Form immersion_to_phi(const GraphState& X) {
  require_33(X);
  const Stencil st(X.domain, 3);
  const Grid& g = st.grid();
  const auto om = omega_basis();
  const auto ob = omega_bar_basis();
  G2Form phi;
  phi.domain = X.domain;
  phi.vol.resize(g.size());
  phi.slot.resize(g.size());
  std::vector<double> du(9), d2u(27);
  for (std::size_t node = 0; node < g.size(); ++node) {
    st.jet(X.u, node, du, d2u);
    const InverseMetric im = inverse_metric(du, 3, 3);
    require_spacelike(im, node);
    phi.vol[node] = -std::sqrt(im.det_g);
    for (int i = 0; i < 3; ++i) {
      Form2OnT4 s = om[i];
      for (int a = 0; a < 3; ++a) s = s + ob[a] * du[i * 3 + a];
      phi.slot[node][i] = s;
    }
  }
  return phi;
}

G2Form phi0(const DomainSpec& domain) {
  domain.validate();
  if (domain.n() != 3) throw DimensionError("phi0 lives over a 3-dimensional base");
  const Grid g(domain);
  G2Form phi;
  phi.domain = domain;
  phi.vol.assign(g.size(), -1.0);
  phi.slot.assign(g.size(), omega_basis());
  return phi;
}

double check_closed(const G2Form& phi) {
  const Grid g(phi.domain);
  if (g.n() != 3) throw DimensionError("check_closed needs a 3-dimensional base");
  if (phi.slot.size() != g.size() || phi.vol.size() != g.size())
    throw DimensionError("G2 form does not match its grid");
  double worst = 0.0;
  for (std::size_t node = 0; node < g.size(); ++node) {
    if (g.is_boundary(node)) continue;
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) {
        const std::size_t si = g.stride(i), sj = g.stride(j);
        for (int k = 0; k < 6; ++k) {
          const double di = (phi.slot[node + si][j].c[k] - phi.slot[node - si][j].c[k]) / (2.0 * g.h(i));
          const double dj = (phi.slot[node + sj][i].c[k] - phi.slot[node - sj][i].c[k]) / (2.0 * g.h(j));
          worst = std::max(worst, std::abs(di - dj));
        }
      }
  }
  return worst;
}

TorsionField torsion(const GraphState& X) {
  require_33(X);
  const Signature sig(3, 3);
  const Grid g(X.domain);
  const auto ob = omega_bar_basis();
  TorsionField out;
  out.H.resize(g.size() * 3);
  out.anti_self_dual.resize(g.size());
  out.H_norm2.resize(g.size());
  for (std::size_t node = 0; node < g.size(); ++node) {
    const GeometryFrame f = geometry_frame(derivatives(X, node), X.position(node), sig);
    Form2OnT4 asd;
    for (int a = 0; a < 3; ++a) {
      out.H[node * 3 + a] = f.H_graph(a);
      asd = asd + ob[a] * f.H_graph(a);
    }
    out.anti_self_dual[node] = asd;
    out.H_norm2[node] = f.H_norm2;
    out.sup_H_norm2 = std::max(out.sup_H_norm2, f.H_norm2);
  }
  return out;
}

std::map<std::string, std::vector<double>> phi_components(const G2Form& phi) {
  static const char* names[7] = {"x1", "x2", "x3", "y0", "y1", "y2", "y3"};
  // Basis 2-forms as (first y, second y, sign) in the sorted index order.
  static const int pair[6][3] = {{3, 4, 1}, {3, 5, 1}, {3, 6, 1}, {5, 6, 1}, {4, 6, -1}, {4, 5, 1}};
  const std::size_t N = phi.vol.size();
  std::map<std::string, std::vector<double>> out;
  auto key = [](int a, int b, int c) { return std::string(names[a]) + names[b] + names[c]; };
  for (int a = 0; a < 7; ++a)
    for (int b = a + 1; b < 7; ++b)
      for (int c = b + 1; c < 7; ++c) out[key(a, b, c)].assign(N, 0.0);
  auto& vol = out[key(0, 1, 2)];
  for (std::size_t node = 0; node < N; ++node) {
    vol[node] = phi.vol[node];
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 6; ++k)
        out[key(i, pair[k][0], pair[k][1])][node] += pair[k][2] * phi.slot[node][i].c[k];
  }
  return out;
}

}  // namespace smcf
