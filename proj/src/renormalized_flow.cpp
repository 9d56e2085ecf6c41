#include "smcf/renormalized_flow.hpp"

#include "smcf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace smcf {

namespace {

void require_nonnegative(double t) {
  if (!(t >= 0.0)) {
    std::ostringstream os;
    os << "rescaling needs t >= 0, got t = " << t;
    throw RangeError(os.str());
  }
}

bool inside(const Grid& g, std::span<const double> x) {
  for (int a = 0; a < g.n(); ++a) {
    const double s = (x[a] - g.lo(a)) / g.h(a);
    if (s < -1e-9 || s > (g.nodes(a) - 1) + 1e-9) return false;
  }
  return true;
}

}  // namespace

double rescale_factor(double t) {
  require_nonnegative(t);
  return 1.0 / std::sqrt(1.0 + 2.0 * t);
}

double rescaled_time(double t) {
  require_nonnegative(t);
  return 0.5 * std::log1p(2.0 * t);
}

double time_from_rescaled(double s) { return 0.5 * std::expm1(2.0 * s); }

RescaledState rescale(const GraphState& state) {
  state.validate();
  RescaledState r;
  r.lambda = rescale_factor(state.t);
  r.s = rescaled_time(state.t);
  r.u_tilde = state;
  r.u_tilde.dirichlet_data.reset();
  const Grid g(state.domain);
  const int n = g.n();
  const int m = state.m;
  r.valid.assign(g.size(), 0);
  std::vector<double> pre(n), val(m);
  for (std::size_t node = 0; node < g.size(); ++node) {
    const auto x = g.coords(node);
    for (int a = 0; a < n; ++a) pre[a] = x[a] / r.lambda;
    auto out = r.u_tilde.at(node);
    if (!inside(g, pre)) {
      std::fill(out.begin(), out.end(), std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    sample_cubic(state, pre, val);
    for (int c = 0; c < m; ++c) out[c] = r.lambda * val[c];
    r.valid[node] = 1;
  }
  return r;
}

GraphState unrescale(const RescaledState& r) {
  GraphState out = r.u_tilde;
  const Grid g(out.domain);
  const int n = g.n();
  const int m = out.m;
  std::vector<double> img(n), val(m);
  for (std::size_t node = 0; node < g.size(); ++node) {
    const auto x = g.coords(node);
    for (int a = 0; a < n; ++a) img[a] = x[a] * r.lambda;
    auto dst = out.at(node);
    if (!inside(g, img)) {
      std::fill(dst.begin(), dst.end(), std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    sample_cubic(r.u_tilde, img, val);
    for (int c = 0; c < m; ++c) dst[c] = val[c] / r.lambda;
  }
  return out;
}

double self_expander_defect(const Jet& jet, const AmbientVector& x, const Signature& sig) {
  const GeometryFrame f = geometry_frame(jet, x, sig);
  return -(f.H - f.X_perp).quadratic_form();
}

ResidualReport expander_residual_report(const GraphState& state, std::optional<double> core_radius) {
  const RescaledState r = rescale(state);
  const GraphState& ut = r.u_tilde;
  const Grid g(ut.domain);
  const int n = g.n();
  const int m = ut.m;
  const Signature sig(n, m);

  double core = 0.0;
  if (core_radius) {
    core = *core_radius;
  } else {
    double reach = std::numeric_limits<double>::infinity();
    for (int a = 0; a < n; ++a)
      reach = std::min({reach, -g.lo(a), g.lo(a) + g.h(a) * (g.nodes(a) - 1)});
    core = 0.5 * r.lambda * std::max(reach, 0.0);
  }

  DomainSpec d = ut.domain;
  d.boundary = BoundaryKind::Dirichlet;
  const Stencil st(d, m);
  std::vector<double> du(n * m), d2u(n * n * m);
  ResidualReport rep;
  for (std::size_t node = 0; node < g.size(); ++node) {
    if (!r.valid[node] || g.is_boundary(node)) continue;
    const auto x = g.coords(node);
    double r2 = 0.0;
    for (int a = 0; a < n; ++a) r2 += x[a] * x[a];
    if (r2 > core * core * (1.0 + 1e-12)) continue;
    st.jet(ut.u, node, du, d2u);
    if (!std::all_of(du.begin(), du.end(), [](double v) { return std::isfinite(v); }) ||
        !std::all_of(d2u.begin(), d2u.end(), [](double v) { return std::isfinite(v); }))
      continue;
    Jet jet(n, m);
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < m; ++a) {
        jet.du(i, a) = du[i * m + a];
        for (int j = 0; j < n; ++j) jet.d2u[a](i, j) = d2u[(i * n + j) * m + a];
      }
    const AmbientVector X = ut.position(node);
    const double defect = self_expander_defect(jet, X, sig);
    const double tau = n + 1.0 + X.quadratic_form();
    rep.sup_residual = std::max(rep.sup_residual, defect);
    rep.sup_weighted = std::max(rep.sup_weighted, defect / tau);
    ++rep.core_nodes;
  }
  if (rep.core_nodes == 0) throw PreconditionError("expander_residual: the core region holds no nodes");
  return rep;
}

double expander_residual(const GraphState& state, std::optional<double> core_radius) {
  return expander_residual_report(state, core_radius).sup_residual;
}

void ConeProfile::value(std::span<const double> x, std::span<double> out) const {
  const int nn = n();
  double r = 0.0;
  for (int i = 0; i < nn; ++i) r += x[i] * x[i];
  r = std::sqrt(r);
  for (int c = 0; c < m(); ++c) {
    double v = a(c) * r;
    for (int i = 0; i < nn; ++i) v += B(i, c) * x[i];
    out[c] = v;
  }
}

double ConeProfile::lipschitz() const {
  const int nn = n();
  if (B.cols() != a.size() || nn < 1 || nn > kMaxBaseDim)
    throw DimensionError("cone profile: B must be n x m with m = size of a");
  std::vector<Eigen::VectorXd> dirs;
  if (nn == 1) {
    dirs = {Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, -1.0)};
  } else if (nn == 2) {
    constexpr int kAngles = 3600;
    for (int k = 0; k < kAngles; ++k) {
      const double th = 2.0 * std::numbers::pi * k / kAngles;
      Eigen::VectorXd w(2);
      w << std::cos(th), std::sin(th);
      dirs.push_back(w);
    }
  } else {
    constexpr int kPoints = 8000;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < kPoints; ++k) {
      const double z = 1.0 - 2.0 * (k + 0.5) / kPoints;
      const double rr = std::sqrt(1.0 - z * z);
      Eigen::VectorXd w(3);
      w << rr * std::cos(golden * k), rr * std::sin(golden * k), z;
      dirs.push_back(w);
    }
  }
  double worst = 0.0;
  for (const auto& w : dirs) {
    const Eigen::MatrixXd D = w * a.transpose() + B;
    const Eigen::MatrixXd G = D * D.transpose();
    worst = std::max(worst, symmetric_max_eigenvalue({G.data(), std::size_t(nn * nn)}, nn));
  }
  return std::sqrt(worst);
}

GraphState cone_initial_data(const ConeProfile& profile, double rho, const DomainSpec& domain) {
  domain.validate();
  if (profile.n() != domain.n()) throw DimensionError("cone profile dimension does not match the domain");
  if (!(rho > 0.0)) throw PreconditionError("cone smoothing radius must be positive");
  const double lip = profile.lipschitz();
  if (!(lip < 1.0)) {
    std::ostringstream os;
    os << "cone profile is not uniformly spacelike (Lipschitz bound " << lip << ")";
    throw PreconditionError(os.str());
  }
  GraphState s = GraphState::zeros(domain, profile.m());
  const Grid g(domain);
  const int n = g.n();
  for (std::size_t node = 0; node < g.size(); ++node) {
    const auto x = g.coords(node);
    double r2 = 0.0;
    for (int a = 0; a < n; ++a) r2 += x[a] * x[a];
    auto out = s.at(node);
    profile.value({x.data(), std::size_t(n)}, out);
    const double damp = std::sqrt(r2 / (r2 + rho * rho));
    for (auto& v : out) v *= damp;
  }
  const Stencil st(domain, s.m);
  std::vector<double> du(n * s.m), d2u(n * n * s.m);
  for (std::size_t node = 0; node < g.size(); ++node) {
    st.jet(s.u, node, du, d2u);
    const double lam = inverse_metric(du, n, s.m).lambda_max;
    if (!(lam < 1.0 - kSpacelikeGuard)) {
      std::ostringstream os;
      os << "cone_initial_data: smoothed data is not spacelike at node " << node;
      throw SpacelikeViolation(os.str(), lam, static_cast<std::ptrdiff_t>(node));
    }
  }
  return s;
}

}  // namespace smcf
