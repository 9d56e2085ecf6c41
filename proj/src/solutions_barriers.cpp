#include "smcf/solutions_barriers.hpp"

#include "smcf/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <sstream>

namespace smcf {

double grim_reaper(double x, double t) {
  // log cosh x without overflow for large |x|.
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0) + t;
}

double grim_reaper_dx(double x) { return std::tanh(x); }

double grim_reaper_dxx(double x) {
  const double s = 1.0 / std::cosh(x);
  return s * s;
}

double hyperbolic_expander(std::span<const double> x, double t, int n, double birth) {
  if (!(t > birth)) {
    std::ostringstream os;
    os << "hyperbolic_expander: t = " << t << " is not after the birth time " << birth;
    throw RangeError(os.str());
  }
  double r2 = 0.0;
  for (int i = 0; i < n; ++i) r2 += x[i] * x[i];
  return std::sqrt(r2 + 2.0 * n * (t - birth));
}

Jet hyperbolic_expander_jet(std::span<const double> x, double t, int n, double birth) {
  const double u = hyperbolic_expander(x, t, n, birth);
  Jet j(n, 1);
  for (int i = 0; i < n; ++i) {
    j.du(i, 0) = x[i] / u;
    for (int l = 0; l < n; ++l)
      j.d2u[0](i, l) = ((i == l) ? 1.0 / u : 0.0) - x[i] * x[l] / (u * u * u);
  }
  return j;
}

double quasi_sphere_margin(const QuasiSphere& q, const GraphState& state) {
  const Signature sig = state.signature();
  if (static_cast<int>(q.center.spatial.size()) != sig.n() ||
      static_cast<int>(q.center.vertical.size()) != sig.m())
    throw DimensionError("quasi-sphere centre does not match the state signature");
  const Grid g(state.domain);
  const int n = sig.n();
  const int m = sig.m();
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t node = 0; node < g.size(); ++node) {
    const auto x = g.coords(node);
    const auto u = state.at(node);
    double d = 0.0;
    for (int i = 0; i < n; ++i) d += (q.center.spatial[i] - x[i]) * (q.center.spatial[i] - x[i]);
    for (int a = 0; a < m; ++a) d -= (q.center.vertical[a] - u[a]) * (q.center.vertical[a] - u[a]);
    worst = std::min(worst, d + q.R2 + 2.0 * q.n * state.t);
  }
  return worst;
}

double YangLiBarrier::max_radius() const {
  if (Lambda == 0.0) return std::numeric_limits<double>::infinity();
  return std::pow(n * K / std::abs(Lambda), 1.0 / n);
}

void YangLiBarrier::validate() const {
  if (n < 1) throw ConfigError("barrier dimension n must be >= 1");
  if (!(K > 0.0)) throw ConfigError("barrier K must be positive");
  if (Lambda > 0.0) throw ConfigError("barrier Lambda must be <= 0");
  if (static_cast<int>(xi.size()) != n) throw DimensionError("barrier xi must have n entries");
  if (eta.empty()) throw DimensionError("barrier eta must have m entries");
}

BarrierValue barrier_profile(const YangLiBarrier& b, double r) {
  b.validate();
  const double rmax = b.max_radius();
  if (!(r > 0.0) || !(r < rmax)) {
    std::ostringstream os;
    os << "barrier_profile: r = " << r << " outside the validity range (0, " << rmax << ")";
    throw RangeError(os.str());
  }
  const int n = b.n;
  const double K = b.K;
  const double Lam = b.Lambda;
  auto integrand = [n, K, Lam](double t) {
    const double num = K + Lam * std::pow(t, n) / n;
    return num / std::sqrt(std::pow(t, 2 * n - 2) + num * num);
  };
  double err = 0.0;
  BarrierValue out;
  out.f = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(integrand, 0.0, r, 30,
                                                                        1e-13, &err);
  const double q = K * std::pow(r, 1 - n) + Lam * r / n;
  out.f_prime = q / std::sqrt(1.0 + q * q);
  return out;
}

std::vector<double> barrier_heights(const YangLiBarrier& b, const DomainSpec& domain) {
  const Grid g(domain);
  if (b.n != g.n()) throw DimensionError("barrier dimension does not match the domain");
  std::vector<double> f(g.size());
  for (std::size_t node = 0; node < g.size(); ++node) {
    const auto x = g.coords(node);
    double r2 = 0.0;
    for (int i = 0; i < g.n(); ++i) r2 += (x[i] - b.xi[i]) * (x[i] - b.xi[i]);
    f[node] = barrier_profile(b, std::sqrt(r2)).f;
  }
  return f;
}

double barrier_margin(const YangLiBarrier& b, const GraphState& state,
                      std::span<const double> heights) {
  if (static_cast<int>(b.eta.size()) != state.m)
    throw DimensionError("barrier eta does not match the codimension");
  std::vector<double> own;
  if (heights.empty()) {
    own = barrier_heights(b, state.domain);
    heights = own;
  }
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t node = 0; node < state.node_count(); ++node) {
    const auto u = state.at(node);
    double w2 = 0.0;
    for (int a = 0; a < state.m; ++a) w2 += (u[a] - b.eta[a]) * (u[a] - b.eta[a]);
    worst = std::min(worst, heights[node] - std::sqrt(w2));
  }
  return worst;
}

}  // namespace smcf
