#pragma once

// Closed-form solutions of graphical spacelike MCF and the barrier
// hypersurfaces that bound it.

#include "smcf/discretization.hpp"
#include "smcf/pseudo_geometry.hpp"

#include <span>
#include <vector>

namespace smcf {

/// log cosh x + t: the translating solution in R^{1,1}.
double grim_reaper(double x, double t);
double grim_reaper_dx(double x);
double grim_reaper_dxx(double x);

/// sqrt(|x|^2 + 2n(t - birth)): the m = 1 graph of the hyperboloid
/// |X|^2 = -2n(t - birth). birth = 0 gives the expander leaving the light
/// cone at t = 0; birth = -1/2 is the fixed point of the rescaled flow.
/// Throws RangeError unless t > birth.
double hyperbolic_expander(std::span<const double> x, double t, int n, double birth = 0.0);

/// Analytic jet of the expander at (x, t) (m = 1).
Jet hyperbolic_expander_jet(std::span<const double> x, double t, int n, double birth = 0.0);

/// S_t = {X : |p - X|^2 = -R^2 - 2nt}; inside I_t = {|p - X|^2 >= -R^2 - 2nt}.
struct QuasiSphere {
  AmbientVector center;
  double R2 = 0.0;
  int n = 1;
};

/// min over nodes of |p - X|^2 + R^2 + 2nt; nonnegative iff the graph lies
/// inside I_t.
double quasi_sphere_margin(const QuasiSphere& q, const GraphState& state);

/// Barrier w = f_{K,Lambda}(r) with r = |x - xi|, w = |y - eta|.
struct YangLiBarrier {
  std::vector<double> xi;
  std::vector<double> eta;
  double K = 1.0;
  double Lambda = 0.0;  ///< must be <= 0
  int n = 1;

  /// (nK/|Lambda|)^{1/n}, or +inf when Lambda = 0.
  double max_radius() const;
  void validate() const;
};

struct BarrierValue {
  double f = 0.0;
  double f_prime = 0.0;
};

/// f by adaptive Gauss-Kronrod quadrature (absolute tolerance 1e-10) and f'
/// by the closed form. Throws RangeError unless 0 < r < max_radius().
BarrierValue barrier_profile(const YangLiBarrier& b, double r);

/// f_{K,Lambda}(r(x)) at every node, computed once per grid.
std::vector<double> barrier_heights(const YangLiBarrier& b, const DomainSpec& domain);

/// min over nodes of f(r) - |u - eta|; uses precomputed heights when given.
double barrier_margin(const YangLiBarrier& b, const GraphState& state,
                      std::span<const double> heights = {});

}  // namespace smcf
