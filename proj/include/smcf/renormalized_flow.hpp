#pragma once

// The rescaled flow X~(s) = X(t) / sqrt(1 + 2t), s = log(1 + 2t) / 2, whose
// fixed points are self-expanders H~ = X~^perp, and cone-asymptotic data.

#include "smcf/discretization.hpp"
#include "smcf/pseudo_geometry.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace smcf {

/// lambda(t) = 1/sqrt(1 + 2t) and s(t) = log(1 + 2t)/2. Throw RangeError
/// for t < 0.
double rescale_factor(double t);
double rescaled_time(double t);
double time_from_rescaled(double s);

/// u~(x~) = lambda u(x~/lambda) on the original grid. Nodes whose preimage
/// x~/lambda leaves the domain are invalid and hold NaN.
struct RescaledState {
  double s = 0.0;
  double lambda = 1.0;
  GraphState u_tilde;
  std::vector<std::uint8_t> valid;
};

/// Resamples by tensor cubic interpolation. Throws RangeError for t < 0.
RescaledState rescale(const GraphState& state);

/// Inverse map u(x) = u~(lambda x)/lambda; nodes whose cubic stencil touches
/// invalid data come back as NaN.
GraphState unrescale(const RescaledState& r);

/// ||H - X^perp||^2 of a graph at one point: zero exactly on self-expanders.
double self_expander_defect(const Jet& jet, const AmbientVector& x, const Signature& sig);

struct ResidualReport {
  double sup_residual = 0.0;  ///< sup over the core of ||H~ - X~^perp||^2
  /// sup over the core of ||H~ - X~^perp||^2 / (n + 1 + |X~|^2)
  double sup_weighted = 0.0;
  std::size_t core_nodes = 0;
};

/// Rescales the state and evaluates the self-expander defect at valid nodes
/// with |x~| <= core_radius whose stencil stays valid. The default core is
/// half of the valid rescaled region. Throws SpacelikeViolation and
/// PreconditionError when the core holds no nodes.
ResidualReport expander_residual_report(const GraphState& state,
                                        std::optional<double> core_radius = std::nullopt);
double expander_residual(const GraphState& state, std::optional<double> core_radius = std::nullopt);

/// U(x) = a |x| + B^T x, homogeneous of degree one.
struct ConeProfile {
  Eigen::VectorXd a;  ///< m
  Eigen::MatrixXd B;  ///< n x m

  int n() const { return static_cast<int>(B.rows()); }
  int m() const { return static_cast<int>(a.size()); }
  /// Values on the unit sphere determine U; evaluates U(x).
  void value(std::span<const double> x, std::span<double> out) const;
  /// sup over directions of the operator norm of DU (sampled densely on the
  /// sphere for n >= 2).
  double lipschitz() const;
};

/// u0(x) = U(x) |x| / sqrt(|x|^2 + rho^2). Throws PreconditionError when the
/// cone is not uniformly spacelike (Lipschitz bound >= 1) and
/// SpacelikeViolation if the smoothing leaves the cone.
GraphState cone_initial_data(const ConeProfile& profile, double rho, const DomainSpec& domain);

}  // namespace smcf
