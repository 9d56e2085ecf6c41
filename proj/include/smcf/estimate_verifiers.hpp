#pragma once

// Checks of the a priori estimates along computed trajectories. Every check
// is a pure function of its input.

#include "smcf/flow_engine.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace smcf {

/// pass <=> worst_margin >= -tolerance. worst_t/worst_node locate the worst
/// margin (node -1 when the margin is not attached to a node).
struct VerdictReport {
  std::string name;
  bool pass = true;
  double worst_margin = 0.0;
  double worst_t = 0.0;
  std::int64_t worst_node = -1;
  double tolerance = 0.0;
};

/// Per-node values of v^2, ||H||^2 and ||II||^2 for a state, using the same
/// stencils as the flow (one-sided at Dirichlet boundary nodes).
struct NodeScalars {
  std::vector<double> v2;
  std::vector<double> H_norm2;
  std::vector<double> II_norm2;
};
NodeScalars node_scalars(const GraphState& state);

/// |u(x, t) - u(x, t0)| <= sqrt(2n(t - t0)) + 4h over every node and every
/// snapshot after the first.
VerdictReport check_displacement(const Trajectory& traj);

/// sup ||H||^2(t) <= (1/C_H + 2(t - t0)/n)^{-1} (1 + 5%), C_H the initial
/// sup. The margin is relative, 1 - sup/bound; when C_H = 0 it is -sup.
VerdictReport check_H_decay(const Trajectory& traj);

/// max v^2(t) <= max v^2(t0) + 1e-6.
VerdictReport check_gradient_principle(const Trajectory& traj);

/// (t - t0) sup ||II||^2 <= m/2 (1 + 10%) for t - t0 >= 10 h^2.
VerdictReport check_tame_curvature(const Trajectory& traj);

/// Boundary nodes of a domain with their prescribed values.
struct BoundaryData {
  int n = 1;
  int m = 1;
  std::vector<double> x;    ///< n coordinates per node
  std::vector<double> phi;  ///< m values per node
  std::size_t size() const { return x.size() / static_cast<std::size_t>(n); }
};

/// Boundary nodes of the state with their Dirichlet data (or current values
/// when none is attached).
BoundaryData boundary_data(const GraphState& state);

struct AcausalResult {
  double delta = 1.0;
  bool pass = true;
};

/// delta = 1 - max over boundary pairs of |phi(x) - phi(y)| / |x - y|;
/// pass <=> delta > 0. Throws PreconditionError with fewer than two nodes.
AcausalResult check_acausal(const BoundaryData& phi);

inline constexpr double kBoundaryHConstant = 1.0;

/// ||H||^2 at the boundary nodes (one-sided stencils) <= C h at every
/// snapshot after the first. Throws PreconditionError unless the trajectory
/// is a Dirichlet run.
VerdictReport check_dirichlet_boundary_H(const Trajectory& traj, double C = kBoundaryHConstant);

/// Names accepted by run_check: displacement, H_decay, gradient, tame,
/// dirichlet_boundary_H.
const std::vector<std::string>& check_names();
VerdictReport run_check(const std::string& name, const Trajectory& traj);

}  // namespace smcf
