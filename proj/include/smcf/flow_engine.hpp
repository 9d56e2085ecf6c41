#pragma once

// Time integration of du/dt = g^ij(Du) D^2_ij u on the node grid, with
// Neumann, Dirichlet and exact-tracking boundaries, and the entire-graph
// construction by nested Neumann truncations.

#include "smcf/discretization.hpp"
#include "smcf/solutions_barriers.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace smcf {

enum class FlowMode { Entire, Neumann, Dirichlet };

/// Euler and Heun are explicit and CFL-limited. CrankNicolson is a linearly
/// implicit predictor-corrector (coefficients frozen at the half step) for
/// runs whose g^{-1} is too large for explicit steps; it needs fixed_dt.
enum class Scheme { Euler, Heun, CrankNicolson };

std::string_view to_string(FlowMode m) noexcept;
std::string_view to_string(Scheme s) noexcept;
FlowMode flow_mode_from_string(std::string_view s);
Scheme scheme_from_string(std::string_view s);

struct FlowConfig {
  FlowMode mode = FlowMode::Neumann;
  Scheme scheme = Scheme::Heun;
  double cfl_safety = 0.8;
  double t_end = 1.0;
  double snapshot_every = 0.1;
  /// Steady state once sup ||H|| (normal-bundle norm) drops below this.
  double steady_state_tol = 1e-8;
  std::vector<double> entire_radii;
  double entire_lambda = 1.0;
  std::optional<double> fixed_dt;

  /// Throws ConfigError.
  void validate() const;

  friend bool operator==(const FlowConfig&, const FlowConfig&) = default;
};

/// Boundary values for exact-tracking runs: writes u(x, t) into out.
using BoundaryFunction =
    std::function<void(std::span<const double> x, double t, std::span<double> out)>;

/// Optional observers evaluated along a run. They never influence the flow.
struct FlowMonitors {
  std::vector<QuasiSphere> quasi_spheres;
  std::vector<YangLiBarrier> barriers;
  BoundaryFunction exact_boundary;
  /// Evaluated at snapshot steps only (expensive); recorded in diagnostics.
  std::function<double(const GraphState&)> snapshot_residual;
};

struct DiagnosticRecord {
  std::int64_t step = 0;
  double t = 0.0;
  double dt = 0.0;
  double sup_v2 = 0.0;
  double sup_H2 = 0.0;
  double t_sup_II2 = 0.0;  ///< (t - t_0) * sup ||II||^2
  double max_displacement = 0.0;
  std::optional<double> min_barrier_margin;
  std::optional<double> expander_residual;
};

struct Trajectory {
  FlowMode mode = FlowMode::Neumann;
  std::vector<GraphState> snapshots;
  std::vector<DiagnosticRecord> diagnostics;
  bool steady_state_reached = false;
  double final_sup_H = 0.0;

  const GraphState& initial() const { return snapshots.front(); }
  const GraphState& final_state() const { return snapshots.back(); }
};

/// Boundary treatment and observers for single steps.
struct StepContext {
  BoundaryFunction exact_boundary;
};

/// safety * min_i h_i^2 / (2 n max g^{-1}), the maximum taken over the nodes
/// the flow updates. Throws SpacelikeViolation.
double cfl_dt(const GraphState& state, double safety);

/// g^ij D^2_ij u^A at the updated nodes (zero at pinned boundary nodes).
std::vector<double> mcf_velocity(const GraphState& state);

/// One step of the given scheme. Explicit schemes require
/// dt <= cfl_dt(state, 1). Throws SpacelikeViolation (with the offending
/// node) or NumericalBlowup.
GraphState step(const GraphState& state, double dt, Scheme scheme, const StepContext& ctx = {});

/// Integrates until t_end or steady state. Deterministic in config + initial.
Trajectory run(const FlowConfig& config, const GraphState& initial,
               const FlowMonitors& monitors = {});

struct DiscrepancyRecord {
  double t = 0.0;
  std::vector<double> values;  ///< one per consecutive pair of truncations
};

struct EntireResult {
  Trajectory trajectory;  ///< the largest truncation
  std::vector<double> radii;
  std::vector<double> half_widths;
  /// sup over B_{R_i/2} of |u_i - u_{i+1}| at t_end, one per consecutive pair.
  std::vector<double> discrepancies;
  /// The same comparison at every snapshot time shared by all truncations.
  std::vector<DiscrepancyRecord> history;
  /// True unless the discrepancies fail to decrease (TruncationNonConvergence).
  bool converged = true;
};

/// Runs one Neumann problem per radius R_i on [-L_i, L_i]^n with
/// L_i = 2R_i + 3Lambda + 1 (rounded up to the grid), started from the
/// reflected extension of u0, and compares consecutive truncations on the
/// common core. u0 must cover B_{R_max + Lambda} with the target spacing.
EntireResult entire_solve(const FlowConfig& config, const GraphState& u0,
                          const FlowMonitors& monitors = {});

}  // namespace smcf
