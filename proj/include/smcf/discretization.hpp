#pragma once

// Node-centred finite differences for graph maps u : Omega -> R^m on
// intervals and axis-aligned boxes (n <= 3). Boundary nodes are part of the
// grid; Neumann conditions use a mirrored ghost layer, Dirichlet conditions
// pin boundary nodes and differentiate there with one-sided stencils.

#include "smcf/pseudo_geometry.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace smcf {

enum class DomainKind { Interval, Box, EntireTruncation };
enum class BoundaryKind { Neumann, Dirichlet, ExactTracking };

std::string_view to_string(DomainKind k) noexcept;
std::string_view to_string(BoundaryKind k) noexcept;
DomainKind domain_kind_from_string(std::string_view s);
BoundaryKind boundary_kind_from_string(std::string_view s);

/// Largest allowed ratio between grid spacings of different axes.
inline constexpr double kMaxAspect = 4.0;

struct DomainSpec {
  DomainKind kind = DomainKind::Interval;
  std::vector<std::pair<double, double>> bounds;
  std::vector<int> resolution;  ///< cells per axis; nodes = resolution + 1
  BoundaryKind boundary = BoundaryKind::Neumann;

  int n() const noexcept { return static_cast<int>(bounds.size()); }
  double h(int axis) const { return (bounds[axis].second - bounds[axis].first) / resolution[axis]; }
  double h_max() const;
  double h_min() const;
  /// Throws DimensionError on malformed bounds/resolution or aspect > kMaxAspect.
  void validate() const;

  static DomainSpec interval(double lo, double hi, int cells, BoundaryKind b);
  static DomainSpec box(std::vector<std::pair<double, double>> bounds, std::vector<int> cells,
                        BoundaryKind b);

  friend bool operator==(const DomainSpec&, const DomainSpec&) = default;
};

/// Index arithmetic for the node grid of a DomainSpec. Row-major: axis 0 is
/// the slowest index.
class Grid {
 public:
  Grid() = default;
  explicit Grid(const DomainSpec& d);

  int n() const noexcept { return n_; }
  std::size_t size() const noexcept { return size_; }
  int nodes(int axis) const noexcept { return nodes_[axis]; }
  std::size_t stride(int axis) const noexcept { return stride_[axis]; }
  double h(int axis) const noexcept { return h_[axis]; }
  double lo(int axis) const noexcept { return lo_[axis]; }

  std::array<int, kMaxBaseDim> multi_index(std::size_t node) const noexcept;
  std::size_t flat(const std::array<int, kMaxBaseDim>& k) const noexcept;
  double coord(std::size_t node, int axis) const noexcept;
  std::array<double, kMaxBaseDim> coords(std::size_t node) const noexcept;
  bool is_boundary(std::size_t node) const noexcept;
  /// Nearest-node lookup; nullopt when x is not within 1e-9 h of a node.
  std::optional<std::size_t> node_at(std::span<const double> x) const;

 private:
  int n_ = 0;
  std::size_t size_ = 0;
  std::array<int, kMaxBaseDim> nodes_{1, 1, 1};
  std::array<std::size_t, kMaxBaseDim> stride_{0, 0, 0};
  std::array<double, kMaxBaseDim> h_{1, 1, 1};
  std::array<double, kMaxBaseDim> lo_{0, 0, 0};
};

struct Provenance {
  std::string config_hash;
  std::int64_t step_count = 0;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// Discretised graph map at flow time t. `u` holds m values per node,
/// node-major. `dirichlet_data`, when present, has the same layout as `u`;
/// only its boundary entries are read.
struct GraphState {
  DomainSpec domain;
  int m = 1;
  double t = 0.0;
  std::vector<double> u;
  std::optional<std::vector<double>> dirichlet_data;
  Provenance provenance;

  static GraphState zeros(const DomainSpec& d, int m, double t = 0.0);

  Signature signature() const { return Signature(domain.n(), m); }
  Grid grid() const { return Grid(domain); }
  std::size_t node_count() const { return u.size() / static_cast<std::size_t>(m); }
  std::span<const double> at(std::size_t node) const { return {u.data() + node * m, std::size_t(m)}; }
  std::span<double> at(std::size_t node) { return {u.data() + node * m, std::size_t(m)}; }
  /// Ambient position (x, u(x)) of a node.
  AmbientVector position(std::size_t node) const;
  /// Throws DimensionError if the array sizes disagree with domain and m.
  void validate() const;

  friend bool operator==(const GraphState&, const GraphState&) = default;
};

/// Finite-difference evaluator bound to one grid layout and boundary policy.
/// Writes du as [i*m + A] and d2u as [(i*n + j)*m + A].
class Stencil {
 public:
  Stencil(const DomainSpec& d, int m);

  const Grid& grid() const noexcept { return grid_; }
  int m() const noexcept { return m_; }
  void jet(std::span<const double> u, std::size_t node, std::span<double> du,
           std::span<double> d2u) const;

 private:
  double first(const double* u, std::size_t idx, int axis, int k, int comp) const;
  double second(const double* u, std::size_t idx, int axis, int k, int comp) const;

  Grid grid_;
  int m_;
  bool mirror_;
};

/// Central second-order differences in the interior; mirrored ghosts on
/// Neumann faces; one-sided second-order stencils at Dirichlet boundary
/// nodes. Mixed partials use the 4-point cross stencil.
Jet derivatives(const GraphState& state, std::size_t node);

/// State array padded with one ghost layer per face.
struct ExtendedArray {
  std::array<int, kMaxBaseDim> dims{1, 1, 1};  ///< padded node counts
  int n = 0;
  int m = 1;
  std::vector<double> data;

  /// Value at original multi-index k (entries may be -1 or N).
  double at(const std::array<int, kMaxBaseDim>& k, int comp) const;
};

/// Mirror ghost layer: ghost(-1) = u(1), ghost(N) = u(N-2) on each axis
/// (tensor-product reflection at corners). Throws PreconditionError unless
/// the domain carries a Neumann boundary.
ExtendedArray neumann_ghost_fill(const GraphState& state);

/// Overwrites boundary nodes with dirichlet_data. Throws PreconditionError
/// when no data is attached.
GraphState dirichlet_apply(const GraphState& state);

/// Tensor-product cubic (4-point Lagrange) interpolation of the state at an
/// arbitrary point of the domain. Throws RangeError outside the domain.
void sample_cubic(const GraphState& state, std::span<const double> x, std::span<double> out);

struct ReflectionExtension {
  double radius = 1.0;      ///< R_i: the extension agrees with u0 on B_{R_i}
  double lambda = 1.0;      ///< reflection band parameter Lambda > 0
  double half_width = 0.0;  ///< output truncation half-width; default 2R + 3Lambda + 1
};

/// Unsmoothed radial reflection of (u0 - u0(0)) at the point x: identity on
/// B_{R+Lambda}, reflected on the annulus, zero outside B_{2R+2Lambda}.
void annulus_reflection_profile(const GraphState& u0, const ReflectionExtension& ext,
                                std::span<const double> x, std::span<double> out);

/// The reflected profile sampled on the truncation box [-L, L]^n (same grid
/// spacing as u0), smoothed by repeated 5-point Gaussian averaging inside
/// bands of total width Lambda/2 around the two seams, and forced to zero
/// outside B_{2R+3Lambda}. The result carries a Neumann boundary.
GraphState annulus_reflection_extend(const GraphState& u0, const ReflectionExtension& ext);

}  // namespace smcf
