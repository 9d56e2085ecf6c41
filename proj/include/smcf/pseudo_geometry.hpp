#pragma once

// Pointwise linear algebra of R^{n,m} and the differential geometry of a
// spacelike graph x -> (x, u(x)), computed from the first and second
// derivatives of u. Every function here is pure.

#include <Eigen/Dense>

#include <array>
#include <span>
#include <string_view>
#include <vector>

namespace smcf {

/// Eigenvalues of Du Du^T at or above 1 - kSpacelikeGuard are rejected.
inline constexpr double kSpacelikeGuard = 1e-6;

/// Largest supported base dimension. The graph system is posed over
/// intervals, rectangles and boxes.
inline constexpr int kMaxBaseDim = 3;

/// Signature (n, m): n spacelike directions f_i, m timelike directions e_A.
class Signature {
 public:
  Signature() = default;
  Signature(int n, int m);

  int n() const noexcept { return n_; }
  int m() const noexcept { return m_; }
  int dim() const noexcept { return n_ + m_; }

  friend bool operator==(const Signature&, const Signature&) = default;

 private:
  int n_ = 1;
  int m_ = 1;
};

/// A point or vector of R^{n,m}: spatial components in the f-basis, vertical
/// components in the e-basis.
struct AmbientVector {
  std::vector<double> spatial;
  std::vector<double> vertical;

  AmbientVector() = default;
  AmbientVector(std::vector<double> s, std::vector<double> v)
      : spatial(std::move(s)), vertical(std::move(v)) {}

  static AmbientVector zero(const Signature& sig);
  /// f_i (0-based).
  static AmbientVector spatial_unit(const Signature& sig, int i);
  /// e_A (0-based).
  static AmbientVector vertical_unit(const Signature& sig, int a);

  /// |x|^2 = sum spatial^2 - sum vertical^2.
  double quadratic_form() const noexcept;
  bool is_zero() const noexcept;

  AmbientVector operator+(const AmbientVector& o) const;
  AmbientVector operator-(const AmbientVector& o) const;
  AmbientVector operator*(double s) const;
};

/// Signature-(n,m) bilinear pairing. Throws DimensionError when either
/// argument does not match `sig`.
double minkowski_ip(const AmbientVector& x, const AmbientVector& y, const Signature& sig);

enum class CausalClass { Spacelike, Null, Timelike };

std::string_view to_string(CausalClass c) noexcept;

/// Exact sign test on |x|^2; no tolerance band. Throws PreconditionError for
/// the zero vector.
CausalClass causal_class(const AmbientVector& x);

/// First and second derivatives of the graph map at one point.
/// du(i, A) = D_i u^A; d2u[A](i, j) = D^2_ij u^A.
struct Jet {
  Eigen::MatrixXd du;
  std::vector<Eigen::MatrixXd> d2u;

  Jet() = default;
  Jet(int n, int m);
  int n() const noexcept { return static_cast<int>(du.rows()); }
  int m() const noexcept { return static_cast<int>(du.cols()); }
};

struct GeometryFrame {
  Eigen::MatrixXd g;      ///< induced metric, n x n
  Eigen::MatrixXd g_inv;  ///< n x n
  Eigen::MatrixXd g_hat;  ///< normal Gram matrix <e_A^perp, e_B>, m x m
  Eigen::VectorXd eigenvalues;  ///< spectrum of Du Du^T, ascending
  double v2 = 0.0;        ///< m + D_i u_A g^ij D_j u^A
  double v2_spectral = 0.0;  ///< m - n + sum 1/(1 - lambda_i)
  Eigen::VectorXd H_graph;   ///< H^A = g^ij D^2_ij u^A
  AmbientVector H;           ///< H^A e_A^perp
  double H_norm2 = 0.0;
  double II_norm2 = 0.0;
  AmbientVector X_perp;
  Eigen::VectorXd X_perp_coeffs;  ///< X^perp = sum_A c_A e_A^perp
  double X_perp_norm2 = 0.0;

  double max_eigenvalue() const { return eigenvalues.size() ? eigenvalues.maxCoeff() : 0.0; }
};

/// Full geometry package at a point of the graph. `x` is the ambient position
/// (x, u(x)). Throws SpacelikeViolation carrying the max eigenvalue when
/// Du Du^T has an eigenvalue >= 1 - kSpacelikeGuard.
GeometryFrame geometry_frame(const Jet& jet, const AmbientVector& x, const Signature& sig);

/// eta_R = (R^2 - |x|^2 - 2nt)_+.
double cutoff_eta(const AmbientVector& x, double R, double t, const Signature& sig);

/// Scalar quantities used on hot paths (stepping, diagnostics). Same formulas
/// as geometry_frame without heap allocation beyond the H vector.
/// du is laid out [i*m + A], d2u as [(i*n + j)*m + A].
struct PointScalars {
  double lambda_max = 0.0;
  double v2 = 0.0;
  double H_norm2 = 0.0;
  double II_norm2 = 0.0;
};

/// g^{-1} for the graph metric together with the largest eigenvalue of
/// Du Du^T and of g^{-1}. Does not throw; callers compare lambda_max against
/// the guard themselves.
struct InverseMetric {
  std::array<double, kMaxBaseDim * kMaxBaseDim> g_inv{};
  double lambda_max = 0.0;
  double g_inv_max = 1.0;  ///< largest eigenvalue of g^{-1} = 1/(1 - lambda_max)
  double det_g = 1.0;
};

InverseMetric inverse_metric(std::span<const double> du, int n, int m);

/// Scalars at a point; `H` receives the m components H^A.
PointScalars point_scalars(std::span<const double> du, std::span<const double> d2u, int n, int m,
                           std::span<double> H);

/// Largest eigenvalue of a symmetric n x n matrix (row-major), n <= 3.
double symmetric_max_eigenvalue(std::span<const double> a, int n);

}  // namespace smcf
