#include "smcf/pseudo_geometry.hpp"

#include "smcf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace smcf {

Signature::Signature(int n, int m) : n_(n), m_(m) {
  if (n < 1 || m < 1) {
    std::ostringstream os;
    os << "signature (" << n << ", " << m << ") needs n >= 1 and m >= 1";
    throw DimensionError(os.str());
  }
}

AmbientVector AmbientVector::zero(const Signature& sig) {
  return AmbientVector(std::vector<double>(sig.n(), 0.0), std::vector<double>(sig.m(), 0.0));
}

AmbientVector AmbientVector::spatial_unit(const Signature& sig, int i) {
  auto v = zero(sig);
  v.spatial.at(i) = 1.0;
  return v;
}

AmbientVector AmbientVector::vertical_unit(const Signature& sig, int a) {
  auto v = zero(sig);
  v.vertical.at(a) = 1.0;
  return v;
}

double AmbientVector::quadratic_form() const noexcept {
  double q = 0.0;
  for (double s : spatial) q += s * s;
  for (double v : vertical) q -= v * v;
  return q;
}

bool AmbientVector::is_zero() const noexcept {
  return std::all_of(spatial.begin(), spatial.end(), [](double s) { return s == 0.0; }) &&
         std::all_of(vertical.begin(), vertical.end(), [](double v) { return v == 0.0; });
}

namespace {

void require_same_shape(const AmbientVector& a, const AmbientVector& b) {
  if (a.spatial.size() != b.spatial.size() || a.vertical.size() != b.vertical.size())
    throw DimensionError("ambient vectors have different shapes");
}

}  // namespace

AmbientVector AmbientVector::operator+(const AmbientVector& o) const {
  require_same_shape(*this, o);
  AmbientVector r = *this;
  for (std::size_t i = 0; i < spatial.size(); ++i) r.spatial[i] += o.spatial[i];
  for (std::size_t a = 0; a < vertical.size(); ++a) r.vertical[a] += o.vertical[a];
  return r;
}

AmbientVector AmbientVector::operator-(const AmbientVector& o) const { return *this + o * -1.0; }

AmbientVector AmbientVector::operator*(double s) const {
  AmbientVector r = *this;
  for (double& x : r.spatial) x *= s;
  for (double& x : r.vertical) x *= s;
  return r;
}

double minkowski_ip(const AmbientVector& x, const AmbientVector& y, const Signature& sig) {
  const auto n = static_cast<std::size_t>(sig.n());
  const auto m = static_cast<std::size_t>(sig.m());
  if (x.spatial.size() != n || y.spatial.size() != n || x.vertical.size() != m ||
      y.vertical.size() != m) {
    std::ostringstream os;
    os << "minkowski_ip: vectors do not match signature (" << n << ", " << m << ")";
    throw DimensionError(os.str());
  }
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x.spatial[i] * y.spatial[i];
  for (std::size_t a = 0; a < m; ++a) s -= x.vertical[a] * y.vertical[a];
  return s;
}

std::string_view to_string(CausalClass c) noexcept {
  switch (c) {
    case CausalClass::Spacelike: return "spacelike";
    case CausalClass::Null: return "null";
    case CausalClass::Timelike: return "timelike";
  }
  return "unknown";
}

CausalClass causal_class(const AmbientVector& x) {
  if (x.is_zero()) throw PreconditionError("causal_class: the zero vector has no causal class");
  const double q = x.quadratic_form();
  if (q > 0.0) return CausalClass::Spacelike;
  if (q < 0.0) return CausalClass::Timelike;
  return CausalClass::Null;
}

Jet::Jet(int n, int m) : du(Eigen::MatrixXd::Zero(n, m)), d2u(m, Eigen::MatrixXd::Zero(n, n)) {}

GeometryFrame geometry_frame(const Jet& jet, const AmbientVector& x, const Signature& sig) {
  const int n = sig.n();
  const int m = sig.m();
  if (jet.n() != n || jet.m() != m || static_cast<int>(jet.d2u.size()) != m)
    throw DimensionError("geometry_frame: jet does not match signature");
  if (static_cast<int>(x.spatial.size()) != n || static_cast<int>(x.vertical.size()) != m)
    throw DimensionError("geometry_frame: position does not match signature");

  const Eigen::MatrixXd& du = jet.du;
  const Eigen::MatrixXd P = du * du.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(P);
  GeometryFrame f;
  f.eigenvalues = eig.eigenvalues();
  const double lmax = f.eigenvalues.maxCoeff();
  if (!(lmax < 1.0 - kSpacelikeGuard)) {
    std::ostringstream os;
    os << "graph is not spacelike: max eigenvalue of Du Du^T = " << lmax;
    throw SpacelikeViolation(os.str(), lmax);
  }

  f.g = Eigen::MatrixXd::Identity(n, n) - P;
  const Eigen::VectorXd inv_diag = (1.0 - f.eigenvalues.array()).inverse();
  f.g_inv = eig.eigenvectors() * inv_diag.asDiagonal() * eig.eigenvectors().transpose();

  const Eigen::MatrixXd B = du.transpose() * f.g_inv * du;  // m x m
  f.g_hat = -Eigen::MatrixXd::Identity(m, m) - B;
  f.v2 = m + B.trace();
  f.v2_spectral = m - n + inv_diag.sum();

  f.H_graph.resize(m);
  for (int a = 0; a < m; ++a) f.H_graph(a) = (f.g_inv.cwiseProduct(jet.d2u[a])).sum();
  f.H_norm2 = -f.H_graph.dot(f.g_hat * f.H_graph);

  // H = H^A e_A^perp, e_A^perp = e_A + g^ij D_i u^A X_j.
  const Eigen::VectorXd tangent_coeff = f.g_inv * du * f.H_graph;  // n
  f.H.spatial.assign(tangent_coeff.data(), tangent_coeff.data() + n);
  const Eigen::VectorXd h_vert = f.H_graph + du.transpose() * tangent_coeff;
  f.H.vertical.assign(h_vert.data(), h_vert.data() + m);

  // Contract the second fundamental form through g_hat; no normal frame.
  std::vector<Eigen::MatrixXd> M(m);
  for (int a = 0; a < m; ++a) M[a] = f.g_inv * jet.d2u[a] * f.g_inv;
  double ii = 0.0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) ii -= f.g_hat(a, b) * M[a].cwiseProduct(jet.d2u[b]).sum();
  f.II_norm2 = ii;

  // X^perp = X - g^ij <X, X_i> X_j with X_i = f_i + D_i u^A e_A.
  const Eigen::Map<const Eigen::VectorXd> xs(x.spatial.data(), n);
  const Eigen::Map<const Eigen::VectorXd> xv(x.vertical.data(), m);
  const Eigen::VectorXd proj = xs - du * xv;  // <X, X_i>
  const Eigen::VectorXd c = f.g_inv * proj;
  const Eigen::VectorXd perp_s = xs - c;
  const Eigen::VectorXd perp_v = xv - du.transpose() * c;
  f.X_perp.spatial.assign(perp_s.data(), perp_s.data() + n);
  f.X_perp.vertical.assign(perp_v.data(), perp_v.data() + m);
  f.X_perp_norm2 = -minkowski_ip(f.X_perp, f.X_perp, sig);
  f.X_perp_coeffs = f.g_hat.ldlt().solve(-perp_v);
  return f;
}

double cutoff_eta(const AmbientVector& x, double R, double t, const Signature& sig) {
  const double val = R * R - minkowski_ip(x, x, sig) - 2.0 * sig.n() * t;
  return std::max(val, 0.0);
}

double symmetric_max_eigenvalue(std::span<const double> a, int n) {
  switch (n) {
    case 1: return a[0];
    case 2: {
      const double mean = 0.5 * (a[0] + a[3]);
      const double half = 0.5 * (a[0] - a[3]);
      return mean + std::hypot(half, a[1]);
    }
    case 3: {
      Eigen::Matrix3d mat;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) mat(i, j) = a[i * 3 + j];
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig;
      eig.computeDirect(mat, Eigen::EigenvaluesOnly);
      return eig.eigenvalues()(2);
    }
    default: throw DimensionError("symmetric_max_eigenvalue supports n <= 3");
  }
}

InverseMetric inverse_metric(std::span<const double> du, int n, int m) {
  InverseMetric out;
  std::array<double, 9> P{};
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      for (int a = 0; a < m; ++a) s += du[i * m + a] * du[j * m + a];
      P[i * n + j] = s;
      P[j * n + i] = s;
    }
  out.lambda_max = symmetric_max_eigenvalue(P, n);
  out.g_inv_max = 1.0 / (1.0 - out.lambda_max);

  auto& gi = out.g_inv;
  if (n == 1) {
    const double g = 1.0 - P[0];
    out.det_g = g;
    gi[0] = 1.0 / g;
  } else if (n == 2) {
    const double a = 1.0 - P[0], b = -P[1], d = 1.0 - P[3];
    const double det = a * d - b * b;
    out.det_g = det;
    gi[0] = d / det;
    gi[1] = -b / det;
    gi[2] = -b / det;
    gi[3] = a / det;
  } else {
    std::array<double, 9> g{};
    for (int k = 0; k < 9; ++k) g[k] = -P[k];
    g[0] += 1.0;
    g[4] += 1.0;
    g[8] += 1.0;
    const double c00 = g[4] * g[8] - g[5] * g[7];
    const double c01 = g[5] * g[6] - g[3] * g[8];
    const double c02 = g[3] * g[7] - g[4] * g[6];
    const double det = g[0] * c00 + g[1] * c01 + g[2] * c02;
    out.det_g = det;
    gi[0] = c00 / det;
    gi[1] = (g[2] * g[7] - g[1] * g[8]) / det;
    gi[2] = (g[1] * g[5] - g[2] * g[4]) / det;
    gi[3] = c01 / det;
    gi[4] = (g[0] * g[8] - g[2] * g[6]) / det;
    gi[5] = (g[2] * g[3] - g[0] * g[5]) / det;
    gi[6] = c02 / det;
    gi[7] = (g[1] * g[6] - g[0] * g[7]) / det;
    gi[8] = (g[0] * g[4] - g[1] * g[3]) / det;
  }
  return out;
}

PointScalars point_scalars(std::span<const double> du, std::span<const double> d2u, int n, int m,
                           std::span<double> H) {
  const InverseMetric im = inverse_metric(du, n, m);
  const auto& gi = im.g_inv;
  PointScalars s;
  s.lambda_max = im.lambda_max;

  // v^2 = m + sum_A du_A^T g^-1 du_A
  double v2 = m;
  for (int a = 0; a < m; ++a)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) v2 += du[i * m + a] * gi[i * n + j] * du[j * m + a];
  s.v2 = v2;

  for (int a = 0; a < m; ++a) {
    double h = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) h += gi[i * n + j] * d2u[(i * n + j) * m + a];
    H[a] = h;
  }

  // ||H||^2 = |H|^2 + w^T g^-1 w, w_i = D_i u^A H_A
  std::array<double, kMaxBaseDim> w{};
  double hh = 0.0;
  for (int a = 0; a < m; ++a) hh += H[a] * H[a];
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int a = 0; a < m; ++a) acc += du[i * m + a] * H[a];
    w[i] = acc;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) hh += w[i] * gi[i * n + j] * w[j];
  s.H_norm2 = hh;

  // ||II||^2 = sum_A tr(M_A D2_A) + sum_ij g^ij <Q_i, S_j>_F with
  // M_A = g^-1 D2_A g^-1, Q_i = sum_A du_iA M_A, S_j = sum_B du_jB D2_B.
  const int nn = n * n;
  std::array<double, 9> MA{}, tmp{};
  std::array<std::array<double, 9>, kMaxBaseDim> Q{}, S{};
  double ii = 0.0;
  for (int a = 0; a < m; ++a) {
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < n; ++l) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k) acc += gi[i * n + k] * d2u[(k * n + l) * m + a];
        tmp[i * n + l] = acc;
      }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int l = 0; l < n; ++l) acc += tmp[i * n + l] * gi[l * n + j];
        MA[i * n + j] = acc;
      }
    for (int k = 0; k < nn; ++k) ii += MA[k] * d2u[k * m + a];
    for (int i = 0; i < n; ++i) {
      const double c = du[i * m + a];
      for (int k = 0; k < nn; ++k) {
        Q[i][k] += c * MA[k];
        S[i][k] += c * d2u[k * m + a];
      }
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double f = 0.0;
      for (int k = 0; k < nn; ++k) f += Q[i][k] * S[j][k];
      ii += gi[i * n + j] * f;
    }
  s.II_norm2 = ii;
  return s;
}

}  // namespace smcf
