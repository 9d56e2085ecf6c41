#pragma once

// Reference computations written independently of the library: ambient
// frames are built explicitly in R^{n+m} and projected with the indefinite
// metric, without any of the graph-specific shortcuts.

#include <Eigen/Dense>

#include <vector>

namespace oracle {

struct Curvature {
  double H_norm2 = 0.0;
  double II_norm2 = 0.0;
  double v2 = 0.0;
};

// du(i, A), d2u[A](i, j).
inline Curvature graph_curvature(const Eigen::MatrixXd& du, const std::vector<Eigen::MatrixXd>& d2u) {
  const int n = static_cast<int>(du.rows());
  const int m = static_cast<int>(du.cols());
  const int N = n + m;
  Eigen::MatrixXd eta = Eigen::MatrixXd::Identity(N, N);
  for (int a = 0; a < m; ++a) eta(n + a, n + a) = -1.0;

  Eigen::MatrixXd T(N, n);  // tangent columns f_i + D_i u^A e_A
  T.setZero();
  for (int i = 0; i < n; ++i) {
    T(i, i) = 1.0;
    for (int a = 0; a < m; ++a) T(n + a, i) = du(i, a);
  }
  const Eigen::MatrixXd g = T.transpose() * eta * T;
  const Eigen::MatrixXd gi = g.inverse();
  const Eigen::MatrixXd P = T * gi * T.transpose() * eta;  // tangential projector
  const Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(N, N) - P;

  std::vector<Eigen::VectorXd> II(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Eigen::VectorXd V = Eigen::VectorXd::Zero(N);
      for (int a = 0; a < m; ++a) V(n + a) = d2u[a](i, j);
      II[i * n + j] = Q * V;
    }
  Curvature c;
  Eigen::VectorXd H = Eigen::VectorXd::Zero(N);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) H += gi(i, j) * II[i * n + j];
  c.H_norm2 = -H.dot(eta * H);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          c.II_norm2 -= gi(i, k) * gi(j, l) * II[i * n + j].dot(eta * II[k * n + l]);
  // v^2 = sum_A |e_A^perp|^2 with the sign making it >= m.
  for (int a = 0; a < m; ++a) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(N);
    e(n + a) = 1.0;
    const Eigen::VectorXd p = Q * e;
    c.v2 -= p.dot(eta * p);
  }
  return c;
}

}  // namespace oracle
