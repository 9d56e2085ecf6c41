#pragma once

// Closed G2-structures phi = -X*vol + dX on B x T^4 built from spacelike
// graphs B -> R^{3,3}, with H^2(T^4) identified with R^{3,3}.
//
// Identification: f_i <-> omega_i and e_A <-> omegabar_A. Under it the wedge
// pairing on unit-volume T^4 is twice the R^{3,3} quadratic form, and the
// graph of u = 0 over the identity gives phi_0 coefficient for coefficient.

#include "smcf/discretization.hpp"

#include <array>
#include <map>
#include <string>
#include <vector>

namespace smcf {

/// Coefficients in the basis dy0^dy1, dy0^dy2, dy0^dy3, dy2^dy3, dy3^dy1,
/// dy1^dy2.
struct Form2OnT4 {
  std::array<double, 6> c{};

  Form2OnT4 operator+(const Form2OnT4& o) const;
  Form2OnT4 operator*(double s) const;
  friend bool operator==(const Form2OnT4&, const Form2OnT4&) = default;
};

/// Integral over unit-volume T^4 of alpha ^ beta.
double wedge_pairing(const Form2OnT4& alpha, const Form2OnT4& beta);

/// omega_1, omega_2, omega_3 (self-dual).
std::array<Form2OnT4, 3> omega_basis();
/// omegabar_i: the second term of omega_i with flipped sign (anti-self-dual).
std::array<Form2OnT4, 3> omega_bar_basis();

inline constexpr const char* kG2Normalization =
    "f_i<->omega_i, e_A<->omegabar_A; wedge pairing = 2 x R^{3,3} form; T^4 volume 1";

/// phi at each node: vol * dx1^dx2^dx3 + sum_i dx_i ^ slot[i].
struct G2Form {
  DomainSpec domain;
  std::vector<double> vol;
  std::vector<std::array<Form2OnT4, 3>> slot;
};

/// vol = -sqrt(det g) and slot[i] = omega_i + sum_A D_i u^A omegabar_A.
/// Throws DimensionError unless (n, m) = (3, 3) and SpacelikeViolation where
/// the graph is not spacelike.
G2Form immersion_to_phi(const GraphState& X);

/// The model structure phi_0 on the given domain.
G2Form phi0(const DomainSpec& domain);

/// max over interior nodes of the 18 coefficients of d phi, i.e.
/// d_i slot_j - d_j slot_i by central differences (y-derivatives vanish).
double check_closed(const G2Form& phi);

struct TorsionField {
  std::vector<double> H;                  ///< 3 components per node
  std::vector<Form2OnT4> anti_self_dual;  ///< sum_A H^A omegabar_A
  std::vector<double> H_norm2;            ///< per node
  double sup_H_norm2 = 0.0;
};

/// d*phi = H: mean curvature at every node from the geometry frame.
TorsionField torsion(const GraphState& X);

/// The 35 coefficients of phi keyed by the sorted 3-index over
/// (x1, x2, x3, y0, y1, y2, y3), e.g. "x1x2x3", "x1y0y1".
std::map<std::string, std::vector<double>> phi_components(const G2Form& phi);

}  // namespace smcf
