// Distributed under the MIT License.
// See LICENSE.txt for details.

#pragma once

#include <array>
#include <vector>

#include "unisphere/sht.hpp"

namespace unisphere {

struct Basepoint {
  double theta = 0.5 * kPi;
  double phi = 0.0;
};

/// Conformally round metric g = e^{2u} g_round with band-limited u = log
/// Omega, plus the basepoint used for normalization conditions.
struct ConformalMetric {
  GridPtr grid;
  Coeffs log_omega;
  Basepoint basepoint;

  ConformalMetric(GridPtr g, Coeffs u, Basepoint q = {})
      : grid(std::move(g)), log_omega(std::move(u)), basepoint(q) {}
  explicit ConformalMetric(GridPtr g)
      : grid(std::move(g)), log_omega(grid->bandlimit()) {}

  ScalarField log_omega_field() const { return synthesize(log_omega, grid); }
  /// Total area of (S^2, g) = integral of e^{2u}.
  double area() const;
};

/// General perturbation g = g_round + h with the symmetric h given by frame
/// components at the grid nodes.
struct PerturbedMetric {
  GridPtr grid;
  SymTensor2 h;

  explicit PerturbedMetric(GridPtr g) : grid(g), h(std::move(g)) {}
  PerturbedMetric(GridPtr g, SymTensor2 hh) : grid(std::move(g)), h(std::move(hh)) {}

  /// Both eigenvalues of g positive at every node.
  bool positive_definite() const;
  double area() const;
};

/// Difference of the Levi-Civita connections of two metrics: a (1,2)-tensor
/// with frame components delta^k_{ij}, symmetric in (i, j).
struct ChristoffelDifference {
  GridPtr grid;
  // Index order [k][sym(i,j)] with sym: (1,1) -> 0, (1,2) -> 1, (2,2) -> 2.
  std::array<Eigen::MatrixXd, 6> comp;

  const Eigen::MatrixXd& at(int k, int i, int j) const {
    return comp[3 * k + i + j];
  }
  double sup_norm() const;
};

/// Pointwise data shared by curvature, Sobolev-norm, and spectrum code:
/// frame components of g, its inverse, sqrt(det g), the Cholesky transform
/// to a g-orthonormal frame, the connection difference from the round
/// metric, C^k_{ij} = Gamma(g) - Gamma(round), and the round covariant
/// derivative of C. Everything is assembled from exact derivative stacks of
/// the defining data; no frame component is ever re-expanded in scalar
/// harmonics (frame components are not smooth at the poles, so that route
/// would not converge spectrally).
struct MetricData {
  GridPtr grid;
  Eigen::MatrixXd g11, g12, g22;
  Eigen::MatrixXd inv11, inv12, inv22;
  Eigen::MatrixXd sqrt_det;
  // Lower Cholesky factor of g (g = L L^T), pointwise.
  Eigen::MatrixXd l11, l21, l22;
  // C^k_{ij}, index [k][sym(i,j)] as in ChristoffelDifference.
  std::array<Eigen::MatrixXd, 6> christoffel;
  // (grad_a C)^k_{ij} under the round connection, index bits [a k i j].
  std::array<Eigen::MatrixXd, 16> dchristoffel;

  const Eigen::MatrixXd& c_at(int k, int i, int j) const {
    return christoffel[3 * k + i + j];
  }
  const Eigen::MatrixXd& dc_at(int a, int k, int i, int j) const {
    return dchristoffel[8 * a + 4 * k + 2 * i + j];
  }
  double area() const { return grid->integrate(sqrt_det); }
};

MetricData metric_data(const ConformalMetric& m);
MetricData metric_data(const PerturbedMetric& m);

/// Gauss curvature of a conformal metric, K = e^{-2u} (1 - Lap u); exact
/// spectral path.
ScalarField gauss_curvature(const ConformalMetric& m);

/// Gauss curvature of a general perturbed metric via the frame Riemann
/// tensor assembled from the connection difference to the round sphere;
/// sign fixed so that the round metric has K = +1.
ScalarField gauss_curvature(const PerturbedMetric& m);

ChristoffelDifference christoffel_difference(const PerturbedMetric& g1,
                                             const PerturbedMetric& g2);

/// Iterated covariant derivatives of a scalar (given by its coefficients)
/// under the Levi-Civita connection of g. Returns levels [0..n], where
/// level k holds the 2^k frame components of grad_g^k f with index bits
/// MSB-first (newest derivative slot first, 0 = e_theta, 1 = e_phi).
/// Exact for band-limited data apart from quadrature roundoff. n <= 3.
std::vector<std::vector<Eigen::MatrixXd>> covariant_derivatives(
    const MetricData& g, const Coeffs& f, int n);

/// Same for a symmetric 2-tensor; level k holds 2^{k+2} components with
/// bits [d_k .. d_1 i j]. n <= 2.
std::vector<std::vector<Eigen::MatrixXd>> covariant_derivatives(
    const MetricData& g, const SymTensor2& T, int n);

/// W^{n,p} Sobolev norm of a scalar or frame-component tensor field in the
/// metric g: (sum_k integral |grad_g^k f|_g^p dvol_g)^{1/p}, k from 0 (or 1
/// when include_zeroth is off) to n. Supports n <= 3 for scalars and n <= 2
/// for tensors.
double sobolev_norm(const ScalarField& f, const MetricData& g, int n, double p,
                    bool include_zeroth = true);
double sobolev_norm(const SymTensor2& T, const MetricData& g, int n, double p,
                    bool include_zeroth = true);

/// Tensor Sobolev distance ||g2 - g1||_{g1,n,p}.
double metric_distance(const PerturbedMetric& g1, const PerturbedMetric& g2,
                       int n, double p);

/// Conformal metric expressed as a perturbation h = (e^{2u} - 1) g_round.
PerturbedMetric to_perturbed(const ConformalMetric& m);

/// Same conformal class rescaled to total area 4 pi (shifts u by a constant).
ConformalMetric normalized_area(const ConformalMetric& m);

/// Pullback by the rotation x -> R x (an isometry of the round sphere):
/// scalar case u'(x) = u(Rx); tensor case includes the frame alignment.
ConformalMetric rotation_pullback(const ConformalMetric& m,
                                  const Eigen::Matrix3d& R);
PerturbedMetric rotation_pullback(const PerturbedMetric& m,
                                  const Eigen::Matrix3d& R);

/// Unit-sphere position and orthonormal frame vectors at (theta, phi).
Eigen::Vector3d sphere_point(double theta, double phi);
Eigen::Vector3d frame_theta(double theta, double phi);
Eigen::Vector3d frame_phi(double theta, double phi);

}  // namespace unisphere
