// Distributed under the MIT License.
// See LICENSE.txt for details.

#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "unisphere/base.hpp"

namespace unisphere {

/// Gauss-Legendre nodes and weights on [-1, 1], accurate to machine
/// precision (Newton iteration on the Legendre polynomial). Weights sum to 2.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Quadrature grid on the unit sphere: Gauss-Legendre nodes in colatitude,
/// equispaced nodes in longitude, plus cached tables of normalized associated
/// Legendre functions and their first theta-derivatives at the nodes.
///
/// With n_theta >= L+1 and n_phi >= 2L+1 the quadrature integrates products
/// of two harmonics of degree <= L exactly; the defaults carry a small margin
/// so that the tensor-shape projections used elsewhere stay exact as well.
class Grid {
 public:
  explicit Grid(int bandlimit);
  Grid(int bandlimit, int n_theta, int n_phi);

  int bandlimit() const { return bandlimit_; }
  int n_theta() const { return n_theta_; }
  int n_phi() const { return n_phi_; }
  int n_nodes() const { return n_theta_ * n_phi_; }

  double theta(int i) const { return theta_[i]; }
  double cos_theta(int i) const { return x_[i]; }
  double sin_theta(int i) const { return sin_theta_[i]; }
  double cot_theta(int i) const { return cot_theta_[i]; }
  double csc_theta(int i) const { return csc_theta_[i]; }
  double phi(int j) const { return phi_[j]; }

  /// Colatitude quadrature weight (sums to 2 over i).
  double weight(int i) const { return w_[i]; }
  /// Full area weight of node (i, j): w_i * (2 pi / n_phi). Sums to 4 pi.
  double area_weight(int i) const { return w_[i] * dphi_; }
  double dphi() const { return dphi_; }

  /// Triangular index of (l, m) with 0 <= m <= l <= bandlimit.
  int tri_index(int l, int m) const { return l * (l + 1) / 2 + m; }
  int n_tri() const { return (bandlimit_ + 1) * (bandlimit_ + 2) / 2; }

  /// Normalized associated Legendre function P_l^m(cos theta_i) including
  /// the sqrt((2l+1)(l-m)!/(4pi (l+m)!)) spherical-harmonic normalization and
  /// the Condon-Shortley phase; m >= 0.
  double plm(int l, int m, int i) const { return p0_(tri_index(l, m), i); }
  /// d/dtheta of plm at node i.
  double dplm(int l, int m, int i) const { return p1_(tri_index(l, m), i); }

  /// e^{i m phi_j} for 0 <= m <= bandlimit.
  Complex phase(int m, int j) const { return phase_(m, j); }

  /// Chain of derivatives of cot(theta) and csc(theta) at node i:
  /// cot_chain(k, i) = d^k/dtheta^k cot(theta_i), k <= 4 (same for csc).
  double cot_chain(int k, int i) const { return cot_chain_(k, i); }
  double csc_chain(int k, int i) const { return csc_chain_(k, i); }

  /// Sum of f(i, j) * area_weight(i) over all nodes.
  double integrate(const Eigen::MatrixXd& values) const;

 private:
  void build();

  int bandlimit_;
  int n_theta_;
  int n_phi_;
  double dphi_;
  std::vector<double> theta_, x_, w_, sin_theta_, cot_theta_, csc_theta_, phi_;
  Eigen::MatrixXd p0_, p1_;          // (n_tri) x (n_theta)
  Eigen::MatrixXcd phase_;           // (bandlimit+1) x (n_phi)
  Eigen::MatrixXd cot_chain_, csc_chain_;  // 5 x n_theta
};

using GridPtr = std::shared_ptr<const Grid>;

/// Builds the default grid for a bandlimit (cached tables included).
/// Requires 4 <= bandlimit. Equal bandlimits share one immutable instance,
/// so fields loaded independently at the same resolution compare as living
/// on the same grid.
GridPtr build_grid(int bandlimit);

/// Evaluates the chain of normalized associated Legendre profiles
/// p_k = d^k/dtheta^k P_l^m(cos theta), k = 0..depth, for all 0 <= m <= l <= L
/// at a single point; used for spectral point evaluation off the grid.
/// Output layout: out[k][tri_index(l,m)].
void legendre_chain_at(int bandlimit, double theta, int depth,
                       std::vector<Eigen::VectorXd>& out);

}  // namespace unisphere
