// Distributed under the MIT License.
// See LICENSE.txt for details.

#pragma once

#include <array>
#include <vector>

#include "unisphere/metric.hpp"

namespace unisphere {

/// Eigen-decomposition of -Lap_g restricted to the band-limited harmonic
/// subspace: the generalized symmetric eigenproblem S x = mu M x with
/// stiffness S_ab = integral <grad Y_a, grad Y_b>_g dvol_g and mass
/// M_ab = integral Y_a Y_b dvol_g in the real orthonormal basis.
struct EigenDecomposition {
  GridPtr grid;
  /// Ascending; spectrum of -Lap_g (positive convention, mu_0 ~ 0).
  Eigen::VectorXd eigenvalues;
  std::vector<Coeffs> coefficients;
  /// Synthesized eigenfields, L2(g)-orthonormal.
  std::vector<ScalarField> fields;
  /// sqrt(det g / det g_round) at the nodes; together with the round area
  /// weights this defines the L2(g) inner product by quadrature.
  ScalarField volume_weight;
  /// sup over retained pairs of || Lap_g v + mu v ||_{L2(g)}, the strong-form
  /// eigen-residual measured by grid quadrature.
  double max_galerkin_residual = 0.0;

  explicit EigenDecomposition(const GridPtr& g) : grid(g), volume_weight(g) {}

  /// Indices of the eigenvalue cluster nearest 2 ("first eigenspace"):
  /// the eigenvalues with |mu - 2| < 1, required to number exactly three.
  /// Throws with a diagnostic otherwise.
  std::array<int, 3> first_cluster() const;
  /// Distance from the top of the first cluster to the next eigenvalue.
  double first_cluster_gap() const;
};

/// Spectrum of a conformal metric e^{2u} g_round. The 2D Dirichlet energy is
/// conformally invariant, so the stiffness matrix is exactly diag(l(l+1));
/// only the mass matrix carries the metric.
EigenDecomposition galerkin_spectrum(const ConformalMetric& m, int count);

/// Spectrum of a general perturbed metric; stiffness and mass both assembled
/// by quadrature from the metric data.
EigenDecomposition galerkin_spectrum(const PerturbedMetric& m, int count);

/// L2(g) inner product by quadrature: integral of f h against the volume
/// weight (all three fields on the same grid).
double l2_inner(const ScalarField& f, const ScalarField& h,
                const ScalarField& volume_weight);

/// L2(g2)-orthogonal projection of v onto the first eigenspace of target.
/// Requires the cluster to be separated: first_cluster_gap() >= 0.5.
ScalarField project_first_eigenspace(const ScalarField& v,
                                     const EigenDecomposition& target);

struct GramSchmidtResult {
  std::array<ScalarField, 3> basis;
  /// Condition number of the 3x3 input Gram matrix.
  double gram_condition = 0.0;
  /// sup_k || v_k - v'_k ||_{L2(g)}: how far the input was from orthonormal.
  double max_deviation = 0.0;
};

/// Gram-Schmidt in the L2(g) inner product given by the volume weight
/// (modified variant, two passes). Requires Gram condition number < 10.
GramSchmidtResult gram_schmidt(const std::array<ScalarField, 3>& v,
                               const ScalarField& volume_weight);

/// Candidate isometric embedding built from a first-cluster orthonormal
/// basis: Phi = sqrt(4 pi / 3) (v_1, v_2, v_3).
struct Embedding {
  GridPtr grid;
  std::array<ScalarField, 3> x;

  explicit Embedding(const GridPtr& g)
      : grid(g), x{ScalarField(g), ScalarField(g), ScalarField(g)} {}

  /// |Phi|^2 pointwise (1 on the image of an exact unit-sphere embedding).
  ScalarField squared_norm() const;
};

Embedding build_embedding(const std::array<ScalarField, 3>& basis);

/// Pullback of the Euclidean metric under Phi, as round-frame components
/// P_ij = sum_a (e_i Phi^a)(e_j Phi^a).
SymTensor2 embedding_pullback(const Embedding& phi);

struct RigidMotion {
  Eigen::Matrix3d matrix = Eigen::Matrix3d::Identity();
  /// +1 or -1; both allowed (the full orthogonal group).
  double determinant = 1.0;
};

struct RigidMotionFit {
  RigidMotion motion;
  /// || Phi2 - O Phi1 || in the weighted L2(g1) norm, sup norm, and the
  /// W^{3,p} Sobolev norm (combined over components as an l^p sum).
  double residual_l2 = 0.0;
  double residual_sup = 0.0;
  double residual_sobolev = 0.0;
};

/// Weighted orthogonal Procrustes: the O in O(3) minimizing
/// integral |Phi2 - O Phi1|^2 dvol_{g1}, via the singular value
/// decomposition of the 3x3 cross-covariance. Throws on rank-deficient
/// cross-covariance. p sets the Sobolev exponent of the reported norm.
RigidMotionFit fit_rigid_motion(const Embedding& phi1, const Embedding& phi2,
                                const MetricData& g1, double p = 4.0);

/// A metric given as a conformal chart composed with a known rotation:
/// the physical metric is the pullback of e^{2u} g_round by x -> R x.
struct MetricPresentation {
  ConformalMetric chart;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
};

/// Two-metric stability report: how strongly the uniformization data and the
/// first-eigenspace embeddings of two nearby metrics can differ, normalized
/// by the metric distance delta = ||g2 - g1||_{g1,2,p}.
struct StabilityReport {
  double delta = 0.0;
  /// True when delta is at roundoff (identical inputs); ratios are then 0.
  bool exact = false;
  /// sup |log(W2 / W1)| of the two uniformization factors (chart-aligned).
  double factor_log_ratio = 0.0;
  /// || W2^{-2} g2 - W1^{-2} g1 ||_{g1,2,p}: distance of the round
  /// representatives (exactly 0 in the continuum; here the solver residual).
  double round_gauge_distance = 0.0;
  /// Embedding comparison after projection + Gram-Schmidt alignment.
  RigidMotionFit fit;
  /// Rigid motion in physical space: R2 * O_chart * R1^T.
  Eigen::Matrix3d motion = Eigen::Matrix3d::Identity();
  double ratio_factor = 0.0;
  double ratio_gauge = 0.0;
  double ratio_embedding = 0.0;
};

/// Runs the full comparison pipeline on two metric presentations sharing the
/// normalization basepoint q: uniformize both charts, compare conformal
/// factors and round representatives, then build first-eigenspace embeddings
/// (project g1's basis onto g2's first eigenspace, re-orthonormalize) and fit
/// the rigid motion. Known rotations are treated as exact isometry metadata:
/// chart quantities are compared directly and the fitted motion is conjugated
/// back to physical space. Requires area(g1 chart) = 4 pi to 1e-8 relative.
StabilityReport stability_experiment(const MetricPresentation& g1,
                                     const MetricPresentation& g2, Basepoint q,
                                     double p = 4.0);

}  // namespace unisphere
