// Distributed under the MIT License.
// See LICENSE.txt for details.

#pragma once

#include <vector>

#include "unisphere/fields.hpp"

namespace unisphere {

// ---------------------------------------------------------------------------
// Scalar transforms
// ---------------------------------------------------------------------------

/// Forward transform (quadrature projection) onto harmonics up to the grid
/// bandlimit. Exact for band-limited input; requires finite values.
Coeffs analyze(const ScalarField& f);

/// Inverse transform; requires grid bandlimit >= coefficient bandlimit and
/// real-field conjugate symmetry of the coefficients.
ScalarField synthesize(const Coeffs& a, const GridPtr& grid);

/// Point evaluation of a real-field expansion away from the poles.
double synthesize_at(const Coeffs& a, double theta, double phi);

/// Values of the real orthonormal harmonic basis at the grid nodes: entry
/// (i * n_phi + j, a) is basis function a at node (i, j), with columns in
/// the real flat order of Coeffs::index. Quadrature-based Galerkin matrices
/// are assembled as B^T diag(weights) B.
Eigen::MatrixXd real_basis_matrix(const GridPtr& grid);

/// Value, frame gradient, and covariant Hessian at a point (orthonormal
/// frame {e_theta, e_phi}); depth selects how much is filled (0, 1, or 2).
struct PointJet {
  double value = 0.0;
  double d1 = 0.0, d2 = 0.0;
  double h11 = 0.0, h12 = 0.0, h22 = 0.0;
};
PointJet evaluate_jet(const Coeffs& a, double theta, double phi, int depth);

// ---------------------------------------------------------------------------
// Coefficient-space operators (round metric)
// ---------------------------------------------------------------------------

/// Laplace-Beltrami operator of the round metric, div(grad(.)); spectrum
/// -l(l+1).
Coeffs laplacian(const Coeffs& a);

/// Inverse of the Laplacian on the complement of constants (l = 0 output 0).
Coeffs inverse_laplacian(const Coeffs& a);

// ---------------------------------------------------------------------------
// First-order geometry on the grid
// ---------------------------------------------------------------------------

OneForm gradient(const Coeffs& a, const GridPtr& grid);

/// Rotation by 90 degrees in each tangent plane: (w1, w2) -> (-w2, w1).
OneForm hodge_star(const OneForm& w);

/// Hodge dual on the first index of a trace-free symmetric tensor;
/// in potentials it swaps CK(d f) -> -CK(*d f) and CK(*d g) -> CK(d g).
TraceFreeTensor hodge_star(const TraceFreeTensor& T);

SymTensor2 hessian(const Coeffs& a, const GridPtr& grid);

// ---------------------------------------------------------------------------
// Helmholtz / trace-free tensor decompositions
// ---------------------------------------------------------------------------

OneFormPotentials analyze_one_form(const OneForm& w);
OneForm synthesize_one_form(const OneFormPotentials& p, const GridPtr& grid);

/// Frame components of a trace-free tensor at an arbitrary point, assembled
/// from the scalar jets of its potentials.
void trace_free_at(const TensorPotentials& p, double theta, double phi,
                   double& t11, double& t12);

/// Frame components (w1, w2) of d f + *d g at an arbitrary point.
void one_form_at(const OneFormPotentials& p, double theta, double phi,
                 double& w1, double& w2);

TensorPotentials analyze_trace_free(const TraceFreeTensor& T);
TraceFreeTensor synthesize_trace_free(const TensorPotentials& p, const GridPtr& grid);

/// Conformal Killing operator CK(w)_ij = (grad_i w_j + grad_j w_i)/2
/// - (div w / 2) g.  Its kernel is the six-dimensional space of conformal
/// Killing one-forms span{ d Y_1^m, *d Y_1^m }.
TraceFreeTensor conformal_killing(const OneForm& w);
TensorPotentials conformal_killing(const OneFormPotentials& p);

/// Divergence (div T)_j = grad^i T_ij of a trace-free symmetric tensor;
/// diagonal on potentials with multiplier (2 - l(l+1))/2.
OneForm divergence_trace_free(const TraceFreeTensor& T);
OneFormPotentials divergence_trace_free(const TensorPotentials& p);

/// Scalar divergence of a one-form, grad^i w_i.
Coeffs divergence_one_form(const OneForm& w);

// ---------------------------------------------------------------------------
// L2 pairings (round measure)
// ---------------------------------------------------------------------------

double inner(const ScalarField& a, const ScalarField& b);
double inner(const OneForm& a, const OneForm& b);
double inner(const TraceFreeTensor& a, const TraceFreeTensor& b);

// ---------------------------------------------------------------------------
// Covariant derivative stacks (round metric, exact for band-limited data)
// ---------------------------------------------------------------------------

/// Frame components of the rank-th covariant derivative of a scalar field:
/// 2^rank real grids; component index bits (most significant first) select
/// e_theta (0) or e_phi (1) per derivative/tensor slot. rank <= 4.
std::vector<Eigen::MatrixXd> derivative_stack(const Coeffs& scalar,
                                              const GridPtr& grid, int rank);

/// Same for a one-form given by potentials: returns the components of
/// grad^extra_rank applied to the one-form (total tensor rank
/// extra_rank + 1). extra_rank <= 3.
std::vector<Eigen::MatrixXd> derivative_stack(const OneFormPotentials& p,
                                              const GridPtr& grid, int extra_rank);

/// Same for a trace-free symmetric tensor given by potentials (total rank
/// extra_rank + 2). extra_rank <= 2.
std::vector<Eigen::MatrixXd> derivative_stack(const TensorPotentials& p,
                                              const GridPtr& grid, int extra_rank);

// ---------------------------------------------------------------------------
// Graded norms of the derivative-basis elements
// ---------------------------------------------------------------------------

enum class BasisFamily {
  kGradScalar,      // d Y_l^m           (one-form)
  kStarGradScalar,  // *d Y_l^m          (one-form)
  kCKGrad,          // CK(d Y_l^m)       (trace-free tensor), l >= 2
  kCKStarGrad,      // CK(*d Y_l^m)      (trace-free tensor), l >= 2
};

struct BasisNorm {
  double value = 0.0;            // graded squared norm (sum of k-th derivative
                                 // L2 masses, k = 0..n; spectral dual for n<0)
  double reference_power = 0.0;  // lambda^{n+1} (one-forms), lambda^{n+2} (tensors)
  double ratio = 0.0;            // value / reference_power
};

/// Graded inner-product norms of the basis elements for n in [-4, 4]
/// (negative n via the spectral duals value_0^2 / value_{|n|}).
BasisNorm basis_norm(BasisFamily family, int l, int n, const GridPtr& grid);

/// Grid-level basis elements (real-basis index m).
OneForm one_form_basis_element(BasisFamily family, int l, int m, const GridPtr& grid);
TraceFreeTensor tensor_basis_element(BasisFamily family, int l, int m,
                                     const GridPtr& grid);

}  // namespace unisphere
