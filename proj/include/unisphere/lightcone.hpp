// Distributed under the MIT License.
// See LICENSE.txt for details.

#pragma once

#include <string>
#include <vector>

#include "unisphere/metric.hpp"

namespace unisphere {

/// The symmetric 2-tensor Xi = -g + |d log W|^2 g - 2 d log W (x) d log W
/// + 2 Hess(log W) of a conformal factor W = e^u on the round sphere
/// (components in the orthonormal round frame, g the round metric). It is
/// the transverse second fundamental form of the cross-section r = W of the
/// Minkowski lightcone, and satisfies tr Xi = -2 W^2 K with K the Gauss
/// curvature of W^2 g.
struct XiTensor {
  explicit XiTensor(const GridPtr& grid_in)
      : grid(grid_in), full(grid_in), hat(grid_in), trace_round(grid_in) {}

  GridPtr grid;
  SymTensor2 full;
  TraceFreeTensor hat;      // trace-free part
  ScalarField trace_round;  // trace against the round metric
};

XiTensor xi_from_log_factor(const Coeffs& u, const GridPtr& grid);

/// The trace-free part of Xi computed through the inverse factor:
/// hat Xi = -W [2 Hess(1/W) - Lap(1/W) g]. Agrees with
/// xi_from_log_factor(u).hat up to spectral truncation of 1/W.
TraceFreeTensor xi_hat_from_inverse_factor(const Coeffs& u,
                                           const GridPtr& grid);

/// Residual of the divergence identity div hat(Xi) + W^2 dK = 0 (round
/// divergence; W^2 dK evaluated exactly as d(1 - Lap u) - 2(1 - Lap u) du).
/// Zero in the continuum; decays spectrally with the bandlimit.
OneForm divergence_identity_residual(const Coeffs& u, const GridPtr& grid);

/// A vector field along the cone cross-section, in components with respect
/// to (d/d_ubar, d/d_u, e_1, e_2): ubar = (t + r)/2 and u = (t - r)/2 are
/// the double-null coordinates of Minkowski space (metric -4 dubar du
/// + r^2 g), e_i the round orthonormal frame on the sphere factor.
struct ConeVector {
  explicit ConeVector(const GridPtr& grid)
      : ubar(grid), u(grid), angular(grid) {}

  ScalarField ubar, u;
  OneForm angular;
};

/// Pointwise Minkowski inner product of two cone vectors on the surface of
/// radius r: <a,b> = -2(a_ubar b_u + a_u b_ubar) + r^2 (a_1 b_1 + a_2 b_2).
ScalarField minkowski_inner(const ConeVector& a, const ConeVector& b,
                            const ScalarField& radius);

/// Null frame adapted to the cross-section ubar = W of the lightcone u = 0:
/// outgoing l = W d/d_ubar, incoming conjugate lbar with <l, lbar> = -2,
/// and the tangent frame t_i = e_i + (e_i W) d/d_ubar.
struct NullFrame {
  explicit NullFrame(const GridPtr& grid_in)
      : grid(grid_in), omega(grid_in), domega(grid_in), l(grid_in),
        lbar(grid_in), tangent1(grid_in), tangent2(grid_in) {}

  GridPtr grid;
  ScalarField omega;  // surface radius r = W
  OneForm domega;     // frame components of dW
  ConeVector l, lbar;
  ConeVector tangent1, tangent2;
};

NullFrame lightcone_frames(const Coeffs& u, const GridPtr& grid);

/// Second fundamental forms of the cross-section with respect to the null
/// frame: chi(X, Y) = <D_X l, Y> and chi_bar(X, Y) = <D_X lbar, Y>,
/// computed through the cone connection coefficients and reported in the
/// round orthonormal frame. chi equals the induced metric W^2 g exactly;
/// chi_bar equals XiTensor::full.
struct SecondForms {
  explicit SecondForms(const GridPtr& grid)
      : chi(grid), chi_bar(grid) {}

  SymTensor2 chi;
  SymTensor2 chi_bar;       // off-diagonal symmetrized
  double chi_bar_asymmetry = 0.0;  // sup |chi_bar_12 - chi_bar_21| before
                                   // symmetrizing (zero in the continuum)
};

SecondForms second_forms(const Coeffs& u, const GridPtr& grid);

/// Sup norms of the residuals of the surface structure equations:
///  - gauss: Gauss equation, K det(g) + (g_11 chibar_22 + chibar_11 g_22
///    - 2 g_12 chibar_12)/2 in the round frame (the 1212 component);
///  - codazzi: D_i chibar_jk - D_j chibar_ik (induced connection);
///  - trace_chain: K + tr_g(chibar)/2;
///  - divergence_form: div_g(hat chibar) - d(tr_g chibar)/2 where hat is
///    the g-trace-free part.
struct StructureReport {
  double gauss = 0.0;
  double codazzi = 0.0;
  double trace_chain = 0.0;
  double divergence_form = 0.0;
  /// Cross-check: the surface-metric divergence residual equals W^{-2} times
  /// the round-frame residual of divergence_identity_residual once the
  /// curvature is substituted by -tr_g(chibar)/2; this is the sup norm of the
  /// difference of the two one-forms.
  double divergence_consistency = 0.0;
};

StructureReport structure_equation_report(const Coeffs& u,
                                          const GridPtr& grid);

/// Integrates the ODEs satisfied by the conformal factor along a unit-speed
/// great circle from the basepoint (where the factor must be normalized:
/// u(q) = 0, du(q) = 0) and compares with direct spectral evaluation:
///  - first-order equation for the normal derivative e_2 log W,
///  - second-order equation for log W,
///  - first-order variant for e_2 (1/W),
///  - second-order variant for 1/sqrt(W);
/// source terms (hat Xi components and K) are sampled spectrally along the
/// circle. Deviations are sup norms over the sample points.
struct GeodesicReport {
  double max_dev_normal_derivative = 0.0;
  double max_dev_log_factor = 0.0;
  double max_dev_tangent_derivative = 0.0;
  double max_dev_inverse_normal = 0.0;
  double max_dev_inverse_sqrt = 0.0;
  double sup_log_factor = 0.0;  // max |log W| over the samples
  int samples = 0;
};

GeodesicReport geodesic_ode_check(const Coeffs& u, Basepoint q,
                                  double direction, const GridPtr& grid,
                                  double s_max = kPi - 0.2, int samples = 64);

/// Empirical constants for the a priori estimates available for tensors
/// satisfying div hat(Xi) = -W^2 dK (round Sobolev norms):
///  - L2 form:      |hat Xi|_{0,2} <= c |W^2|_{1,q} |K - k|_{0,p},
///    valid when 1/p + 1/q < 1 and p >= 2;
///  - Lp form:      |hat Xi|_{0,p} <= c |W^2|_{1,r} |K - k|_{0,q},
///    valid when 1/q + 1/r = 1/2 + 1/p and q >= p.
/// Members whose curvature deviation vanishes report `exact` (0/0).
struct EstimateVariantReport {
  bool applicable = false;
  std::string skip_reason;
  std::vector<double> ratios;      // per ensemble member; 0 when exact
  std::vector<bool> exact;
  double max_ratio = 0.0;
};

struct EstimateReport {
  EstimateVariantReport l2;
  EstimateVariantReport lp;
};

EstimateReport estimate_ratio_report(const std::vector<ConformalMetric>& members,
                                     double p, double q, double r, double k);

}  // namespace unisphere
