// Distributed under the MIT License.
// See LICENSE.txt for details.

#pragma once

#include <vector>

#include "unisphere/metric.hpp"

namespace unisphere {

/// Parameters of a Moebius transformation of the sphere, split into a boost
/// (direction b/|b|, rapidity |b|) and a rotation. b = 0 gives factor 1.
struct MobiusParams {
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
};

/// Conformal factor Q of the pullback of the round metric under the Moebius
/// map with the given parameters, sampled at the grid nodes:
/// Q(x) = (cosh|b| + (sinh|b|/|b|) <Rx, b>)^{-1}. Always positive.
ScalarField mobius_factor(const MobiusParams& params, const GridPtr& grid);

/// Band-limited coefficients of log Q (spectrally accurate: the exact
/// coefficients decay like tanh(|b|/2)^l).
Coeffs mobius_log_factor(const MobiusParams& params, const GridPtr& grid);

/// Closed-form 1-jet of log Q_b at a point: value and the frame components
/// of d log Q_b (no rotation applied).
void mobius_log_jet(const Eigen::Vector3d& b, double theta, double phi,
                    double& value, double& d_theta, double& d_phi);

/// Result of the nonlinear curvature solve Lap u = 1 - K e^{2u}.
struct LiouvilleResult {
  explicit LiouvilleResult(int bandlimit) : u(bandlimit) {}

  Coeffs u;
  int newton_iters = 0;
  double residual_linf = 0.0;  // sup norm of the band-limited residual
  bool converged = false;
};

/// Solves Lap u = 1 - K e^{2u} for the log conformal factor u by a damped
/// Newton iteration on the band-limited coefficient space; the linearized
/// operator Lap + 2 K e^{2u} is singular on l = 1 at the round point, so
/// each step uses a minimal-norm least-squares solve. Requires K > 0.
LiouvilleResult solve_liouville(const ScalarField& K, const Coeffs& u0,
                                double tol = 1e-10, int max_iters = 50);

/// Result of the basepoint normalization u' = u - log Q_b.
struct NormalizeResult {
  explicit NormalizeResult(int bandlimit) : log_omega(bandlimit) {}

  Coeffs log_omega;
  MobiusParams params;
  int newton_iters = 0;
  double jet_residual = 0.0;  // |(u'(q), du'(q))| after the solve
};

/// Finds boost parameters b such that log Q_b matches the 1-jet of u at the
/// basepoint and returns u' = u - log Q_b, which then satisfies u'(q) = 0,
/// |du'(q)| <= 1e-9.
NormalizeResult normalize_at(const Coeffs& u, Basepoint q, const GridPtr& grid);

/// One reported effective-bound ratio ||Omega - 1||_{g,2,p} /
/// ||K - 1||_{g,0,p}; `exact` marks the 0/0 case of round input.
struct BoundRatio {
  double p = 0.0;
  double numerator = 0.0;
  double denominator = 0.0;
  bool exact = false;  // both sides at roundoff level; ratio undefined

  double ratio() const { return exact ? 0.0 : numerator / denominator; }
};

struct UniformizationResult {
  explicit UniformizationResult(const GridPtr& grid)
      : log_omega(grid->bandlimit()), k_in(grid) {}

  Coeffs log_omega;        // normalized factor: log Omega, jet zero at q
  MobiusParams params;     // g = Omega^2 (pullback of round), recombine via
                           // log_omega + log Q_params to recover the solve
  ScalarField k_in;        // input Gauss curvature
  Basepoint basepoint;
  int newton_iters = 0;
  double residual_linf = 0.0;
  double normalization_value = 0.0;     // |u'(q)|
  double normalization_gradient = 0.0;  // |du'(q)|
  std::vector<BoundRatio> bound_ratios;  // p in {3, 4, 6}
};

/// Full pipeline: curvature of the input metric, Liouville solve from
/// u0 = 0, basepoint normalization at m.basepoint, effective-bound ratios
/// measured in the input metric.
UniformizationResult uniformize(const ConformalMetric& m);

}  // namespace unisphere
