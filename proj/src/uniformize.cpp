// Distributed under the MIT License.
// See LICENSE.txt for details.

#include "unisphere/uniformize.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "unisphere/base.hpp"
#include "unisphere/sht.hpp"

namespace unisphere {

namespace {

// sinh(c)/c and its derivative d/dc [sinh(c)/c], stable near c = 0.
double sinhc(double c) {
  if (c < 1e-5) return 1.0 + c * c / 6.0;
  return std::sinh(c) / c;
}

double dsinhc(double c) {
  if (c < 1e-5) return c / 3.0 + c * c * c / 30.0;
  return (c * std::cosh(c) - std::sinh(c)) / (c * c);
}

// D(b, x) = cosh|b| + (sinh|b|/|b|) <x, b>; the Moebius factor is 1/D.
double boost_denominator(const Eigen::Vector3d& b, const Eigen::Vector3d& x) {
  const double c = b.norm();
  return std::cosh(c) + sinhc(c) * x.dot(b);
}

// Gradient of D with respect to b at fixed x.
Eigen::Vector3d boost_denominator_grad_b(const Eigen::Vector3d& b,
                                         const Eigen::Vector3d& x) {
  const double c = b.norm();
  const Eigen::Vector3d dir = c > 0 ? (b / c).eval() : Eigen::Vector3d::Zero();
  return std::sinh(c) * dir + dsinhc(c) * x.dot(b) * dir + sinhc(c) * x;
}

// Jet of log Q_b at a point and its Jacobian with respect to b. Rows of the
// jet: (log Q, d log Q . e_theta, d log Q . e_phi).
void boost_jet_and_jacobian(const Eigen::Vector3d& b, double theta, double phi,
                            Eigen::Vector3d& jet, Eigen::Matrix3d& jac) {
  const Eigen::Vector3d x = sphere_point(theta, phi);
  const Eigen::Vector3d e1 = frame_theta(theta, phi);
  const Eigen::Vector3d e2 = frame_phi(theta, phi);
  const double c = b.norm();
  const double g = sinhc(c);
  const double D = std::cosh(c) + g * x.dot(b);
  const Eigen::Vector3d dD = boost_denominator_grad_b(b, x);
  const Eigen::Vector3d dir = c > 0 ? (b / c).eval() : Eigen::Vector3d::Zero();

  jet(0) = -std::log(D);
  jet(1) = -g * e1.dot(b) / D;
  jet(2) = -g * e2.dot(b) / D;

  jac.row(0) = (-dD / D).transpose();
  for (int a = 0; a < 2; ++a) {
    const Eigen::Vector3d& e = a == 0 ? e1 : e2;
    const Eigen::Vector3d row = -(dsinhc(c) * e.dot(b) * dir + g * e) / D +
                                g * e.dot(b) / (D * D) * dD;
    jac.row(a + 1) = row.transpose();
  }
}

// Real orthonormal basis evaluated at all grid nodes: column a holds the
// basis function of flat index a = l^2 + l + m, rows run over nodes with
// flattened index i * n_phi + j.
double sup_abs(const Eigen::MatrixXd& values) {
  return values.cwiseAbs().maxCoeff();
}

// Sup norm of the band-limited part of the pointwise residual
// Lap u - 1 + K e^{2u}.
double projected_residual(const Coeffs& u, const ScalarField& K,
                          Eigen::VectorXd* real_coeffs) {
  const GridPtr& grid = K.grid;
  ScalarField resid(grid, synthesize(laplacian(u), grid).values);
  const ScalarField u_field = synthesize(u, grid);
  resid.values.array() +=
      -1.0 + K.values.array() * (2.0 * u_field.values.array()).exp();
  const Coeffs r = analyze(resid);
  if (real_coeffs != nullptr) *real_coeffs = complex_to_real_basis(r);
  return sup_abs(synthesize(r, grid).values);
}

}  // namespace

ScalarField mobius_factor(const MobiusParams& params, const GridPtr& grid) {
  ScalarField q(grid);
  for (int i = 0; i < grid->n_theta(); ++i) {
    for (int j = 0; j < grid->n_phi(); ++j) {
      const Eigen::Vector3d x =
          params.rotation * sphere_point(grid->theta(i), grid->phi(j));
      q.values(i, j) = 1.0 / boost_denominator(params.b, x);
    }
  }
  return q;
}

Coeffs mobius_log_factor(const MobiusParams& params, const GridPtr& grid) {
  ScalarField log_q = mobius_factor(params, grid);
  log_q.values = log_q.values.array().log().matrix();
  return analyze(log_q);
}

void mobius_log_jet(const Eigen::Vector3d& b, double theta, double phi,
                    double& value, double& d_theta, double& d_phi) {
  Eigen::Vector3d jet;
  Eigen::Matrix3d jac;
  boost_jet_and_jacobian(b, theta, phi, jet, jac);
  value = jet(0);
  d_theta = jet(1);
  d_phi = jet(2);
}

LiouvilleResult solve_liouville(const ScalarField& K, const Coeffs& u0,
                                double tol, int max_iters) {
  const GridPtr& grid = K.grid;
  require(K.values.minCoeff() > 0.0,
          "solve_liouville: curvature must be positive everywhere");
  require(u0.bandlimit() == grid->bandlimit(),
          "solve_liouville: initial guess bandlimit mismatch");

  const int L = grid->bandlimit();
  const int n_basis = (L + 1) * (L + 1);
  const Eigen::MatrixXd B = real_basis_matrix(grid);

  Eigen::VectorXd node_weights(B.rows());
  for (int i = 0; i < grid->n_theta(); ++i) {
    for (int j = 0; j < grid->n_phi(); ++j) {
      node_weights(i * grid->n_phi() + j) = grid->area_weight(i);
    }
  }
  Eigen::VectorXd degree(n_basis);
  for (int l = 0; l <= L; ++l) {
    for (int m = -l; m <= l; ++m) {
      degree(Coeffs::index(l, m)) = static_cast<double>(l) * (l + 1);
    }
  }

  LiouvilleResult result(L);
  result.u = u0;
  Eigen::VectorXd r_real;
  result.residual_linf = projected_residual(result.u, K, &r_real);

  for (int iter = 0; iter < max_iters; ++iter) {
    if (result.residual_linf <= tol) {
      result.converged = true;
      break;
    }
    ++result.newton_iters;

    // Galerkin matrix of the linearized operator Lap + 2 K e^{2u}.
    const ScalarField u_field = synthesize(result.u, grid);
    Eigen::VectorXd weight_w(B.rows());
    for (int i = 0; i < grid->n_theta(); ++i) {
      for (int j = 0; j < grid->n_phi(); ++j) {
        weight_w(i * grid->n_phi() + j) =
            node_weights(i * grid->n_phi() + j) * K.values(i, j) *
            std::exp(2.0 * u_field.values(i, j));
      }
    }
    Eigen::MatrixXd A = 2.0 * B.transpose() * weight_w.asDiagonal() * B;
    A.diagonal() -= degree;

    // Minimal-norm least-squares step: the operator is singular on l = 1 at
    // the round point, and nearly so close to it.
    const Eigen::VectorXd step = A.completeOrthogonalDecomposition().solve(
        (-r_real).eval());
    const Coeffs v = real_basis_to_complex(step, L);

    double t = 1.0;
    Coeffs u_try = result.u;
    double res_try = result.residual_linf;
    for (int halving = 0; halving < 12; ++halving) {
      u_try.data() = result.u.data() + t * v.data();
      res_try = projected_residual(u_try, K, &r_real);
      if (res_try < result.residual_linf) break;
      t *= 0.5;
    }
    result.u = u_try;
    result.residual_linf = res_try;
  }
  if (result.residual_linf <= tol) result.converged = true;
  return result;
}

NormalizeResult normalize_at(const Coeffs& u, Basepoint q,
                             const GridPtr& grid) {
  require(u.bandlimit() == grid->bandlimit(),
          "normalize_at: bandlimit mismatch");
  NormalizeResult result(grid->bandlimit());
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  Coeffs log_q(u.bandlimit());

  // Quasi-Newton on b: the target jet is evaluated through the band-limited
  // representation of log Q_b (so the final jet of u' vanishes to roundoff),
  // the Jacobian from the closed-form jet of log Q_b.
  auto residual = [&](const Eigen::Vector3d& bb, Coeffs& lq) {
    MobiusParams p;
    p.b = bb;
    lq = mobius_log_factor(p, grid);
    Coeffs diff = u;
    diff.data() -= lq.data();
    const PointJet jet = evaluate_jet(diff, q.theta, q.phi, 1);
    return Eigen::Vector3d(jet.value, jet.d1, jet.d2);
  };

  Eigen::Vector3d g = residual(b, log_q);
  for (int iter = 0; iter < 40 && g.norm() > 1e-13; ++iter) {
    ++result.newton_iters;
    Eigen::Vector3d jet;
    Eigen::Matrix3d jac;
    boost_jet_and_jacobian(b, q.theta, q.phi, jet, jac);
    // Residual decreases in b along -jac^{-1} g since d(residual)/db = -jac.
    b += jac.fullPivLu().solve(g);
    g = residual(b, log_q);
  }

  result.log_omega = u;
  result.log_omega.data() -= log_q.data();
  result.params.b = b;
  result.jet_residual = g.norm();
  return result;
}

UniformizationResult uniformize(const ConformalMetric& m) {
  const GridPtr& grid = m.grid;
  UniformizationResult result(grid);
  result.k_in = gauss_curvature(m);
  result.basepoint = m.basepoint;

  LiouvilleResult solve =
      solve_liouville(result.k_in, Coeffs(grid->bandlimit()));
  require(solve.converged, "uniformize: curvature solve did not converge");
  result.newton_iters = solve.newton_iters;
  result.residual_linf = solve.residual_linf;

  NormalizeResult norm = normalize_at(solve.u, m.basepoint, grid);
  result.log_omega = norm.log_omega;
  result.params = norm.params;
  const PointJet jet =
      evaluate_jet(result.log_omega, m.basepoint.theta, m.basepoint.phi, 1);
  result.normalization_value = std::abs(jet.value);
  result.normalization_gradient = std::hypot(jet.d1, jet.d2);

  const MetricData md = metric_data(m);
  ScalarField omega_minus_one = synthesize(result.log_omega, grid);
  omega_minus_one.values =
      (omega_minus_one.values.array().exp() - 1.0).matrix();
  ScalarField k_minus_one(grid,
                          (result.k_in.values.array() - 1.0).matrix());
  for (const double p : {3.0, 4.0, 6.0}) {
    BoundRatio ratio;
    ratio.p = p;
    ratio.numerator = sobolev_norm(omega_minus_one, md, 2, p);
    ratio.denominator = sobolev_norm(k_minus_one, md, 0, p);
    ratio.exact = ratio.denominator < 1e-11;
    result.bound_ratios.push_back(ratio);
  }
  return result;
}

}  // namespace unisphere
