// Distributed under the MIT License.
// See LICENSE.txt for details.

#pragma once

#include <Eigen/Dense>

#include "unisphere/coeffs.hpp"
#include "unisphere/grid.hpp"

namespace unisphere {

/// Real scalar field sampled on a grid.
struct ScalarField {
  GridPtr grid;
  Eigen::MatrixXd values;  // n_theta x n_phi

  ScalarField() = default;
  explicit ScalarField(GridPtr g)
      : grid(std::move(g)),
        values(Eigen::MatrixXd::Zero(grid->n_theta(), grid->n_phi())) {}
  ScalarField(GridPtr g, Eigen::MatrixXd v) : grid(std::move(g)), values(std::move(v)) {}

  double integrate() const { return grid->integrate(values); }
  double sup_norm() const { return values.cwiseAbs().maxCoeff(); }
};

/// Real one-form in the orthonormal frame {e_theta, e_phi} of the round
/// sphere: comp1 = omega(e_theta), comp2 = omega(e_phi).
struct OneForm {
  GridPtr grid;
  Eigen::MatrixXd comp1, comp2;

  OneForm() = default;
  explicit OneForm(GridPtr g)
      : grid(std::move(g)),
        comp1(Eigen::MatrixXd::Zero(grid->n_theta(), grid->n_phi())),
        comp2(Eigen::MatrixXd::Zero(grid->n_theta(), grid->n_phi())) {}

  /// Pointwise round-metric squared length comp1^2 + comp2^2.
  Eigen::MatrixXd squared_length() const {
    return comp1.array().square().matrix() + comp2.array().square().matrix();
  }
  double sup_norm() const {
    return std::sqrt(squared_length().maxCoeff());
  }
};

/// Real symmetric trace-free 2-tensor in the orthonormal frame; only the
/// independent components are stored (T22 = -T11, T21 = T12).
struct TraceFreeTensor {
  GridPtr grid;
  Eigen::MatrixXd t11, t12;

  TraceFreeTensor() = default;
  explicit TraceFreeTensor(GridPtr g)
      : grid(std::move(g)),
        t11(Eigen::MatrixXd::Zero(grid->n_theta(), grid->n_phi())),
        t12(Eigen::MatrixXd::Zero(grid->n_theta(), grid->n_phi())) {}

  /// Pointwise squared Frobenius norm 2(T11^2 + T12^2) (round frame).
  Eigen::MatrixXd squared_length() const {
    return 2.0 * (t11.array().square() + t12.array().square()).matrix();
  }
  double sup_norm() const { return std::sqrt(squared_length().maxCoeff()); }
};

/// Real symmetric 2-tensor in the orthonormal frame (trace not assumed
/// zero); used for metric perturbations and second fundamental forms.
struct SymTensor2 {
  GridPtr grid;
  Eigen::MatrixXd t11, t12, t22;

  SymTensor2() = default;
  explicit SymTensor2(GridPtr g)
      : grid(std::move(g)),
        t11(Eigen::MatrixXd::Zero(grid->n_theta(), grid->n_phi())),
        t12(Eigen::MatrixXd::Zero(grid->n_theta(), grid->n_phi())),
        t22(Eigen::MatrixXd::Zero(grid->n_theta(), grid->n_phi())) {}

  Eigen::MatrixXd trace_round() const { return t11 + t22; }
  TraceFreeTensor trace_free_part() const {
    TraceFreeTensor out(grid);
    out.t11 = 0.5 * (t11 - t22);
    out.t12 = t12;
    return out;
  }
  double sup_norm() const {
    const Eigen::ArrayXXd sq = t11.array().square() + 2 * t12.array().square() +
                               t22.array().square();
    return std::sqrt(sq.maxCoeff());
  }
};

/// Helmholtz potentials of a one-form: omega = d f + (*d) g with the l = 0
/// modes of both potentials zero.
struct OneFormPotentials {
  Coeffs grad_part;  // f
  Coeffs curl_part;  // g
  OneFormPotentials(int bandlimit) : grad_part(bandlimit), curl_part(bandlimit) {}
};

/// Potentials of a symmetric trace-free tensor: T = CK(d f) + CK(*d g) where
/// CK is the conformal Killing operator; modes with l <= 1 vanish
/// identically under CK and are kept at zero.
struct TensorPotentials {
  Coeffs grad_part;  // f
  Coeffs curl_part;  // g
  TensorPotentials(int bandlimit) : grad_part(bandlimit), curl_part(bandlimit) {}
};

}  // namespace unisphere
