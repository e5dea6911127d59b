// Distributed under the MIT License.
// See LICENSE.txt for details.

#pragma once

#include <Eigen/Dense>

#include "unisphere/base.hpp"

namespace unisphere {

/// Spherical-harmonic coefficients a_{l,m} for 0 <= l <= bandlimit,
/// -l <= m <= l, stored densely as complex numbers. Real-valued fields
/// satisfy the conjugate symmetry a_{l,-m} = (-1)^m conj(a_{l,m}).
class Coeffs {
 public:
  explicit Coeffs(int bandlimit)
      : bandlimit_(bandlimit),
        a_(Eigen::VectorXcd::Zero((bandlimit + 1) * (bandlimit + 1))) {
    require(bandlimit >= 0, "Coeffs: negative bandlimit");
  }

  int bandlimit() const { return bandlimit_; }
  int size() const { return static_cast<int>(a_.size()); }

  static int index(int l, int m) { return l * l + l + m; }

  Complex& at(int l, int m) { return a_[check(l, m)]; }
  const Complex& at(int l, int m) const { return a_[check(l, m)]; }

  Eigen::VectorXcd& data() { return a_; }
  const Eigen::VectorXcd& data() const { return a_; }

  /// Max deviation from the conjugate symmetry of a real field.
  double real_symmetry_defect() const {
    double defect = 0.0;
    for (int l = 0; l <= bandlimit_; ++l) {
      for (int m = 0; m <= l; ++m) {
        const double sign = (m % 2 == 0) ? 1.0 : -1.0;
        defect = std::max(defect,
                          std::abs(at(l, -m) - sign * std::conj(at(l, m))));
      }
    }
    return defect;
  }

  /// Copies into a container of different bandlimit (truncating or
  /// zero-padding).
  Coeffs resized(int new_bandlimit) const {
    Coeffs out(new_bandlimit);
    const int lmax = std::min(bandlimit_, new_bandlimit);
    for (int l = 0; l <= lmax; ++l)
      for (int m = -l; m <= l; ++m) out.at(l, m) = at(l, m);
    return out;
  }

  /// Zeroes all coefficients with l < l_min.
  void drop_below(int l_min) {
    for (int l = 0; l < std::min(l_min, bandlimit_ + 1); ++l)
      for (int m = -l; m <= l; ++m) at(l, m) = 0.0;
  }

  /// Applies a degree-dependent multiplier a_{l,m} *= factor(l).
  template <typename F>
  void scale_by_degree(F&& factor) {
    for (int l = 0; l <= bandlimit_; ++l) {
      const Complex f = factor(l);
      for (int m = -l; m <= l; ++m) at(l, m) *= f;
    }
  }

  /// Sum of |a_{l,m}|^2 (Parseval mass).
  double squared_sum() const { return a_.squaredNorm(); }

 private:
  int check(int l, int m) const {
    require(l >= 0 && l <= bandlimit_ && m >= -l && m <= l,
            "Coeffs: (l, m) out of range");
    return index(l, m);
  }

  int bandlimit_;
  Eigen::VectorXcd a_;
};

/// Coefficients of a real orthonormal-harmonic expansion -> complex
/// coefficients. Real basis convention: m = 0 keeps Y_l^0; m > 0 uses
/// sqrt(2) Re Y_l^m; m < 0 uses sqrt(2) Im Y_l^{|m|}.
Coeffs real_basis_to_complex(const Eigen::VectorXd& real_coeffs, int bandlimit);

/// Inverse of real_basis_to_complex (requires real-field symmetry).
Eigen::VectorXd complex_to_real_basis(const Coeffs& coeffs);

}  // namespace unisphere
