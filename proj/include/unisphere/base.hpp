// Distributed under the MIT License.
// See LICENSE.txt for details.

#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace unisphere {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kFourPi = 4.0 * kPi;

using Complex = std::complex<double>;

/// Error thrown on violated preconditions (bad bandlimits, degenerate
/// metrics, non-convergent solves, malformed input files, ...). Carries a
/// human-readable diagnostic.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw Error(message);
}

/// Eigenvalue of the (positive) Laplace-Beltrami operator on the round
/// sphere for harmonic degree l: l(l+1).
inline double lambda_of(int l) { return static_cast<double>(l) * (l + 1); }

}  // namespace unisphere
