// Distributed under the MIT License.
// See LICENSE.txt for details.

#include "unisphere/random.hpp"

#include <cmath>
#include <random>

#include "unisphere/base.hpp"
#include "unisphere/sht.hpp"

namespace unisphere {

namespace {

// Portable normal deviates: mt19937_64 has a fixed bit stream, and the
// explicit uniform mapping + Box-Muller below avoids the
// implementation-defined std::*_distribution algorithms.
class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed) : eng_(seed) {}

  double operator()() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * kPi * u2);
  }

 private:
  double uniform() { return (eng_() >> 11) * 0x1.0p-53; }  // in [0, 1)
  std::mt19937_64 eng_;
};

// Random real coefficients on degrees [2, l_max] with variance l^{-4},
// drawn in a fixed (l, m) order.
Coeffs sample_band(NormalSource& normal, int bandlimit, int l_max) {
  Eigen::VectorXd real_coeffs =
      Eigen::VectorXd::Zero((bandlimit + 1) * (bandlimit + 1));
  for (int l = 2; l <= l_max; ++l) {
    const double sigma = 1.0 / (static_cast<double>(l) * l);
    for (int m = -l; m <= l; ++m)
      real_coeffs[Coeffs::index(l, m)] = sigma * normal();
  }
  return real_basis_to_complex(real_coeffs, bandlimit);
}

double sup_curvature_deviation(const Coeffs& u, const GridPtr& grid) {
  ConformalMetric m(grid, u);
  ScalarField k = gauss_curvature(m);
  k.values.array() -= 1.0;
  return k.sup_norm();
}

}  // namespace

ConformalMetric random_conformal_metric(const GridPtr& grid,
                                        std::uint64_t seed, double epsilon,
                                        int l_max) {
  require(epsilon >= 0.0 && epsilon <= 0.2,
          "random_conformal_metric: epsilon must lie in [0, 0.2]");
  require(l_max >= 2 && l_max <= grid->bandlimit(),
          "random_conformal_metric: l_max out of range");
  if (epsilon == 0.0) return ConformalMetric(grid);

  NormalSource normal(seed);
  const Coeffs shape = sample_band(normal, grid->bandlimit(), l_max);

  // sup|K - 1| is nonlinear in the amplitude; a secant iteration on the
  // scale factor hits the target well inside the 5% contract.
  double t = epsilon / sup_curvature_deviation(shape, grid);
  Coeffs u = shape;
  u.data() *= t;
  double f = sup_curvature_deviation(u, grid) - epsilon;
  double t_prev = 0.0, f_prev = -epsilon;
  for (int iter = 0; iter < 12 && std::abs(f) > 0.01 * epsilon; ++iter) {
    const double t_next = t - f * (t - t_prev) / (f - f_prev);
    t_prev = t;
    f_prev = f;
    t = t_next;
    u = shape;
    u.data() *= t;
    f = sup_curvature_deviation(u, grid) - epsilon;
  }
  require(std::abs(f) <= 0.05 * epsilon,
          "random_conformal_metric: curvature rescaling did not converge");
  return ConformalMetric(grid, u);
}

PerturbedMetric random_perturbed_metric(const GridPtr& grid,
                                        std::uint64_t seed, double epsilon,
                                        int l_max) {
  require(epsilon >= 0.0 && epsilon <= 0.2,
          "random_perturbed_metric: epsilon must lie in [0, 0.2]");
  require(l_max >= 2 && l_max <= grid->bandlimit(),
          "random_perturbed_metric: l_max out of range");
  PerturbedMetric out(grid);
  if (epsilon == 0.0) return out;

  NormalSource normal(seed);
  const Coeffs trace = sample_band(normal, grid->bandlimit(), l_max);
  TensorPotentials pots(grid->bandlimit());
  pots.grad_part = sample_band(normal, grid->bandlimit(), l_max);
  pots.curl_part = sample_band(normal, grid->bandlimit(), l_max);

  const ScalarField a = synthesize(trace, grid);
  const TraceFreeTensor tf = synthesize_trace_free(pots, grid);
  out.h.t11 = a.values + tf.t11;
  out.h.t12 = tf.t12;
  out.h.t22 = a.values - tf.t11;

  // The frame sup norm is linear in the amplitude: one exact rescale.
  const double scale = epsilon / out.h.sup_norm();
  out.h.t11 *= scale;
  out.h.t12 *= scale;
  out.h.t22 *= scale;
  require(out.positive_definite(),
          "random_perturbed_metric: perturbation not positive definite");
  return out;
}

}  // namespace unisphere
