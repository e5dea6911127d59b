// Distributed under the MIT License.
// See LICENSE.txt for details.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "test_util.hpp"
#include "unisphere/sht.hpp"
#include "unisphere/uniformize.hpp"

using namespace unisphere;

namespace {

Coeffs single_mode(int bandlimit, int l, int m, double value) {
  Coeffs a(bandlimit);
  a.at(l, m) = value;
  if (m != 0) a.at(l, -m) = ((m % 2 == 0) ? 1.0 : -1.0) * std::conj(a.at(l, m));
  return a;
}

// Random real band-limited coefficients supported on l in [l_min, l_max].
Coeffs random_coeffs(int bandlimit, int l_min, int l_max, test_util::Rng& rng,
                     double scale = 1.0) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero((bandlimit + 1) * (bandlimit + 1));
  for (int l = l_min; l <= l_max; ++l)
    for (int m = -l; m <= l; ++m) r[l * l + l + m] = scale * rng.uniform();
  return real_basis_to_complex(r, bandlimit);
}

double sup_diff(const Coeffs& a, const Coeffs& b, const GridPtr& grid) {
  Coeffs d = a;
  d.data() -= b.data();
  return synthesize(d, grid).sup_norm();
}

}  // namespace

TEST_CASE("mobius factor: closed form, pole values, curvature one") {
  const GridPtr grid = build_grid(16);
  const double s = 0.2;

  MobiusParams params;
  params.b = Eigen::Vector3d(0.0, 0.0, s);
  const ScalarField q = mobius_factor(params, grid);
  for (int i = 0; i < grid->n_theta(); i += 3) {
    for (int j = 0; j < grid->n_phi(); j += 5) {
      const double expected =
          1.0 / (std::cosh(s) + std::sinh(s) * grid->cos_theta(i));
      CHECK(q.values(i, j) == doctest::Approx(expected).epsilon(1e-13));
    }
  }

  // Near-pole values through the band-limited representation of log Q (the
  // exact pole values are 1/(cosh s +- sinh s)).
  const Coeffs log_q = mobius_log_factor(params, grid);
  for (const double t : {0.03, kPi - 0.03}) {
    const double expected = 1.0 / (std::cosh(s) + std::sinh(s) * std::cos(t));
    CHECK(std::exp(synthesize_at(log_q, t, 0.4)) ==
          doctest::Approx(expected).epsilon(1e-12));
  }

  // e^{2 log Q} times the round metric is a pullback of the round metric, so
  // its curvature is exactly one; also exercises a rotated, generic boost.
  ConformalMetric m(grid);
  m.log_omega = log_q;
  CHECK((gauss_curvature(m).values.array() - 1.0).abs().maxCoeff() < 1e-9);

  MobiusParams generic;
  generic.b = Eigen::Vector3d(0.10, -0.15, 0.12);
  generic.rotation =
      Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, -1).normalized())
          .toRotationMatrix();
  m.log_omega = mobius_log_factor(generic, grid);
  CHECK((gauss_curvature(m).values.array() - 1.0).abs().maxCoeff() < 1e-9);

  // Coefficient decay: the degree-l coefficients of log Q fall off like
  // rho^l with rho = tanh(s/2).
  const double rho = std::tanh(s / 2.0);
  for (int l = 3; l <= 8; ++l) {
    const double ratio =
        std::abs(log_q.at(l + 1, 0)) / std::abs(log_q.at(l, 0));
    CHECK(ratio > 0.5 * rho);
    CHECK(ratio < 1.5 * rho);
  }
}

TEST_CASE("mobius log jet matches finite differences") {
  const Eigen::Vector3d b(0.11, -0.07, 0.15);
  const double theta = 1.1;
  const double phi = 2.4;

  double value = 0.0, d_theta = 0.0, d_phi = 0.0;
  mobius_log_jet(b, theta, phi, value, d_theta, d_phi);

  auto log_q = [&](double t, double p) {
    const double c = b.norm();
    const Eigen::Vector3d x = sphere_point(t, p);
    return -std::log(std::cosh(c) + std::sinh(c) / c * x.dot(b));
  };
  CHECK(value == doctest::Approx(log_q(theta, phi)).epsilon(1e-13));
  const double h = 1e-4;
  const double fd_theta =
      test_util::fd1([&](double t) { return log_q(t, phi); }, theta, h);
  const double fd_phi =
      test_util::fd1([&](double p) { return log_q(theta, p); }, phi, h) /
      std::sin(theta);
  CHECK(d_theta == doctest::Approx(fd_theta).epsilon(1e-9));
  CHECK(d_phi == doctest::Approx(fd_phi).epsilon(1e-9));
}

TEST_CASE("liouville solve: constant curvature closed forms") {
  const GridPtr grid = build_grid(16);

  // K = 1 is solved by u = 0 and the zero guess is already exact.
  ScalarField round(grid, Eigen::MatrixXd::Ones(grid->n_theta(), grid->n_phi()));
  LiouvilleResult r = solve_liouville(round, Coeffs(16));
  CHECK(r.converged);
  CHECK(r.newton_iters == 0);
  CHECK(synthesize(r.u, grid).sup_norm() < 1e-12);

  // K = e^{-2c} is solved by the constant u = c.
  const double c = 0.17;
  ScalarField scaled(grid, Eigen::MatrixXd::Constant(grid->n_theta(),
                                                     grid->n_phi(),
                                                     std::exp(-2.0 * c)));
  r = solve_liouville(scaled, Coeffs(16));
  CHECK(r.converged);
  CHECK(r.newton_iters <= 8);
  CHECK(r.residual_linf <= 1e-10);
  CHECK((synthesize(r.u, grid).values.array() - c).abs().maxCoeff() < 1e-10);

  // Nonpositive curvature is rejected.
  ScalarField bad(grid, Eigen::MatrixXd::Constant(grid->n_theta(),
                                                  grid->n_phi(), -1.0));
  CHECK_THROWS(solve_liouville(bad, Coeffs(16)));
}

TEST_CASE("liouville solve: manufactured curvature recovers the factor") {
  const GridPtr grid = build_grid(16);
  const Coeffs u_star = single_mode(16, 2, 0, 0.05);
  ConformalMetric m(grid);
  m.log_omega = u_star;
  const ScalarField k = gauss_curvature(m);

  const LiouvilleResult r = solve_liouville(k, Coeffs(16));
  CHECK(r.converged);
  CHECK(r.residual_linf <= 1e-10);
  CHECK(r.newton_iters <= 10);

  // The solution is unique only up to the Moebius gauge; compare after
  // normalizing both candidates at the same basepoint.
  const Basepoint q;
  const NormalizeResult a = normalize_at(r.u, q, grid);
  const NormalizeResult b = normalize_at(u_star, q, grid);
  CHECK(sup_diff(a.log_omega, b.log_omega, grid) < 1e-8);

  // Warm start from the solution: no further iterations needed.
  const LiouvilleResult warm = solve_liouville(k, r.u);
  CHECK(warm.converged);
  CHECK(warm.newton_iters <= 1);
}

TEST_CASE("normalize_at: boost round trip, zero jet, idempotency") {
  const GridPtr grid = build_grid(16);
  const Basepoint q{0.9, 1.7};

  // A pure boost factor is recognized exactly: u' = 0 and b recovered.
  MobiusParams truth;
  truth.b = Eigen::Vector3d(0.05, -0.08, 0.12);
  const Coeffs u = mobius_log_factor(truth, grid);
  const NormalizeResult r = normalize_at(u, q, grid);
  CHECK((r.params.b - truth.b).norm() < 1e-8);
  CHECK(synthesize(r.log_omega, grid).sup_norm() < 1e-9);
  CHECK(r.jet_residual < 1e-12);

  // Generic input: the normalized jet vanishes at q.
  test_util::Rng rng(77);
  Coeffs v = random_coeffs(16, 2, 5, rng, 0.01);
  const NormalizeResult n = normalize_at(v, q, grid);
  const PointJet jet = evaluate_jet(n.log_omega, q.theta, q.phi, 1);
  CHECK(std::abs(jet.value) < 1e-11);
  CHECK(std::hypot(jet.d1, jet.d2) < 1e-11);

  // Idempotency: renormalizing moves nothing.
  const NormalizeResult again = normalize_at(n.log_omega, q, grid);
  CHECK(again.params.b.norm() < 1e-10);
  CHECK(sup_diff(again.log_omega, n.log_omega, grid) < 1e-10);
}

TEST_CASE("uniformize: round input and manufactured input invariants") {
  const GridPtr grid = build_grid(16);

  ConformalMetric round(grid);
  const UniformizationResult r0 = uniformize(round);
  CHECK(synthesize(r0.log_omega, grid).sup_norm() < 1e-12);
  CHECK(r0.residual_linf <= 1e-10);
  for (const BoundRatio& ratio : r0.bound_ratios) CHECK(ratio.exact);

  ConformalMetric m(grid);
  m.log_omega = single_mode(16, 2, 0, 0.05);
  const UniformizationResult r = uniformize(m);
  CHECK(r.residual_linf <= 1e-10);
  CHECK(r.normalization_value <= 1e-9);
  CHECK(r.normalization_gradient <= 1e-9);

  // Recombining the normalized factor with the recorded Moebius factor
  // reproduces the input curvature.
  Coeffs recombined = r.log_omega;
  recombined.data() += mobius_log_factor(r.params, grid).data();
  ConformalMetric check(grid);
  check.log_omega = recombined;
  CHECK((gauss_curvature(check).values - r.k_in.values).cwiseAbs().maxCoeff() <
        1e-7);

  // Equivalently, removing the normalized factor from the input leaves a
  // factor of curvature exactly one (a round pullback).
  Coeffs residual_gauge = m.log_omega;
  residual_gauge.data() -= r.log_omega.data();
  check.log_omega = residual_gauge;
  CHECK((gauss_curvature(check).values.array() - 1.0).abs().maxCoeff() < 1e-8);

  for (const BoundRatio& ratio : r.bound_ratios) {
    CHECK(!ratio.exact);
    CHECK(ratio.ratio() > 0.1);
    CHECK(ratio.ratio() < 100.0);
    INFO("p = ", ratio.p, " ratio = ", ratio.ratio());
  }
}

TEST_CASE("uniformize: gauge uniqueness from different initial guesses") {
  const GridPtr grid = build_grid(16);
  test_util::Rng rng(5);
  ConformalMetric m(grid);
  m.log_omega = random_coeffs(16, 2, 4, rng, 0.01);
  const ScalarField k = gauss_curvature(m);
  const Basepoint q;

  const LiouvilleResult cold = solve_liouville(k, Coeffs(16));
  Coeffs guess = random_coeffs(16, 1, 3, rng, 0.005);
  const LiouvilleResult other = solve_liouville(k, guess);
  CHECK(cold.converged);
  CHECK(other.converged);

  const NormalizeResult a = normalize_at(cold.u, q, grid);
  const NormalizeResult b = normalize_at(other.u, q, grid);
  CHECK(sup_diff(a.log_omega, b.log_omega, grid) < 1e-8);
}

TEST_CASE("uniformize: size stability across curvature amplitudes") {
  const GridPtr grid = build_grid(16);
  test_util::Rng rng(11);
  const Coeffs profile = random_coeffs(16, 2, 4, rng);
  const double profile_sup = synthesize(profile, grid).sup_norm();

  double ratios[3] = {0.0, 0.0, 0.0};
  const double eps[3] = {0.04, 0.02, 0.01};
  for (int k = 0; k < 3; ++k) {
    ConformalMetric m(grid);
    m.log_omega = profile;
    m.log_omega.data() *= eps[k] / profile_sup;
    const UniformizationResult r = uniformize(m);
    ratios[k] = synthesize(r.log_omega, grid).sup_norm() / eps[k];
  }
  const double lo = std::min({ratios[0], ratios[1], ratios[2]});
  const double hi = std::max({ratios[0], ratios[1], ratios[2]});
  CHECK((hi - lo) / lo < 0.10);
}

TEST_CASE("uniformize: normalized factor controlled by curvature deviation") {
  const GridPtr grid = build_grid(16);
  test_util::Rng rng(23);
  double worst = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    ConformalMetric m(grid);
    m.log_omega = random_coeffs(16, 2, 4, rng, 0.012);
    const UniformizationResult r = uniformize(m);
    const double log_omega_sup = synthesize(r.log_omega, grid).sup_norm();
    const double k_dev = (r.k_in.values.array() - 1.0).abs().maxCoeff();
    worst = std::max(worst, log_omega_sup / k_dev);
  }
  INFO("measured constant: ", worst);
  CHECK(worst < 5.0);
}
