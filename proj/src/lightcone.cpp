// Distributed under the MIT License.
// See LICENSE.txt for details.

#include "unisphere/lightcone.hpp"

#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <vector>

#include "unisphere/base.hpp"
#include "unisphere/sht.hpp"

namespace unisphere {

namespace {

using Eigen::ArrayXXd;
using Eigen::MatrixXd;

// Coefficients of the field 1 - Lap u.
Coeffs one_minus_laplacian(const Coeffs& u) {
  Coeffs v = laplacian(u);
  v.data() = -v.data();
  v.at(0, 0) += std::sqrt(kFourPi);  // the constant 1
  return v;
}

double spherical_theta(const Eigen::Vector3d& x) {
  return std::atan2(std::hypot(x.x(), x.y()), x.z());
}

double spherical_phi(const Eigen::Vector3d& x) {
  const double p = std::atan2(x.y(), x.x());
  return p < 0 ? p + kTwoPi : p;
}

}  // namespace

XiTensor xi_from_log_factor(const Coeffs& u, const GridPtr& grid) {
  XiTensor xi(grid);
  const OneForm du = gradient(u, grid);
  const SymTensor2 h = hessian(u, grid);
  const ArrayXXd u1 = du.comp1.array();
  const ArrayXXd u2 = du.comp2.array();
  xi.full.t11 = (-1.0 + u2 * u2 - u1 * u1 + 2.0 * h.t11.array()).matrix();
  xi.full.t12 = (-2.0 * u1 * u2 + 2.0 * h.t12.array()).matrix();
  xi.full.t22 = (-1.0 + u1 * u1 - u2 * u2 + 2.0 * h.t22.array()).matrix();
  xi.trace_round.values = xi.full.trace_round();
  const TraceFreeTensor hat = xi.full.trace_free_part();
  xi.hat.t11 = hat.t11;
  xi.hat.t12 = hat.t12;
  return xi;
}

TraceFreeTensor xi_hat_from_inverse_factor(const Coeffs& u,
                                           const GridPtr& grid) {
  const ScalarField u_field = synthesize(u, grid);
  // Analyze W^{-1} - 1 rather than W^{-1}: the constant drops out of the
  // Hessian, and quadrature noise then scales with the deviation.
  ScalarField inv(grid, ((-u_field.values.array()).exp() - 1.0).matrix());
  const SymTensor2 h = hessian(analyze(inv), grid);
  const ArrayXXd omega = u_field.values.array().exp();
  TraceFreeTensor hat(grid);
  hat.t11 = (-omega * (h.t11.array() - h.t22.array())).matrix();
  hat.t12 = (-2.0 * omega * h.t12.array()).matrix();
  return hat;
}

OneForm divergence_identity_residual(const Coeffs& u, const GridPtr& grid) {
  const XiTensor xi = xi_from_log_factor(u, grid);
  const OneForm div = divergence_trace_free(xi.hat);

  // W^2 dK for W = e^u, exact for band-limited u:
  // W^2 dK = d(1 - Lap u) - 2 (1 - Lap u) du.
  const Coeffs v = one_minus_laplacian(u);
  const OneForm dv = gradient(v, grid);
  const OneForm du = gradient(u, grid);
  const ArrayXXd v_field = synthesize(v, grid).values.array();

  OneForm rho(grid);
  rho.comp1 =
      (div.comp1.array() + dv.comp1.array() - 2.0 * v_field * du.comp1.array())
          .matrix();
  rho.comp2 =
      (div.comp2.array() + dv.comp2.array() - 2.0 * v_field * du.comp2.array())
          .matrix();
  return rho;
}

ScalarField minkowski_inner(const ConeVector& a, const ConeVector& b,
                            const ScalarField& radius) {
  const ArrayXXd r2 = radius.values.array().square();
  ScalarField out(radius.grid);
  out.values = (-2.0 * (a.ubar.values.array() * b.u.values.array() +
                        a.u.values.array() * b.ubar.values.array()) +
                r2 * (a.angular.comp1.array() * b.angular.comp1.array() +
                      a.angular.comp2.array() * b.angular.comp2.array()))
                   .matrix();
  return out;
}

NullFrame lightcone_frames(const Coeffs& u, const GridPtr& grid) {
  NullFrame frame(grid);
  const ScalarField u_field = synthesize(u, grid);
  const OneForm du = gradient(u, grid);
  const ArrayXXd omega = u_field.values.array().exp();

  frame.omega.values = omega.matrix();
  frame.domega.comp1 = (omega * du.comp1.array()).matrix();
  frame.domega.comp2 = (omega * du.comp2.array()).matrix();

  frame.l.ubar.values = omega.matrix();

  const ArrayXXd grad2 = du.comp1.array().square() + du.comp2.array().square();
  frame.lbar.ubar.values = (grad2 / omega).matrix();  // W^{-3} |dW|^2
  frame.lbar.u.values = omega.inverse().matrix();
  frame.lbar.angular.comp1 =
      (2.0 * du.comp1.array() / omega.square()).matrix();
  frame.lbar.angular.comp2 =
      (2.0 * du.comp2.array() / omega.square()).matrix();

  frame.tangent1.ubar.values = frame.domega.comp1;
  frame.tangent1.angular.comp1.setOnes();
  frame.tangent2.ubar.values = frame.domega.comp2;
  frame.tangent2.angular.comp2.setOnes();
  return frame;
}

SecondForms second_forms(const Coeffs& u, const GridPtr& grid) {
  SecondForms forms(grid);
  const NullFrame frame = lightcone_frames(u, grid);
  const ArrayXXd omega = frame.omega.values.array();

  // Independent spectral route for the radius derivatives: differentiate the
  // synthesized fields W and 1/W rather than reusing the jets of u. The
  // constant baseline is removed before analysis (it drops out of every
  // derivative) so quadrature noise scales with the deviation, not with 1.
  ScalarField omega_field(grid, (omega - 1.0).matrix());
  ScalarField inv_field(grid, (omega.inverse() - 1.0).matrix());
  const OneForm domega = gradient(analyze(omega_field), grid);
  const OneForm dinv = gradient(analyze(inv_field), grid);

  // chi(t_i, t_j) = <D_{t_i} l, t_j>: from the cone connection,
  // D_{t_i} l = (e_i W) d/d_ubar + (W / r) e_i on the surface r = W.
  std::array<ConeVector, 2> dl{ConeVector(grid), ConeVector(grid)};
  dl[0].ubar.values = frame.domega.comp1;
  dl[0].angular.comp1 = (omega / omega).matrix();  // W / r on the surface
  dl[1].ubar.values = frame.domega.comp2;
  dl[1].angular.comp2 = (omega / omega).matrix();
  forms.chi.t11 =
      minkowski_inner(dl[0], frame.tangent1, frame.omega).values;
  forms.chi.t12 =
      minkowski_inner(dl[0], frame.tangent2, frame.omega).values;
  forms.chi.t22 =
      minkowski_inner(dl[1], frame.tangent2, frame.omega).values;

  // chibar(t_i, t_j) assembled from the cone connection: with
  // lbar = a d/d_ubar + b d/d_u + c^k e_k, a = W^{-3}|dW|^2, b = 1/W,
  // c_k = 2 W^{-3} (e_k W):
  //   chibar_ij = -2 (e_j W)(e_i b + (W/2) c_i)
  //               + W^2 [grad_i c_j + ((a - b)/W) delta_ij + (e_i W) c_j / W].
  const ArrayXXd w1 = domega.comp1.array();
  const ArrayXXd w2 = domega.comp2.array();
  const ArrayXXd a = (w1.square() + w2.square()) / omega.cube();
  const ArrayXXd b = omega.inverse();

  OneForm c(grid);
  c.comp1 = (2.0 * w1 / omega.cube()).matrix();
  c.comp2 = (2.0 * w2 / omega.cube()).matrix();
  // c = d(1 - W^{-2}) exactly, so its covariant derivative is a scalar
  // Hessian; this avoids the noise floor of the one-form potential solve.
  ScalarField g_field(grid, (1.0 - omega.square().inverse()).matrix());
  const SymTensor2 hess_g = hessian(analyze(g_field), grid);
  std::array<MatrixXd, 4> grad_c{hess_g.t11, hess_g.t12, hess_g.t12,
                                 hess_g.t22};  // [2i + j] = grad_i c_j

  std::array<std::array<ArrayXXd, 2>, 2> chibar;
  const std::array<ArrayXXd, 2> w{w1, w2};
  const std::array<ArrayXXd, 2> cc{c.comp1.array(), c.comp2.array()};
  const std::array<ArrayXXd, 2> db{dinv.comp1.array(), dinv.comp2.array()};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      ArrayXXd term = -2.0 * w[j] * (db[i] + 0.5 * omega * cc[i]) +
                      omega.square() * (grad_c[2 * i + j].array() +
                                        w[i] * cc[j] / omega);
      if (i == j) term += omega.square() * (a - b) / omega;
      chibar[i][j] = term;
    }
  }
  forms.chi_bar.t11 = chibar[0][0].matrix();
  forms.chi_bar.t22 = chibar[1][1].matrix();
  forms.chi_bar.t12 = (0.5 * (chibar[0][1] + chibar[1][0])).matrix();
  forms.chi_bar_asymmetry = (chibar[0][1] - chibar[1][0]).abs().maxCoeff();
  return forms;
}

StructureReport structure_equation_report(const Coeffs& u,
                                          const GridPtr& grid) {
  StructureReport report;
  ConformalMetric m(grid);
  m.log_omega = u;
  const MetricData md = metric_data(m);
  const ScalarField k = gauss_curvature(m);
  const SecondForms forms = second_forms(u, grid);

  const ArrayXXd omega2 = synthesize(u, grid).values.array().exp().square();
  const ArrayXXd tr = forms.chi_bar.t11.array() + forms.chi_bar.t22.array();

  // Gauss equation, 1212 component in the round frame (g = W^2 delta):
  // R_1212 = K det g balances -(g_11 chibar_22 + chibar_11 g_22)/2.
  report.gauss =
      (k.values.array() * omega2.square() + 0.5 * omega2 * tr).abs().maxCoeff();

  // Codazzi equation: the antisymmetrized covariant derivative vanishes.
  const auto levels = covariant_derivatives(md, forms.chi_bar, 1);
  for (int kk = 0; kk < 2; ++kk) {
    report.codazzi = std::max(
        report.codazzi,
        (levels[1][0 + 2 * 1 + kk] - levels[1][4 + 2 * 0 + kk])
            .cwiseAbs()
            .maxCoeff());
  }

  // Trace chain: K = -tr_g(chibar)/2.
  report.trace_chain =
      (k.values.array() + 0.5 * tr / omega2).abs().maxCoeff();

  // Divergence form: div_g(hat chibar) = d(tr_g chibar)/2. The gradient
  // ignores the constant -2 baseline of the trace, so remove it first.
  ScalarField trace_g(grid, (tr / omega2 + 2.0).matrix());
  SymTensor2 hat(grid);
  hat.t11 = (forms.chi_bar.t11.array() - 0.5 * tr).matrix();
  hat.t12 = forms.chi_bar.t12;
  hat.t22 = (forms.chi_bar.t22.array() - 0.5 * tr).matrix();
  const auto hat_levels = covariant_derivatives(md, hat, 1);
  const OneForm dtrace = gradient(analyze(trace_g), grid);
  const ArrayXXd div1 =
      (hat_levels[1][0] + hat_levels[1][4 + 2]).array() / omega2;
  const ArrayXXd div2 =
      (hat_levels[1][0 + 1] + hat_levels[1][4 + 2 + 1]).array() / omega2;
  const ArrayXXd res1 = div1 - 0.5 * dtrace.comp1.array();
  const ArrayXXd res2 = div2 - 0.5 * dtrace.comp2.array();
  report.divergence_form =
      std::max(res1.abs().maxCoeff(), res2.abs().maxCoeff());

  // The same residual through the round-frame identity, scaled by W^{-2}.
  const OneForm rho = divergence_identity_residual(u, grid);
  report.divergence_consistency =
      std::max((res1 - rho.comp1.array() / omega2).abs().maxCoeff(),
               (res2 - rho.comp2.array() / omega2).abs().maxCoeff());
  return report;
}

GeodesicReport geodesic_ode_check(const Coeffs& u, Basepoint q,
                                  double direction,
                                  const GridPtr& /*unused: jets are evaluated
                                                    directly from u*/,
                                  double s_max, int samples) {
  const PointJet base = evaluate_jet(u, q.theta, q.phi, 1);
  require(std::abs(base.value) <= 1e-8 &&
              std::hypot(base.d1, base.d2) <= 1e-8,
          "geodesic_ode_check: factor not normalized at the basepoint");
  require(samples >= 2 && s_max > 0.0 && s_max < kPi,
          "geodesic_ode_check: invalid sample range");

  const Eigen::Vector3d x0 = sphere_point(q.theta, q.phi);
  const Eigen::Vector3d t0 = std::cos(direction) * frame_theta(q.theta, q.phi) +
                             std::sin(direction) * frame_phi(q.theta, q.phi);
  const Eigen::Vector3d n0 = x0.cross(t0);

  // Jet of u at arc length s, rotated into the parallel frame
  // {e1 = tangent, e2 = n0} of the great circle.
  struct Sample {
    double z, dz, y;        // log W, tangent and normal derivatives
    double xi_tt, xi_tn, k;  // trace-free tensor components and curvature
  };
  auto sample_at = [&](double s) {
    const Eigen::Vector3d x = std::cos(s) * x0 + std::sin(s) * t0;
    const Eigen::Vector3d tangent = -std::sin(s) * x0 + std::cos(s) * t0;
    const double theta = spherical_theta(x);
    const double phi = spherical_phi(x);
    const Eigen::Vector3d e1 = frame_theta(theta, phi);
    const Eigen::Vector3d e2 = frame_phi(theta, phi);
    const double a = tangent.dot(e1), b = tangent.dot(e2);
    const double c = n0.dot(e1), d = n0.dot(e2);
    const PointJet jet = evaluate_jet(u, theta, phi, 2);
    Sample out;
    out.z = jet.value;
    out.dz = a * jet.d1 + b * jet.d2;
    out.y = c * jet.d1 + d * jet.d2;
    const double hat11 = jet.d2 * jet.d2 - jet.d1 * jet.d1 + jet.h11 - jet.h22;
    const double hat12 = -2.0 * jet.d1 * jet.d2 + 2.0 * jet.h12;
    out.xi_tt = (a * a - b * b) * hat11 + 2.0 * a * b * hat12;
    out.xi_tn = (a * c - b * d) * hat11 + (a * d + b * c) * hat12;
    out.k = std::exp(-2.0 * jet.value) * (1.0 - jet.h11 - jet.h22);
    return out;
  };

  // State: (y, z, v = z', w = e2(1/W), xi = W^{-1/2}, eta = xi').
  using State = std::array<double, 6>;
  auto rhs = [&](const State& state, State& dstate, double s) {
    const Sample f = sample_at(s);
    const double y = state[0], z = state[1], v = state[2];
    const double xi = state[4], eta = state[5];
    const double e2z = std::exp(2.0 * z);
    dstate[0] = v * y + 0.5 * f.xi_tn;
    dstate[1] = v;
    dstate[2] = 0.5 * (v * v - e2z + 1.0 - y * y + f.xi_tt +
                       (1.0 - f.k) * e2z);
    dstate[3] = -0.5 * std::exp(-z) * f.xi_tn;
    dstate[4] = eta;
    const double xi3 = 1.0 / (xi * xi * xi);
    dstate[5] = 0.25 * (xi3 - xi + xi * y * y - xi * f.xi_tt +
                        (f.k - 1.0) * xi3);
  };

  std::vector<double> times(samples);
  for (int i = 0; i < samples; ++i) times[i] = s_max * i / (samples - 1);

  GeodesicReport report;
  report.samples = samples;
  auto observe = [&](const State& state, double s) {
    const Sample f = sample_at(s);
    const double winv = std::exp(-f.z);
    report.max_dev_normal_derivative =
        std::max(report.max_dev_normal_derivative, std::abs(state[0] - f.y));
    report.max_dev_log_factor =
        std::max(report.max_dev_log_factor, std::abs(state[1] - f.z));
    report.max_dev_tangent_derivative =
        std::max(report.max_dev_tangent_derivative, std::abs(state[2] - f.dz));
    report.max_dev_inverse_normal = std::max(
        report.max_dev_inverse_normal, std::abs(state[3] - (-winv * f.y)));
    report.max_dev_inverse_sqrt = std::max(
        report.max_dev_inverse_sqrt, std::abs(state[4] - std::sqrt(winv)));
    report.sup_log_factor = std::max(report.sup_log_factor, std::abs(f.z));
  };

  State state{0.0, 0.0, 0.0, 0.0, 1.0, 0.0};
  namespace odeint = boost::numeric::odeint;
  auto stepper = odeint::make_controlled(
      1e-10, 1e-10, odeint::runge_kutta_dopri5<State>());
  odeint::integrate_times(stepper, rhs, state, times.begin(), times.end(),
                          1e-3, observe);
  return report;
}

EstimateReport estimate_ratio_report(const std::vector<ConformalMetric>& members,
                                     double p, double q, double r, double k) {
  EstimateReport report;
  report.l2.applicable = (1.0 / p + 1.0 / q < 1.0 - 1e-12) && p >= 2.0;
  if (!report.l2.applicable) {
    report.l2.skip_reason = "requires 1/p + 1/q < 1 and p >= 2";
  }
  report.lp.applicable =
      std::abs(1.0 / q + 1.0 / r - 0.5 - 1.0 / p) <= 1e-12 && q >= p;
  if (!report.lp.applicable) {
    report.lp.skip_reason = "requires 1/q + 1/r = 1/2 + 1/p and q >= p";
  }

  for (const ConformalMetric& m : members) {
    const GridPtr& grid = m.grid;
    ConformalMetric round(grid);
    const MetricData md = metric_data(round);

    const XiTensor xi = xi_from_log_factor(m.log_omega, grid);
    SymTensor2 hat(grid);
    hat.t11 = xi.hat.t11;
    hat.t12 = xi.hat.t12;
    hat.t22 = -xi.hat.t11;

    ScalarField omega2(grid,
                       (2.0 * synthesize(m.log_omega, grid).values.array())
                           .exp()
                           .matrix());
    ScalarField k_dev = gauss_curvature(m);
    k_dev.values.array() -= k;

    if (report.l2.applicable) {
      const double denom =
          sobolev_norm(omega2, md, 1, q) * sobolev_norm(k_dev, md, 0, p);
      const bool exact = sobolev_norm(k_dev, md, 0, p) < 1e-11;
      const double ratio = exact ? 0.0 : sobolev_norm(hat, md, 0, 2) / denom;
      report.l2.ratios.push_back(ratio);
      report.l2.exact.push_back(exact);
      report.l2.max_ratio = std::max(report.l2.max_ratio, ratio);
    }
    if (report.lp.applicable) {
      const double denom =
          sobolev_norm(omega2, md, 1, r) * sobolev_norm(k_dev, md, 0, q);
      const bool exact = sobolev_norm(k_dev, md, 0, q) < 1e-11;
      const double ratio = exact ? 0.0 : sobolev_norm(hat, md, 0, p) / denom;
      report.lp.ratios.push_back(ratio);
      report.lp.exact.push_back(exact);
      report.lp.max_ratio = std::max(report.lp.max_ratio, ratio);
    }
  }
  return report;
}

}  // namespace unisphere
