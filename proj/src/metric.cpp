// Distributed under the MIT License.
// See LICENSE.txt for details.

#include "unisphere/metric.hpp"

#include <algorithm>
#include <cmath>

namespace unisphere {
namespace {

using Eigen::MatrixXd;

MatrixXd exp_2u(const ConformalMetric& m) {
  return synthesize(m.log_omega, m.grid).values.array().exp().square().matrix();
}

int rank_of(std::size_t n_comps) {
  int r = 0;
  while ((std::size_t{1} << r) < n_comps) ++r;
  require((std::size_t{1} << r) == n_comps,
          "frame tensor: component count is not a power of two");
  return r;
}

// Exact round-covariant derivative stacks of a symmetric 2-tensor, split
// into its trace scalar and trace-free (potential) parts. levels[k] holds
// the 2^{k+2} components of round-grad^k h, bits [d_k .. d_1 i j].
std::vector<std::vector<MatrixXd>> round_tensor_stacks(const GridPtr& grid,
                                                       const SymTensor2& h,
                                                       int extra) {
  const ScalarField tr(grid, 0.5 * (h.t11 + h.t22));
  const Coeffs tr_coeffs = analyze(tr);
  TraceFreeTensor hat(grid);
  hat.t11 = 0.5 * (h.t11 - h.t22);
  hat.t12 = h.t12;
  const TensorPotentials pot = analyze_trace_free(hat);

  std::vector<std::vector<MatrixXd>> levels(extra + 1);
  for (int k = 0; k <= extra; ++k) {
    const std::vector<MatrixXd> dhat = derivative_stack(pot, grid, k);
    const std::vector<MatrixXd> dtr = derivative_stack(tr_coeffs, grid, k);
    levels[k].resize(std::size_t{1} << (k + 2));
    for (std::size_t mask = 0; mask < levels[k].size(); ++mask) {
      const int i = static_cast<int>((mask >> 1) & 1);
      const int j = static_cast<int>(mask & 1);
      levels[k][mask] = dhat[mask];
      if (i == j) levels[k][mask] += dtr[mask >> 2];
    }
  }
  return levels;
}

void fill_pointwise(MetricData& d) {
  const MatrixXd det =
      (d.g11.cwiseProduct(d.g22) - d.g12.cwiseProduct(d.g12));
  require(d.g11.minCoeff() > 0.0 && det.minCoeff() > 0.0,
          "metric: not positive definite at some grid node");
  d.sqrt_det = det.cwiseSqrt();
  d.inv11 = d.g22.cwiseQuotient(det);
  d.inv12 = -d.g12.cwiseQuotient(det);
  d.inv22 = d.g11.cwiseQuotient(det);
  // Pointwise Cholesky g = L L^T.
  d.l11 = d.g11.cwiseSqrt();
  d.l21 = d.g12.cwiseQuotient(d.l11);
  d.l22 = (d.g22 - d.l21.cwiseProduct(d.l21)).cwiseSqrt();
}

const MatrixXd& inv_at(const MetricData& d, int k, int l) {
  return (k + l == 0) ? d.inv11 : ((k + l == 1) ? d.inv12 : d.inv22);
}

// Pointwise norm-squared of a frame tensor in the metric, via the transform
// to a g-orthonormal frame (columns of L^{-T}).
MatrixXd g_norm_squared(const MetricData& d, std::vector<MatrixXd> comps) {
  const int r = rank_of(comps.size());
  const MatrixXd m01 = -d.l21.cwiseQuotient(d.l11.cwiseProduct(d.l22));
  for (int slot = 0; slot < r; ++slot) {
    const std::size_t bit = std::size_t{1} << (r - 1 - slot);
    std::vector<MatrixXd> next(comps.size());
    for (std::size_t mask = 0; mask < comps.size(); ++mask) {
      if (mask & bit) {
        next[mask] = m01.cwiseProduct(comps[mask & ~bit]) +
                     comps[mask].cwiseQuotient(d.l22);
      } else {
        next[mask] = comps[mask].cwiseQuotient(d.l11);
      }
    }
    comps = std::move(next);
  }
  MatrixXd sq = MatrixXd::Zero(comps[0].rows(), comps[0].cols());
  for (const MatrixXd& c : comps) sq += c.cwiseProduct(c);
  return sq;
}

double graded_p_norm(const MetricData& d,
                     const std::vector<std::vector<MatrixXd>>& derivatives,
                     int first, double p) {
  double total = 0.0;
  for (std::size_t k = first; k < derivatives.size(); ++k) {
    const MatrixXd sq = g_norm_squared(d, derivatives[k]);
    const MatrixXd integrand =
        sq.array().pow(0.5 * p).matrix().cwiseProduct(d.sqrt_det);
    total += d.grid->integrate(integrand);
  }
  return std::pow(total, 1.0 / p);
}

}  // namespace

double ConformalMetric::area() const { return grid->integrate(exp_2u(*this)); }

bool PerturbedMetric::positive_definite() const {
  const MatrixXd g11 = MatrixXd::Ones(grid->n_theta(), grid->n_phi()) + h.t11;
  const MatrixXd g22 = MatrixXd::Ones(grid->n_theta(), grid->n_phi()) + h.t22;
  const MatrixXd det = g11.cwiseProduct(g22) - h.t12.cwiseProduct(h.t12);
  return g11.minCoeff() > 0.0 && det.minCoeff() > 0.0;
}

double PerturbedMetric::area() const {
  const MatrixXd g11 = MatrixXd::Ones(grid->n_theta(), grid->n_phi()) + h.t11;
  const MatrixXd g22 = MatrixXd::Ones(grid->n_theta(), grid->n_phi()) + h.t22;
  const MatrixXd det = g11.cwiseProduct(g22) - h.t12.cwiseProduct(h.t12);
  require(det.minCoeff() > 0.0, "area: metric degenerate at a node");
  return grid->integrate(det.cwiseSqrt());
}

double ChristoffelDifference::sup_norm() const {
  double s = 0.0;
  for (const auto& c : comp) s = std::max(s, c.cwiseAbs().maxCoeff());
  return s;
}

MetricData metric_data(const ConformalMetric& m) {
  MetricData d;
  d.grid = m.grid;
  const MatrixXd e2u = exp_2u(m);
  const int nt = m.grid->n_theta(), np = m.grid->n_phi();
  d.g11 = e2u;
  d.g12 = MatrixXd::Zero(nt, np);
  d.g22 = e2u;
  fill_pointwise(d);

  // Conformal connection difference: C^k_{ij} = d^k_i u_j + d^k_j u_i
  // - delta_{ij} u^k with u_a the frame derivatives of u; its round
  // derivative replaces u_a by the (exact) Hessian of u.
  const OneForm du = gradient(m.log_omega, m.grid);
  d.christoffel[0] = du.comp1;   // C^1_11
  d.christoffel[1] = du.comp2;   // C^1_12
  d.christoffel[2] = -du.comp1;  // C^1_22
  d.christoffel[3] = -du.comp2;  // C^2_11
  d.christoffel[4] = du.comp1;   // C^2_12
  d.christoffel[5] = du.comp2;   // C^2_22

  const SymTensor2 hess = hessian(m.log_omega, m.grid);
  const auto H = [&](int a, int b) -> const MatrixXd& {
    return (a + b == 0) ? hess.t11 : ((a + b == 1) ? hess.t12 : hess.t22);
  };
  for (int a = 0; a < 2; ++a)
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          MatrixXd acc = MatrixXd::Zero(nt, np);
          if (k == i) acc += H(a, j);
          if (k == j) acc += H(a, i);
          if (i == j) acc -= H(a, k);
          d.dchristoffel[8 * a + 4 * k + 2 * i + j] = std::move(acc);
        }
  return d;
}

MetricData metric_data(const PerturbedMetric& m) {
  MetricData d;
  d.grid = m.grid;
  const int nt = m.grid->n_theta(), np = m.grid->n_phi();
  d.g11 = MatrixXd::Ones(nt, np) + m.h.t11;
  d.g12 = m.h.t12;
  d.g22 = MatrixXd::Ones(nt, np) + m.h.t22;
  fill_pointwise(d);

  // C^k_{ij} = (1/2) g^{kl} S_{lij},  S_{lij} = grad_i h_{jl} + grad_j h_{il}
  // - grad_l h_{ij} (round covariant derivatives); the round derivative of C
  // adds the product-rule terms with grad g^{-1} = -g^{-1} (grad h) g^{-1}.
  const auto jets = round_tensor_stacks(m.grid, m.h, 2);
  const auto Dh = [&](int a, int i, int j) -> const MatrixXd& {
    return jets[1][4 * a + 2 * i + j];
  };
  const auto DDh = [&](int a, int b, int i, int j) -> const MatrixXd& {
    return jets[2][8 * a + 4 * b + 2 * i + j];
  };
  const auto S = [&](int l, int i, int j) {
    return MatrixXd(Dh(i, j, l) + Dh(j, i, l) - Dh(l, i, j));
  };
  const auto dS = [&](int a, int l, int i, int j) {
    return MatrixXd(DDh(a, i, j, l) + DDh(a, j, i, l) - DDh(a, l, i, j));
  };

  std::array<MatrixXd, 8> s_low;   // S_{lij}
  std::array<MatrixXd, 16> ds_low; // (grad_a S)_{lij}
  for (int l = 0; l < 2; ++l)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        s_low[4 * l + 2 * i + j] = S(l, i, j);
        for (int a = 0; a < 2; ++a)
          ds_low[8 * a + 4 * l + 2 * i + j] = dS(a, l, i, j);
      }

  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = i; j < 2; ++j) {
        MatrixXd acc = MatrixXd::Zero(nt, np);
        for (int l = 0; l < 2; ++l)
          acc += 0.5 * inv_at(d, k, l).cwiseProduct(s_low[4 * l + 2 * i + j]);
        d.christoffel[3 * k + i + j] = std::move(acc);
      }

  // grad_a (g^{-1})^{kl} = - (g^{-1})^{kp} (grad_a h)_{pq} (g^{-1})^{ql}.
  std::array<MatrixXd, 8> dinv;
  for (int a = 0; a < 2; ++a)
    for (int k = 0; k < 2; ++k)
      for (int l = k; l < 2; ++l) {
        MatrixXd acc = MatrixXd::Zero(nt, np);
        for (int p = 0; p < 2; ++p)
          for (int q = 0; q < 2; ++q)
            acc -= inv_at(d, k, p)
                       .cwiseProduct(Dh(a, p, q))
                       .cwiseProduct(inv_at(d, q, l));
        dinv[4 * a + 2 * k + l] = acc;
        dinv[4 * a + 2 * l + k] = std::move(acc);
      }
  const auto dinv_at = [&](int a, int k, int l) -> const MatrixXd& {
    return dinv[4 * a + 2 * k + l];
  };

  for (int a = 0; a < 2; ++a)
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          MatrixXd acc = MatrixXd::Zero(nt, np);
          for (int l = 0; l < 2; ++l) {
            acc += 0.5 * dinv_at(a, k, l).cwiseProduct(s_low[4 * l + 2 * i + j]);
            acc += 0.5 * inv_at(d, k, l).cwiseProduct(
                             ds_low[8 * a + 4 * l + 2 * i + j]);
          }
          d.dchristoffel[8 * a + 4 * k + 2 * i + j] = std::move(acc);
        }
  return d;
}

ScalarField gauss_curvature(const ConformalMetric& m) {
  const ScalarField lap = synthesize(laplacian(m.log_omega), m.grid);
  ScalarField K(m.grid);
  K.values = (MatrixXd::Ones(m.grid->n_theta(), m.grid->n_phi()) - lap.values)
                 .cwiseQuotient(exp_2u(m));
  return K;
}

namespace {

// Sectional curvature from MetricData: K = g(R(e1,e2)e2, e1) / det g, where
// relative to the round connection R(X,Y)Z = R_round(X,Y)Z + (grad_X C)(Y,Z)
// - (grad_Y C)(X,Z) + C(X, C(Y,Z)) - C(Y, C(X,Z)); R_round(e1,e2)e2 = e1.
ScalarField curvature_from_data(const MetricData& d) {
  const int nt = d.grid->n_theta(), np = d.grid->n_phi();
  std::array<MatrixXd, 2> R;
  for (int k = 0; k < 2; ++k) {
    R[k] = d.dc_at(0, k, 1, 1) - d.dc_at(1, k, 0, 1);
    for (int s = 0; s < 2; ++s)
      R[k] += d.c_at(k, 0, s).cwiseProduct(d.c_at(s, 1, 1)) -
              d.c_at(k, 1, s).cwiseProduct(d.c_at(s, 0, 1));
  }
  R[0] += MatrixXd::Ones(nt, np);

  ScalarField K(d.grid);
  K.values = (d.g11.cwiseProduct(R[0]) + d.g12.cwiseProduct(R[1]))
                 .cwiseQuotient(d.sqrt_det.cwiseProduct(d.sqrt_det));
  return K;
}

}  // namespace

ScalarField gauss_curvature(const PerturbedMetric& m) {
  return curvature_from_data(metric_data(m));
}

ChristoffelDifference christoffel_difference(const PerturbedMetric& g1,
                                             const PerturbedMetric& g2) {
  require(g1.grid == g2.grid, "christoffel_difference: grids differ");
  const MetricData d1 = metric_data(g1);
  const MetricData d2 = metric_data(g2);
  const GridPtr& grid = g1.grid;
  const int nt = grid->n_theta(), np = grid->n_phi();

  // grad^{(1)} g2 = round-grad h2 - C1-corrections on both slots.
  const auto jets2 = round_tensor_stacks(grid, g2.h, 1);
  const auto g2_at = [&](int i, int j) -> const MatrixXd& {
    return (i + j == 0) ? d2.g11 : ((i + j == 1) ? d2.g12 : d2.g22);
  };
  std::array<MatrixXd, 8> nabla1_g2;
  for (int a = 0; a < 2; ++a)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        MatrixXd acc = jets2[1][4 * a + 2 * i + j];
        for (int s = 0; s < 2; ++s)
          acc -= d1.c_at(s, a, i).cwiseProduct(g2_at(s, j)) +
                 d1.c_at(s, a, j).cwiseProduct(g2_at(i, s));
        nabla1_g2[4 * a + 2 * i + j] = std::move(acc);
      }
  const auto n1g2 = [&](int a, int i, int j) -> const MatrixXd& {
    return nabla1_g2[4 * a + 2 * i + j];
  };

  ChristoffelDifference out;
  out.grid = grid;
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = i; j < 2; ++j) {
        MatrixXd acc = MatrixXd::Zero(nt, np);
        for (int l = 0; l < 2; ++l)
          acc += 0.5 * inv_at(d2, k, l)
                           .cwiseProduct(n1g2(i, j, l) + n1g2(j, i, l) -
                                         n1g2(l, i, j));
        out.comp[3 * k + i + j] = std::move(acc);
      }
  return out;
}

std::vector<std::vector<MatrixXd>> covariant_derivatives(const MetricData& g,
                                                         const Coeffs& f,
                                                         int n) {
  require(n >= 0 && n <= 3, "covariant_derivatives: scalar order must be <= 3");
  std::vector<std::vector<MatrixXd>> levels(n + 1);
  levels[0] = {synthesize(f, g.grid).values};
  if (n >= 1) levels[1] = derivative_stack(f, g.grid, 1);
  if (n >= 2) {
    const std::vector<MatrixXd> s2 = derivative_stack(f, g.grid, 2);
    levels[2].resize(4);
    for (int a = 0; a < 2; ++a)
      for (int i = 0; i < 2; ++i) {
        MatrixXd acc = s2[2 * a + i];
        for (int s = 0; s < 2; ++s)
          acc -= g.c_at(s, a, i).cwiseProduct(levels[1][s]);
        levels[2][2 * a + i] = std::move(acc);
      }
  }
  if (n >= 3) {
    const std::vector<MatrixXd> s2 = derivative_stack(f, g.grid, 2);
    const std::vector<MatrixXd> s3 = derivative_stack(f, g.grid, 3);
    levels[3].resize(8);
    for (int b = 0; b < 2; ++b)
      for (int a = 0; a < 2; ++a)
        for (int i = 0; i < 2; ++i) {
          // round-grad_b of (level-2)_{ai}, then C-corrections on both
          // remaining slots.
          MatrixXd acc = s3[4 * b + 2 * a + i];
          for (int s = 0; s < 2; ++s) {
            acc -= g.dc_at(b, s, a, i).cwiseProduct(levels[1][s]) +
                   g.c_at(s, a, i).cwiseProduct(s2[2 * b + s]);
            acc -= g.c_at(s, b, a).cwiseProduct(levels[2][2 * s + i]) +
                   g.c_at(s, b, i).cwiseProduct(levels[2][2 * a + s]);
          }
          levels[3][4 * b + 2 * a + i] = std::move(acc);
        }
  }
  return levels;
}

std::vector<std::vector<MatrixXd>> covariant_derivatives(const MetricData& g,
                                                         const SymTensor2& T,
                                                         int n) {
  require(n >= 0 && n <= 2, "covariant_derivatives: tensor order must be <= 2");
  const auto jets = round_tensor_stacks(g.grid, T, n);
  std::vector<std::vector<MatrixXd>> levels(n + 1);
  levels[0] = jets[0];
  const auto T_at = [&](int i, int j) -> const MatrixXd& {
    return jets[0][2 * i + j];
  };
  if (n >= 1) {
    levels[1].resize(8);
    for (int a = 0; a < 2; ++a)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          MatrixXd acc = jets[1][4 * a + 2 * i + j];
          for (int s = 0; s < 2; ++s)
            acc -= g.c_at(s, a, i).cwiseProduct(T_at(s, j)) +
                   g.c_at(s, a, j).cwiseProduct(T_at(i, s));
          levels[1][4 * a + 2 * i + j] = std::move(acc);
        }
  }
  if (n >= 2) {
    levels[2].resize(16);
    for (int b = 0; b < 2; ++b)
      for (int a = 0; a < 2; ++a)
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) {
            MatrixXd acc = jets[2][8 * b + 4 * a + 2 * i + j];
            for (int s = 0; s < 2; ++s) {
              // round-grad_b of the level-1 correction terms.
              acc -= g.dc_at(b, s, a, i).cwiseProduct(T_at(s, j)) +
                     g.c_at(s, a, i).cwiseProduct(jets[1][4 * b + 2 * s + j]);
              acc -= g.dc_at(b, s, a, j).cwiseProduct(T_at(i, s)) +
                     g.c_at(s, a, j).cwiseProduct(jets[1][4 * b + 2 * i + s]);
              // C-corrections on the three slots of level 1.
              acc -= g.c_at(s, b, a).cwiseProduct(levels[1][4 * s + 2 * i + j]) +
                     g.c_at(s, b, i).cwiseProduct(levels[1][4 * a + 2 * s + j]) +
                     g.c_at(s, b, j).cwiseProduct(levels[1][4 * a + 2 * i + s]);
            }
            levels[2][8 * b + 4 * a + 2 * i + j] = std::move(acc);
          }
  }
  return levels;
}

double sobolev_norm(const ScalarField& f, const MetricData& g, int n, double p,
                    bool include_zeroth) {
  require(p > 1.0, "sobolev_norm: p must exceed 1");
  require(f.grid == g.grid, "sobolev_norm: field and metric grids differ");
  const auto levels = covariant_derivatives(g, analyze(f), n);
  return graded_p_norm(g, levels, include_zeroth ? 0 : 1, p);
}

double sobolev_norm(const SymTensor2& T, const MetricData& g, int n, double p,
                    bool include_zeroth) {
  require(p > 1.0, "sobolev_norm: p must exceed 1");
  require(T.grid == g.grid, "sobolev_norm: field and metric grids differ");
  const auto levels = covariant_derivatives(g, T, n);
  return graded_p_norm(g, levels, include_zeroth ? 0 : 1, p);
}

double metric_distance(const PerturbedMetric& g1, const PerturbedMetric& g2,
                       int n, double p) {
  require(g1.grid == g2.grid, "metric_distance: grids differ");
  SymTensor2 diff(g1.grid);
  diff.t11 = g2.h.t11 - g1.h.t11;
  diff.t12 = g2.h.t12 - g1.h.t12;
  diff.t22 = g2.h.t22 - g1.h.t22;
  return sobolev_norm(diff, metric_data(g1), n, p, true);
}

PerturbedMetric to_perturbed(const ConformalMetric& m) {
  PerturbedMetric out(m.grid);
  const MatrixXd factor =
      exp_2u(m) - MatrixXd::Ones(m.grid->n_theta(), m.grid->n_phi());
  out.h.t11 = factor;
  out.h.t12 = MatrixXd::Zero(m.grid->n_theta(), m.grid->n_phi());
  out.h.t22 = factor;
  return out;
}

ConformalMetric normalized_area(const ConformalMetric& m) {
  ConformalMetric out = m;
  out.log_omega.at(0, 0) +=
      0.5 * std::log(kFourPi / m.area()) * std::sqrt(kFourPi);
  return out;
}

Eigen::Vector3d sphere_point(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
          std::cos(theta)};
}

Eigen::Vector3d frame_theta(double theta, double phi) {
  return {std::cos(theta) * std::cos(phi), std::cos(theta) * std::sin(phi),
          -std::sin(theta)};
}

Eigen::Vector3d frame_phi(double /*theta*/, double phi) {
  return {-std::sin(phi), std::cos(phi), 0.0};
}

namespace {

// Colatitude/longitude of a unit vector, phi in [0, 2 pi).
void angles_of(const Eigen::Vector3d& x, double& theta, double& phi) {
  theta = std::acos(std::clamp(x[2], -1.0, 1.0));
  phi = std::atan2(x[1], x[0]);
  if (phi < 0) phi += kTwoPi;
}

}  // namespace

ConformalMetric rotation_pullback(const ConformalMetric& m,
                                  const Eigen::Matrix3d& R) {
  require((R * R.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <
              1e-12,
          "rotation_pullback: matrix is not orthogonal");
  const GridPtr& grid = m.grid;
  ScalarField pulled(grid);
  for (int i = 0; i < grid->n_theta(); ++i)
    for (int j = 0; j < grid->n_phi(); ++j) {
      double th, ph;
      angles_of(R * sphere_point(grid->theta(i), grid->phi(j)), th, ph);
      pulled.values(i, j) = synthesize_at(m.log_omega, th, ph);
    }
  ConformalMetric out(grid, analyze(pulled), m.basepoint);
  return out;
}

PerturbedMetric rotation_pullback(const PerturbedMetric& m,
                                  const Eigen::Matrix3d& R) {
  require((R * R.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <
              1e-12,
          "rotation_pullback: matrix is not orthogonal");
  const GridPtr& grid = m.grid;

  const ScalarField tr(grid, 0.5 * (m.h.t11 + m.h.t22));
  const Coeffs tr_coeffs = analyze(tr);
  TraceFreeTensor hat(grid);
  hat.t11 = 0.5 * (m.h.t11 - m.h.t22);
  hat.t12 = m.h.t12;
  const TensorPotentials pot = analyze_trace_free(hat);

  PerturbedMetric out(grid);
  for (int i = 0; i < grid->n_theta(); ++i)
    for (int j = 0; j < grid->n_phi(); ++j) {
      const double th0 = grid->theta(i), ph0 = grid->phi(j);
      double th, ph;
      angles_of(R * sphere_point(th0, ph0), th, ph);

      // Frame alignment A_{cb} = <e_c(Rx), R e_b(x)>.
      Eigen::Matrix2d A;
      const Eigen::Vector3d et = R * frame_theta(th0, ph0);
      const Eigen::Vector3d ep = R * frame_phi(th0, ph0);
      A(0, 0) = frame_theta(th, ph).dot(et);
      A(0, 1) = frame_theta(th, ph).dot(ep);
      A(1, 0) = frame_phi(th, ph).dot(et);
      A(1, 1) = frame_phi(th, ph).dot(ep);

      double hat11, hat12;
      trace_free_at(pot, th, ph, hat11, hat12);
      const double trv = synthesize_at(tr_coeffs, th, ph);
      Eigen::Matrix2d H;
      H << trv + hat11, hat12, hat12, trv - hat11;
      const Eigen::Matrix2d HP = A.transpose() * H * A;
      out.h.t11(i, j) = HP(0, 0);
      out.h.t12(i, j) = 0.5 * (HP(0, 1) + HP(1, 0));
      out.h.t22(i, j) = HP(1, 1);
    }
  return out;
}

}  // namespace unisphere
