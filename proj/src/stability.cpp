// Distributed under the MIT License.
// See LICENSE.txt for details.

#include "unisphere/stability.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "unisphere/base.hpp"
#include "unisphere/sht.hpp"
#include "unisphere/uniformize.hpp"

namespace unisphere {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Round-measure quadrature weights per node, flattened as i * n_phi + j to
// match real_basis_matrix rows.
VectorXd node_weights(const GridPtr& grid) {
  VectorXd w(grid->n_theta() * grid->n_phi());
  for (int i = 0; i < grid->n_theta(); ++i)
    for (int j = 0; j < grid->n_phi(); ++j)
      w(i * grid->n_phi() + j) = grid->area_weight(i);
  return w;
}

VectorXd flatten(const MatrixXd& values, const GridPtr& grid) {
  VectorXd v(grid->n_theta() * grid->n_phi());
  for (int i = 0; i < grid->n_theta(); ++i)
    for (int j = 0; j < grid->n_phi(); ++j)
      v(i * grid->n_phi() + j) = values(i, j);
  return v;
}

// Shared tail of both spectrum overloads: solve S x = mu M x, retain the
// lowest `count` pairs, synthesize fields.
void solve_pencil(EigenDecomposition& out, const MatrixXd& stiffness,
                  const MatrixXd& mass, int count) {
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> solver(stiffness, mass);
  require(solver.info() == Eigen::Success,
          "galerkin_spectrum: generalized eigensolve failed (mass matrix not "
          "positive definite?)");
  out.eigenvalues = solver.eigenvalues().head(count);
  out.coefficients.reserve(count);
  out.fields.reserve(count);
  for (int k = 0; k < count; ++k) {
    Coeffs c = real_basis_to_complex(solver.eigenvectors().col(k),
                                     out.grid->bandlimit());
    out.fields.push_back(synthesize(c, out.grid));
    out.coefficients.push_back(std::move(c));
  }
}

}  // namespace

std::array<int, 3> EigenDecomposition::first_cluster() const {
  std::vector<int> hits;
  for (int k = 0; k < eigenvalues.size(); ++k)
    if (std::abs(eigenvalues[k] - 2.0) < 1.0) hits.push_back(k);
  require(hits.size() == 3,
          "first_cluster: expected exactly 3 eigenvalues with |mu - 2| < 1, "
          "found " +
              std::to_string(hits.size()) +
              " (metric too far from round for the cluster heuristic)");
  return {hits[0], hits[1], hits[2]};
}

double EigenDecomposition::first_cluster_gap() const {
  const std::array<int, 3> c = first_cluster();
  require(c[2] + 1 < eigenvalues.size(),
          "first_cluster_gap: decomposition too short to see the next "
          "eigenvalue");
  return eigenvalues[c[2] + 1] - eigenvalues[c[2]];
}

EigenDecomposition galerkin_spectrum(const ConformalMetric& m, int count) {
  const GridPtr& grid = m.grid;
  const int n_basis = (grid->bandlimit() + 1) * (grid->bandlimit() + 1);
  require(count > 0 && count <= n_basis,
          "galerkin_spectrum: count out of range");

  EigenDecomposition out(grid);
  const Eigen::ArrayXXd e2u =
      (2.0 * m.log_omega_field().values.array()).exp();
  out.volume_weight.values = e2u.matrix();

  const MatrixXd B = real_basis_matrix(grid);
  const VectorXd w = node_weights(grid);
  const VectorXd mass_w =
      w.cwiseProduct(flatten(out.volume_weight.values, grid));
  const MatrixXd mass = B.transpose() * mass_w.asDiagonal() * B;

  MatrixXd stiffness = MatrixXd::Zero(n_basis, n_basis);
  for (int l = 0; l <= grid->bandlimit(); ++l)
    for (int mm = -l; mm <= l; ++mm)
      stiffness(Coeffs::index(l, mm), Coeffs::index(l, mm)) =
          static_cast<double>(l) * (l + 1);

  solve_pencil(out, stiffness, mass, count);

  // Strong-form residual Lap_g v + mu v = e^{-2u} Lap v + mu v.
  for (int k = 0; k < count; ++k) {
    const Eigen::ArrayXXd lap =
        synthesize(laplacian(out.coefficients[k]), grid).values.array();
    const Eigen::ArrayXXd res =
        lap / e2u + out.eigenvalues[k] * out.fields[k].values.array();
    const double norm = std::sqrt(grid->integrate((res.square() * e2u).matrix()));
    out.max_galerkin_residual = std::max(out.max_galerkin_residual, norm);
  }
  return out;
}

EigenDecomposition galerkin_spectrum(const PerturbedMetric& m, int count) {
  const GridPtr& grid = m.grid;
  const int n_basis = (grid->bandlimit() + 1) * (grid->bandlimit() + 1);
  require(count > 0 && count <= n_basis,
          "galerkin_spectrum: count out of range");
  require(m.positive_definite(), "galerkin_spectrum: metric not positive");

  const MetricData md = metric_data(m);
  EigenDecomposition out(grid);
  out.volume_weight.values = md.sqrt_det;

  // Basis values and frame gradients at the nodes.
  const MatrixXd B = real_basis_matrix(grid);
  const int n_nodes = static_cast<int>(B.rows());
  MatrixXd G1(n_nodes, n_basis), G2(n_nodes, n_basis);
  for (int a = 0; a < n_basis; ++a) {
    VectorXd unit = VectorXd::Zero(n_basis);
    unit[a] = 1.0;
    const OneForm da =
        gradient(real_basis_to_complex(unit, grid->bandlimit()), grid);
    G1.col(a) = flatten(da.comp1, grid);
    G2.col(a) = flatten(da.comp2, grid);
  }

  const VectorXd w = node_weights(grid);
  const VectorXd vol = flatten(md.sqrt_det, grid);
  const VectorXd w11 = w.cwiseProduct(vol).cwiseProduct(flatten(md.inv11, grid));
  const VectorXd w12 = w.cwiseProduct(vol).cwiseProduct(flatten(md.inv12, grid));
  const VectorXd w22 = w.cwiseProduct(vol).cwiseProduct(flatten(md.inv22, grid));

  MatrixXd stiffness = G1.transpose() * w11.asDiagonal() * G1 +
                       G1.transpose() * w12.asDiagonal() * G2 +
                       G2.transpose() * w12.asDiagonal() * G1 +
                       G2.transpose() * w22.asDiagonal() * G2;
  stiffness = 0.5 * (stiffness + stiffness.transpose()).eval();
  const VectorXd mass_w = w.cwiseProduct(vol);
  const MatrixXd mass = B.transpose() * mass_w.asDiagonal() * B;

  solve_pencil(out, stiffness, mass, count);

  // Strong form: Lap_g v = g^{ij} (Hess_ij v - C^k_ij e_k v).
  for (int k = 0; k < count; ++k) {
    const OneForm dv = gradient(out.coefficients[k], grid);
    const SymTensor2 hv = hessian(out.coefficients[k], grid);
    Eigen::ArrayXXd lap =
        md.inv11.array() * (hv.t11 - md.c_at(0, 0, 0).cwiseProduct(dv.comp1) -
                            md.c_at(1, 0, 0).cwiseProduct(dv.comp2))
                               .array() +
        2.0 * md.inv12.array() *
            (hv.t12 - md.c_at(0, 0, 1).cwiseProduct(dv.comp1) -
             md.c_at(1, 0, 1).cwiseProduct(dv.comp2))
                .array() +
        md.inv22.array() * (hv.t22 - md.c_at(0, 1, 1).cwiseProduct(dv.comp1) -
                            md.c_at(1, 1, 1).cwiseProduct(dv.comp2))
                               .array();
    const Eigen::ArrayXXd res =
        lap + out.eigenvalues[k] * out.fields[k].values.array();
    const double norm = std::sqrt(
        grid->integrate((res.square() * md.sqrt_det.array()).matrix()));
    out.max_galerkin_residual = std::max(out.max_galerkin_residual, norm);
  }
  return out;
}

double l2_inner(const ScalarField& f, const ScalarField& h,
                const ScalarField& volume_weight) {
  return f.grid->integrate(
      (f.values.array() * h.values.array() * volume_weight.values.array())
          .matrix());
}

ScalarField project_first_eigenspace(const ScalarField& v,
                                     const EigenDecomposition& target) {
  require(target.first_cluster_gap() >= 0.5,
          "project_first_eigenspace: first eigenspace not separated "
          "(cluster gap < 0.5)");
  const std::array<int, 3> cluster = target.first_cluster();
  ScalarField out(v.grid);
  for (const int k : cluster) {
    const double c = l2_inner(v, target.fields[k], target.volume_weight);
    out.values += c * target.fields[k].values;
  }
  return out;
}

GramSchmidtResult gram_schmidt(const std::array<ScalarField, 3>& v,
                               const ScalarField& volume_weight) {
  Eigen::Matrix3d gram;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      gram(i, j) = l2_inner(v[i], v[j], volume_weight);
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(gram);
  require(es.eigenvalues().minCoeff() > 0.0 &&
              es.eigenvalues().maxCoeff() <
                  10.0 * es.eigenvalues().minCoeff(),
          "gram_schmidt: Gram matrix near-singular (condition number >= 10)");

  GramSchmidtResult out{{v[0], v[1], v[2]},
                        es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff(),
                        0.0};
  for (int pass = 0; pass < 2; ++pass) {
    for (int k = 0; k < 3; ++k) {
      for (int j = 0; j < k; ++j) {
        const double c = l2_inner(out.basis[k], out.basis[j], volume_weight);
        out.basis[k].values -= c * out.basis[j].values;
      }
      const double norm =
          std::sqrt(l2_inner(out.basis[k], out.basis[k], volume_weight));
      require(norm > 0.0, "gram_schmidt: zero vector");
      out.basis[k].values /= norm;
    }
  }
  for (int k = 0; k < 3; ++k) {
    ScalarField d(v[k].grid, v[k].values - out.basis[k].values);
    out.max_deviation =
        std::max(out.max_deviation, std::sqrt(l2_inner(d, d, volume_weight)));
  }
  return out;
}

ScalarField Embedding::squared_norm() const {
  ScalarField out(grid);
  for (const ScalarField& c : x) out.values.array() += c.values.array().square();
  return out;
}

Embedding build_embedding(const std::array<ScalarField, 3>& basis) {
  Embedding phi(basis[0].grid);
  const double scale = std::sqrt(kFourPi / 3.0);
  for (int a = 0; a < 3; ++a) phi.x[a].values = scale * basis[a].values;
  return phi;
}

SymTensor2 embedding_pullback(const Embedding& phi) {
  SymTensor2 p(phi.grid);
  for (int a = 0; a < 3; ++a) {
    const OneForm d = gradient(analyze(phi.x[a]), phi.grid);
    p.t11 += (d.comp1.array() * d.comp1.array()).matrix();
    p.t12 += (d.comp1.array() * d.comp2.array()).matrix();
    p.t22 += (d.comp2.array() * d.comp2.array()).matrix();
  }
  return p;
}

RigidMotionFit fit_rigid_motion(const Embedding& phi1, const Embedding& phi2,
                                const MetricData& g1, double p) {
  const GridPtr& grid = phi1.grid;
  require(grid == phi2.grid, "fit_rigid_motion: embeddings on different grids");

  Eigen::Matrix3d cross;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      cross(a, b) = grid->integrate((phi2.x[a].values.array() *
                                     phi1.x[b].values.array() *
                                     g1.sqrt_det.array())
                                        .matrix());

  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d sv = Eigen::Vector3d::Zero();
  sv = svd.singularValues();
  require(sv(2) > 1e-12 * sv(0),
          "fit_rigid_motion: rank-deficient cross-covariance");

  RigidMotionFit out;
  out.motion.matrix = svd.matrixU() * svd.matrixV().transpose();
  out.motion.determinant = out.motion.matrix.determinant() > 0 ? 1.0 : -1.0;

  double l2_sq = 0.0;
  Eigen::ArrayXXd sup_sq =
      Eigen::ArrayXXd::Zero(grid->n_theta(), grid->n_phi());
  double sobolev_p = 0.0;
  for (int a = 0; a < 3; ++a) {
    ScalarField diff(grid, phi2.x[a].values);
    for (int b = 0; b < 3; ++b)
      diff.values -= out.motion.matrix(a, b) * phi1.x[b].values;
    l2_sq += grid->integrate(
        (diff.values.array().square() * g1.sqrt_det.array()).matrix());
    sup_sq += diff.values.array().square();
    sobolev_p += std::pow(sobolev_norm(diff, g1, 3, p), p);
  }
  out.residual_l2 = std::sqrt(l2_sq);
  out.residual_sup = std::sqrt(sup_sq.maxCoeff());
  out.residual_sobolev = std::pow(sobolev_p, 1.0 / p);
  return out;
}

StabilityReport stability_experiment(const MetricPresentation& g1,
                                     const MetricPresentation& g2, Basepoint q,
                                     double p) {
  require(g1.chart.grid == g2.chart.grid,
          "stability_experiment: presentations must share a grid");
  require(std::abs(g1.chart.area() - kFourPi) <= 1e-8 * kFourPi,
          "stability_experiment: g1 must have area 4 pi");
  const GridPtr& grid = g1.chart.grid;

  const auto physical = [](const MetricPresentation& g) {
    if ((g.rotation - Eigen::Matrix3d::Identity()).norm() < 1e-15)
      return to_perturbed(g.chart);
    return to_perturbed(rotation_pullback(g.chart, g.rotation));
  };

  StabilityReport report;
  report.delta = metric_distance(physical(g1), physical(g2), 2, p);
  report.exact = report.delta < 1e-12;

  ConformalMetric c1 = g1.chart;
  c1.basepoint = q;
  ConformalMetric c2 = g2.chart;
  c2.basepoint = q;
  const UniformizationResult r1 = uniformize(c1);
  const UniformizationResult r2 = uniformize(c2);

  Coeffs dlog = r2.log_omega;
  dlog.data() -= r1.log_omega.data();
  report.factor_log_ratio = synthesize(dlog, grid).sup_norm();

  const MetricData md1 = metric_data(c1);
  Coeffs w1 = c1.log_omega;
  w1.data() -= r1.log_omega.data();
  Coeffs w2 = c2.log_omega;
  w2.data() -= r2.log_omega.data();
  SymTensor2 gauge_diff(grid);
  gauge_diff.t11 = ((2.0 * synthesize(w2, grid).values.array()).exp() -
                    (2.0 * synthesize(w1, grid).values.array()).exp())
                       .matrix();
  gauge_diff.t22 = gauge_diff.t11;
  report.round_gauge_distance = sobolev_norm(gauge_diff, md1, 2, p);

  const EigenDecomposition d1 = galerkin_spectrum(c1, 10);
  const EigenDecomposition d2 = galerkin_spectrum(c2, 10);
  const std::array<int, 3> cluster1 = d1.first_cluster();
  const std::array<ScalarField, 3> basis1{d1.fields[cluster1[0]],
                                          d1.fields[cluster1[1]],
                                          d1.fields[cluster1[2]]};
  const std::array<ScalarField, 3> projected{
      project_first_eigenspace(basis1[0], d2),
      project_first_eigenspace(basis1[1], d2),
      project_first_eigenspace(basis1[2], d2)};
  const GramSchmidtResult gs = gram_schmidt(projected, d2.volume_weight);

  const Embedding phi1 = build_embedding(basis1);
  const Embedding phi2 = build_embedding(gs.basis);
  report.fit = fit_rigid_motion(phi1, phi2, md1, p);
  report.motion =
      g2.rotation * report.fit.motion.matrix * g1.rotation.transpose();

  if (!report.exact) {
    report.ratio_factor = report.factor_log_ratio / report.delta;
    report.ratio_gauge = report.round_gauge_distance / report.delta;
    report.ratio_embedding = report.fit.residual_sobolev / report.delta;
  }
  return report;
}

}  // namespace unisphere
