// Distributed under the MIT License.
// See LICENSE.txt for details.

#include "unisphere/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "unisphere/lightcone.hpp"
#include "unisphere/random.hpp"
#include "unisphere/sht.hpp"
#include "unisphere/uniformize.hpp"

namespace unisphere {

namespace {

// Anchor strings tying records to the statements they realize.
constexpr const char* kAnchorDivergence = "the divergence identity for";
constexpr const char* kAnchorEquivalence =
    "follows from the above lemma and the formula";
constexpr const char* kAnchorSecondForms =
    "we define the second fundamental forms";
constexpr const char* kAnchorConjugacy = "the conjugate condition";
constexpr const char* kAnchorTraceChain = "The Gauss curvature $K$ of";
constexpr const char* kAnchorGauss = "The Gauss equation:";
constexpr const char* kAnchorCodazzi = "The Codazzi equation:";
constexpr const char* kAnchorGeodesic = "Solving this equation gives";
constexpr const char* kAnchorEstimates = "There exists a constant $c_{p,q}$";
constexpr const char* kAnchorLiouville = "satisfies the equation";
constexpr const char* kAnchorNormalization =
    "Q(q) = Ω′(q), d log Q(q) = d log Ω′(q)";
constexpr const char* kAnchorFactorBound =
    "‖Ω − 1‖_{g,2,p} ≤ c_p ‖K − 1‖_{g,0,p}";
constexpr const char* kAnchorFactorConstant =
    "there exists a positive constant";
constexpr const char* kAnchorUniqueFactor =
    "there exists a unique conformal factor";
constexpr const char* kAnchorEigen = "the eigenvalue equations for";
constexpr const char* kAnchorRoundSpectrum =
    "spherical harmonic functions of degree $l$";
constexpr const char* kAnchorProjection = "denote the orthogonal projection of";
constexpr const char* kAnchorAlmostOrtho = "Furthermore, there exists a unit";
constexpr const char* kAnchorStabilityFactor =
    "The uniformization conformal factor";
constexpr const char* kAnchorStabilityEmbedding =
    "Let $\\Phi_a$ be the isometric embedding";
constexpr const char* kAnchorRigidMotion = "a rigid motion $O \\in O(3)$";
constexpr const char* kAnchorDistance = "‖g₂ − g₁‖_{g₁,2,p} ≤ δ";

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double relative_spread(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  const double hi = *std::max_element(values.begin(), values.end());
  const double lo = *std::min_element(values.begin(), values.end());
  return hi > 0.0 ? (hi - lo) / hi : 0.0;
}

Coeffs single_mode(int bandlimit, double amplitude) {
  Coeffs c(bandlimit);
  c.at(2, 0) = amplitude;
  return c;
}

// Analytic (non-band-limited) conformal factor whose harmonic coefficients
// decay geometrically: the Legendre generating function with t = 0.45.
Coeffs analytic_profile(const GridPtr& grid) {
  ScalarField f(grid);
  for (int i = 0; i < grid->n_theta(); ++i) {
    const double v =
        0.05 / std::sqrt(1.0 - 0.9 * grid->cos_theta(i) + 0.45 * 0.45);
    for (int j = 0; j < grid->n_phi(); ++j) f.values(i, j) = v;
  }
  return analyze(f);
}

double divergence_residual_sup(const Coeffs& u, const GridPtr& grid) {
  return divergence_identity_residual(u, grid).sup_norm();
}

std::uint64_t member_seed(std::uint64_t base, int index) {
  return base + 1000003ull * static_cast<std::uint64_t>(index + 1);
}

ScalarField real_harmonic(const GridPtr& grid, int l, int m) {
  const int bandlimit = grid->bandlimit();
  Eigen::VectorXd unit =
      Eigen::VectorXd::Zero((bandlimit + 1) * (bandlimit + 1));
  unit(Coeffs::index(l, m)) = 1.0;
  return synthesize(real_basis_to_complex(unit, bandlimit), grid);
}

double max_component_diff(const SymTensor2& a, const SymTensor2& b) {
  return std::max({(a.t11 - b.t11).cwiseAbs().maxCoeff(),
                   (a.t12 - b.t12).cwiseAbs().maxCoeff(),
                   (a.t22 - b.t22).cwiseAbs().maxCoeff()});
}

}  // namespace

CheckRecord& Report::add(const std::string& name, const std::string& anchor,
                         double value, double tolerance) {
  CheckRecord rec;
  rec.name = name;
  rec.anchor = anchor;
  rec.value = value;
  rec.tolerance = tolerance;
  rec.pass = value <= tolerance;
  records.push_back(std::move(rec));
  return records.back();
}

bool Report::all_pass() const {
  for (const CheckRecord& r : records)
    if (!r.pass) return false;
  return true;
}

Json report_to_json(const Report& report) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["environment"] = Json{{"version", kLibraryVersion},
                          {"bandlimit", report.bandlimit},
                          {"seed", report.seed}};
  Json records = Json::array();
  for (const CheckRecord& r : report.records) {
    Json rec;
    rec["name"] = r.name;
    rec["paper_anchor"] = r.anchor;
    rec["value"] = r.value;
    rec["tolerance"] = r.tolerance;
    rec["pass"] = r.pass;
    if (r.epsilon >= 0.0) rec["epsilon"] = r.epsilon;
    if (r.bandlimit > 0) rec["bandlimit"] = r.bandlimit;
    records.push_back(std::move(rec));
  }
  j["records"] = std::move(records);
  j["timing"] = Json{{"seconds", report.seconds}};
  return j;
}

Report report_from_json(const Json& j) {
  require(j.is_object() && j.contains("schema") &&
              j["schema"].get<std::string>() == kSchemaVersion,
          "report: missing or unsupported schema version");
  require(j.contains("environment") && j.contains("records"),
          "report: missing environment or records");
  Report rep;
  rep.bandlimit = j["environment"]["bandlimit"].get<int>();
  rep.seed = j["environment"]["seed"].get<std::uint64_t>();
  if (j.contains("timing") && j["timing"].contains("seconds"))
    rep.seconds = j["timing"]["seconds"].get<double>();
  for (const Json& rec : j["records"]) {
    CheckRecord r;
    r.name = rec.at("name").get<std::string>();
    r.anchor = rec.at("paper_anchor").get<std::string>();
    r.value = rec.at("value").get<double>();
    r.tolerance = rec.at("tolerance").get<double>();
    r.pass = rec.at("pass").get<bool>();
    if (rec.contains("epsilon")) r.epsilon = rec["epsilon"].get<double>();
    if (rec.contains("bandlimit")) r.bandlimit = rec["bandlimit"].get<int>();
    rep.records.push_back(std::move(r));
  }
  return rep;
}

std::string emit_table(const Report& report, const std::string& which) {
  std::string out;
  if (which == "constants") {
    out = "check,epsilon,ratio,paper_anchor\n";
    for (const CheckRecord& r : report.records) {
      if (r.epsilon < 0.0) continue;
      out += csv_escape(r.name) + "," + format_double(r.epsilon) + "," +
             format_double(r.value) + "," + csv_escape(r.anchor) + "\n";
    }
    return out;
  }
  if (which == "convergence") {
    out = "check,bandlimit,residual,paper_anchor\n";
    for (const CheckRecord& r : report.records) {
      if (r.bandlimit <= 0) continue;
      out += csv_escape(r.name) + "," + std::to_string(r.bandlimit) + "," +
             format_double(r.value) + "," + csv_escape(r.anchor) + "\n";
    }
    return out;
  }
  throw Error("emit_table: unknown table kind \"" + which +
              "\" (expected constants or convergence)");
}

Report uniformize_report(const ConformalMetric& m, double tolerance_scale) {
  const double s = tolerance_scale;
  Report rep;
  rep.bandlimit = m.grid->bandlimit();
  const auto t0 = std::chrono::steady_clock::now();

  const UniformizationResult r = uniformize(m);
  rep.add("liouville-residual", kAnchorLiouville, r.residual_linf, 1e-9 * s);
  rep.add("normalization-value", kAnchorNormalization, r.normalization_value,
          1e-9 * s);
  rep.add("normalization-gradient", kAnchorNormalization,
          r.normalization_gradient, 1e-9 * s);
  for (const BoundRatio& br : r.bound_ratios) {
    std::ostringstream name;
    name << "factor-bound-ratio-p" << br.p;
    rep.add(name.str(), kAnchorFactorBound, br.ratio(), 10.0 * s);
  }

  rep.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rep;
}

Report identities_report(const ConformalMetric& m,
                         const IdentityOptions& options) {
  const double s = options.tolerance_scale;
  const GridPtr& grid = m.grid;
  const Coeffs& u = m.log_omega;
  Report rep;
  rep.bandlimit = grid->bandlimit();
  const auto t0 = std::chrono::steady_clock::now();

  rep.add("divergence-identity-residual", kAnchorDivergence,
          divergence_residual_sup(u, grid), 1e-8 * s);

  const XiTensor xi = xi_from_log_factor(u, grid);
  const SecondForms forms = second_forms(u, grid);
  rep.add("chibar-equals-xi", kAnchorEquivalence,
          max_component_diff(forms.chi_bar, xi.full), 1e-9 * s);

  const Eigen::ArrayXXd om2 =
      (2.0 * m.log_omega_field().values.array()).exp();
  const double chi_dev =
      std::max({(forms.chi.t11.array() - om2).abs().maxCoeff(),
                forms.chi.t12.cwiseAbs().maxCoeff(),
                (forms.chi.t22.array() - om2).abs().maxCoeff()});
  rep.add("chi-equals-induced-metric", kAnchorSecondForms, chi_dev, 1e-9 * s);

  const NullFrame frame = lightcone_frames(u, grid);
  const ScalarField conj = minkowski_inner(frame.lbar, frame.l, frame.omega);
  rep.add("null-conjugacy", kAnchorConjugacy,
          (conj.values.array() + 2.0).abs().maxCoeff(), 1e-10 * s);

  const StructureReport sr = structure_equation_report(u, grid);
  rep.add("curvature-trace-relation", kAnchorTraceChain, sr.trace_chain,
          1e-9 * s);
  rep.add("gauss-equation", kAnchorGauss, sr.gauss, 1e-7 * s);
  rep.add("codazzi-equation", kAnchorCodazzi, sr.codazzi, 1e-7 * s);
  rep.add("divergence-form-consistency", kAnchorDivergence,
          sr.divergence_consistency, 1e-9 * s);

  if (options.geodesic_directions > 0) {
    // The ODEs describe a factor with vanishing 1-jet at the basepoint;
    // normalize first.
    const Coeffs u_norm = normalize_at(u, m.basepoint, grid).log_omega;
    double worst = 0.0;
    for (int k = 0; k < options.geodesic_directions; ++k) {
      const double direction = kTwoPi * k / options.geodesic_directions;
      const GeodesicReport gr =
          geodesic_ode_check(u_norm, m.basepoint, direction, grid);
      worst = std::max({worst, gr.max_dev_normal_derivative,
                        gr.max_dev_log_factor, gr.max_dev_tangent_derivative,
                        gr.max_dev_inverse_normal, gr.max_dev_inverse_sqrt});
    }
    rep.add("geodesic-ode-consistency", kAnchorGeodesic, worst, 1e-6 * s);
  }

  if (options.estimate_ratios) {
    const EstimateReport er = estimate_ratio_report(
        {m}, options.p, options.q, options.r, options.k);
    require(er.l2.applicable || er.lp.applicable,
            "estimate exponents invalid: " + er.l2.skip_reason + "; " +
                er.lp.skip_reason);
    if (er.l2.applicable)
      rep.add("estimate-ratio-l2", kAnchorEstimates, er.l2.max_ratio,
              10.0 * s);
    if (er.lp.applicable)
      rep.add("estimate-ratio-lp", kAnchorEstimates, er.lp.max_ratio,
              10.0 * s);
  }

  rep.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rep;
}

Report spectrum_report(const MetricFile& m, int count, double tolerance_scale,
                       Eigen::VectorXd* eigenvalues) {
  const double s = tolerance_scale;
  Report rep;
  rep.bandlimit = m.grid()->bandlimit();
  const auto t0 = std::chrono::steady_clock::now();

  bool round = false;
  EigenDecomposition d(m.grid());
  if (m.is_conformal()) {
    const ConformalMetric& cm = std::get<ConformalMetric>(m.metric);
    round = cm.log_omega.data().norm() == 0.0;
    d = galerkin_spectrum(cm, count);
  } else {
    const PerturbedMetric& pm = std::get<PerturbedMetric>(m.metric);
    round = pm.h.sup_norm() == 0.0;
    d = galerkin_spectrum(pm, count);
  }
  if (eigenvalues) *eigenvalues = d.eigenvalues;

  rep.add("galerkin-residual", kAnchorEigen, d.max_galerkin_residual,
          1e-8 * s);
  try {
    const std::array<int, 3> cluster = d.first_cluster();
    double dev = 0.0;
    for (const int k : cluster)
      dev = std::max(dev, std::abs(d.eigenvalues[k] - 2.0));
    rep.add("first-cluster-deviation", kAnchorEigen, dev, 1.0 * s);
    rep.add("first-cluster-gap-deficit", kAnchorEigen,
            std::max(0.0, 3.0 - d.first_cluster_gap()), 0.0);
  } catch (const Error&) {
    rep.add("first-cluster-resolved", kAnchorEigen, 1.0, 0.0);
  }

  if (round && count >= 36 && rep.bandlimit >= 16) {
    double dev = 0.0;
    int k = 0;
    for (int l = 0; l <= 5; ++l)
      for (int mm = -l; mm <= l; ++mm, ++k)
        dev = std::max(dev, std::abs(d.eigenvalues[k] - lambda_of(l)));
    rep.add("round-spectrum-deviation", kAnchorRoundSpectrum, dev, 1e-10 * s);
  }

  rep.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rep;
}

Report stability_report(const MetricPresentation& g1,
                        const MetricPresentation& g2, Basepoint q, double p,
                        double tolerance_scale) {
  const double s = tolerance_scale;
  Report rep;
  rep.bandlimit = g1.chart.grid->bandlimit();
  const auto t0 = std::chrono::steady_clock::now();

  const StabilityReport sr = stability_experiment(g1, g2, q, p);
  rep.add("metric-distance", kAnchorDistance, sr.delta, 0.5);
  rep.add("factor-log-ratio", kAnchorStabilityFactor, sr.ratio_factor,
          10.0 * s);
  rep.add("round-gauge-ratio", kAnchorStabilityFactor, sr.ratio_gauge,
          10.0 * s);
  rep.add("embedding-residual-ratio", kAnchorStabilityEmbedding,
          sr.ratio_embedding, 10.0 * s);
  rep.add("rigid-motion-orthogonality", kAnchorRigidMotion,
          (sr.fit.motion.matrix.transpose() * sr.fit.motion.matrix -
           Eigen::Matrix3d::Identity())
              .norm(),
          1e-12 * s);

  rep.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rep;
}

Report run_suite(const SuiteConfig& config) {
  const double s = config.tolerance_scale;
  Report rep;
  rep.bandlimit = config.bandlimit;
  rep.seed = config.seed;
  const auto t0 = std::chrono::steady_clock::now();
  const GridPtr grid = build_grid(config.bandlimit);
  const Basepoint q{};

  // --- Divergence identity: spectral convergence and manufactured mode ---
  {
    double res12 = 0.0, res24 = 0.0;
    for (const int level : {8, 12, 16, 24, 32}) {
      const GridPtr g = build_grid(level);
      const double res = divergence_residual_sup(analytic_profile(g), g);
      if (level == 12) res12 = res;
      if (level == 24) res24 = res;
      rep.add("divergence-identity-analytic", kAnchorDivergence, res,
              level >= 32 ? 1e-8 * s : 1.0)
          .bandlimit = level;
    }
    rep.add("divergence-identity-decay", kAnchorDivergence, res24 / res12,
            1e-3 * s);
    const GridPtr g32 = build_grid(32);
    rep.add("divergence-identity-mode", kAnchorDivergence,
            divergence_residual_sup(single_mode(32, 0.05), g32), 1e-8 * s);
  }

  // --- Round spectrum ---
  {
    const EigenDecomposition d =
        galerkin_spectrum(ConformalMetric(grid), 36);
    double dev = 0.0;
    int k = 0;
    for (int l = 0; l <= 5; ++l)
      for (int mm = -l; mm <= l; ++mm, ++k)
        dev = std::max(dev, std::abs(d.eigenvalues[k] - lambda_of(l)));
    rep.add("round-spectrum-deviation", kAnchorRoundSpectrum, dev, 1e-10 * s);
    rep.add("round-galerkin-residual", kAnchorEigen, d.max_galerkin_residual,
            1e-8 * s);
  }

  // --- Manufactured round trip and geodesic consistency ---
  {
    const Coeffs u_star =
        normalize_at(single_mode(config.bandlimit, 0.05), q, grid).log_omega;
    const ConformalMetric m(grid, u_star, q);
    const UniformizationResult r = uniformize(m);
    Coeffs diff = r.log_omega;
    diff.data() -= u_star.data();
    rep.add("manufactured-round-trip", kAnchorUniqueFactor,
            synthesize(diff, grid).sup_norm(), 1e-8 * s);

    double worst = 0.0;
    for (int k = 0; k < 8; ++k) {
      const GeodesicReport gr =
          geodesic_ode_check(u_star, q, kTwoPi * k / 8, grid);
      worst = std::max({worst, gr.max_dev_normal_derivative,
                        gr.max_dev_log_factor, gr.max_dev_tangent_derivative,
                        gr.max_dev_inverse_normal, gr.max_dev_inverse_sqrt});
    }
    rep.add("geodesic-ode-consistency", kAnchorGeodesic, worst, 1e-6 * s);
  }

  // --- Lightcone identity residuals over the ensemble at epsilon 0.05 ---
  if (config.ensemble > 0) {
    double chibar = 0.0, chi = 0.0, conj = 0.0, trace = 0.0, gauss = 0.0,
           codazzi = 0.0, divres = 0.0;
    for (int i = 0; i < config.ensemble; ++i) {
      const ConformalMetric m = random_conformal_metric(
          grid, member_seed(config.seed, i), 0.05);
      const Coeffs& u = m.log_omega;
      const XiTensor xi = xi_from_log_factor(u, grid);
      const SecondForms forms = second_forms(u, grid);
      chibar = std::max(chibar, max_component_diff(forms.chi_bar, xi.full));
      const Eigen::ArrayXXd om2 =
          (2.0 * m.log_omega_field().values.array()).exp();
      chi = std::max(
          chi, std::max({(forms.chi.t11.array() - om2).abs().maxCoeff(),
                         forms.chi.t12.cwiseAbs().maxCoeff(),
                         (forms.chi.t22.array() - om2).abs().maxCoeff()}));
      const NullFrame frame = lightcone_frames(u, grid);
      conj = std::max(
          conj, (minkowski_inner(frame.lbar, frame.l, frame.omega)
                     .values.array() +
                 2.0)
                    .abs()
                    .maxCoeff());
      const StructureReport sr = structure_equation_report(u, grid);
      trace = std::max(trace, sr.trace_chain);
      gauss = std::max(gauss, sr.gauss);
      codazzi = std::max(codazzi, sr.codazzi);
      divres = std::max(divres, divergence_residual_sup(u, grid));
    }
    rep.add("ensemble-chibar-equals-xi", kAnchorEquivalence, chibar,
            1e-9 * s);
    rep.add("ensemble-chi-equals-induced-metric", kAnchorSecondForms, chi,
            1e-9 * s);
    rep.add("ensemble-null-conjugacy", kAnchorConjugacy, conj, 1e-10 * s);
    rep.add("ensemble-curvature-trace-relation", kAnchorTraceChain, trace,
            1e-9 * s);
    rep.add("ensemble-gauss-equation", kAnchorGauss, gauss, 1e-7 * s);
    rep.add("ensemble-codazzi-equation", kAnchorCodazzi, codazzi, 1e-7 * s);
    rep.add("ensemble-divergence-identity", kAnchorDivergence, divres,
            1e-8 * s);
  }

  // --- Effective-bound constants and a priori estimate ratios per epsilon ---
  if (config.ensemble > 0 && !config.epsilons.empty()) {
    std::vector<double> sup_ratios, sobolev_ratios, estimate_ratios;
    double jet_value = 0.0, jet_gradient = 0.0;
    for (const double eps : config.epsilons) {
      std::vector<ConformalMetric> members;
      members.reserve(config.ensemble);
      for (int i = 0; i < config.ensemble; ++i)
        members.push_back(random_conformal_metric(
            grid, member_seed(config.seed, i), eps));

      double sup_ratio = 0.0, sobolev_ratio = 0.0;
      for (const ConformalMetric& m : members) {
        const UniformizationResult r = uniformize(m);
        sup_ratio = std::max(
            sup_ratio, synthesize(r.log_omega, grid).sup_norm() / eps);
        for (const BoundRatio& br : r.bound_ratios)
          if (br.p == 4.0) sobolev_ratio = std::max(sobolev_ratio, br.ratio());
        jet_value = std::max(jet_value, r.normalization_value);
        jet_gradient = std::max(jet_gradient, r.normalization_gradient);
      }
      rep.add("factor-sup-ratio", kAnchorFactorConstant, sup_ratio, 10.0 * s)
          .epsilon = eps;
      rep.add("sobolev-bound-ratio-p4", kAnchorFactorBound, sobolev_ratio,
              10.0 * s)
          .epsilon = eps;
      sup_ratios.push_back(sup_ratio);
      sobolev_ratios.push_back(sobolev_ratio);

      const EstimateReport er = estimate_ratio_report(members, 4, 4, 4, 1);
      rep.add("estimate-ratio-l2", kAnchorEstimates, er.l2.max_ratio,
              10.0 * s)
          .epsilon = eps;
      estimate_ratios.push_back(er.l2.max_ratio);
    }
    rep.add("factor-constant-stability", kAnchorFactorConstant,
            relative_spread(sup_ratios), 0.10 * s);
    rep.add("sobolev-constant-stability", kAnchorFactorBound,
            relative_spread(sobolev_ratios), 0.10 * s);
    rep.add("estimate-constant-stability", kAnchorEstimates,
            relative_spread(estimate_ratios), 0.20 * s);
    rep.add("normalization-value-max", kAnchorNormalization, jet_value,
            1e-9 * s);
    rep.add("normalization-gradient-max", kAnchorNormalization, jet_gradient,
            1e-9 * s);
  }

  // --- Eigenspace projection constants per delta ---
  if (config.ensemble > 0) {
    const ScalarField v = real_harmonic(grid, 1, 0);
    std::vector<double> proj_ratios, ortho_ratios;
    for (const double delta : {0.02, 0.01}) {
      double proj_ratio = 0.0, ortho_ratio = 0.0;
      for (int i = 0; i < config.ensemble; ++i) {
        const ConformalMetric m = random_conformal_metric(
            grid, member_seed(config.seed, i), delta);
        const EigenDecomposition d = galerkin_spectrum(m, 10);
        const ScalarField bar = project_first_eigenspace(v, d);
        ScalarField diff(grid, v.values - bar.values);
        proj_ratio = std::max(
            proj_ratio,
            std::sqrt(l2_inner(diff, diff, d.volume_weight)) /
                (delta * std::sqrt(l2_inner(v, v, d.volume_weight))));

        // Almost-orthonormality of the projected round degree-1 triple.
        std::array<ScalarField, 3> bars{
            project_first_eigenspace(real_harmonic(grid, 1, -1), d),
            project_first_eigenspace(real_harmonic(grid, 1, 0), d),
            project_first_eigenspace(real_harmonic(grid, 1, 1), d)};
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b <= a; ++b) {
            const double g = l2_inner(bars[a], bars[b], d.volume_weight);
            ortho_ratio = std::max(
                ortho_ratio, std::abs(g - (a == b ? 1.0 : 0.0)) / delta);
          }
      }
      rep.add("projection-contraction-ratio", kAnchorProjection, proj_ratio,
              10.0 * s)
          .epsilon = delta;
      rep.add("almost-orthonormality-ratio", kAnchorAlmostOrtho, ortho_ratio,
              10.0 * s)
          .epsilon = delta;
      proj_ratios.push_back(proj_ratio);
      ortho_ratios.push_back(ortho_ratio);
    }
    rep.add("projection-constant-stability", kAnchorProjection,
            relative_spread(proj_ratios), 0.25 * s);
    rep.add("almost-orthonormality-stability", kAnchorAlmostOrtho,
            relative_spread(ortho_ratios), 0.25 * s);
  }

  // --- Two-metric stability ratios per delta, rotation sentinel,
  //     Procrustes optimality ---
  if (config.ensemble > 0) {
    std::vector<double> factor_ratios, gauge_ratios, embedding_ratios;
    std::vector<ConformalMetric> bases;
    std::vector<Coeffs> bumps;
    for (int i = 0; i < config.ensemble; ++i) {
      bases.push_back(normalized_area(random_conformal_metric(
          grid, member_seed(config.seed, i), 0.05)));
      Coeffs bump = random_conformal_metric(
                        grid, member_seed(config.seed ^ 0x9e3779b97f4a7c15ull,
                                          i),
                        0.05)
                        .log_omega;
      bump.data() /= synthesize(bump, grid).sup_norm();
      bumps.push_back(std::move(bump));
    }
    for (const double delta : {0.02, 0.01}) {
      double rf = 0.0, rg = 0.0, re = 0.0;
      for (int i = 0; i < config.ensemble; ++i) {
        ConformalMetric other = bases[i];
        Coeffs scaled = bumps[i];
        scaled.data() *= delta;
        other.log_omega.data() += scaled.data();
        const StabilityReport sr =
            stability_experiment({bases[i]}, {other}, q, config.p);
        rf = std::max(rf, sr.ratio_factor);
        rg = std::max(rg, sr.ratio_gauge);
        re = std::max(re, sr.ratio_embedding);
      }
      rep.add("stability-factor-ratio", kAnchorStabilityFactor, rf, 10.0 * s)
          .epsilon = delta;
      rep.add("stability-gauge-ratio", kAnchorStabilityFactor, rg, 10.0 * s)
          .epsilon = delta;
      rep.add("stability-embedding-ratio", kAnchorStabilityEmbedding, re,
              10.0 * s)
          .epsilon = delta;
      factor_ratios.push_back(rf);
      gauge_ratios.push_back(rg);
      embedding_ratios.push_back(re);
    }
    rep.add("stability-factor-stability", kAnchorStabilityFactor,
            relative_spread(factor_ratios), 0.25 * s);
    rep.add("stability-gauge-stability", kAnchorStabilityFactor,
            relative_spread(gauge_ratios), 0.25 * s);
    rep.add("stability-embedding-stability", kAnchorStabilityEmbedding,
            relative_spread(embedding_ratios), 0.25 * s);

    // Rotation sentinel: identical chart with rotation metadata.
    const Eigen::Matrix3d r =
        (Eigen::AngleAxisd(0.4, Eigen::Vector3d::UnitZ()) *
         Eigen::AngleAxisd(0.8, Eigen::Vector3d::UnitY()))
            .toRotationMatrix();
    const StabilityReport rot =
        stability_experiment({bases[0]}, {bases[0], r}, q, config.p);
    rep.add("rotation-recovery-residual", kAnchorRigidMotion,
            rot.fit.residual_sup, 1e-10 * s);
    rep.add("rotation-recovery-motion", kAnchorRigidMotion,
            (rot.motion - r).cwiseAbs().maxCoeff(), 1e-10 * s);
    rep.add("rotation-part-a-factor", kAnchorStabilityFactor,
            rot.factor_log_ratio, 1e-12 * s);

    // Procrustes optimality spot check: the fitted motion maximizes
    // tr(O^T C) over a million random orthogonal candidates.
    {
      const EigenDecomposition d1 =
          galerkin_spectrum(ConformalMetric(grid), 10);
      const EigenDecomposition d2 = galerkin_spectrum(bases[0], 10);
      const std::array<int, 3> c1 = d1.first_cluster();
      const std::array<ScalarField, 3> basis1{
          d1.fields[c1[0]], d1.fields[c1[1]], d1.fields[c1[2]]};
      const std::array<ScalarField, 3> projected{
          project_first_eigenspace(basis1[0], d2),
          project_first_eigenspace(basis1[1], d2),
          project_first_eigenspace(basis1[2], d2)};
      const GramSchmidtResult gs = gram_schmidt(projected, d2.volume_weight);
      const Embedding phi1 = build_embedding(basis1);
      const Embedding phi2 = build_embedding(gs.basis);
      const MetricData md = metric_data(ConformalMetric(grid));
      const RigidMotionFit fit = fit_rigid_motion(phi1, phi2, md, config.p);
      Eigen::Matrix3d cross;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          cross(a, b) = grid->integrate((phi2.x[a].values.array() *
                                         phi1.x[b].values.array() *
                                         md.sqrt_det.array())
                                            .matrix());
      const double best = (fit.motion.matrix.transpose() * cross).trace();
      std::mt19937_64 eng(config.seed);
      double defect = 0.0;
      for (int trial = 0; trial < 1000000; ++trial) {
        Eigen::Matrix3d g;
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) {
            const double u1 = ((eng() >> 11) * 0x1.0p-53);
            const double u2 = ((eng() >> 11) * 0x1.0p-53);
            g(i, j) = std::sqrt(-2.0 * std::log1p(-u1)) *
                      std::cos(kTwoPi * u2);
          }
        const Eigen::HouseholderQR<Eigen::Matrix3d> qr(g);
        Eigen::Matrix3d qmat = qr.householderQ();
        const Eigen::Matrix3d rmat =
            qr.matrixQR().triangularView<Eigen::Upper>();
        for (int j = 0; j < 3; ++j)
          if (rmat(j, j) < 0) qmat.col(j) *= -1.0;
        defect = std::max(defect,
                          (qmat.transpose() * cross).trace() - best);
      }
      rep.add("procrustes-optimality-defect", kAnchorRigidMotion,
              std::max(0.0, defect), 1e-12 * s);
    }
  }

  rep.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rep;
}

}  // namespace unisphere
