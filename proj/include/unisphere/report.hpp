// Distributed under the MIT License.
// See LICENSE.txt for details.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "unisphere/io.hpp"
#include "unisphere/stability.hpp"

namespace unisphere {

/// One verified quantity. `pass` is always `value <= tolerance`; checks of
/// the form "x >= bound" are recorded through a deficit value that is zero
/// when the bound holds. `anchor` ties the check to the statement it
/// realizes and is the literal "paper_anchor" report field; infrastructure
/// checks carry "plumbing".
struct CheckRecord {
  std::string name;
  std::string anchor = "plumbing";
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  /// Ensemble level this row belongs to (constants tables); < 0 when n/a.
  double epsilon = -1.0;
  /// Resolution this row belongs to (convergence tables); 0 when n/a.
  int bandlimit = 0;
};

struct Report {
  int bandlimit = 0;
  std::uint64_t seed = 0;
  double seconds = 0.0;
  std::vector<CheckRecord> records;

  /// Appends a record with pass = value <= tolerance and returns it for
  /// optional axis tagging.
  CheckRecord& add(const std::string& name, const std::string& anchor,
                   double value, double tolerance);
  bool all_pass() const;
};

Json report_to_json(const Report& report);
Report report_from_json(const Json& j);

/// CSV emission: which = "constants" (rows = records carrying an epsilon
/// axis; columns check,epsilon,ratio,paper_anchor) or "convergence" (rows =
/// records carrying a bandlimit axis; columns check,bandlimit,residual,
/// paper_anchor). Empty selections yield a header-only table.
std::string emit_table(const Report& report, const std::string& which);

// ---------------------------------------------------------------------------
// Report builders (shared by the CLI and the acceptance suite)
// ---------------------------------------------------------------------------

/// Uniformization of a single conformal chart: solver residual, basepoint
/// jet conditions, effective-bound ratios.
Report uniformize_report(const ConformalMetric& m,
                         double tolerance_scale = 1.0);

struct IdentityOptions {
  int geodesic_directions = 0;  // 0: skip the ODE checks
  bool estimate_ratios = false;
  double p = 4.0, q = 4.0, r = 4.0, k = 1.0;  // exponents for the estimates
  double tolerance_scale = 1.0;
};

/// Lightcone identity residuals of a conformal chart: divergence identity,
/// second-form equivalences, conjugacy, structure equations, and optionally
/// geodesic ODE consistency and the a priori estimate ratios.
Report identities_report(const ConformalMetric& m,
                         const IdentityOptions& options = {});

/// Spectrum of a (conformal or perturbed) metric: Galerkin residual, first
/// cluster diagnostics, and the exact round spectrum when the input is
/// round. Returns the decomposition alongside the records.
Report spectrum_report(const MetricFile& m, int count,
                       double tolerance_scale = 1.0,
                       Eigen::VectorXd* eigenvalues = nullptr);

/// Two-metric stability comparison (the ratio checks of the two-chart
/// experiment).
Report stability_report(const MetricPresentation& g1,
                        const MetricPresentation& g2, Basepoint q,
                        double p = 4.0, double tolerance_scale = 1.0);

struct SuiteConfig {
  int bandlimit = 24;
  std::uint64_t seed = 1;
  int ensemble = 16;
  std::vector<double> epsilons = {0.04, 0.02, 0.01};
  double p = 4.0;
  double tolerance_scale = 1.0;
};

/// Full default experiment sequence: identity residual checks, convergence
/// sweep, round spectrum, manufactured round trip, geodesic consistency,
/// ensemble constants for the effective bounds, the a priori estimates, the
/// eigenspace projection, the two-metric stability ratios, and the
/// derivative-basis norm windows. Deterministic per (config, seed).
Report run_suite(const SuiteConfig& config);

}  // namespace unisphere
