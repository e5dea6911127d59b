// Distributed under the MIT License.
// See LICENSE.txt for details.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "unisphere/io.hpp"
#include "unisphere/random.hpp"
#include "unisphere/report.hpp"

namespace {

using namespace unisphere;

std::vector<double> parse_number_list(const std::string& text,
                                      size_t expected, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    size_t used = 0;
    out.push_back(std::stod(item, &used));
    require(used == item.size(), std::string("could not parse ") + what +
                                     " component \"" + item + "\"");
  }
  require(expected == 0 || out.size() == expected,
          std::string(what) + ": expected " + std::to_string(expected) +
              " comma-separated numbers");
  return out;
}

ConformalMetric require_conformal(const MetricFile& f, const char* who) {
  require(f.is_conformal(),
          std::string(who) + " requires a conformal metric spec");
  return std::get<ConformalMetric>(f.metric);
}

void print_records(const Report& rep) {
  for (const CheckRecord& r : rep.records) {
    std::printf("[%s] %-36s value=%-12.5g tolerance=%-10.3g (%s)\n",
                r.pass ? "PASS" : "FAIL", r.name.c_str(), r.value,
                r.tolerance, r.anchor.c_str());
  }
  std::printf("%zu records, %s, %.2f s\n", rep.records.size(),
              rep.all_pass() ? "all passed" : "FAILURES PRESENT",
              rep.seconds);
}

int finish(const Report& rep, const std::string& report_path) {
  print_records(rep);
  if (!report_path.empty())
    save_json_file(report_path, report_to_json(rep));
  return rep.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "unisphere: spectral uniformization, lightcone identity, and "
      "embedding-stability experiments on the 2-sphere"};
  app.require_subcommand(1);
  app.fallthrough();

  int bandlimit = 24;
  std::uint64_t seed = 1;
  std::string out_path;
  double tolerance_scale = 1.0;
  app.add_option("--bandlimit", bandlimit, "Spectral bandlimit L")
      ->capture_default_str();
  app.add_option("--seed", seed, "Seed for every random draw")
      ->capture_default_str();
  app.add_option("--out", out_path,
                 "Output path for generated specs / tables (stdout if "
                 "omitted)");
  app.add_option("--tolerance-scale", tolerance_scale,
                 "Multiplies every check tolerance")
      ->capture_default_str();

  // --- gen ---
  auto* gen = app.add_subcommand(
      "gen", "Generate a random metric spec with a curvature or "
             "perturbation amplitude calibrated to --epsilon");
  std::string shape = "conformal";
  double epsilon = 0.05;
  int lmax = 4;
  gen->add_option("--shape", shape, "Metric family")
      ->check(CLI::IsMember({"conformal", "perturbed"}))
      ->capture_default_str();
  gen->add_option("--epsilon", epsilon,
                  "Target amplitude: sup|K-1| for conformal, sup|h| for "
                  "perturbed (0 gives the round sphere)")
      ->capture_default_str();
  gen->add_option("--lmax", lmax, "Highest sampled harmonic degree")
      ->capture_default_str();

  // --- uniformize ---
  auto* uni = app.add_subcommand(
      "uniformize", "Solve for the conformal factor to the round sphere and "
                    "check the solver, normalization, and bound records");
  std::string metric_path, report_path;
  uni->add_option("--metric", metric_path, "Metric spec JSON")->required();
  uni->add_option("--report", report_path, "Where to write the report JSON");

  // --- verify-identities ---
  auto* verify = app.add_subcommand(
      "verify-identities",
      "Check the lightcone divergence identity, second-form equivalences, "
      "structure equations, and optional geodesic/estimate records");
  int geodesics = 0;
  std::string lemma32;
  verify->add_option("--metric", metric_path, "Metric spec JSON")->required();
  verify->add_option("--report", report_path,
                     "Where to write the report JSON");
  verify->add_option("--geodesics", geodesics,
                     "Number of great-circle directions for the ODE checks")
      ->capture_default_str();
  verify->add_option("--lemma32", lemma32,
                     "Exponents p,q,r,k for the a priori estimate records");

  // --- spectrum ---
  auto* spec = app.add_subcommand(
      "spectrum", "Compute the low Laplace eigenvalues of a metric and "
                  "print them, with Galerkin residual records");
  int count = 10;
  spec->add_option("--metric", metric_path, "Metric spec JSON")->required();
  spec->add_option("--count", count, "Number of eigenvalues")
      ->capture_default_str();
  spec->add_option("--report", report_path, "Where to write the report JSON");

  // --- stability ---
  auto* stab = app.add_subcommand(
      "stability", "Compare two nearby metrics: conformal-factor, gauge, "
                   "and embedding distances relative to the metric distance");
  std::string g1_path, g2_path, basepoint_text = "1.5707963267948966,0";
  double p_exponent = 4.0;
  stab->add_option("--g1", g1_path, "First metric spec JSON")->required();
  stab->add_option("--g2", g2_path, "Second metric spec JSON")->required();
  stab->add_option("--basepoint", basepoint_text,
                   "Normalization basepoint theta,phi")
      ->capture_default_str();
  stab->add_option("--p", p_exponent, "Sobolev exponent p")
      ->capture_default_str();
  stab->add_option("--report", report_path, "Where to write the report JSON");

  // --- suite ---
  auto* suite = app.add_subcommand(
      "suite", "Run the full experiment sequence over a seeded ensemble");
  int members = 16;
  std::string epsilons_text = "0.04,0.02,0.01";
  suite->add_option("--members", members, "Ensemble size")
      ->capture_default_str();
  suite->add_option("--epsilons", epsilons_text,
                    "Curvature levels for the constant-stability records")
      ->capture_default_str();
  suite->add_option("--p", p_exponent, "Sobolev exponent p")
      ->capture_default_str();
  suite->add_option("--report", report_path, "Where to write the report JSON");

  // --- table ---
  auto* table = app.add_subcommand(
      "table", "Render a report as CSV: per-epsilon constants or "
               "per-bandlimit convergence rows");
  std::string table_report, kind;
  table->add_option("--report", table_report, "Report JSON to read")
      ->required();
  table->add_option("--kind", kind, "Table kind")
      ->check(CLI::IsMember({"constants", "convergence"}))
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      require(epsilon >= 0.0 && epsilon <= 0.2,
              "gen: --epsilon must lie in [0, 0.2]");
      const GridPtr grid = build_grid(bandlimit);
      Json j;
      if (shape == "conformal") {
        // Normalize to total area 4*pi so the output is directly usable as
        // a stability-experiment chart; the shift is O(epsilon^2) and keeps
        // the measured curvature amplitude within the 5% contract.
        j = metric_to_json(epsilon == 0.0
                               ? ConformalMetric(grid)
                               : normalized_area(random_conformal_metric(
                                     grid, seed, epsilon, lmax)));
      } else {
        j = metric_to_json(epsilon == 0.0
                               ? PerturbedMetric(grid)
                               : random_perturbed_metric(grid, seed, epsilon,
                                                         lmax));
      }
      if (out_path.empty())
        std::cout << j.dump(2) << "\n";
      else
        save_json_file(out_path, j);
      return 0;
    }

    if (uni->parsed()) {
      const MetricFile f = metric_from_json(load_json_file(metric_path));
      const Report rep = uniformize_report(
          require_conformal(f, "uniformize"), tolerance_scale);
      return finish(rep, report_path);
    }

    if (verify->parsed()) {
      const MetricFile f = metric_from_json(load_json_file(metric_path));
      IdentityOptions options;
      options.geodesic_directions = geodesics;
      options.tolerance_scale = tolerance_scale;
      if (!lemma32.empty()) {
        const std::vector<double> e =
            parse_number_list(lemma32, 4, "--lemma32");
        options.estimate_ratios = true;
        options.p = e[0];
        options.q = e[1];
        options.r = e[2];
        options.k = e[3];
      }
      const Report rep = identities_report(
          require_conformal(f, "verify-identities"), options);
      return finish(rep, report_path);
    }

    if (spec->parsed()) {
      const MetricFile f = metric_from_json(load_json_file(metric_path));
      Eigen::VectorXd eigenvalues;
      const Report rep =
          spectrum_report(f, count, tolerance_scale, &eigenvalues);
      for (Eigen::Index k = 0; k < eigenvalues.size(); ++k)
        std::printf("%.12f\n", eigenvalues[k]);
      return finish(rep, report_path);
    }

    if (stab->parsed()) {
      const MetricFile f1 = metric_from_json(load_json_file(g1_path));
      const MetricFile f2 = metric_from_json(load_json_file(g2_path));
      const std::vector<double> bp =
          parse_number_list(basepoint_text, 2, "--basepoint");
      const MetricPresentation p1{require_conformal(f1, "stability"),
                                  f1.rotation};
      const MetricPresentation p2{require_conformal(f2, "stability"),
                                  f2.rotation};
      const Report rep = stability_report(p1, p2, Basepoint{bp[0], bp[1]},
                                          p_exponent, tolerance_scale);
      return finish(rep, report_path);
    }

    if (suite->parsed()) {
      SuiteConfig config;
      config.bandlimit = bandlimit;
      config.seed = seed;
      config.ensemble = members;
      config.epsilons = parse_number_list(epsilons_text, 0, "--epsilons");
      config.p = p_exponent;
      config.tolerance_scale = tolerance_scale;
      const Report rep = run_suite(config);
      return finish(rep, report_path);
    }

    if (table->parsed()) {
      const Report rep = report_from_json(load_json_file(table_report));
      const std::string csv = emit_table(rep, kind);
      if (out_path.empty()) {
        std::cout << csv;
      } else {
        std::ofstream file(out_path, std::ios::binary);
        require(file.good(), "could not open " + out_path);
        file << csv;
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
