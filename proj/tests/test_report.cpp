// Distributed under the MIT License.
// See LICENSE.txt for details.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "unisphere/io.hpp"
#include "unisphere/random.hpp"
#include "unisphere/report.hpp"
#include "unisphere/uniformize.hpp"

using namespace unisphere;

namespace {

Coeffs mode_y20(int bandlimit, double amplitude) {
  Coeffs c(bandlimit);
  c.at(2, 0) = amplitude;
  return c;
}

}  // namespace

TEST_CASE("metric json: conformal round trip preserves coefficients") {
  const GridPtr grid = build_grid(8);
  const ConformalMetric m(grid, mode_y20(8, 0.05), Basepoint{1.0, 2.0});

  const Json j = metric_to_json(m);
  CHECK(j["schema"].get<std::string>() == kSchemaVersion);
  CHECK(j["type"].get<std::string>() == "conformal");
  CHECK(!j.contains("rotation"));

  const MetricFile f = metric_from_json(j);
  REQUIRE(f.is_conformal());
  const ConformalMetric& back = std::get<ConformalMetric>(f.metric);
  CHECK(back.grid->bandlimit() == 8);
  CHECK(back.basepoint.theta == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(back.basepoint.phi == doctest::Approx(2.0).epsilon(1e-15));
  CHECK((back.log_omega.data() - m.log_omega.data()).norm() == 0.0);
  CHECK((f.rotation - Eigen::Matrix3d::Identity()).norm() == 0.0);
}

TEST_CASE("metric json: perturbed round trip preserves samples and rotation") {
  const GridPtr grid = build_grid(6);
  const PerturbedMetric m = random_perturbed_metric(grid, 11u, 0.05);
  const Eigen::Matrix3d r =
      Eigen::AngleAxisd(0.7, Eigen::Vector3d::UnitY()).toRotationMatrix();

  const Json j = metric_to_json(m, r);
  CHECK(j.contains("rotation"));
  const MetricFile f = metric_from_json(j);
  REQUIRE(!f.is_conformal());
  const PerturbedMetric& back = std::get<PerturbedMetric>(f.metric);
  CHECK((back.h.t11 - m.h.t11).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.h.t12 - m.h.t12).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.h.t22 - m.h.t22).cwiseAbs().maxCoeff() == 0.0);
  CHECK((f.rotation - r).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("metric json: validation rejects malformed input") {
  const GridPtr grid = build_grid(4);
  Json good = metric_to_json(ConformalMetric(grid, mode_y20(4, 0.01)));

  SUBCASE("unknown field") {
    Json j = good;
    j["surprise"] = 1;
    CHECK_THROWS_AS((void)metric_from_json(j), Error);
  }
  SUBCASE("wrong schema version") {
    Json j = good;
    j["schema"] = "0";
    CHECK_THROWS_AS((void)metric_from_json(j), Error);
  }
  SUBCASE("missing type") {
    Json j = good;
    j.erase("type");
    CHECK_THROWS_AS((void)metric_from_json(j), Error);
  }
  SUBCASE("bandlimit below grid minimum") {
    Json j = good;
    j["bandlimit"] = 2;
    CHECK_THROWS_AS((void)metric_from_json(j), Error);
  }
  SUBCASE("coefficient array of the wrong length") {
    Json j = good;
    j["log_factor"].push_back(0.0);
    CHECK_THROWS_AS((void)metric_from_json(j), Error);
  }
  SUBCASE("non-orthogonal rotation") {
    Json j = good;
    j["rotation"] = Json::array({Json::array({1.0, 0.2, 0.0}),
                                 Json::array({0.0, 1.0, 0.0}),
                                 Json::array({0.0, 0.0, 1.0})});
    CHECK_THROWS_AS((void)metric_from_json(j), Error);
  }
  SUBCASE("basepoint at the pole") {
    Json j = good;
    j["basepoint"]["theta"] = 0.0;
    CHECK_THROWS_AS((void)metric_from_json(j), Error);
  }
}

TEST_CASE("report json: round trip and schema guard") {
  Report rep;
  rep.bandlimit = 16;
  rep.seed = 42;
  rep.seconds = 1.5;
  rep.add("plain-check", "plumbing", 0.5, 1.0);
  rep.add("constant-check", "anchor, with comma", 2.0, 10.0).epsilon = 0.04;
  rep.add("converging-check", "the divergence identity for", 1e-9, 1e-8)
      .bandlimit = 24;
  rep.add("failing-check", "plumbing", 2.0, 1.0);
  CHECK(!rep.all_pass());

  const Json j = report_to_json(rep);
  CHECK(j["schema"].get<std::string>() == kSchemaVersion);
  CHECK(j["records"].size() == 4);
  CHECK(j["records"][0]["pass"].get<bool>());
  CHECK(!j["records"][3]["pass"].get<bool>());
  CHECK(j["records"][1]["epsilon"].get<double>() == 0.04);
  CHECK(!j["records"][0].contains("epsilon"));
  CHECK(j["records"][2]["bandlimit"].get<int>() == 24);

  const Report back = report_from_json(j);
  CHECK(back.bandlimit == rep.bandlimit);
  CHECK(back.seed == rep.seed);
  CHECK(back.seconds == rep.seconds);
  REQUIRE(back.records.size() == rep.records.size());
  for (size_t i = 0; i < back.records.size(); ++i) {
    CHECK(back.records[i].name == rep.records[i].name);
    CHECK(back.records[i].anchor == rep.records[i].anchor);
    CHECK(back.records[i].value == rep.records[i].value);
    CHECK(back.records[i].tolerance == rep.records[i].tolerance);
    CHECK(back.records[i].pass == rep.records[i].pass);
    CHECK(back.records[i].epsilon == rep.records[i].epsilon);
    CHECK(back.records[i].bandlimit == rep.records[i].bandlimit);
  }

  Json bad = j;
  bad["schema"] = "999";
  CHECK_THROWS_AS((void)report_from_json(bad), Error);
}

TEST_CASE("report tables: axis selection and csv quoting") {
  Report rep;
  rep.add("constant-check", "anchor, with comma", 2.0, 10.0).epsilon = 0.04;
  rep.add("converging-check", "plain anchor", 1e-9, 1e-8).bandlimit = 24;
  rep.add("plain-check", "plumbing", 0.5, 1.0);

  const std::string constants = emit_table(rep, "constants");
  CHECK(constants.rfind("check,epsilon,ratio,paper_anchor\n", 0) == 0);
  CHECK(constants.find("constant-check,0.04") != std::string::npos);
  CHECK(constants.find("\"anchor, with comma\"") != std::string::npos);
  CHECK(constants.find("converging-check") == std::string::npos);

  const std::string convergence = emit_table(rep, "convergence");
  CHECK(convergence.rfind("check,bandlimit,residual,paper_anchor\n", 0) == 0);
  CHECK(convergence.find("converging-check,24,") != std::string::npos);
  CHECK(convergence.find("constant-check") == std::string::npos);

  Report empty;
  CHECK(emit_table(empty, "constants") == "check,epsilon,ratio,paper_anchor\n");
  CHECK(emit_table(empty, "convergence") ==
        "check,bandlimit,residual,paper_anchor\n");
  CHECK_THROWS_AS((void)emit_table(rep, "nonsense"), Error);
}

TEST_CASE("uniformize report: manufactured chart satisfies every record") {
  const GridPtr grid = build_grid(16);
  const Coeffs u = normalize_at(mode_y20(16, 0.05), Basepoint{}, grid)
                       .log_omega;
  const Report rep = uniformize_report(ConformalMetric(grid, u));
  CHECK(rep.all_pass());
  CHECK(rep.records.size() == 6);  // residual + 2 jet conditions + 3 ratios
  for (const CheckRecord& r : rep.records) CHECK(r.anchor != "plumbing");
}

TEST_CASE("identities report: band-limited chart satisfies every record") {
  const GridPtr grid = build_grid(16);
  const ConformalMetric m(grid, mode_y20(16, 0.05));
  IdentityOptions options;
  options.geodesic_directions = 4;
  options.estimate_ratios = true;
  const Report rep = identities_report(m, options);
  CHECK(rep.all_pass());
  bool has_geodesic = false, has_estimate = false;
  for (const CheckRecord& r : rep.records) {
    if (r.name == "geodesic-ode-consistency") has_geodesic = true;
    if (r.name == "estimate-ratio-l2") has_estimate = true;
  }
  CHECK(has_geodesic);
  CHECK(has_estimate);
}

TEST_CASE("spectrum report: round metric and perturbed metric") {
  const GridPtr grid = build_grid(16);

  Eigen::VectorXd eigenvalues;
  const MetricFile round{ConformalMetric(grid), Eigen::Matrix3d::Identity()};
  const Report rr = spectrum_report(round, 36, 1.0, &eigenvalues);
  CHECK(rr.all_pass());
  REQUIRE(eigenvalues.size() == 36);
  CHECK(std::abs(eigenvalues[0]) < 1e-10);
  bool has_round = false;
  for (const CheckRecord& r : rr.records)
    if (r.name == "round-spectrum-deviation") has_round = true;
  CHECK(has_round);

  const MetricFile bent{random_perturbed_metric(grid, 9u, 0.01),
                        Eigen::Matrix3d::Identity()};
  const Report br = spectrum_report(bent, 10);
  CHECK(br.all_pass());
  bool has_cluster = false;
  for (const CheckRecord& r : br.records)
    if (r.name == "first-cluster-deviation") has_cluster = true;
  CHECK(has_cluster);
}

TEST_CASE("stability report: nearby charts satisfy every record") {
  const GridPtr grid = build_grid(12);
  const ConformalMetric base =
      normalized_area(random_conformal_metric(grid, 23u, 0.05));
  ConformalMetric other = base;
  Coeffs bump = random_conformal_metric(grid, 29u, 0.05).log_omega;
  bump.data() *= 0.01 / synthesize(bump, grid).sup_norm();
  other.log_omega.data() += bump.data();

  const Report rep = stability_report({base}, {other}, Basepoint{}, 4.0);
  CHECK(rep.all_pass());
  CHECK(rep.records.size() == 5);
}

TEST_CASE("suite: reduced configuration is deterministic modulo timing") {
  SuiteConfig config;
  config.bandlimit = 16;
  config.ensemble = 2;
  config.epsilons = {0.04, 0.02};
  config.seed = 7;

  const Report a = run_suite(config);
  const Report b = run_suite(config);
  CHECK(!a.records.empty());

  Json ja = report_to_json(a);
  Json jb = report_to_json(b);
  ja.erase("timing");
  jb.erase("timing");
  CHECK(ja.dump() == jb.dump());

  // Both tables have content: the suite carries per-epsilon constants and a
  // resolution sweep.
  CHECK(emit_table(a, "constants").find("\n", 40) != std::string::npos);
  CHECK(emit_table(a, "convergence").find("divergence-identity-analytic") !=
        std::string::npos);

  for (const CheckRecord& r : a.records) {
    CAPTURE(r.name);
    CHECK(r.pass);
  }
}

TEST_CASE("suite: round-only configuration passes trivially") {
  SuiteConfig config;
  config.bandlimit = 16;
  config.ensemble = 0;
  config.epsilons = {};
  const Report rep = run_suite(config);
  CHECK(rep.all_pass());
  CHECK(!rep.records.empty());
}
