// Distributed under the MIT License.
// See LICENSE.txt for details.

#include "unisphere/io.hpp"

#include <fstream>
#include <initializer_list>
#include <string>

#include "unisphere/base.hpp"
#include "unisphere/sht.hpp"

namespace unisphere {

namespace {

void check_keys(const Json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  require(j.is_object(), where + ": expected a JSON object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) {
        known = true;
        break;
      }
    require(known, where + ": unknown field \"" + item.key() + "\"");
  }
}

Json rotation_to_json(const Eigen::Matrix3d& r) {
  Json rows = Json::array();
  for (int i = 0; i < 3; ++i) {
    Json row = Json::array();
    for (int j = 0; j < 3; ++j) row.push_back(r(i, j));
    rows.push_back(row);
  }
  return rows;
}

Eigen::Matrix3d rotation_from_json(const Json& j) {
  require(j.is_array() && j.size() == 3, "rotation: expected 3 rows");
  Eigen::Matrix3d r;
  for (int i = 0; i < 3; ++i) {
    require(j[i].is_array() && j[i].size() == 3,
            "rotation: expected 3 columns");
    for (int k = 0; k < 3; ++k) {
      require(j[i][k].is_number(), "rotation: entries must be numbers");
      r(i, k) = j[i][k].get<double>();
    }
  }
  require((r.transpose() * r - Eigen::Matrix3d::Identity()).norm() < 1e-10,
          "rotation: matrix is not orthogonal");
  return r;
}

Json values_to_json(const Eigen::MatrixXd& values) {
  Json out = Json::array();
  for (int i = 0; i < values.rows(); ++i)
    for (int j = 0; j < values.cols(); ++j) out.push_back(values(i, j));
  return out;
}

Eigen::MatrixXd values_from_json(const Json& j, const GridPtr& grid,
                                 const std::string& where) {
  const int rows = grid->n_theta(), cols = grid->n_phi();
  require(j.is_array() && static_cast<int>(j.size()) == rows * cols,
          where + ": expected " + std::to_string(rows * cols) + " samples");
  Eigen::MatrixXd values(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int k = 0; k < cols; ++k) {
      const Json& entry = j[i * cols + k];
      require(entry.is_number(), where + ": entries must be numbers");
      values(i, k) = entry.get<double>();
    }
  return values;
}

Json common_header(const char* type, int bandlimit) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["type"] = type;
  j["bandlimit"] = bandlimit;
  return j;
}

}  // namespace

Json metric_to_json(const ConformalMetric& m, const Eigen::Matrix3d& rotation) {
  Json j = common_header("conformal", m.grid->bandlimit());
  j["basepoint"] = Json{{"theta", m.basepoint.theta}, {"phi", m.basepoint.phi}};
  const Eigen::VectorXd coeffs = complex_to_real_basis(m.log_omega);
  Json arr = Json::array();
  for (int a = 0; a < coeffs.size(); ++a) arr.push_back(coeffs[a]);
  j["log_factor"] = std::move(arr);
  if ((rotation - Eigen::Matrix3d::Identity()).norm() > 0)
    j["rotation"] = rotation_to_json(rotation);
  return j;
}

Json metric_to_json(const PerturbedMetric& m, const Eigen::Matrix3d& rotation) {
  Json j = common_header("perturbed", m.grid->bandlimit());
  Json h;
  h["t11"] = values_to_json(m.h.t11);
  h["t12"] = values_to_json(m.h.t12);
  h["t22"] = values_to_json(m.h.t22);
  j["perturbation"] = std::move(h);
  if ((rotation - Eigen::Matrix3d::Identity()).norm() > 0)
    j["rotation"] = rotation_to_json(rotation);
  return j;
}

MetricFile metric_from_json(const Json& j) {
  require(j.is_object() && j.contains("schema") && j["schema"].is_string() &&
              j["schema"].get<std::string>() == kSchemaVersion,
          "metric spec: missing or unsupported schema version");
  require(j.contains("type") && j["type"].is_string(),
          "metric spec: missing type");
  require(j.contains("bandlimit") && j["bandlimit"].is_number_integer(),
          "metric spec: missing bandlimit");
  const int bandlimit = j["bandlimit"].get<int>();
  require(bandlimit >= 4 && bandlimit <= 256,
          "metric spec: bandlimit out of range (expected 4..256)");
  const GridPtr grid = build_grid(bandlimit);
  const std::string type = j["type"].get<std::string>();

  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  if (j.contains("rotation")) rotation = rotation_from_json(j["rotation"]);

  if (type == "conformal") {
    check_keys(j, {"schema", "type", "bandlimit", "basepoint", "log_factor",
                   "rotation"},
               "conformal metric spec");
    require(j.contains("log_factor"), "metric spec: missing log_factor");
    const Json& arr = j["log_factor"];
    const int n = (bandlimit + 1) * (bandlimit + 1);
    require(arr.is_array() && static_cast<int>(arr.size()) == n,
            "log_factor: expected " + std::to_string(n) + " coefficients");
    Eigen::VectorXd coeffs(n);
    for (int a = 0; a < n; ++a) {
      require(arr[a].is_number(), "log_factor: entries must be numbers");
      coeffs[a] = arr[a].get<double>();
    }
    Basepoint q{};
    if (j.contains("basepoint")) {
      check_keys(j["basepoint"], {"theta", "phi"}, "basepoint");
      require(j["basepoint"].contains("theta") &&
                  j["basepoint"].contains("phi"),
              "basepoint: needs theta and phi");
      q.theta = j["basepoint"]["theta"].get<double>();
      q.phi = j["basepoint"]["phi"].get<double>();
      require(q.theta > 0.0 && q.theta < kPi,
              "basepoint: theta must lie in (0, pi)");
    }
    return MetricFile{
        ConformalMetric(grid, real_basis_to_complex(coeffs, bandlimit), q),
        rotation};
  }
  if (type == "perturbed") {
    check_keys(j, {"schema", "type", "bandlimit", "perturbation", "rotation"},
               "perturbed metric spec");
    require(j.contains("perturbation") && j["perturbation"].is_object(),
            "metric spec: missing perturbation");
    const Json& h = j["perturbation"];
    check_keys(h, {"t11", "t12", "t22"}, "perturbation");
    require(h.contains("t11") && h.contains("t12") && h.contains("t22"),
            "perturbation: needs t11, t12, t22");
    SymTensor2 tensor(grid);
    tensor.t11 = values_from_json(h["t11"], grid, "perturbation.t11");
    tensor.t12 = values_from_json(h["t12"], grid, "perturbation.t12");
    tensor.t22 = values_from_json(h["t22"], grid, "perturbation.t22");
    PerturbedMetric m(grid, std::move(tensor));
    require(m.positive_definite(),
            "perturbed metric spec: metric is not positive definite");
    return MetricFile{std::move(m), rotation};
  }
  throw Error("metric spec: unknown type \"" + type + "\"");
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open file for reading: " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const std::exception& e) {
    throw Error("failed to parse JSON from " + path + ": " + e.what());
  }
  return j;
}

void save_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  require(out.good(), "cannot open file for writing: " + path);
  out << j.dump(2) << "\n";
  require(out.good(), "failed while writing: " + path);
}

}  // namespace unisphere
