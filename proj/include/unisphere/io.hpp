// Distributed under the MIT License.
// See LICENSE.txt for details.

#pragma once

#include <string>
#include <variant>

#include <json.hpp>

#include "unisphere/metric.hpp"

namespace unisphere {

/// All JSON produced by the library uses insertion-ordered keys so repeated
/// runs serialize byte-identically.
using Json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "1";
inline constexpr const char* kLibraryVersion = "0.1.0";

/// A metric loaded from a spec file: either a conformal chart (spectral
/// coefficients of the log factor) or a perturbation tensor (frame samples),
/// plus an optional known rotation (the physical metric is the pullback of
/// the stored one by x -> R x).
struct MetricFile {
  std::variant<ConformalMetric, PerturbedMetric> metric;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();

  bool is_conformal() const {
    return std::holds_alternative<ConformalMetric>(metric);
  }
  const GridPtr& grid() const {
    return is_conformal() ? std::get<ConformalMetric>(metric).grid
                          : std::get<PerturbedMetric>(metric).grid;
  }
};

/// Serialization. Conformal metrics store the real-basis coefficients of
/// log Omega (flat index l^2 + l + m); perturbed metrics store the frame
/// samples of h row-major over (theta, phi) nodes. The rotation is written
/// only when it differs from the identity.
Json metric_to_json(const ConformalMetric& m,
                    const Eigen::Matrix3d& rotation =
                        Eigen::Matrix3d::Identity());
Json metric_to_json(const PerturbedMetric& m,
                    const Eigen::Matrix3d& rotation =
                        Eigen::Matrix3d::Identity());

/// Parse + validate. Rejects wrong schema versions, unknown fields, bad
/// array lengths, and non-orthogonal rotations.
MetricFile metric_from_json(const Json& j);

Json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const Json& j);

}  // namespace unisphere
