// Distributed under the MIT License.
// See LICENSE.txt for details.

#pragma once

#include <cstdint>

#include "unisphere/metric.hpp"

namespace unisphere {

/// Deterministic band-limited random metrics for ensemble experiments.
/// Sampling uses a fixed 64-bit generator with an explicit Box-Muller
/// transform so the output is identical across platforms and runs.

/// Conformal metric e^{2u} g_round with u sampled on degrees 2 <= l <= l_max
/// (degree-1 modes are Mobius gauge and excluded), coefficient variance
/// proportional to l^{-4}, then rescaled so that sup|K - 1| matches epsilon
/// to within 5% (measured after rescaling). epsilon = 0 returns the round
/// metric. Requires epsilon in [0, 0.2].
ConformalMetric random_conformal_metric(const GridPtr& grid,
                                        std::uint64_t seed, double epsilon,
                                        int l_max = 4);

/// Perturbation tensor h (trace part plus conformal-Killing images of two
/// random potentials, degrees 2 <= l <= l_max, variance proportional to
/// l^{-4}) scaled so that the sup frame norm of h equals epsilon exactly;
/// returns g_round + h. Requires epsilon in [0, 0.2].
PerturbedMetric random_perturbed_metric(const GridPtr& grid,
                                        std::uint64_t seed, double epsilon,
                                        int l_max = 4);

}  // namespace unisphere
