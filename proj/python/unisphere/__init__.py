# Distributed under the MIT License.
# See LICENSE.txt for details.
"""Spectral experiments on the 2-sphere.

Thin Python layer over the C++ core: random metric generation, conformal
uniformization to the round sphere, Laplace spectra, and the full seeded
experiment suite with JSON reports.
"""

from ._unisphere import (
    ConformalMetric,
    PerturbedMetric,
    UnisphereError,
    __version__,
    metric_from_json,
    random_conformal,
    random_perturbed,
    round_metric,
    spectrum,
    suite_report,
    uniformize_log_factor,
)

__all__ = [
    "ConformalMetric",
    "PerturbedMetric",
    "UnisphereError",
    "__version__",
    "metric_from_json",
    "random_conformal",
    "random_perturbed",
    "round_metric",
    "spectrum",
    "suite_report",
    "uniformize_log_factor",
]
