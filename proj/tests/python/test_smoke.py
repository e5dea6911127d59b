# Distributed under the MIT License.
# See LICENSE.txt for details.
"""Smoke tests for the Python layer: generation, curvature calibration,
uniformization, spectra, and JSON round trips."""

import json

import numpy as np
import pytest

import unisphere


def test_round_metric_basics():
    m = unisphere.round_metric(12)
    assert m.bandlimit == 12
    assert m.area() == pytest.approx(4.0 * np.pi, rel=1e-12)
    assert np.max(np.abs(m.curvature() - 1.0)) < 1e-12
    assert np.max(np.abs(m.log_factor())) < 1e-14


def test_random_conformal_is_calibrated_and_deterministic():
    a = unisphere.random_conformal(16, seed=7, epsilon=0.05)
    b = unisphere.random_conformal(16, seed=7, epsilon=0.05)
    c = unisphere.random_conformal(16, seed=8, epsilon=0.05)
    assert np.array_equal(a.log_factor(), b.log_factor())
    assert not np.array_equal(a.log_factor(), c.log_factor())
    dev = np.max(np.abs(a.curvature() - 1.0))
    assert 0.0475 <= dev <= 0.0525


def test_random_perturbed_amplitude():
    m = unisphere.random_perturbed(12, seed=3, epsilon=0.05)
    assert m.positive_definite()
    assert m.sup_norm() == pytest.approx(0.05, abs=1e-12)


def test_uniformize_recovers_round_factor():
    m = unisphere.random_conformal(16, seed=5, epsilon=0.05)
    log_factor, residual, iters = unisphere.uniformize_log_factor(m)
    assert residual < 1e-9
    assert iters >= 1
    # The factor is small for a small curvature deviation.
    assert np.max(np.abs(log_factor)) < 0.1


def test_round_spectrum():
    mu = unisphere.spectrum(unisphere.round_metric(16), 9)
    expected = np.array([0.0, 2, 2, 2, 6, 6, 6, 6, 6], dtype=float)
    assert np.max(np.abs(mu - expected)) < 1e-10


def test_perturbed_spectrum_cluster():
    m = unisphere.random_perturbed(16, seed=11, epsilon=0.01)
    mu = unisphere.spectrum(m, 5)
    assert abs(mu[0]) < 1e-8
    assert np.max(np.abs(mu[1:4] - 2.0)) < 0.1


def test_metric_json_round_trip():
    m = unisphere.random_conformal(12, seed=2, epsilon=0.03)
    text = m.to_json()
    spec = json.loads(text)
    assert spec["schema"] == "1"
    assert spec["type"] == "conformal"
    back = unisphere.metric_from_json(text)
    assert isinstance(back, unisphere.ConformalMetric)
    assert np.array_equal(back.log_factor(), m.log_factor())


def test_json_validation_raises():
    with pytest.raises(unisphere.UnisphereError):
        unisphere.metric_from_json(
            json.dumps({"schema": "1", "type": "conformal", "bandlimit": 8,
                        "log_factor": [0.0], "surprise": 1})
        )


def test_suite_report_round_only():
    text = unisphere.suite_report(bandlimit=16, seed=1, members=0,
                                  epsilons=[])
    report = json.loads(text)
    assert report["schema"] == "1"
    assert report["environment"]["bandlimit"] == 16
    assert report["records"]
    assert all(r["pass"] for r in report["records"])
