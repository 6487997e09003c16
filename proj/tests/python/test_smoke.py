import json
import os
import pathlib

import numpy as np
import pytest

import hydrofeat

FIXTURE = pathlib.Path(
    os.environ.get("HYDROFEAT_FIXTURE_DIR", pathlib.Path(__file__).resolve().parent.parent / "fixtures")
)


def test_feature_names():
    assert hydrofeat.feature_names == [
        "lag1_ac", "ac_summary", "seasonal_ac", "temp_variation",
        "spec_entropy", "hurst", "trend_strength", "seasonality_strength",
    ]


def test_extract_features_bounds_and_affine_invariance():
    x = np.random.default_rng(0).normal(size=156)
    f = hydrofeat.extract_features(x)
    assert set(f) == set(hydrofeat.feature_names)
    assert 0.0 <= f["spec_entropy"] <= 1.0
    assert 0.0 < f["hurst"] < 1.0
    g = hydrofeat.extract_features(3.0 * x + 7.0)
    for k in f:
        assert g[k] == pytest.approx(f[k], abs=1e-9)


def test_acf_matches_numpy():
    x = np.array([1.0, 2.0, 3.0, 4.0])
    np.testing.assert_allclose(hydrofeat.sample_acf(x, 3), [0.25, -0.30, -0.45])
    y = np.random.default_rng(1).normal(size=100)
    d = y - y.mean()
    direct = [np.dot(d[:-k], d[k:]) / np.dot(d, d) for k in range(1, 11)]
    np.testing.assert_allclose(hydrofeat.sample_acf(y, 10), direct, atol=1e-12)


def test_periodogram_matches_numpy_fft():
    y = np.random.default_rng(2).normal(size=156)
    spec = np.abs(np.fft.rfft(y - y.mean())) ** 2 / len(y)
    np.testing.assert_allclose(hydrofeat.periodogram(y), spec[1 : len(y) // 2 + 1], atol=1e-10)


def test_fgn_and_hurst():
    assert hydrofeat.fgn_autocorrelation(1, 0.8) == pytest.approx(0.5157, abs=1e-4)
    x = hydrofeat.simulate_fgn(156, 0.7, 3)
    assert np.array_equal(x, hydrofeat.simulate_fgn(156, 0.7, 3))
    fit = hydrofeat.hurst_ml(x)
    assert 0.01 <= fit["hurst"] <= 0.99
    assert fit["sigma"] > 0


def test_decompositions_reconstruct():
    y = np.random.default_rng(4).normal(size=156) + np.tile([1.0, 0.0, -1.0, 0.0], 39)
    d = hydrofeat.stl_decompose(y)
    np.testing.assert_allclose(d["seasonal"] + d["trend"] + d["remainder"], y, atol=1e-9)
    c = hydrofeat.classical_decompose(y)
    assert abs(c["seasonal_indices"].sum()) < 1e-9
    assert np.isnan(c["trend"][0])


def test_errors_map_to_value_error():
    with pytest.raises(hydrofeat.HydrofeatError, match="zero variance"):
        hydrofeat.extract_features(np.ones(156))
    with pytest.raises(ValueError):
        hydrofeat.stl_decompose(np.arange(40.0), trend_window=8)


def test_pipeline_stage(tmp_path):
    written = hydrofeat.run_stage(FIXTURE / "pipeline" / "config.json", "features", out=tmp_path)
    assert "features_temperature.csv" in written
    log = json.loads((tmp_path / "features_log.json").read_text())
    for kind in log.values():
        assert kind["processed"] + kind["skipped"] == kind["input_stations"]
