import numpy as np
import pytest
from scipy.stats import chi2, norm

from qutrit_mcmd.experiments.heatmap import (
    HeatmapConfig,
    region_means,
    run_heatmap,
    simplex_grid,
    summarize_percentiles,
)
from qutrit_mcmd.measurement import MeasurementNoise


def test_grid_size_and_order():
    g = simplex_grid(0.1)
    assert g.shape == (66, 3)
    assert np.allclose(g.sum(axis=1), 1)
    assert np.all(np.diff(g[:, 1]) >= -1e-12)
    assert len(simplex_grid(0.05)) == 231
    assert len(simplex_grid(1.0)) == 3


def test_noiseless_mcmd_is_sampling_limited():
    shots = 1000
    res = run_heatmap(HeatmapConfig(0.1, shots, "mcmd", rem=False))
    # 4 N d_H^2 is asymptotically chi-square with 2 dof; take the 5-sigma tail.
    bound = np.sqrt(chi2.isf(2 * norm.sf(5), 2) / (4 * shots))
    assert np.all(res.dh_raw() < bound)
    assert res.assignment is None


def test_rem_recorded_and_deterministic():
    cfg = HeatmapConfig(0.25, 500, "mcmd", True, MeasurementNoise(t21=0.03), seed=7)
    a, b = run_heatmap(cfg), run_heatmap(cfg)
    assert np.array_equal(a.dh_raw(), b.dh_raw())
    assert np.array_equal(a.dh_rem(), b.dh_rem())
    assert a.assignment.shape == (4, 3)


def test_qda_heatmap_runs():
    res = run_heatmap(HeatmapConfig(0.5, 300, "qda", True, seed=1))
    assert len(res.points) == 6
    assert res.assignment.shape == (3, 3)
    assert np.all(np.isfinite(res.dh_rem()))


def test_percentile_examples():
    d = [0.1, 0.2, 0.3]
    assert summarize_percentiles(d, d)["reduction_percent"] == pytest.approx(0)
    out = summarize_percentiles(d, np.array(d) / 2)
    assert out["reduction_percent"] == pytest.approx(50)
    assert out["p50_before"] == pytest.approx(0.2)
    assert summarize_percentiles([0, 1], [0.5, 0.5])["p50_after"] == 0.5
    with pytest.raises(ValueError):
        summarize_percentiles([], [1])


def test_region_means():
    res = run_heatmap(HeatmapConfig(0.25, 200, "mcmd", rem=False))
    mean, se, n = region_means(res, lambda q: q[2] >= 0.5)
    assert n == 6 and mean >= 0 and se >= 0
    with pytest.raises(ValueError):
        region_means(res, lambda q: False)


def test_config_validation():
    with pytest.raises(ValueError):
        HeatmapConfig(grid_step=0)
    with pytest.raises(ValueError):
        HeatmapConfig(discriminator="svm")
    with pytest.raises(ValueError):
        HeatmapConfig(shots_per_point=0)
