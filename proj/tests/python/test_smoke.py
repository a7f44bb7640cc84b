"""Smoke tests for the Python bindings."""

import math

import pytest

import oscd


def test_version():
    assert oscd.__version__


def test_msp_and_energy_closed_forms():
    assert oscd.msp_score([1.0, 1.0, 1.0, 1.0]) == pytest.approx(0.75, abs=1e-15)
    assert oscd.energy_score([0.0, 0.0]) == pytest.approx(-math.log(2.0), abs=1e-15)
    assert oscd.energy_score([4.25]) == -4.25
    # shift identity
    z = [0.3, -1.2, 2.4]
    assert oscd.energy_score([v + 5.0 for v in z]) == pytest.approx(
        oscd.energy_score(z) - 5.0, abs=1e-10
    )


def test_softmax_normalizes():
    p = oscd.softmax([1.0, 2.0, 3.0])
    assert sum(p) == pytest.approx(1.0, abs=1e-12)
    assert p[2] > p[1] > p[0]


def test_distortion_metrics():
    assert oscd.oscd([0.5, 0.3, 0.2], [0.5, 0.3, 0.2]) == 0.0
    assert oscd.oscd([1.0, 0.0, 0.0], [0.0, 0.0, 1.0]) == 1.0
    assert oscd.oscd([0.5, 0.3, 0.2], [0.6, 0.2, 0.2]) == pytest.approx(0.1, abs=1e-12)
    plus, minus = oscd.oscd_directional([0.5, 0.3, 0.2], [0.6, 0.2, 0.2])
    assert plus == pytest.approx(0.1, abs=1e-12)
    assert minus == pytest.approx(0.1, abs=1e-12)


def test_diversity_indices():
    uniform = [0.25] * 4
    assert oscd.shannon(uniform) == pytest.approx(math.log(4.0), abs=1e-12)
    assert oscd.simpson(uniform) == pytest.approx(0.75, abs=1e-12)
    assert oscd.pielou(uniform) == pytest.approx(1.0, abs=1e-12)
    assert oscd.richness(uniform) == 4
    assert oscd.topk_overlap([0.4, 0.3, 0.2, 0.1, 0.0], [0.4, 0.3, 0.2, 0.1, 0.0]) == 1.0


def test_sample_metrics():
    scores = [0.1, 0.2, 0.8, 0.9]
    labels = [False, False, True, True]
    assert oscd.auroc(scores, labels) == 1.0
    assert oscd.aupr(scores, labels) == 1.0
    fpr, threshold = oscd.fpr_at_unknown_recall(scores, labels)
    assert fpr == 0.0
    assert threshold == 0.8
    confusion = oscd.confusion_at(scores, labels, 0.5)
    assert confusion["tp"] == 2
    assert confusion["tn"] == 2
    assert confusion["known_recall"] == 1.0


def test_threshold_grid():
    grid = oscd.build_threshold_grid([0.0, 0.25, 0.5, 0.75, 1.0], n_quantiles=5)
    assert grid == sorted(set(grid))
    assert grid[0] == 0.0
    assert grid[-1] == 1.0


def test_statistics():
    t, p, degenerate = oscd.paired_t_test([0.1, 0.2, 0.3], [0.1, 0.2, 0.3])
    assert degenerate
    assert p == 1.0
    assert oscd.spearman([1, 2, 3, 4], [1, 2, 3, 4]) == pytest.approx(1.0)
    assert oscd.pearson([1, 2, 3, 4], [2, 4, 6, 8]) == pytest.approx(1.0)
    assert oscd.student_t_cdf(0.0, 5.0) == pytest.approx(0.5)


def test_errors_surface_as_oscd_error():
    with pytest.raises(oscd.OscdError):
        oscd.auroc([1.0, 2.0], [True, True])  # single-class input
    with pytest.raises(oscd.OscdError):
        oscd.energy_score([1.0], 0.0)  # non-positive temperature
    with pytest.raises(oscd.OscdError):
        oscd.oscd([0.5, 0.5], [0.3, 0.3, 0.4])  # dimension mismatch
