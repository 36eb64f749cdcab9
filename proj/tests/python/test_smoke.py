import math

import pytest

import dampsq


def test_steady_squeezing():
    for dk in (0.1, 0.25, 0.5):
        q = dampsq.quadrature_stats(dampsq.closed_form_moments(dk, math.inf))
        assert q.var_x == pytest.approx((1 - math.sqrt(dk)) / (1 + math.sqrt(dk)), abs=1e-12)
        assert q.var_x * q.var_y == pytest.approx(1.0, abs=1e-12)


def test_rates_and_lambda():
    tones = [(0.5, 2000.0)]
    r = dampsq.derived_rates(tones)
    assert r.gamma == pytest.approx(0.75)
    assert abs(dampsq.lambda_at(tones, 0.0) - 0.5) < 1e-15


def test_oracle_matches_closed_form():
    fock = dampsq.fock_steady_moments(0.25, N=40, t_end=20.0)
    gauss = dampsq.closed_form_moments(0.25, 20.0)
    assert fock.n == pytest.approx(gauss.n, abs=1e-3)
    assert abs(fock.s - gauss.s) < 1e-3


def test_overlap_and_baseline():
    a = dampsq.MarginalStats(0.0, 0.5)
    b = dampsq.MarginalStats(math.sqrt(10.0), 0.5)
    e = dampsq.overlap_error(a, b)
    assert e.method == "analytic"
    assert e.error == pytest.approx(0.5 * math.erfc(math.sqrt(5.0)), rel=1e-12)
    assert dampsq.baseline_error(10.0) == pytest.approx(e.error, rel=1e-12)


def test_error_curve_releases_and_returns():
    c = dampsq.error_curve("mono", grid=[0.1, 0.13, 0.2], jobs=2)
    assert len(c["error"]) == 3
    assert min(c["error"]) < c["baseline"]
    with pytest.raises(ValueError):
        dampsq.error_curve("triple")


def test_errors_map_to_python():
    with pytest.raises(ValueError):
        dampsq.bessel_j(30, 1.0)
    assert issubclass(dampsq.TruncationError, dampsq.NumericError)


def test_run_experiment(tmp_path):
    assert "squeeze-sweep" in dampsq.experiment_names()
    files = dampsq.run_experiment("squeeze-sweep", str(tmp_path), "[squeeze-sweep]\ndelta_kappa_step = 0.1\n")
    assert files
    for f in files:
        assert (tmp_path / f).exists()
    assert (tmp_path / "manifest.json").exists()
