import math

import numpy as np
import pytest
from scipy import integrate

from cusplab import (
    FitError,
    ModelConfig,
    exact_volume_n1,
    run_bounds_scan,
    run_sweep,
    run_volume,
    run_wp_ratio,
    wp_predicted,
)

PI = math.pi


def exact_ratio_n1(config):
    """Closed form pairing ratio for n = 1 on the truncated domain.

    The pairing integrand reduces to 16 / (|lt|^3 (b^2 + (1-b)^2)^2) whose
    antiderivative is elementary in v = 2b - 1; the volume is rational.
    """
    eps = config.eps
    v0 = 1.0 - 2.0 * eps
    numer = 16.0 / abs(config.lt) ** 3 * 2.0 * (v0 / (1.0 + v0**2) + math.atan(v0))
    vol = exact_volume_n1(config).value
    return numer / vol


def test_volume_n1_matches_exact():
    cfg = ModelConfig(1, -20.0, -2.0)
    est = run_volume(cfg, 100000, seed=1)
    exact = exact_volume_n1(cfg).value
    assert abs(est.value - exact) <= 3.0 * est.std_error + 1e-12 * exact


def test_volume_n2_deep_fiber_window():
    # at eps = 1e-3 the scaled volume sits just under its limit
    cfg = ModelConfig(2, -2000.0, -2.0)
    est = run_volume(cfg, 200000, seed=2)
    scaled = est.value * cfg.c_log2**2 / 24.0
    assert 0.98 <= scaled <= 1.0


def test_volume_truncation_halving_matches_exact_difference():
    # halving eps (by doubling |lt| at fixed radius) adds exactly the
    # closed form increment; the estimator is exact here, so compare tight
    c1 = ModelConfig(1, -200.0, -2.0)
    c2 = ModelConfig(1, -400.0, -2.0)
    v1 = run_volume(c1, 50000, seed=3).value
    v2 = run_volume(c2, 50000, seed=3).value
    d_exact = exact_volume_n1(c2).value - exact_volume_n1(c1).value
    assert (v2 - v1) == pytest.approx(d_exact, rel=1e-10)


def test_direct_route_agrees_with_collapsed():
    # the uncollapsed integrands must estimate the same quantities; they
    # are heavier tailed, so compare at a mild truncation with wide sigma
    cfg = ModelConfig(1, -20.0, -2.0)
    direct = run_volume(cfg, 200000, seed=4, symmetrized=False)
    exact = exact_volume_n1(cfg).value
    assert abs(direct.value - exact) <= 4.0 * direct.std_error

    cfg2 = ModelConfig(2, -40.0, -2.0)
    a = run_wp_ratio(cfg2, 300000, seed=5, symmetrized=True)
    b = run_wp_ratio(cfg2, 300000, seed=6, symmetrized=False)
    for x, y in ((a.numerator, b.numerator), (a.volume, b.volume)):
        sigma = math.hypot(x.std_error, y.std_error)
        assert abs(x.value - y.value) <= 4.0 * sigma


def test_n2_quadrature_oracle():
    # independent adaptive quadrature of both collapsed integrands
    cfg = ModelConfig(2, -40.0, -2.0)
    eps = cfg.eps
    lt = abs(cfg.lt)

    def num_integrand(b2, b1):
        b0 = 1.0 - b1 - b2
        return 1.0 / (b1**2 * (b0**2 + b1**2 + b2**2) ** 2)

    def vol_integrand(b2, b1):
        return 1.0 / (b1**2 * b2**2)

    num_q, _ = integrate.dblquad(num_integrand, eps, 1.0 - 2 * eps,
                                 lambda b1: eps, lambda b1: 1.0 - eps - b1,
                                 epsabs=1e-12, epsrel=1e-11)
    vol_q, _ = integrate.dblquad(vol_integrand, eps, 1.0 - 2 * eps,
                                 lambda b1: eps, lambda b1: 1.0 - eps - b1,
                                 epsabs=1e-10, epsrel=1e-11)
    num_q *= math.factorial(3) * 2 * 2**4 / lt**4
    vol_q *= math.factorial(3) * 2**2 / lt**2

    r = run_wp_ratio(cfg, 400000, seed=7)
    assert abs(r.numerator.value - num_q) <= 3.0 * r.numerator.std_error + 1e-12
    assert abs(r.volume.value - vol_q) <= 3.0 * r.volume.std_error + 1e-12


def test_predicted_reference_values():
    r1 = wp_predicted(ModelConfig(1, -921.034, -2.0))
    assert r1 == pytest.approx(2 * 2.0 * (1 + PI / 2) / 921.034**3, rel=1e-13)
    assert r1 == pytest.approx(1.31626e-8, rel=5e-4)
    r2 = wp_predicted(ModelConfig.from_c(1, -921.034, 0.1))
    assert r2 == pytest.approx(3.03034e-8, rel=5e-4)
    r3 = wp_predicted(ModelConfig(2, -2000.0, -2.0))
    assert r3 == pytest.approx(2.57080e-9, rel=1e-4)


def test_ratio_matches_exact_oracle_n1():
    cfg = ModelConfig(1, -200.0, -2.0)
    r = run_wp_ratio(cfg, 400000, seed=8)
    exact = exact_ratio_n1(cfg)
    assert abs(r.ratio - exact) <= 3.0 * r.std_error
    assert r.rel_dev == pytest.approx(abs(r.ratio - r.predicted) / r.predicted, rel=1e-12)


def test_ratio_deviation_decreases_with_truncation():
    # sharper truncation (same radius, deeper fiber) moves the measured
    # ratio toward its small |t| scaling; the exact oracle makes this a
    # deterministic statement
    devs = []
    for eps in (0.02, 0.01, 0.005, 0.0025):
        cfg = ModelConfig(1, -2.0 / eps, -2.0)
        exact = exact_ratio_n1(cfg)
        pred = wp_predicted(cfg)
        devs.append(abs(exact - pred) / pred)
    assert devs[0] > devs[1] > devs[2] > devs[3]


def test_wp_ratio_determinism():
    cfg = ModelConfig(1, -100.0, -2.0)
    a = run_wp_ratio(cfg, 100000, seed=9)
    b = run_wp_ratio(cfg, 100000, seed=9)
    assert (a.ratio, a.std_error) == (b.ratio, b.std_error)
    c = run_wp_ratio(cfg, 100000, seed=10)
    assert c.ratio != a.ratio


def test_run_sweep_exponent_and_bound_spread():
    cfg = ModelConfig(1, -100.0, -2.0)
    report = run_sweep(cfg, (-100.0, -300.0, -1000.0, -3000.0), 200000, seed=11)
    assert abs(report.fitted_exponent + 3.0) <= 0.05
    assert report.fit_residual < 0.05
    # truncation drift contributes about 0.016; the rest is sampling noise
    assert report.bound_spread < 0.12
    assert len(report.rows) == 4
    row = report.rows[0]
    assert row["lt"] == -100.0
    assert row["ratio"] > 0 and row["predicted"] > 0

    with pytest.raises(FitError):
        run_sweep(cfg, (-100.0, -300.0, -1000.0), 20000, seed=11,
                  fit_residual_tol=1e-9)


def test_bounds_scan_ranges():
    cfg = ModelConfig(1, -20.0, -2.0)
    report = run_bounds_scan(cfg, 400, seed=12)
    lo, hi = math.log(PI), math.log(2 * PI)
    assert lo - 1e-12 <= report.phi_min <= report.phi_max <= hi + 1e-12
    # 400 draws explore most of the range
    assert report.phi_max > hi - 0.05
    assert report.phi_min < lo + 0.25
    assert report.grad_phi_max <= 8.0
    assert 1 / PI - 1e-12 <= report.frame_eig_min <= report.frame_eig_max <= 2 / PI + 1e-12
    # curvature for one dimensional fibers peaks at the symmetric value
    assert 4 * PI - 1e-6 <= report.curvature_sup <= 6 * PI + 1e-6


def test_bounds_scan_scale_invariance():
    shallow = run_bounds_scan(ModelConfig(2, -25.0, -2.0), 150, seed=13)
    deep = run_bounds_scan(ModelConfig(2, -25000.0, -2.0), 150, seed=13)
    assert shallow.phi_min == pytest.approx(deep.phi_min, rel=1e-10)
    assert shallow.phi_max == pytest.approx(deep.phi_max, rel=1e-10)
    assert shallow.grad_phi_max == pytest.approx(deep.grad_phi_max, rel=1e-10)
    assert shallow.frame_eig_max == pytest.approx(deep.frame_eig_max, rel=1e-10)
    assert shallow.curvature_sup == pytest.approx(deep.curvature_sup, rel=1e-8)
