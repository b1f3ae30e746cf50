import math

import numpy as np
import pytest

from cusplab import (
    DomainError,
    IntegralEstimate,
    Method,
    ModelConfig,
    SamplerError,
    domain,
    exact_volume_n1,
    mc_integrate,
)


def test_domain_truncation_fraction():
    dom = domain(ModelConfig(1, -20.0, -2.0))
    assert dom.eps == pytest.approx(0.1)
    assert dom.lo == pytest.approx(0.1)
    assert dom.hi == pytest.approx(0.9)


def test_domain_rejects_empty_region():
    # eps = 2/5 = 0.4 >= 1/3 leaves nothing of the two dimensional simplex
    with pytest.raises(DomainError):
        domain(ModelConfig(2, -5.0, -2.0))
    # the same radius is fine one dimension down
    assert domain(ModelConfig(1, -5.0, -2.0)).eps == pytest.approx(0.4)


def test_exact_volume_values():
    cfg = ModelConfig(1, -20.0, -2.0)
    est = exact_volume_n1(cfg)
    assert est.method is Method.EXACT_1D
    assert est.std_error == 0.0
    assert est.value == pytest.approx(16.0 / 9.0, rel=1e-13)
    assert est.value == pytest.approx(1.77778, rel=1e-5)
    with pytest.raises(DomainError):
        exact_volume_n1(ModelConfig(2, -20.0, -2.0))


def test_exact_volume_deep_fiber_limit():
    # as the fiber degenerates at fixed radius, |lt| * volume approaches
    # 4 / eps = 4 |lt| / |c_log2|, so volume -> 4 / |c_log2|
    est = exact_volume_n1(ModelConfig(1, -2e6, -2.0))
    assert est.value == pytest.approx(4.0 / 2.0, rel=1e-5)


def test_mc_integrates_constants():
    dom = domain(ModelConfig(1, -20.0, -2.0))
    est = mc_integrate(lambda b: np.ones(b.shape[0]), dom, 200000, seed=42)
    assert est.method is Method.MONTE_CARLO
    assert est.samples == 200000
    assert est.std_error > 0.0
    assert abs(est.value - 0.8) <= 3.0 * est.std_error


def test_mc_inverse_square_is_exact():
    # the proposal density matches 1/b^2 exactly, so the estimator has zero
    # variance and lands on 1/0.1 - 1/0.9 up to rounding
    dom = domain(ModelConfig(1, -20.0, -2.0))
    est = mc_integrate(lambda b: 1.0 / b[:, 0] ** 2, dom, 50000, seed=7)
    assert est.value == pytest.approx(80.0 / 9.0, rel=1e-12)
    assert est.value == pytest.approx(8.8889, rel=1e-4)
    assert est.std_error <= 1e-12


def test_mc_polynomials_against_closed_forms():
    # affine map s = (b - eps) / (1 - (n+1) eps) sends the domain onto the
    # standard simplex, where monomial integrals are ratios of factorials
    def simplex_monomial(n, alpha):
        num = 1.0
        for a in alpha:
            num *= math.factorial(a)
        return num / math.factorial(n + sum(alpha))

    failures = 0
    trials = 0
    for n, alpha in (((1), (2,)), ((2), (1, 2)), ((2), (0, 3))):
        cfg = ModelConfig(n, -50.0, -2.0)
        dom = domain(cfg)
        scale = 1.0 - (n + 1) * dom.eps
        exact = scale**n * simplex_monomial(n, alpha)

        def f(b, alpha=alpha, scale=scale, eps=dom.eps):
            s = (b - eps) / scale
            out = np.ones(b.shape[0])
            for k, a in enumerate(alpha):
                out = out * s[:, k] ** a
            return out

        for seed in range(17):
            est = mc_integrate(f, dom, 40000, seed=seed)
            trials += 1
            if abs(est.value - exact) > 3.0 * est.std_error:
                failures += 1
    # 3 sigma misses have probability ~0.003 per trial
    assert failures <= 2, f"{failures} of {trials} estimates missed 3 sigma"


def test_mc_is_deterministic():
    dom = domain(ModelConfig(2, -60.0, -2.0))

    def f(b):
        return 1.0 / np.prod(b, axis=1)

    a = mc_integrate(f, dom, 150000, seed=5)
    b = mc_integrate(f, dom, 150000, seed=5)
    assert (a.value, a.std_error) == (b.value, b.std_error)
    c = mc_integrate(f, dom, 150000, seed=6)
    assert c.value != a.value
    threaded = mc_integrate(f, dom, 150000, seed=5, threads=4)
    assert (threaded.value, threaded.std_error) == (a.value, a.std_error)


def test_mc_error_scaling():
    dom = domain(ModelConfig(2, -60.0, -2.0))

    def f(b):
        return b[:, 0] + 0.2 * b[:, 1] ** 2

    se1 = mc_integrate(f, dom, 100000, seed=9).std_error
    se2 = mc_integrate(f, dom, 200000, seed=9).std_error
    assert 0.6 <= se2 / se1 <= 0.82  # expect ~ 1/sqrt(2)


def test_sampler_error_on_thin_domain():
    # eps just below 1/3 leaves a sliver of the n = 2 simplex the box
    # proposal almost never hits
    cfg = ModelConfig(2, -10.0, -3.33)
    dom = domain(cfg)
    with pytest.raises(SamplerError):
        mc_integrate(lambda b: np.ones(b.shape[0]), dom, 300000, seed=3)


def test_mc_input_validation():
    dom = domain(ModelConfig(1, -20.0, -2.0))
    with pytest.raises(DomainError):
        mc_integrate(lambda b: np.ones(b.shape[0]), dom, 1, seed=0)
    with pytest.raises(DomainError):
        mc_integrate(lambda b: np.ones(b.shape[0]), dom, 1000, seed=-1)
    with pytest.raises(DomainError):
        mc_integrate(lambda b: np.ones((b.shape[0], 3)), dom, 1000, seed=0)


def test_estimate_is_frozen():
    est = IntegralEstimate(1.0, 0.1, 10, Method.MONTE_CARLO)
    with pytest.raises(AttributeError):
        est.value = 2.0
