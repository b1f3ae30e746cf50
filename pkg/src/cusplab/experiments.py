"""Experiment drivers: volume, metric ratio, scaling sweep, bound survey.

All integrals run over the truncated barycentric domain of
:mod:`cusplab.quadrature`.  The integrands used here are the b space
reductions of the fiber quantities: angles contribute (2 pi)^n, the log
rescaling contributes |lt|^n, and both are folded into the prefactors so
the outputs are directly the geometric volume and metric pairing.

Both reduced integrands are symmetric under permuting all n+1 barycentric
entries (b_0 included), and the domain is too.  Each is therefore
integrated in its orbit collapsed form, obtained by relabeling every
summand or factor pattern onto a fixed representative:

  volume    (n+1)! 2^n |lt|^-n  prod_{k=1..n} b_k^-2
  pairing   (n+1)! n 2^{n+2} |lt|^-(n+2)  (prod_{k=1..n-1} b_k^-2) / (b^2)^2

with b^2 = sum_{k=0..n} b_k^2.  The collapse is exact (it is a bijection
of integration variables), and it is what makes the box proposal of the
sampler efficient: the volume form matches the proposal density exactly,
and the pairing form has bounded weights.  The original, uncollapsed
integrands are kept (``symmetrized=False``) as an independent route for
cross checks; they carry b_0^-2 factors the proposal cannot see, so they
are statistically much heavier and unsuitable for production estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, FitError, InvariantViolation
from .geometry import (
    LogPoint,
    ModelConfig,
    curvature_sup,
    dominant_chart,
    frame_metric,
    grad_phi_frame,
    make_point,
    phi,
    phi_bounds,
)
from .quadrature import (
    IntegralEstimate,
    Method,
    TruncatedDomain,
    _mc_moments,
    domain,
    mc_integrate,
)

_PI = math.pi

# Slack for asserting proven bounds at sampled points; failures beyond this
# are faults, not rounding.
_BOUND_SLACK = 1e-12


def _volume_integrand(config: ModelConfig):
    n = config.n
    pref = math.factorial(n + 1) * 2.0**n / abs(config.lt) ** n

    def f(b: np.ndarray) -> np.ndarray:
        return pref / np.prod(b, axis=1) ** 2

    return f


def _pairing_integrand(config: ModelConfig):
    n = config.n
    pref = math.factorial(n + 1) * n * 2.0 ** (n + 2) / abs(config.lt) ** (n + 2)

    def f(b: np.ndarray) -> np.ndarray:
        b0 = 1.0 - b.sum(axis=1)
        bsq = b0**2 + np.sum(b**2, axis=1)
        head = np.prod(b[:, : n - 1], axis=1) ** 2 if n > 1 else 1.0
        return pref / (bsq**2 * head)

    return f


def _pair_sum(sq_cols) -> np.ndarray:
    """sum over ordered pairs of distinct columns, accumulated positively."""
    total = 0.0
    cols = list(sq_cols)
    for i in range(len(cols)):
        for j in range(i + 1, len(cols)):
            total = total + 2.0 * cols[i] * cols[j]
    return total


def _volume_integrand_direct(config: ModelConfig):
    """Uncollapsed volume integrand; cross check route only."""
    n = config.n
    pref = math.factorial(n) * 2.0**n / abs(config.lt) ** n

    def f(b: np.ndarray) -> np.ndarray:
        b0 = 1.0 - b.sum(axis=1)
        bsq = b0**2 + np.sum(b**2, axis=1)
        denom = b0**2 * np.prod(b, axis=1) ** 2
        return pref * bsq / denom

    return f


def _pairing_integrand_direct(config: ModelConfig):
    """Uncollapsed pairing integrand; cross check route only."""
    n = config.n
    pref = math.factorial(n) * 2.0**n * 4.0 / abs(config.lt) ** (n + 2)

    def f(b: np.ndarray) -> np.ndarray:
        b0 = 1.0 - b.sum(axis=1)
        sq = [b0**2] + [b[:, k] ** 2 for k in range(n)]
        pair = _pair_sum(sq)
        bsq = b0**2 + np.sum(b**2, axis=1)
        denom = b0**2 * np.prod(b, axis=1) ** 2
        return pref * pair / (bsq**2 * denom)

    return f


def wp_predicted(config: ModelConfig) -> float:
    """Reference small |t| prediction for the metric ratio:
    2 n |log c^2| (1 + pi/2) / |lt|^3."""
    return 2.0 * config.n * abs(config.c_log2) * (1.0 + _PI / 2.0) / abs(config.lt) ** 3


def run_volume(config: ModelConfig, n_samples: int, seed: int = 0,
               threads: int = 1, symmetrized: bool = True) -> IntegralEstimate:
    """Monte Carlo volume of the truncated fiber."""
    dom = domain(config)
    f = _volume_integrand(config) if symmetrized else _volume_integrand_direct(config)
    return mc_integrate(f, dom, n_samples, seed=seed, threads=threads)


@dataclass(frozen=True)
class WpRatio:
    """Metric ratio estimate with its ingredients.

    ratio      pairing integral divided by volume, both from the same draws.
    std_error  delta method error for the ratio, covariance included.
    predicted  reference prediction of :func:`wp_predicted`.
    rel_dev    |ratio - predicted| / predicted.
    """

    ratio: float
    std_error: float
    predicted: float
    rel_dev: float
    numerator: IntegralEstimate
    volume: IntegralEstimate


def run_wp_ratio(config: ModelConfig, n_samples: int, seed: int = 0,
                 threads: int = 1, symmetrized: bool = True) -> WpRatio:
    """Estimate the metric pairing ratio over the truncated fiber.

    Numerator and volume are estimated from the same sample set, and the
    ratio error comes from the joint covariance, which the shared draws
    make strongly favorable.
    """
    dom = domain(config)
    if symmetrized:
        f_num = _pairing_integrand(config)
        f_vol = _volume_integrand(config)
    else:
        f_num = _pairing_integrand_direct(config)
        f_vol = _volume_integrand_direct(config)

    def f_joint(b: np.ndarray) -> np.ndarray:
        return np.stack([f_num(b), f_vol(b)], axis=1)

    means, cov_mean, _ = _mc_moments(f_joint, dom, n_samples, seed, threads, width=2)
    num, vol = float(means[0]), float(means[1])
    if vol <= 0.0:
        raise DomainError("volume estimate vanished; increase n_samples")
    ratio = num / vol
    var = ratio**2 * (
        cov_mean[0, 0] / num**2
        + cov_mean[1, 1] / vol**2
        - 2.0 * cov_mean[0, 1] / (num * vol)
    )
    predicted = wp_predicted(config)
    return WpRatio(
        ratio=ratio,
        std_error=float(math.sqrt(max(var, 0.0))),
        predicted=predicted,
        rel_dev=abs(ratio - predicted) / predicted,
        numerator=IntegralEstimate(num, float(math.sqrt(max(cov_mean[0, 0], 0.0))),
                                   n_samples, Method.MONTE_CARLO),
        volume=IntegralEstimate(vol, float(math.sqrt(max(cov_mean[1, 1], 0.0))),
                                n_samples, Method.MONTE_CARLO),
    )


@dataclass(frozen=True)
class SweepReport:
    """Scaling sweep over a list of lt values at fixed truncation radius.

    rows holds one dict per lt (lt, ratio, std_error, predicted, rel_dev,
    numerator, volume); fitted_exponent is the weighted least squares slope
    of log ratio against log |lt|; bound_spread is the spread of
    log(numerator) + 3 log(|lt| / 2) across the sweep, which the uniform
    upper bound predicts stays within a narrow band.
    """

    rows: tuple
    fitted_exponent: float
    exponent_std_error: float
    fit_residual: float
    bound_spread: float


def run_sweep(config: ModelConfig, lt_list, n_samples: int, seed: int = 0,
              threads: int = 1, fit_residual_tol: float = 0.1) -> SweepReport:
    """Ratio estimates across lt values, with a power law fit.

    Every lt reuses the same seed, so draws are common random numbers and
    the fitted slope is insensitive to shared noise.  Raises FitError if
    the root mean square residual of the weighted fit exceeds
    fit_residual_tol (in log units).
    """
    lts = [float(v) for v in lt_list]
    if len(lts) < 2:
        raise DomainError("sweep needs at least two lt values")
    rows = []
    for lt in lts:
        cfg = ModelConfig(config.n, lt, config.c_log2)
        r = run_wp_ratio(cfg, n_samples, seed=seed, threads=threads)
        rows.append(
            {
                "lt": lt,
                "ratio": r.ratio,
                "std_error": r.std_error,
                "predicted": r.predicted,
                "rel_dev": r.rel_dev,
                "numerator": r.numerator.value,
                "volume": r.volume.value,
            }
        )

    x = np.log([abs(row["lt"]) for row in rows])
    y = np.log([row["ratio"] for row in rows])
    sig = np.array([max(row["std_error"] / row["ratio"], 1e-12) for row in rows])
    coef, cov = np.polyfit(x, y, 1, w=1.0 / sig, cov="unscaled")
    slope = float(coef[0])
    slope_se = float(math.sqrt(max(cov[0, 0], 0.0)))
    resid = float(np.sqrt(np.mean((y - np.polyval(coef, x)) ** 2)))
    spread_terms = [math.log(row["numerator"]) + 3.0 * math.log(abs(row["lt"]) / 2.0)
                    for row in rows]
    spread = max(spread_terms) - min(spread_terms)
    if resid > fit_residual_tol:
        raise FitError(
            f"power law fit residual {resid:.3g} exceeds tolerance {fit_residual_tol:.3g}"
        )
    return SweepReport(
        rows=tuple(rows),
        fitted_exponent=slope,
        exponent_std_error=slope_se,
        fit_residual=resid,
        bound_spread=spread,
    )


@dataclass(frozen=True)
class BoundsReport:
    """Observed ranges of the bounded pointwise quantities."""

    n: int
    lt: float
    samples: int
    phi_min: float
    phi_max: float
    grad_phi_max: float
    frame_eig_min: float
    frame_eig_max: float
    curvature_sup: float


def run_bounds_scan(config: ModelConfig, n_samples: int, seed: int = 0,
                    step_rel: float = 1e-4) -> BoundsReport:
    """Survey phi, its frame gradient, frame eigenvalues, and curvature.

    Points are drawn uniformly from the open simplex with angles uniform on
    [0, 2 pi); the draw depends only on (n, seed), never on lt, so scans at
    different lt see the same barycentric sample and scale invariance can
    be checked to rounding.  Every proven bound is asserted at every point;
    a failure raises InvariantViolation naming the offending point.
    """
    if n_samples < 1:
        raise DomainError(f"need at least 1 sample, got {n_samples}")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=[seed])))
    bary = rng.dirichlet(np.ones(config.n + 1), size=n_samples)[:, 1:]
    angles = rng.uniform(0.0, 2.0 * _PI, size=(n_samples, config.n))

    lo, hi = phi_bounds(config.n)
    grad_bound = 4.0 * (config.n + 1)
    eig_lo, eig_hi = 1.0 / _PI, (config.n + 1) / _PI

    phi_min = math.inf
    phi_max = -math.inf
    grad_max = 0.0
    eig_min = math.inf
    eig_max = -math.inf
    curv_max = 0.0

    for i in range(n_samples):
        p = dominant_chart(make_point(bary[i], config, theta=angles[i]))
        val = phi(p)
        if not (lo - _BOUND_SLACK <= val <= hi + _BOUND_SLACK):
            raise InvariantViolation(
                f"phi={val!r} outside [{lo!r}, {hi!r}] at b={bary[i]}, lt={config.lt}"
            )
        g = float(np.max(np.abs(grad_phi_frame(p))))
        if g > grad_bound + _BOUND_SLACK:
            raise InvariantViolation(
                f"frame gradient {g!r} exceeds {grad_bound} at b={bary[i]}, lt={config.lt}"
            )
        eigs = frame_metric(p).eigenvalues()
        if eigs[0] < eig_lo - _BOUND_SLACK or eigs[-1] > eig_hi + _BOUND_SLACK:
            raise InvariantViolation(
                f"frame eigenvalues {eigs} leave [{eig_lo!r}, {eig_hi!r}] "
                f"at b={bary[i]}, lt={config.lt}"
            )
        curv = curvature_sup(p, step_rel=step_rel)

        phi_min = min(phi_min, val)
        phi_max = max(phi_max, val)
        grad_max = max(grad_max, g)
        eig_min = min(eig_min, float(eigs[0]))
        eig_max = max(eig_max, float(eigs[-1]))
        curv_max = max(curv_max, curv)

    return BoundsReport(
        n=config.n,
        lt=config.lt,
        samples=n_samples,
        phi_min=phi_min,
        phi_max=phi_max,
        grad_phi_max=grad_max,
        frame_eig_min=eig_min,
        frame_eig_max=eig_max,
        curvature_sup=curv_max,
    )
