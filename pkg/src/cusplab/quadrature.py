"""Monte Carlo quadrature over the truncated barycentric domain.

Scalar integrals over a fiber reduce, after the angles are integrated out
and the log moduli are rescaled by |lt|, to integrals over

    T_eps = { b in R^n : b_k >= eps, sum b_k <= 1 - eps },

the standard simplex shaved by the truncation fraction eps on every side
(the eliminated coordinate b_0 = 1 - sum b_k then also sits in
[eps, 1 - eps]).  The domain is an affine copy of the simplex and is
symmetric under permuting all n+1 barycentric entries.

Sampling strategy: each coordinate is drawn independently from the
normalized density b^-2 on [eps, 1 - eps] by inverse CDF, which matches the
b_k^-2 factors the integrands carry; proposals landing outside the simplex
constraint get weight zero, keeping the estimator unbiased on T_eps.  Work
is split into fixed shards of 65536 draws, each with its own counter based
generator seeded by (seed, shard), and shard sums are reduced in shard
order, so results are bit identical for a given (seed, n_samples) no matter
how many threads run the shards.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SamplerError
from .geometry import ModelConfig

_SHARD_SIZE = 1 << 16
_MIN_ACCEPTANCE = 1e-4


class Method(enum.Enum):
    MONTE_CARLO = "monte_carlo"
    EXACT_1D = "exact_1d"


@dataclass(frozen=True)
class TruncatedDomain:
    """The shaved simplex T_eps in dimension n."""

    n: int
    eps: float

    @property
    def lo(self) -> float:
        return self.eps

    @property
    def hi(self) -> float:
        return 1.0 - self.eps


@dataclass(frozen=True)
class IntegralEstimate:
    """A quadrature result: value, one sigma error, and provenance."""

    value: float
    std_error: float
    samples: int
    method: Method


def domain(config: ModelConfig) -> TruncatedDomain:
    """Truncated domain for config; DomainError if the truncation empties it.

    The simplex survives exactly when eps < 1 / (n+1).
    """
    eps = config.eps
    if not eps < 1.0 / (config.n + 1):
        raise DomainError(
            f"truncation eps={eps:.6g} empties the domain for n={config.n} "
            f"(need eps < {1.0 / (config.n + 1):.6g}); the fiber is too shallow "
            f"for this truncation radius"
        )
    return TruncatedDomain(config.n, eps)


def _shard_generator(seed: int, shard: int) -> np.random.Generator:
    # Counter based stream keyed by (seed, shard): shards never overlap and
    # shard s of seed q is the same stream in every run.
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=[seed, shard])))


def _shard_sums(f, dom: TruncatedDomain, seed: int, shard: int, m: int, width: int):
    """One shard's moments: (sum g, scatter about the shard mean, accepted).

    The scatter matrix is centered inside the shard; forming raw sums of
    g g^T and centering at the end loses all significant digits when the
    integrand is near constant, and the matched volume integrand is exactly
    that case.
    """
    rng = _shard_generator(seed, shard)
    eps = dom.eps
    q_norm = 1.0 / eps - 1.0 / (1.0 - eps)
    u = rng.random((m, dom.n))
    b = 1.0 / (1.0 / eps - q_norm * u)
    inside = b.sum(axis=1) <= 1.0 - eps
    g = np.zeros((m, width))
    if inside.any():
        bb = b[inside]
        weight = q_norm**dom.n * np.prod(bb, axis=1) ** 2
        vals = np.asarray(f(bb), dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.shape != (bb.shape[0], width):
            raise DomainError(
                f"integrand returned shape {vals.shape}, expected ({bb.shape[0]}, {width})"
            )
        g[inside] = vals * weight[:, None]
    total = g.sum(axis=0)
    gc = g - total / m
    return total, gc.T @ gc, int(inside.sum())


def _mc_moments(f, dom: TruncatedDomain, n_samples: int, seed: int, threads: int, width: int):
    """Means, covariance of the means, and acceptance rate for a vector
    integrand f(b) -> (m, width).  Deterministic in (seed, n_samples)."""
    if n_samples < 2:
        raise DomainError(f"need at least 2 samples, got {n_samples}")
    if seed < 0:
        raise DomainError(f"seed must be a nonnegative integer, got {seed}")
    shards = []
    done = 0
    idx = 0
    while done < n_samples:
        m = min(_SHARD_SIZE, n_samples - done)
        shards.append((idx, m))
        done += m
        idx += 1

    def work(item):
        shard, m = item
        return _shard_sums(f, dom, seed, shard, m, width)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, shards))
    else:
        results = [work(item) for item in shards]

    s1 = np.zeros(width)
    accepted = 0
    for part1, _, acc in results:  # fixed shard order reduction
        s1 += part1
        accepted += acc

    rate = accepted / n_samples
    if rate < _MIN_ACCEPTANCE:
        raise SamplerError(
            f"acceptance rate {rate:.2e} below {_MIN_ACCEPTANCE:.0e}; the "
            f"truncated domain is too thin for the box proposal"
        )
    means = s1 / n_samples
    # Pool the shard scatters around the grand mean; again in shard order.
    scatter = np.zeros((width, width))
    for (_, m), (part1, css, _) in zip(shards, results):
        delta = part1 / m - means
        scatter += css + m * np.outer(delta, delta)
    cov_mean = scatter / (n_samples - 1) / n_samples
    return means, cov_mean, rate


def mc_integrate(f, dom: TruncatedDomain, n_samples: int, seed: int = 0,
                 threads: int = 1) -> IntegralEstimate:
    """Integrate a scalar function over T_eps.

    f maps an (m, n) array of in-domain barycentric rows to m values.
    Returns an unbiased estimate with its one sigma standard error;
    identical (seed, n_samples) reproduce the result bit for bit, for any
    thread count.  Raises SamplerError if fewer than 1e-4 of proposals land
    inside the domain.
    """
    means, cov_mean, _ = _mc_moments(f, dom, n_samples, seed, threads, width=1)
    return IntegralEstimate(
        value=float(means[0]),
        std_error=float(math.sqrt(max(cov_mean[0, 0], 0.0))),
        samples=n_samples,
        method=Method.MONTE_CARLO,
    )


def exact_volume_n1(config: ModelConfig) -> IntegralEstimate:
    """Closed form truncated fiber volume, available only for n = 1.

    For n = 1 the volume integral collapses to a single rational integral:
    (4 / |lt|) (1 / eps - 1 / (1 - eps)).
    """
    if config.n != 1:
        raise DomainError(f"exact volume is a 1 dimensional formula, got n={config.n}")
    dom = domain(config)
    eps = dom.eps
    value = 4.0 / abs(config.lt) * (1.0 / eps - 1.0 / (1.0 - eps))
    return IntegralEstimate(value=value, std_error=0.0, samples=0, method=Method.EXACT_1D)
