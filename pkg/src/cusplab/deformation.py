"""Deformation data of the fiber family and the log modulus flow.

The family direction t d/dt lifts to the fiber as the vector field
W = sum_k c_k z_k d/dz_k with weights c_k = a_k^2 / a^2, which sum to one.
W fails to be holomorphic along the fiber exactly because the weights vary;
dbar W measures that failure and its squared norm against the cusp metric
has the closed form

    ||dbar W||^2 = (4 / a^6) sum_{i != j} a_i^2 a_j^2        (a^2 = sum a_k^2)

with the sum over ordered pairs drawn from all n+1 coordinates.  The same
number arises as the diagonal metric contraction of the ambient derivative
matrix d c_k / d a_m, which is the fallback route checked on every call.

The flow integrates d a_k / d sigma = 2 c_k (all n+1 coordinates, angles
frozen), which moves fibers toward deeper degeneration while preserving
sum a_k - lt - 2 sigma exactly at the discrete level: every Runge-Kutta
stage has components summing to 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, IdentityViolation
from .geometry import Basis, LogPoint, a_squared, volume_density

_IDENTITY_RTOL = 1e-8


@dataclass(frozen=True)
class VectorValuedForm:
    """Components of a (0,1) form with vector values, tagged with a basis.

    entries[i, k] pairs value direction i with form slot k; both indices
    run over the fiber coordinates 1..n.
    """

    dim: int
    entries: np.ndarray
    basis: Basis

    def __post_init__(self) -> None:
        m = np.asarray(self.entries, dtype=float)
        if m.shape != (self.dim, self.dim):
            raise DomainError(f"entries must be {self.dim}x{self.dim}, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise DomainError("entries must be finite")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)


def w_coefficients(p: LogPoint) -> np.ndarray:
    """Weights c_k = a_k^2 / a^2 of the lifted family direction, k = 0..n."""
    return p.a**2 / a_squared(p)


def dbar_w_components(p: LogPoint) -> VectorValuedForm:
    """Fiber derivative matrix B[i, k] = d c_i / d a_k for i, k = 1..n.

    Differentiation is along the fiber (a_0 adjusts), giving

        B[i, k] = 2 a_i delta_ik / a^2 - a_i^2 (2 a_k - 2 a_0) / a^4.
    """
    a = p.a
    a2 = a_squared(p)
    tail = a[1:]
    b = -np.outer(tail**2, 2.0 * tail - 2.0 * a[0]) / (a2 * a2)
    b[np.diag_indices_from(b)] += 2.0 * tail / a2
    return VectorValuedForm(p.n, b, Basis.COORDINATE_W)


def _ambient_components(a: np.ndarray) -> np.ndarray:
    """Ambient derivative matrix C[k, m] = d c_k / d a_m, k, m = 0..n."""
    a2 = float(np.dot(a, a))
    c = -2.0 * np.outer(a**2, a) / (a2 * a2)
    c[np.diag_indices_from(c)] += 2.0 * a / a2
    return c


def _ordered_pair_sum(sq: np.ndarray) -> float:
    """sum_{i != j} sq_i sq_j accumulated pairwise, no cancellation."""
    m = np.outer(sq, sq)
    np.fill_diagonal(m, 0.0)
    return float(m.sum())


def dbar_w_norm_sq(p: LogPoint) -> float:
    """Squared cusp metric norm of dbar W at p.

    Returns the closed form (4 / a^6) sum_{i != j} a_i^2 a_j^2 after
    checking it against the ambient contraction
    sum_{k,m} (a_m^2 / a_k^2) C[k, m]^2 to 1e-8 relative tolerance.
    Vanishes toward the interior of a single boundary divisor and is
    bounded by 4 n (n+1) / a^2 on every fiber.
    """
    a = p.a
    a2 = a_squared(p)
    sq = a**2
    closed = 4.0 * _ordered_pair_sum(sq) / a2**3
    c = _ambient_components(a)
    contraction = float(((sq[None, :] / sq[:, None]) * c**2).sum())
    if abs(contraction - closed) > _IDENTITY_RTOL * abs(closed):
        raise IdentityViolation(
            f"dbar W norm routes disagree: closed {closed!r} vs contraction "
            f"{contraction!r} at a={a}"
        )
    return closed


def wp_integrand(p: LogPoint) -> float:
    """||dbar W||^2 times the fiber volume density at p.

    This is the local numerator of the family's metric pairing; integrating
    it over the truncated fiber and dividing by the volume gives the ratio
    the experiments estimate.
    """
    return dbar_w_norm_sq(p) * volume_density(p)


# --- log modulus flow ----------------------------------------------------


def _flow_rhs(a: np.ndarray) -> np.ndarray:
    """Componentwise 2 a_k^2 / a^2 for a batch of log vectors (m, n+1)."""
    return 2.0 * a**2 / np.sum(a**2, axis=1, keepdims=True)


def flow_array(a: np.ndarray, sigma: float, steps: int | None = None) -> np.ndarray:
    """Classical fourth order Runge-Kutta transport of log vectors.

    a is (m, n+1); returns the flowed batch after time sigma using
    steps substeps (default: 100 per unit of |sigma|, at least one).
    The row sums move by exactly 2 sigma up to rounding because every
    stage vector sums to 2.  Raises DomainError if any component reaches
    zero, which only happens with coarse manual step counts.
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[1] < 2:
        raise DomainError("flow_array expects a batch of shape (m, n+1)")
    if not np.all(np.isfinite(a)) or not np.all(a < 0.0):
        raise DomainError("flow_array needs finite, strictly negative log moduli")
    sigma = float(sigma)
    if steps is None:
        steps = max(1, int(math.ceil(100.0 * abs(sigma))))
    if steps < 1:
        raise DomainError(f"steps must be >= 1, got {steps}")
    h = sigma / steps
    for _ in range(steps):
        k1 = _flow_rhs(a)
        k2 = _flow_rhs(a + 0.5 * h * k1)
        k3 = _flow_rhs(a + 0.5 * h * k2)
        k4 = _flow_rhs(a + h * k3)
        a = a + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(a < 0.0):
            raise DomainError(
                "flow left the admissible region (a component reached 0); "
                "increase steps or reduce sigma"
            )
    return a


def flow_map(p: LogPoint, sigma: float, steps: int | None = None) -> LogPoint:
    """Flow a single point for time sigma; angles are transported frozen."""
    moved = flow_array(p.a[None, :], sigma, steps)[0]
    return LogPoint(moved, p.theta)
