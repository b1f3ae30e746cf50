"""Pointwise geometry of the restricted cusp metric on hypersurface fibers.

A fiber is the hypersurface {z_0 z_1 ... z_n = t} inside the unit polydisk,
carrying the restriction of the product cusp metric

    omega = (i / pi) sum_k dz_k wedge dbar z_k / (|z_k|^2 (log |z_k|^2)^2).

Everything here runs in log coordinates: a point is stored through
a_k = log |z_k|^2 < 0 for k = 0..n together with the fiber angles.  The
constraint sum_k a_k = log |t|^2 is carried exactly, so extremely degenerate
fibers (log |t|^2 of order -1e6) are as cheap as mild ones; z and t are
never materialized.

With w_j = log z_j (j = 1..n) as fiber coordinates and a_0 eliminated, the
restricted metric has the real, angle independent matrix

    G_jk = (1 / pi) (delta_jk / a_j^2 + 1 / a_0^2),

and every quantity below is a rational function of the a_k evaluated in
that chart.  Expressions stay scale invariant where the geometry says they
must: rescaling all a_k by a common factor fixes the Kaehler potential
excess, the frame gradient, and the normalized curvature exactly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ChartError, DomainError, IdentityViolation, InvariantViolation

_PI = math.pi

# Relative disagreement between a closed form and its linear algebra
# fallback beyond which we refuse to return a value.
_IDENTITY_RTOL = 1e-8


class Basis(enum.Enum):
    """Which frame the entries of a form refer to."""

    COORDINATE_W = "coordinate_w"
    PROPER_FRAME = "proper_frame"


@dataclass(frozen=True)
class ModelConfig:
    """Family parameters.

    n        fiber dimension (number of free coordinates).
    lt       log |t|^2 of the fiber, strictly negative.
    c_log2   log c^2 of the truncation radius c in (0, 1); stored in log
             form for the same reason the points are.

    The truncation fraction eps = c_log2 / lt and the radius c itself are
    exposed as properties.
    """

    n: int
    lt: float
    c_log2: float

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or isinstance(self.n, bool) or self.n < 1:
            raise DomainError(f"fiber dimension must be an integer >= 1, got {self.n!r}")
        lt = float(self.lt)
        cl = float(self.c_log2)
        if not math.isfinite(lt) or not math.isfinite(cl):
            raise DomainError("lt and c_log2 must be finite")
        if not cl < 0.0:
            raise DomainError(f"c_log2 must be negative (c in (0, 1)), got {cl}")
        if not lt < cl:
            raise DomainError(f"need lt < c_log2 < 0, got lt={lt}, c_log2={cl}")
        object.__setattr__(self, "lt", lt)
        object.__setattr__(self, "c_log2", cl)

    @classmethod
    def from_c(cls, n: int, lt: float, c: float) -> "ModelConfig":
        if not (0.0 < c < 1.0):
            raise DomainError(f"truncation radius must lie in (0, 1), got {c}")
        return cls(n, lt, 2.0 * math.log(c))

    @property
    def c(self) -> float:
        return math.exp(0.5 * self.c_log2)

    @property
    def eps(self) -> float:
        """Truncation fraction c_log2 / lt, always in (0, 1)."""
        return self.c_log2 / self.lt


@dataclass(frozen=True)
class LogPoint:
    """A fiber point in log coordinates.

    a        length n+1 array of log squared moduli, all strictly negative;
             a[0] is the coordinate the chart eliminates.
    theta    length n array of fiber angles.  Every scalar in this package
             is independent of theta; it is carried for completeness and
             for the flow, which transports it unchanged.
    """

    a: np.ndarray
    theta: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        a = np.atleast_1d(np.asarray(self.a, dtype=float)).copy()
        if a.ndim != 1 or a.size < 2:
            raise DomainError("a must be a vector of length n+1 with n >= 1")
        if not np.all(np.isfinite(a)) or not np.all(a < 0.0):
            raise DomainError(f"all log moduli must be finite and negative, got {a}")
        n = a.size - 1
        if self.theta is None:
            theta = np.zeros(n)
        else:
            theta = np.atleast_1d(np.asarray(self.theta, dtype=float)).copy()
            if theta.shape != (n,):
                raise DomainError(f"theta must have length n={n}, got shape {theta.shape}")
            if not np.all(np.isfinite(theta)):
                raise DomainError("theta must be finite")
        a.setflags(write=False)
        theta.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "theta", theta)

    @property
    def n(self) -> int:
        return self.a.size - 1

    @property
    def lt(self) -> float:
        """log |t|^2 of the fiber through this point."""
        return float(self.a.sum())


@dataclass(frozen=True)
class HermitianForm:
    """A positive definite Hermitian matrix tagged with its basis.

    Construction validates Hermiticity to 1e-12 relative tolerance and
    positive definiteness; both are structural guarantees of the geometry,
    so a failure raises InvariantViolation rather than a user facing error.
    """

    dim: int
    entries: np.ndarray
    basis: Basis

    def __post_init__(self) -> None:
        m = np.asarray(self.entries)
        if m.shape != (self.dim, self.dim):
            raise InvariantViolation(
                f"form entries must be {self.dim}x{self.dim}, got {m.shape}"
            )
        scale = max(1.0, float(np.max(np.abs(m))))
        if float(np.max(np.abs(m - m.conj().T))) > 1e-12 * scale:
            raise InvariantViolation("form entries are not Hermitian")
        if float(np.linalg.eigvalsh(m).min()) <= 0.0:
            raise InvariantViolation("form is not positive definite")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    def eigenvalues(self) -> np.ndarray:
        """Real eigenvalues in ascending order."""
        return np.linalg.eigvalsh(self.entries)


@dataclass(frozen=True)
class CurvatureReport:
    """Curvature survey over a batch of points."""

    sup_norm: float
    per_point: np.ndarray

    def __post_init__(self) -> None:
        pp = np.asarray(self.per_point, dtype=float).copy()
        pp.setflags(write=False)
        object.__setattr__(self, "per_point", pp)


def make_point(b, config: ModelConfig, theta=None) -> LogPoint:
    """Build the point with barycentric fractions b against config.lt.

    b has length n with 0 < b_k and sum(b) < 1, both strict; the eliminated
    coordinate receives the remainder so the fiber constraint holds exactly.
    """
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if b.shape != (config.n,):
        raise DomainError(f"b must have length n={config.n}, got shape {b.shape}")
    if not np.all(np.isfinite(b)) or not np.all(b > 0.0) or not b.sum() < 1.0:
        raise DomainError(
            f"b must lie in the open simplex (all b_k > 0, sum < 1), got {b}"
        )
    tail = -b * abs(config.lt)
    a0 = config.lt - tail.sum()
    return LogPoint(np.concatenate(([a0], tail)), theta)


def a_squared(p: LogPoint) -> float:
    """Sum of squared log moduli; lies in [lt^2 / (n+1), lt^2]."""
    return float(np.dot(p.a, p.a))


def _metric_matrix(a: np.ndarray) -> np.ndarray:
    """Coordinate metric from a full log modulus vector (chart agnostic)."""
    tail = a[1:]
    return (np.diag(1.0 / tail**2) + 1.0 / a[0] ** 2) / _PI


def coordinate_metric(p: LogPoint) -> HermitianForm:
    """Metric matrix in the w chart: (1/pi)(delta_jk / a_j^2 + 1 / a_0^2).

    Real and independent of theta.  Valid in every chart; only frame
    quantities insist on the dominant one.
    """
    return HermitianForm(p.n, _metric_matrix(p.a), Basis.COORDINATE_W)


def dominant_index(p: LogPoint) -> int:
    """Index with maximal squared log modulus; ties resolve to the lowest."""
    return int(np.argmax(p.a**2))


def _require_dominant(p: LogPoint) -> None:
    d = dominant_index(p)
    if d != 0:
        raise ChartError(
            f"point not in the dominant chart: |a_{d}| exceeds |a_0| for a={p.a}"
        )


def dominant_chart(p: LogPoint) -> LogPoint:
    """Reindex so the eliminated coordinate has maximal squared log modulus.

    Scalar outputs are chart independent, so the angles of the returned
    point are reset to zero rather than permuted.
    """
    d = dominant_index(p)
    if d == 0:
        return p
    order = [d] + [k for k in range(p.n + 1) if k != d]
    return LogPoint(p.a[order], np.zeros(p.n))


def frame_metric(p: LogPoint) -> HermitianForm:
    """Metric in the frame W_i = a_i d/dw_i: (1/pi)(I + v v^T), v_i = a_i / a_0.

    Eigenvalues are 1/pi with multiplicity n-1 and (1/pi) a^2 / a_0^2; in the
    dominant chart the latter lies in [1/pi, (n+1)/pi].  Raises ChartError
    off the dominant chart, where that pinch fails.
    """
    _require_dominant(p)
    v = p.a[1:] / p.a[0]
    m = (np.eye(p.n) + np.outer(v, v)) / _PI
    return HermitianForm(p.n, m, Basis.PROPER_FRAME)


def metric_determinant(p: LogPoint) -> float:
    """det G, computed in closed form and checked against np.linalg.det.

    The closed form is pi^-n a^2 / prod_k a_k^2 with the product over all
    n+1 coordinates.  Disagreement beyond 1e-8 relative raises
    IdentityViolation.
    """
    g = _metric_matrix(p.a)
    numeric = float(np.linalg.det(g))
    closed = a_squared(p) / (_PI ** p.n * float(np.prod(p.a**2)))
    if abs(numeric - closed) > _IDENTITY_RTOL * abs(closed):
        raise IdentityViolation(
            f"determinant routes disagree: closed {closed!r} vs numeric {numeric!r} at a={p.a}"
        )
    return closed


def volume_density(p: LogPoint) -> float:
    """Density of omega^n against da_1..da_n dtheta_1..dtheta_n.

    Equals n! det G = n! pi^-n a^2 / prod_k a_k^2.
    """
    n = p.n
    return math.factorial(n) * a_squared(p) / (_PI**n * float(np.prod(p.a**2)))


def phi(p: LogPoint) -> float:
    """Log excess of the fiber volume density over the model density.

    phi = -log(n! pi^-n a^2 / lt^2); scale invariant, with range
    [log(pi^n / n!), log(pi^n (n+1) / n!)] pinched by the a^2 bounds.
    """
    n = p.n
    ratio = a_squared(p) / (p.lt * p.lt)
    return -(math.log(math.factorial(n)) - n * math.log(_PI) + math.log(ratio))


def phi_bounds(n: int) -> tuple[float, float]:
    """Closed interval that phi(p) occupies on every fiber of dimension n."""
    lo = n * math.log(_PI) - math.log(math.factorial(n))
    return lo, lo + math.log(n + 1.0)


def grad_phi_frame(p: LogPoint) -> np.ndarray:
    """Frame components W_i phi = -a_i (2 a_i - 2 a_0) / a^2.

    Scale invariant; bounded by 4 (n+1) in the dominant chart (the sharp
    constant is 2 (n+1)).  Raises ChartError off the dominant chart.
    """
    _require_dominant(p)
    a0 = p.a[0]
    tail = p.a[1:]
    return -tail * (2.0 * tail - 2.0 * a0) / a_squared(p)


# --- curvature -----------------------------------------------------------

# First and second fiber derivatives of the metric matrix.  Differentiation
# is along the fiber: moving a_k (k >= 1) moves a_0 = lt - sum by the
# opposite amount, which is where the 1/a_0 terms come from.


def _metric_d1(a: np.ndarray) -> np.ndarray:
    """d1[k, i, j] = d G_ij / d a_k along the fiber."""
    n = a.size - 1
    d1 = np.full((n, n, n), 2.0 / (_PI * a[0] ** 3))
    for k in range(n):
        d1[k, k, k] -= 2.0 / (_PI * a[k + 1] ** 3)
    return d1


def _metric_d2(a: np.ndarray) -> np.ndarray:
    """d2[k, l, i, j] = second fiber derivative of G_ij."""
    n = a.size - 1
    d2 = np.full((n, n, n, n), 6.0 / (_PI * a[0] ** 4))
    for k in range(n):
        d2[k, k, k, k] += 6.0 / (_PI * a[k + 1] ** 4)
    return d2


def _assemble_curvature(ginv: np.ndarray, d1: np.ndarray, d2: np.ndarray) -> np.ndarray:
    """R[i, j, k, l] = -d2[k, l, i, j] + g^{pq} d1[k, i, q] d1[l, p, j]."""
    quad = np.einsum("pq,kiq,lpj->ijkl", ginv, d1, d1)
    return -d2.transpose(2, 3, 0, 1) + quad


def _orthonormalize(r: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Contract all four slots with g^{-1/2} (eigen square root)."""
    lam, u = np.linalg.eigh(g)
    e = (u * lam**-0.5) @ u.T
    return np.einsum("ia,jb,kc,ld,ijkl->abcd", e, e, e, e, r)


def curvature_tensor(p: LogPoint, orthonormal: bool = True) -> np.ndarray:
    """Curvature tensor of the coordinate metric at p.

    With orthonormal=True (default) all four slots are contracted with
    G^{-1/2} in the eigenbasis of G and the result is doubled, so that a
    diagonal entry equals the Gaussian curvature of the corresponding one
    dimensional model; on that scale a hyperbolic cusp factor reads -4 pi.
    The normalized tensor is exactly scale invariant.  With
    orthonormal=False the raw coordinate tensor is returned.
    """
    a = p.a
    g = _metric_matrix(a)
    r = _assemble_curvature(np.linalg.inv(g), _metric_d1(a), _metric_d2(a))
    if not orthonormal:
        return r
    return 2.0 * _orthonormalize(r, g)


def _fd_curvature(p: LogPoint, step_rel: float) -> np.ndarray:
    """Orthonormalized curvature with both metric derivatives replaced by
    central differences along the fiber; shares only the center metric with
    the analytic route.

    Each direction gets its own step proportional to that coordinate (capped
    by the eliminated one): with a common absolute step, second differences
    along a large coordinate lose everything to rounding whenever some other
    coordinate is tiny, because its huge constant metric entry is carried
    through the stencil.  Per direction steps keep the rounding floor scale
    free, at roughly machine epsilon / step_rel^2.
    """
    a = p.a
    lt = float(a.sum())
    tail0 = a[1:].copy()
    n = tail0.size
    steps = step_rel * np.minimum(np.abs(tail0), abs(a[0]))

    def gmat(tail: np.ndarray) -> np.ndarray:
        full = np.concatenate(([lt - tail.sum()], tail))
        return _metric_matrix(full)

    def shifted(k: int, s: float) -> np.ndarray:
        t = tail0.copy()
        t[k] += s
        return gmat(t)

    d1 = np.empty((n, n, n))
    for k in range(n):
        d1[k] = (shifted(k, steps[k]) - shifted(k, -steps[k])) / (2.0 * steps[k])

    g0 = gmat(tail0)
    d2 = np.empty((n, n, n, n))
    for k in range(n):
        hk = steps[k]
        d2[k, k] = (shifted(k, hk) - 2.0 * g0 + shifted(k, -hk)) / (hk * hk)
        for l in range(k + 1, n):
            hl = steps[l]

            def shifted2(sk: float, sl: float) -> np.ndarray:
                t = tail0.copy()
                t[k] += sk
                t[l] += sl
                return gmat(t)

            mixed = (
                shifted2(hk, hl) - shifted2(hk, -hl)
                - shifted2(-hk, hl) + shifted2(-hk, -hl)
            ) / (4.0 * hk * hl)
            d2[k, l] = mixed
            d2[l, k] = mixed

    r = _assemble_curvature(np.linalg.inv(g0), d1, d2)
    return 2.0 * _orthonormalize(r, g0)


def curvature_sup(p: LogPoint, step_rel: float = 1e-4) -> float:
    """Largest absolute entry of the normalized curvature tensor at p.

    Every call cross checks the analytic derivatives against central
    differences with per direction relative step step_rel and raises
    IdentityViolation if the two normalized tensors differ by more than
    max(1e-6, 10 step_rel^2) times the tensor scale.
    """
    analytic = curvature_tensor(p, orthonormal=True)
    numeric = _fd_curvature(p, step_rel)
    sup = float(np.max(np.abs(analytic)))
    tol = max(1e-6, 10.0 * step_rel**2) * max(1.0, sup)
    err = float(np.max(np.abs(analytic - numeric)))
    if err > tol:
        raise IdentityViolation(
            f"curvature routes disagree by {err:.3e} (tol {tol:.3e}) at a={p.a}"
        )
    return sup


def curvature_report(points, step_rel: float = 1e-4) -> CurvatureReport:
    """curvature_sup over an iterable of points, with the overall sup."""
    vals = np.array([curvature_sup(q, step_rel) for q in points], dtype=float)
    if vals.size == 0:
        raise DomainError("curvature_report needs at least one point")
    return CurvatureReport(sup_norm=float(vals.max()), per_point=vals)
