"""Exception taxonomy shared across the package.

Callers get exactly one of these for any anticipated failure, so scripts can
map them onto exit codes without string matching.
"""


class CuspLabError(Exception):
    """Base class for all package specific errors."""


class DomainError(CuspLabError):
    """Point or family parameters fall outside the admissible region.

    Raised for non negative log moduli, barycentric coordinates off the open
    simplex, truncation radii that empty the domain, and similar misuse.
    """


class ChartError(CuspLabError):
    """An operation needs the dominant chart but the point is not in it.

    Frame quantities eliminate the coordinate with the largest squared log
    modulus.  Reindex with :func:`cusplab.geometry.dominant_chart` first.
    """


class IdentityViolation(CuspLabError):
    """Two independent evaluation routes for the same quantity disagree.

    Several operations compute both a closed form and a generic linear
    algebra fallback and compare them on every call; a mismatch indicates a
    numerical or programming fault, never a user error.
    """


class SamplerError(CuspLabError):
    """The importance sampler degenerated (acceptance rate below 1e-4)."""


class FitError(CuspLabError):
    """A regression over sweep results failed its residual tolerance."""


class InvariantViolation(CuspLabError):
    """A proven analytic bound failed at a concrete evaluation point."""
