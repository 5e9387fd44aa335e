"""Scalar special functions and root finding.

Only the principal branch of the Lambert W function is provided: the lower
branch yields a success probability that grows with the arrival rate, which
is not a physical operating point of the queueing network.
"""
import math
from dataclasses import dataclass

from .errors import BracketError, ConvergenceError, DomainError

INV_E = math.exp(-1.0)
# Absolute slack for z landing a few ulps below -1/e after rounding.
_BRANCH_SLACK = 4.0 * 2.220446049250313e-16


@dataclass(frozen=True)
class NumericTolerances:
    residual_tol: float = 1e-12
    max_iterations: int = 64

    def __post_init__(self):
        if not self.residual_tol > 0:
            raise ValueError("residual_tol must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


DEFAULT_TOLERANCES = NumericTolerances()


def _initial_guess(z):
    if z < -0.32:
        # series about the branch point in p = sqrt(2(ez + 1))
        p = math.sqrt(max(2.0 * (math.e * z + 1.0), 0.0))
        return -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * 11.0 / 72.0))
    if z <= math.e:
        return math.log1p(z)
    lz = math.log(z)
    return lz - math.log(lz)


def lambert_w0(z, tol=DEFAULT_TOLERANCES):
    """Principal branch of the Lambert W function for real ``z >= -1/e``.

    Returns ``w >= -1`` with ``w * exp(w) == z``. The starting point comes
    from the branch-point series, ``log1p`` or the asymptotic
    ``ln z - ln ln z`` depending on ``z``, and is refined by Halley steps.

    Raises
    ------
    DomainError
        If ``z < -1/e``; no real solution exists there.
    """
    z = float(z)
    if math.isnan(z):
        raise DomainError("lambert_w0 is undefined for NaN")
    if z < -INV_E:
        if z >= -INV_E - _BRANCH_SLACK:
            return -1.0
        raise DomainError(f"lambert_w0 requires z >= -1/e, got {z!r}")
    if z == 0.0:
        return 0.0
    if math.isinf(z):
        return math.inf

    w = _initial_guess(z)
    if w == -1.0:
        return w
    scale = max(1.0, abs(z))
    for _ in range(tol.max_iterations):
        ew = math.exp(w)
        f = w * ew - z
        if abs(f) <= 0.25 * tol.residual_tol * scale:
            return w
        wp1 = w + 1.0
        if wp1 == 0.0:
            return w
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w_next = max(w - step, -1.0)
        if w_next == w:
            return w
        w = w_next
    if abs(w * math.exp(w) - z) <= tol.residual_tol * scale:
        return w
    raise ConvergenceError(f"lambert_w0 did not converge for z={z!r}")


def gamma_reflection_product(delta):
    """Return Gamma(1 + delta) * Gamma(1 - delta) as pi*delta / sin(pi*delta)."""
    delta = float(delta)
    if not 0.0 < delta < 1.0:
        raise DomainError(f"gamma_reflection_product requires 0 < delta < 1, got {delta!r}")
    x = math.pi * delta
    return x / math.sin(x)


def solve_bracketed_root(f, lo, hi, tol=DEFAULT_TOLERANCES, secant=False):
    """Find a root of a continuous monotone ``f`` on ``[lo, hi]``.

    Plain bisection by default. With ``secant=True`` the trial point is the
    false-position (Illinois) estimate, which converges faster on smooth
    functions but keeps the bracket.

    Stops when ``|f(t)| <= residual_tol`` or the bracket is narrower than
    ``residual_tol``.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise BracketError(f"f({lo})={flo!r} and f({hi})={fhi!r} share a sign")

    side = 0
    for _ in range(tol.max_iterations):
        if secant:
            t = (lo * fhi - hi * flo) / (fhi - flo)
            if not lo < t < hi:
                t = 0.5 * (lo + hi)
        else:
            t = 0.5 * (lo + hi)
        ft = f(t)
        if abs(ft) <= tol.residual_tol or (hi - lo) <= tol.residual_tol:
            return t
        if (ft > 0) == (flo > 0):
            lo, flo = t, ft
            if secant and side == -1:
                fhi *= 0.5
            side = -1
        else:
            hi, fhi = t, ft
            if secant and side == 1:
                flo *= 0.5
            side = 1
    raise ConvergenceError(
        f"no root within {tol.max_iterations} iterations; bracket [{lo!r}, {hi!r}]"
    )
