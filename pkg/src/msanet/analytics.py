"""Closed-form performance results for the Poisson bipolar network.

All functions are pure functions of ``SystemParams`` (and ``MsaThresholds``
where design targets are involved). Infinite delays are reported as
``math.inf``.
"""
import enum
import math
from dataclasses import dataclass

from .errors import WindowError
from .mathcore import NumericTolerances, lambert_w0, solve_bracketed_root
from .model import StationaryMetrics, derive_constants

# instability causes reported by stationary_solution
LAMBERT_DOMAIN = "lambert_domain"
NONEMPTY_ABOVE_ONE = "nonempty_prob_above_one"
SERVICE_SATURATED = "service_saturated"


class RegimeKind(enum.Enum):
    INTERFERENCE_LIMITED = "interference_limited"
    NOISE_LIMITED = "noise_limited"
    INTERMEDIATE = "intermediate"


@dataclass(frozen=True)
class RegimeClass:
    kind: RegimeKind
    traffic_factor: float


@dataclass(frozen=True)
class MsaRegion:
    lambda0: float
    xi0: float

    def contains(self, density, arrival_rate):
        return density >= self.lambda0 and arrival_rate <= self.xi0


def success_prob_poisson(active_density, params):
    dc = derive_constants(params)
    return math.exp(-active_density * dc.c0 - dc.noise_exponent)


def geo_geo1_mean_delay(xi, mu):
    """Mean sojourn time, in slots, of a discrete-time Geo/Geo/1 queue.

    Returns ``math.inf`` when ``xi >= mu``.
    """
    if xi >= mu:
        return math.inf
    return (1.0 - xi) / (mu - xi)


def massive_threshold(params, thresholds):
    """Minimum density lambda0 for which the network counts as massive."""
    dc = derive_constants(params)
    eps = thresholds.success_floor_epsilon
    if not 0.0 < eps < math.exp(-dc.noise_exponent):
        raise WindowError(
            f"success_floor_epsilon={eps!r} must lie in (0, exp(-theta W r0^alpha))"
            f" = (0, {math.exp(-dc.noise_exponent)!r})"
        )
    return -(dc.noise_exponent + math.log(eps)) / dc.c0


def sporadic_threshold(params, thresholds):
    """Maximum arrival rate xi0 for which the network counts as sporadic."""
    dc = derive_constants(params)
    beta = thresholds.delay_ceiling_beta
    if not beta > math.exp(dc.noise_exponent):
        raise WindowError(
            f"delay_ceiling_beta={beta!r} must exceed exp(theta W r0^alpha)"
            f" = {math.exp(dc.noise_exponent)!r}"
        )
    return (beta * math.exp(-dc.noise_exponent) - 1.0) / (beta - 1.0)


def msa_region(params, thresholds):
    return MsaRegion(
        lambda0=massive_threshold(params, thresholds),
        xi0=sporadic_threshold(params, thresholds),
    )


def interference_limited_boundary(params, thresholds):
    """Smallest traffic factor xi*lambda making the network interference-limited."""
    dc = derive_constants(params)
    eta = thresholds.regime_ratio_eta
    return (dc.noise_exponent - math.log(eta)) / (params.transmit_prob_p * dc.c0)


def noise_limited_boundary(params, thresholds):
    """Largest traffic factor xi*lambda keeping the network noise-limited.

    Zero when ``theta W r0^alpha + ln(eta) <= 0``: no noise-limited regime.
    """
    dc = derive_constants(params)
    numerator = dc.noise_exponent + math.log(thresholds.regime_ratio_eta)
    if numerator <= 0.0:
        return 0.0
    return numerator / (dc.c0 * math.exp(dc.noise_exponent))


def classify_regime(params, thresholds):
    tf = params.arrival_rate_xi * params.density_lambda
    if tf >= interference_limited_boundary(params, thresholds):
        kind = RegimeKind.INTERFERENCE_LIMITED
    elif tf <= noise_limited_boundary(params, thresholds):
        kind = RegimeKind.NOISE_LIMITED
    else:
        kind = RegimeKind.INTERMEDIATE
    return RegimeClass(kind=kind, traffic_factor=tf)


def interference_correlation(p):
    """Temporal correlation of interference under Rayleigh fading and ALOHA."""
    if not 0.0 < p <= 1.0:
        raise ValueError("p must lie in (0, 1]")
    return p / 2.0


def backlogged_success_prob(params):
    dc = derive_constants(params)
    pl = params.transmit_prob_p * params.density_lambda
    return math.exp(-pl * dc.c0 - dc.noise_exponent)


def joint_success_prob(params):
    dc = derive_constants(params)
    pl = params.transmit_prob_p * params.density_lambda
    return math.exp(-2.0 * dc.noise_exponent - pl * 2.0 ** dc.delta * dc.c0)


def _correlation_from_load(load, delta, noise_exponent):
    # load is p*lambda*C0
    x = (2.0 - 2.0 ** delta) * load
    y = noise_exponent + load
    if y > 50.0:
        # same ratio, rearranged so that neither exponential overflows
        return math.exp(x - y) * -math.expm1(-x) / -math.expm1(-y)
    return math.expm1(x) / math.expm1(y)


def success_correlation(params):
    """Pearson correlation of success indicators in two slots (backlogged)."""
    dc = derive_constants(params)
    load = params.transmit_prob_p * params.density_lambda * dc.c0
    return _correlation_from_load(load, dc.delta, dc.noise_exponent)


def correlation_root_function(a, b):
    """g(t) = (a-1) t^a - a b t^(a-1) + 1, the numerator of the derivative
    of (t^a - 1)/(t - b)."""
    return lambda t: (a - 1.0) * t ** a - a * b * t ** (a - 1.0) + 1.0


@dataclass(frozen=True)
class CorrelationPeak:
    p_lambda: float
    t0: float
    a: float
    b: float


def max_correlation_peak(params, tol=NumericTolerances(residual_tol=1e-13, max_iterations=400)):
    dc = derive_constants(params)
    a = 2.0 - 2.0 ** dc.delta
    b = math.exp(-dc.noise_exponent)
    g = correlation_root_function(a, b)
    if b >= 1.0:
        # noise-free: g(1) = 0 and the correlation only decreases with load
        return CorrelationPeak(p_lambda=0.0, t0=1.0, a=a, b=b)
    lo = 1.0 + 1e-6
    hi = 2.0
    # g decreases on t > 1, so expand until it goes negative
    while g(hi) > 0.0:
        hi *= 2.0
        if hi > 2.0 ** 64:
            raise WindowError("no sign change of g below 2^64")
    t0 = solve_bracketed_root(g, lo, hi, tol, secant=True)
    return CorrelationPeak(p_lambda=math.log(t0) / dc.c0, t0=t0, a=a, b=b)


def max_correlation_point(params):
    """Value of p*lambda maximizing the success correlation."""
    return max_correlation_peak(params).p_lambda


def high_noise_correlation_point(params):
    """Limit of max_correlation_point as the noise power grows without bound."""
    dc = derive_constants(params)
    a = 2.0 - 2.0 ** dc.delta
    return -math.log(1.0 - a) / (a * dc.c0)


def stationary_solution(params):
    """Non-empty probability, success probability, delay and queue length of
    the high-mobility network at stationarity.

    The fixed point ``zeta = (xi/p) exp(p zeta lambda C0 + theta W r0^alpha)``
    is solved in closed form with the principal Lambert W branch.
    """
    dc = derive_constants(params)
    xi, p, lam = params.arrival_rate_xi, params.transmit_prob_p, params.density_lambda
    z = -xi * lam * dc.c0 * math.exp(dc.noise_exponent)
    if z < -math.exp(-1.0):
        return StationaryMetrics(
            nonempty_prob_zeta0=math.nan,
            success_prob_P0=math.nan,
            mean_delay_D0=math.inf,
            mean_queue_len_L0=math.inf,
            stable=False,
            instability=LAMBERT_DOMAIN,
        )
    w = lambert_w0(z)
    zeta0 = -w / (p * lam * dc.c0)
    p0 = math.exp(w - dc.noise_exponent)
    instability = None
    if zeta0 > 1.0:
        instability = NONEMPTY_ABOVE_ONE
    elif xi >= p * p0:
        instability = SERVICE_SATURATED
    if instability is not None:
        return StationaryMetrics(zeta0, p0, math.inf, math.inf, False, instability)
    d0 = (1.0 - xi) / (p * p0 - xi)
    return StationaryMetrics(zeta0, p0, d0, xi * d0, True)
