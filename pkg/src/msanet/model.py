"""Physical and protocol parameters of the Poisson bipolar network."""
import math
from dataclasses import dataclass

from .errors import ParameterError
from .mathcore import gamma_reflection_product


@dataclass(frozen=True)
class SystemParams:
    """Network parameters, all in linear units.

    Attributes
    ----------
    density_lambda : transmitters per unit area
    arrival_rate_xi : Bernoulli packet arrival probability per slot
    transmit_prob_p : ALOHA transmit probability of a nonempty queue
    link_distance_r0 : transmitter-receiver distance
    pathloss_alpha : path-loss exponent, > 2
    sinr_threshold_theta : SINR decoding threshold (linear)
    noise_W : normalized noise power
    """

    density_lambda: float = 0.01
    arrival_rate_xi: float = 0.01
    transmit_prob_p: float = 0.5
    link_distance_r0: float = 5.0
    pathloss_alpha: float = 3.0
    sinr_threshold_theta: float = 10.0
    noise_W: float = 10 ** -3.3


@dataclass(frozen=True)
class DerivedConstants:
    delta: float
    c0: float
    noise_exponent: float


@dataclass(frozen=True)
class MsaThresholds:
    success_floor_epsilon: float = 0.1
    delay_ceiling_beta: float = 50.0
    regime_ratio_eta: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.regime_ratio_eta <= 1.0:
            raise ParameterError("regime_ratio_eta", "regime_ratio_eta must lie in (0, 1]")
        if not self.success_floor_epsilon > 0.0:
            raise ParameterError("success_floor_epsilon", "success_floor_epsilon must be positive")


@dataclass(frozen=True)
class StationaryMetrics:
    """Stationary solution of the high-mobility network.

    ``mean_delay_D0`` and ``mean_queue_len_L0`` are ``math.inf`` whenever
    ``stable`` is false; ``instability`` then names the cause.
    """

    nonempty_prob_zeta0: float
    success_prob_P0: float
    mean_delay_D0: float
    mean_queue_len_L0: float
    stable: bool
    instability: str | None = None


def _check(ok, field, message):
    if not ok:
        raise ParameterError(field, message)


def validate_params(raw):
    """Return ``raw`` unchanged if every invariant holds, else raise ParameterError."""
    _check(raw.density_lambda > 0, "density_lambda", "density_lambda must be positive")
    _check(0.0 <= raw.arrival_rate_xi <= 1.0, "arrival_rate_xi", "arrival_rate_xi must lie in [0,1]")
    _check(0.0 < raw.transmit_prob_p <= 1.0, "transmit_prob_p", "transmit_prob_p must lie in (0,1]")
    _check(raw.link_distance_r0 > 0, "link_distance_r0", "link_distance_r0 must be positive")
    _check(raw.pathloss_alpha > 2, "pathloss_alpha", "pathloss_alpha must exceed 2")
    _check(raw.sinr_threshold_theta > 0, "sinr_threshold_theta", "sinr_threshold_theta must be positive")
    _check(raw.noise_W >= 0, "noise_W", "noise_W must be non-negative")
    for name in ("density_lambda", "link_distance_r0", "pathloss_alpha",
                 "sinr_threshold_theta", "noise_W"):
        _check(math.isfinite(getattr(raw, name)), name, f"{name} must be finite")
    return raw


def db_to_linear(value_db):
    return 10.0 ** (value_db / 10.0)


def derive_constants(params):
    delta = 2.0 / params.pathloss_alpha
    theta, r0 = params.sinr_threshold_theta, params.link_distance_r0
    c0 = math.pi * theta ** delta * r0 ** 2 * gamma_reflection_product(delta)
    noise_exponent = theta * params.noise_W * r0 ** params.pathloss_alpha
    return DerivedConstants(delta=delta, c0=c0, noise_exponent=noise_exponent)
