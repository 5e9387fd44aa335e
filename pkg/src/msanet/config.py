"""JSON experiment configuration.

A config document has up to five sections, all optional::

    {
      "name": "alpha-sweep",
      "params": {"density_lambda": 0.01, "arrival_rate_xi": 0.01,
                 "transmit_prob_p": 0.5, "link_distance_r0": 5,
                 "pathloss_alpha": 3, "theta_db": 10, "noise_log10": -3.3},
      "thresholds": {"success_floor_epsilon": 0.1, "delay_ceiling_beta": 50,
                     "regime_ratio_eta": 0.5},
      "sim": {"window_side": 240, "margin": 20, "num_realizations": 50,
              "num_slots": 1000, "mobility": "static", "traffic": "bernoulli",
              "seed": 42, "warmup_slots": 0},
      "sweep": {"variable": "alpha", "start": 2.6, "stop": 3.4, "points": 5,
                "scale": "linear"},
      "outputs": "both"
    }

The SINR threshold is given either as ``theta_linear`` or ``theta_db`` and
the noise as ``noise_W`` or ``noise_log10``; each pair is mutually
exclusive. Conversion to linear units happens here and nowhere else.
"""
import dataclasses
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .model import MsaThresholds, SystemParams, db_to_linear, validate_params
from .sim import Mobility, SimConfig, Traffic

# sweep variable -> SystemParams field (pl is handled separately)
SWEEP_FIELDS = {
    "alpha": "pathloss_alpha",
    "xi": "arrival_rate_xi",
    "lambda": "density_lambda",
    "p": "transmit_prob_p",
    "W": "noise_W",
    "pl": None,
}

# desk-scale default; 200 is the publication-scale count
DEFAULT_REALIZATIONS = 50


@dataclass(frozen=True)
class Sweep:
    variable: str
    start: float
    stop: float
    points: int
    scale: str = "linear"

    def __post_init__(self):
        if self.variable not in SWEEP_FIELDS:
            raise ParameterError("sweep.variable", f"sweep variable must be one of {sorted(SWEEP_FIELDS)}")
        if self.points < 2:
            raise ParameterError("sweep.points", "sweep.points must be at least 2")
        if self.scale not in ("linear", "log"):
            raise ParameterError("sweep.scale", "sweep.scale must be 'linear' or 'log'")
        if self.scale == "log" and not (self.start > 0 and self.stop > 0):
            raise ParameterError("sweep.start", "log sweeps need positive endpoints")

    def values(self):
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)

    @classmethod
    def parse(cls, variable, text):
        """Parse ``start:stop:points[:linear|log]``."""
        parts = text.split(":")
        if len(parts) not in (3, 4):
            raise ParameterError("sweep", f"bad sweep {text!r}; expected start:stop:points[:log]")
        try:
            start, stop, points = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise ParameterError("sweep", f"bad sweep {text!r}") from None
        scale = parts[3] if len(parts) == 4 else "linear"
        return cls(variable, start, stop, points, scale)


@dataclass(frozen=True)
class ExperimentSpec:
    name: str = "experiment"
    params: SystemParams = SystemParams()
    thresholds: MsaThresholds = MsaThresholds()
    sim: SimConfig = SimConfig(num_realizations=DEFAULT_REALIZATIONS)
    sweep: Sweep | None = None
    outputs: str = "both"

    def to_dict(self):
        sim = dataclasses.asdict(self.sim)
        sim["mobility"] = self.sim.mobility.value
        sim["traffic"] = self.sim.traffic.value
        return {
            "name": self.name,
            "params": dataclasses.asdict(self.params),
            "thresholds": dataclasses.asdict(self.thresholds),
            "sim": sim,
            "sweep": None if self.sweep is None else dataclasses.asdict(self.sweep),
            "outputs": self.outputs,
        }

    def canonical_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def _pick(section, linear_key, other_key, convert, field):
    if linear_key in section and other_key in section:
        raise ParameterError(field, f"give either {linear_key} or {other_key}, not both")
    if linear_key in section:
        return float(section.pop(linear_key))
    if other_key in section:
        return convert(float(section.pop(other_key)))
    return None


def _known(section, cls, where):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(section) - names
    if unknown:
        raise ParameterError(where, f"unknown {where} keys: {sorted(unknown)}")


def params_from_dict(raw):
    section = dict(raw)
    theta = _pick(section, "theta_linear", "theta_db", db_to_linear, "sinr_threshold_theta")
    noise = _pick(section, "noise_W", "noise_log10", lambda x: 10.0 ** x, "noise_W")
    if "sinr_threshold_theta" in section and theta is not None:
        raise ParameterError("sinr_threshold_theta", "threshold given twice")
    if theta is not None:
        section["sinr_threshold_theta"] = theta
    if noise is not None:
        section["noise_W"] = noise
    _known(section, SystemParams, "params")
    return validate_params(SystemParams(**{k: float(v) for k, v in section.items()}))


def sim_from_dict(raw):
    section = dict(raw)
    _known(section, SimConfig, "sim")
    if "mobility" in section:
        section["mobility"] = Mobility(section["mobility"])
    if "traffic" in section:
        section["traffic"] = Traffic(section["traffic"])
    section.setdefault("num_realizations", DEFAULT_REALIZATIONS)
    try:
        return SimConfig(**section)
    except ValueError as exc:
        raise ParameterError("sim", str(exc)) from None


def spec_from_dict(raw):
    raw = dict(raw)
    unknown = set(raw) - {"name", "params", "thresholds", "sim", "sweep", "outputs"}
    if unknown:
        raise ParameterError("config", f"unknown config keys: {sorted(unknown)}")
    thresholds = dict(raw.get("thresholds") or {})
    _known(thresholds, MsaThresholds, "thresholds")
    sweep = raw.get("sweep")
    outputs = raw.get("outputs", "both")
    if outputs not in ("analytics", "simulation", "both"):
        raise ParameterError("outputs", "outputs must be analytics, simulation or both")
    return ExperimentSpec(
        name=str(raw.get("name", "experiment")),
        params=params_from_dict(raw.get("params") or {}),
        thresholds=MsaThresholds(**{k: float(v) for k, v in thresholds.items()}),
        sim=sim_from_dict(raw.get("sim") or {}),
        sweep=None if sweep is None else Sweep(**sweep),
        outputs=outputs,
    )


def load_spec(path):
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParameterError("config", f"{path}: invalid JSON ({exc})") from None
    return spec_from_dict(raw)


def swept_params(params, variable, value):
    """Copy of ``params`` with the sweep variable set to ``value``.

    ``pl`` sets p*lambda by changing lambda at fixed p.
    """
    if variable == "pl":
        return validate_params(dataclasses.replace(params, density_lambda=value / params.transmit_prob_p))
    return validate_params(dataclasses.replace(params, **{SWEEP_FIELDS[variable]: float(value)}))


def format_value(value):
    """CSV cell text; floats use their shortest round-trip repr."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return repr(value)
    return str(value)
