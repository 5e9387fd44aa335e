"""Command line interface.

Every subcommand writes CSV to stdout (or ``--out``). The first line is
``# config: <canonical json>`` holding everything the rows depend on; the
second line holds the column names.

Exit codes: 0 success, 1 invalid configuration, 2 numerical failure,
3 I/O failure.
"""
import argparse
import csv
import dataclasses
import io
import json
import math
import sys

import numpy as np

from . import analytics as an
from .config import (
    ExperimentSpec, SWEEP_FIELDS, Sweep, format_value, load_spec, swept_params,
)
from .errors import (
    BracketError, ConvergenceError, DomainError, ParameterError, WindowError,
)
from .model import derive_constants
from .sim import Mobility, Traffic, run_simulation
from .stats import summarize

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3

DEFAULT_SWEEPS = {
    "region": Sweep("alpha", 2.05, 4.0, 40),
    "regimes": Sweep("alpha", 2.5, 5.0, 26),
    "correlate": Sweep("pl", 1e-5, 1e-1, 81, "log"),
    "analytic": Sweep("alpha", 2.2, 5.0, 57),
}

COLUMN_NAMES = {"alpha": "alpha", "xi": "xi", "lambda": "lambda", "p": "p",
                "W": "W", "pl": "p_lambda"}


def _window_or_nan(fn, *args):
    try:
        return fn(*args)
    except WindowError:
        return math.nan


def _points(spec):
    if spec.sweep is None:
        return [(None, spec.params)]
    return [(float(v), swept_params(spec.params, spec.sweep.variable, v))
            for v in spec.sweep.values()]


def _lead(spec):
    return [] if spec.sweep is None else [COLUMN_NAMES[spec.sweep.variable]]


def _cells(x):
    return [] if x is None else [x]


def cmd_region(spec, args):
    header = _lead(spec) + ["lambda0", "xi0"]
    rows = [_cells(x) + [_window_or_nan(an.massive_threshold, p, spec.thresholds),
                         _window_or_nan(an.sporadic_threshold, p, spec.thresholds)]
            for x, p in _points(spec)]
    return header, rows


def cmd_regimes(spec, args):
    if args.lambda_grid or args.xi_grid:
        if not (args.lambda_grid and args.xi_grid):
            raise ParameterError("grid", "--lambda-grid and --xi-grid go together")
        lams = Sweep.parse("lambda", args.lambda_grid).values()
        xis = Sweep.parse("xi", args.xi_grid).values()
        header = ["lambda", "xi", "traffic_factor", "regime", "msa"]
        region = an.msa_region(spec.params, spec.thresholds)
        rows = []
        for lam in lams:
            for xi in xis:
                p = dataclasses.replace(spec.params, density_lambda=float(lam), arrival_rate_xi=float(xi))
                rc = an.classify_regime(p, spec.thresholds)
                rows.append([float(lam), float(xi), rc.traffic_factor, rc.kind.value,
                             region.contains(lam, xi)])
        return header, rows
    header = _lead(spec) + ["interference_boundary", "noise_boundary", "traffic_factor", "regime"]
    rows = []
    for x, p in _points(spec):
        rc = an.classify_regime(p, spec.thresholds)
        rows.append(_cells(x) + [an.interference_limited_boundary(p, spec.thresholds),
                                 an.noise_limited_boundary(p, spec.thresholds),
                                 rc.traffic_factor, rc.kind.value])
    return header, rows


def cmd_correlate(spec, args):
    if spec.sweep is not None and spec.sweep.variable == "pl":
        header = ["p_lambda", "success_corr", "interference_corr"]
        rows = [[x, an.success_correlation(p), an.interference_correlation(p.transmit_prob_p)]
                for x, p in _points(spec)]
        return header, rows
    header = _lead(spec) + ["p_lambda_star", "t0", "max_success_corr", "high_noise_p_lambda"]
    rows = []
    for x, p in _points(spec):
        peak = an.max_correlation_peak(p)
        at_peak = dataclasses.replace(p, density_lambda=peak.p_lambda / p.transmit_prob_p)
        rows.append(_cells(x) + [peak.p_lambda, peak.t0, an.success_correlation(at_peak),
                                 an.high_noise_correlation_point(p)])
    return header, rows


def _analytic_cells(p):
    st = an.stationary_solution(p)
    return [st.nonempty_prob_zeta0, st.success_prob_P0, st.mean_delay_D0,
            st.mean_queue_len_L0, st.stable, st.instability or ""]


def cmd_analytic(spec, args):
    header = _lead(spec) + ["zeta0", "P0", "D0", "L0", "stable", "instability"]
    rows = [_cells(x) + _analytic_cells(p) for x, p in _points(spec)]
    return header, rows


SIM_COLUMNS = [
    "nonempty_mean", "nonempty_sd_realizations", "delay_mean", "delay_sd_realizations",
    "success_mean", "success_sd_realizations", "queue_len_mean", "stranded_fraction",
]
TRACE_COLUMNS = ["interference_corr", "interference_corr_se", "success_corr", "success_corr_se"]


def cmd_simulate(spec, args):
    header = _lead(spec) + [f"sim_{c}" for c in SIM_COLUMNS]
    traced = spec.sim.traced
    if traced:
        header += [f"sim_{c}" for c in TRACE_COLUMNS]
    with_analytics = spec.outputs in ("both", "analytics")
    if with_analytics:
        header += ["zeta0", "P0", "D0", "L0", "stable", "instability"]
    rows = []
    for x, p in _points(spec):
        est = summarize(run_simulation(p, spec.sim))
        row = _cells(x) + [*est.nonempty_prob, *est.mean_delay, *est.success_prob,
                           est.queue_length[0], est.stranded_fraction]
        if traced:
            for pair in (est.interference_corr, est.success_corr):
                row += list(pair) if pair is not None else [math.nan, math.nan]
        if with_analytics:
            row += _analytic_cells(p)
        rows.append(row)
    return header, rows


def selftest_checks(seed=0):
    """Quick Monte Carlo and numerical checks of the closed forms.

    Returns a list of ``(name, value, target, tolerance, passed)``.
    """
    from .mathcore import gamma_reflection_product, lambert_w0
    from .model import SystemParams
    from .sim import SimConfig, realization_rng, single_queue_delays
    from .stats import pearson_over_slots, stacked_traces

    checks = []

    zs = np.concatenate([-math.exp(-1) + np.geomspace(1e-9, math.exp(-1), 100),
                         np.geomspace(1e-6, 1e6, 100)])
    worst = max(abs(lambert_w0(z) * math.exp(lambert_w0(z)) - z) / max(1.0, abs(z)) for z in zs)
    checks.append(("lambert_w0_residual", worst, 0.0, 1e-12, worst <= 1e-12))

    worst = max(abs(gamma_reflection_product(d) - math.gamma(1 + d) * math.gamma(1 - d))
                for d in np.linspace(0.05, 0.95, 19))
    checks.append(("gamma_reflection", worst, 0.0, 1e-10, worst <= 1e-10))

    base = SystemParams()
    worst = 0.0
    for lam in np.linspace(0.002, 0.02, 5):
        for xi in np.linspace(0.002, 0.02, 5):
            p = dataclasses.replace(base, density_lambda=lam, arrival_rate_xi=xi)
            st = an.stationary_solution(p)
            if st.stable:
                dc = derive_constants(p)
                fp = xi / p.transmit_prob_p * math.exp(
                    p.transmit_prob_p * st.nonempty_prob_zeta0 * lam * dc.c0 + dc.noise_exponent)
                worst = max(worst, abs(fp - st.nonempty_prob_zeta0),
                            abs(st.nonempty_prob_zeta0 * p.transmit_prob_p * st.success_prob_P0 - xi))
    checks.append(("fixed_point_identity", worst, 0.0, 1e-10, worst <= 1e-10))

    delays = single_queue_delays(0.25, 0.5, 200_000, realization_rng(seed, 0))
    target = an.geo_geo1_mean_delay(0.25, 0.5)
    rel = abs(delays.mean() / target - 1)
    checks.append(("geo_geo1_delay", float(delays.mean()), target, 0.02, rel <= 0.02))

    peak = an.max_correlation_peak(base)
    g = an.correlation_root_function(peak.a, peak.b)(peak.t0)
    checks.append(("peak_root_residual", abs(g), 0.0, 1e-10, abs(g) <= 1e-10))

    p = dataclasses.replace(base, density_lambda=0.005)
    cfg = SimConfig(num_realizations=8, num_slots=250, traffic=Traffic.BACKLOGGED, seed=seed)
    recs = run_simulation(p, cfg)
    inter, labels = stacked_traces(recs, "trace_interference")
    inside, _ = stacked_traces(recs, "trace_interior")
    r, se = pearson_over_slots(inter, 1, mask=inside, groups=labels)
    target = an.interference_correlation(p.transmit_prob_p)
    checks.append(("interference_corr", r, target, 3 * se, abs(r - target) <= 3 * se))
    return checks


def cmd_selftest(spec, args):
    header = ["check", "value", "target", "tolerance", "passed"]
    rows = [list(c) for c in selftest_checks(spec.sim.seed)]
    return header, rows


COMMANDS = {
    "region": cmd_region,
    "regimes": cmd_regimes,
    "correlate": cmd_correlate,
    "analytic": cmd_analytic,
    "simulate": cmd_simulate,
    "selftest": cmd_selftest,
}


class _Parser(argparse.ArgumentParser):
    # bad flags are a configuration error, not argparse's default status 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="msanet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "region": "MSA region thresholds lambda0, xi0 over a sweep",
        "regimes": "interference/noise-limited boundaries or a classification grid",
        "correlate": "success correlation curve or its maximizing p*lambda",
        "analytic": "high-mobility stationary solution over a sweep",
        "simulate": "Monte Carlo simulation with analytics side by side",
        "selftest": "Monte Carlo and numerical checks of the closed forms",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="JSON experiment config")
        p.add_argument("--out", help="write CSV here instead of stdout")
        p.add_argument("--seed", type=int, help="override sim.seed")
        for var in SWEEP_FIELDS:
            p.add_argument(f"--{var}-sweep", dest=f"sweep_{var}", metavar="START:STOP:N[:log]",
                           help=f"sweep {var}")
        if name == "regimes":
            p.add_argument("--lambda-grid", metavar="START:STOP:N[:log]")
            p.add_argument("--xi-grid", metavar="START:STOP:N[:log]")
        if name == "simulate":
            p.add_argument("--realizations", type=int)
            p.add_argument("--slots", type=int)
            p.add_argument("--warmup", type=int)
            p.add_argument("--mobility", choices=[m.value for m in Mobility])
            p.add_argument("--traffic", choices=[t.value for t in Traffic])
            p.add_argument("--trace", action="store_true",
                           help="record SINR traces for correlation estimates")
    return parser


def resolve_spec(args):
    spec = load_spec(args.config) if args.config else ExperimentSpec()
    sweeps = [(var, getattr(args, f"sweep_{var}")) for var in SWEEP_FIELDS
              if getattr(args, f"sweep_{var}")]
    if len(sweeps) > 1:
        raise ParameterError("sweep", "give at most one sweep flag")
    sweep = Sweep.parse(*sweeps[0]) if sweeps else spec.sweep
    if sweep is None and args.command in DEFAULT_SWEEPS:
        sweep = DEFAULT_SWEEPS[args.command]
    sim_changes = {}
    if args.seed is not None:
        sim_changes["seed"] = args.seed
    if args.command == "simulate":
        for flag, fieldname in (("realizations", "num_realizations"), ("slots", "num_slots"),
                                ("warmup", "warmup_slots")):
            if getattr(args, flag) is not None:
                sim_changes[fieldname] = getattr(args, flag)
        if args.mobility:
            sim_changes["mobility"] = Mobility(args.mobility)
        if args.traffic:
            sim_changes["traffic"] = Traffic(args.traffic)
        if args.trace:
            sim_changes["trace"] = True
    try:
        sim = dataclasses.replace(spec.sim, **sim_changes)
    except ValueError as exc:
        raise ParameterError("sim", str(exc)) from None
    spec = dataclasses.replace(spec, sweep=sweep, sim=sim, name=spec.name)
    if sweep is not None:
        for v in sweep.values():
            swept_params(spec.params, sweep.variable, v)
    return spec


def render(spec, command, header, rows):
    doc = dict(spec.to_dict(), command=command)
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        spec = resolve_spec(args)
        header, rows = COMMANDS[args.command](spec, args)
    except (ParameterError, WindowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, DomainError, BracketError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    text = render(spec, args.command, header, rows)
    try:
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    if args.command == "selftest" and not all(r[-1] for r in rows):
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
