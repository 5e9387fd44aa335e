import csv
import io
import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from msanet import cli
from msanet.config import load_spec, params_from_dict, format_value
from msanet.errors import ParameterError

SIM_CONFIG = {
    "name": "tiny",
    "params": {"density_lambda": 0.005, "arrival_rate_xi": 0.02, "theta_db": 10, "noise_log10": -3.3},
    "sim": {"num_realizations": 3, "num_slots": 120, "seed": 42, "trace": True},
    "sweep": {"variable": "alpha", "start": 2.8, "stop": 3.2, "points": 2},
}


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def parse(text):
    lines = text.splitlines()
    assert lines[0].startswith("# config: ")
    config = json.loads(lines[0][len("# config: "):])
    rows = list(csv.reader(io.StringIO("\n".join(lines[1:]))))
    return config, rows[0], rows[1:]


def write(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def test_region_columns(tmp_path, capsys):
    cfg = write(tmp_path, {"params": {"noise_W": 1e-4, "theta_db": 10}})
    code, out, _ = run(["region", "--alpha-sweep", "2.05:4:40", "--config", cfg], capsys)
    assert code == 0
    config, header, rows = parse(out)
    assert header == ["alpha", "lambda0", "xi0"]
    assert len(rows) == 40
    assert config["command"] == "region"
    # at this noise level the threshold keeps rising until alpha is near 3.9
    lam0 = [float(r[1]) for r in rows if float(r[0]) < 3.9]
    assert all(b > a for a, b in zip(lam0, lam0[1:]))


def test_analytic_success_peaks_inside(capsys):
    code, out, _ = run(["analytic", "--alpha-sweep", "2.1:6:40"], capsys)
    _, header, rows = parse(out)
    values = np.array([float(r[header.index("P0")]) for r in rows])
    stable = np.flatnonzero(np.isfinite(values))
    top = stable[np.argmax(values[stable])]
    assert stable[0] < top < stable[-1]


def test_unstable_rows_write_inf(capsys):
    code, out, _ = run(["analytic", "--xi-sweep", "0.01:0.3:5"], capsys)
    _, header, rows = parse(out)
    d = header.index("D0")
    assert rows[-1][d] == "inf"
    assert rows[-1][header.index("stable")] == "false"


@pytest.mark.parametrize("command", ["region", "regimes", "correlate", "analytic", "selftest"])
def test_every_command_runs(command, capsys):
    code, out, _ = run([command], capsys)
    assert code == 0
    _, header, rows = parse(out)
    assert rows and all(len(r) == len(header) for r in rows)


def test_regimes_grid(capsys):
    code, out, _ = run(["regimes", "--lambda-grid", "1e-4:1e-1:4:log", "--xi-grid", "1e-4:1:3:log"], capsys)
    _, header, rows = parse(out)
    assert code == 0 and len(rows) == 12


def test_correlate_optimum_sweep(capsys):
    code, out, _ = run(["correlate", "--alpha-sweep", "2.5:4:4"], capsys)
    _, header, rows = parse(out)
    assert code == 0 and len(rows) == 4


def test_simulate_columns(tmp_path, capsys):
    code, out, _ = run(["simulate", "--config", write(tmp_path, SIM_CONFIG)], capsys)
    assert code == 0
    config, header, rows = parse(out)
    assert header[:3] == ["alpha", "sim_nonempty_mean", "sim_nonempty_sd_realizations"]
    assert "sim_interference_corr" in header and "zeta0" in header
    assert len(rows) == 2
    assert config["sim"]["seed"] == 42
    assert config["params"]["sinr_threshold_theta"] == 10.0


def test_same_seed_same_bytes(tmp_path, capsys):
    cfg = write(tmp_path, SIM_CONFIG)
    a = run(["simulate", "--config", cfg], capsys)[1]
    b = run(["simulate", "--config", cfg], capsys)[1]
    c = run(["simulate", "--config", cfg, "--seed", "7"], capsys)[1]
    assert a == b
    assert a != c


def test_thread_count_independence(tmp_path):
    cfg = write(tmp_path, SIM_CONFIG)
    outputs = []
    for threads in ("1", "4"):
        env = dict(os.environ, MSA_THREADS=threads)
        res = subprocess.run([sys.executable, "-m", "msanet", "simulate", "--config", cfg,
                              "--mobility", "high_mobility"],
                             env=env, capture_output=True, check=True)
        outputs.append(res.stdout)
    assert outputs[0] == outputs[1]


def test_out_flag(tmp_path, capsys):
    target = tmp_path / "region.csv"
    code, out, _ = run(["region", "--out", str(target)], capsys)
    assert code == 0 and out == ""
    assert target.read_text().startswith("# config: ")


@pytest.mark.parametrize("argv, code", [
    (["region", "--alpha-sweep", "1.5:3:4"], 1),
    (["region", "--alpha-sweep", "nonsense"], 1),
    (["region", "--alpha-sweep", "2.5:3:4", "--xi-sweep", "0.1:0.2:3"], 1),
    (["region", "--unknown-flag"], 1),
    (["simulate", "--slots", "0"], 1),
    (["region", "--config", "/nonexistent/config.json"], 3),
    (["region", "--out", "/nonexistent/dir/out.csv"], 3),
])
def test_exit_codes(argv, code, capsys):
    try:
        assert cli.main(argv) == code
    except SystemExit as exc:
        assert exc.code == code


def test_invalid_config_names_field(tmp_path, capsys):
    cfg = write(tmp_path, {"params": {"pathloss_alpha": 2.0}})
    code, _, err = run(["region", "--config", cfg], capsys)
    assert code == 1
    assert "pathloss_alpha" in err


def test_numerical_failure_exit(monkeypatch, capsys):
    from msanet.errors import ConvergenceError

    def boom(*_):
        raise ConvergenceError("no convergence")

    monkeypatch.setitem(cli.COMMANDS, "analytic", boom)
    assert cli.main(["analytic"]) == 2


def test_unit_conversion_once():
    p = params_from_dict({"theta_db": 10, "noise_log10": -3.3})
    assert p.sinr_threshold_theta == pytest.approx(10.0)
    assert p.noise_W == pytest.approx(10 ** -3.3)
    assert params_from_dict({"theta_linear": 3}).sinr_threshold_theta == 3.0
    with pytest.raises(ParameterError):
        params_from_dict({"theta_db": 10, "theta_linear": 10})
    with pytest.raises(ParameterError):
        params_from_dict({"noise_W": 1e-3, "noise_log10": -3})
    with pytest.raises(ParameterError):
        params_from_dict({"colour": "blue"})


def test_round_trip_config(tmp_path, capsys):
    code, out, _ = run(["simulate", "--config", write(tmp_path, SIM_CONFIG)], capsys)
    config, _, _ = parse(out)
    config.pop("command")
    config["sim"].pop("trace")
    spec = load_spec(write(tmp_path, {**config, "params": config["params"]}, "again.json"))
    assert spec.params.sinr_threshold_theta == 10.0
    assert spec.sim.seed == 42


def test_format_value():
    assert format_value(math.inf) == "inf"
    assert format_value(math.nan) == "nan"
    assert format_value(0.1) == "0.1"
    assert format_value(True) == "true"
