import math

import numpy as np
import pytest

from sgi_sim import scenario
from sgi_sim.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_ORACLE, fmt, main
from sgi_sim.config import ConfigError, load_scenario


def _read(path):
    lines = path.read_text().splitlines()
    return lines[0].split(","), [l.split(",") for l in lines[1:]]


def test_fmt():
    assert fmt(0.1) == "1.0000000000000001e-01"
    assert len(fmt(math.pi).split("e")[0].replace(".", "")) == 17
    assert fmt(math.inf) == "inf" and fmt(True) == "true"


def test_run_noiseless(tmp_path):
    assert main(["run", "--preset", "noiseless", "--out", str(tmp_path)]) == 0
    header, rows = _read(tmp_path / "trace.csv")
    assert header == ["t", "z_plus", "z_minus", "sigma_tilde", "h", "coherence", "sx"]
    assert len(rows) == 1001
    assert abs(float(rows[-1][5]) - 1.0) < 1e-6
    units = (tmp_path / "units.txt").read_text()
    assert "sigma_tilde: m" in units and "t: s" in units


def test_run_paper_h_unobservable(tmp_path):
    assert main(["run", "--out", str(tmp_path), "--samples", "50"]) == 0
    _, rows = _read(tmp_path / "trace.csv")
    h = np.array([float(r[4]) for r in rows])
    assert np.max(np.abs(h - 1)) < 1e-6
    assert float(rows[-1][0]) == pytest.approx(1e-6)


def test_run_noisy_desk(tmp_path):
    assert main(["run", "--preset", "noisy-desk", "--out", str(tmp_path), "--svg"]) == 0
    _, rows = _read(tmp_path / "trace.csv")
    assert 0.1 <= float(rows[-1][5]) <= 0.3
    svg = (tmp_path / "trace.svg").read_text()
    assert svg.startswith("<?xml") and "<svg" in svg


def test_run_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["run", "--preset", "noisy-desk", "--out", str(d), "--svg"]) == 0
    assert (a / "trace.csv").read_bytes() == (b / "trace.csv").read_bytes()
    assert (a / "trace.svg").read_bytes() == (b / "trace.svg").read_bytes()


def test_estimate(tmp_path, capsys):
    assert main(["estimate", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "Omega_prime" in out
    _, rows = _read(tmp_path / "estimate.csv")
    vals = {r[0]: r[1] for r in rows}
    assert 1e-41 < float(vals["eta"]) < 1e-39
    assert 1e14 < float(vals["inv_gamma"]) < 1e16
    assert float(vals["Omega_prime"]) == pytest.approx(1e11, rel=1e-12)


def test_estimate_zero_critical_current(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[squid]\ncritical_current = 0\n")
    rows = {r[0]: r[1] for r in scenario.estimate(load_scenario(None, cfg))}
    assert rows["many_minima_ok"] is False
    assert rows["eta"] > 0 and math.isfinite(rows["inv_gamma"])


def test_config_error_exit(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[apparatus]\nmas = 1\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "bad.ini:2" in capsys.readouterr().err
    assert main(["run", "--samples", "1", "--out", str(tmp_path)]) == EXIT_CONFIG


def test_imaginary_cutoff_is_config_error(tmp_path):
    cfg = tmp_path / "r.ini"
    cfg.write_text("[squid]\nresistance = 100\n")
    assert main(["estimate", "--config", str(cfg)]) == EXIT_CONFIG


def test_numerical_failure_exit(tmp_path, capsys):
    # the trace-integral mode cannot resolve the widely split noiseless packets
    cfg = tmp_path / "n.ini"
    cfg.write_text("[run]\nmode = trace_integral\n[quadrature]\nrelative_tolerance = 1e-12\n")
    code = main(["run", "--preset", "noiseless", "--config", str(cfg), "--out", str(tmp_path), "--samples", "5"])
    assert code == EXIT_NUMERICAL
    assert "numerical failure" in capsys.readouterr().err


def test_sweep_temperature(tmp_path):
    assert main(["sweep", "--axis", "temperature=log:0.01:10:7", "--out", str(tmp_path), "--svg"]) == 0
    header, rows = _read(tmp_path / "sweep.csv")
    assert header == ["temperature", "tau", "coherence_final"]
    tau = [float(r[1]) for r in rows]
    assert all(b <= a for a, b in zip(tau, tau[1:]))
    assert (tmp_path / "sweep.svg").exists()


def test_sweep_eta_zero_is_inf(tmp_path):
    assert main(["sweep", "--axis", "eta_scale=0,log:1:1e4:3", "--out", str(tmp_path)]) == 0
    _, rows = _read(tmp_path / "sweep.csv")
    assert rows[0][1] == "inf"
    assert all(r[1] != "inf" for r in rows[1:])


def test_sweep_ring_width(tmp_path):
    sc = load_scenario()
    spec = scenario.SweepSpec((("ring_width", (2e-6, 5e-6, 1e-5, 2e-5)),), ("tau",))
    header, rows = scenario.sweep(sc, spec)
    tau = [r[1] for r in rows]
    assert all(a < b for a, b in zip(tau, tau[1:]))
    a = [scenario.apply_axis(sc, "ring_width", w).apparatus.geometry_factor for w in (2e-6, 1e-5)]
    assert a[0] > a[1]


def test_sweep_two_axes_order(tmp_path):
    cfg = tmp_path / "s.ini"
    cfg.write_text(
        "[sweep]\naxis1 = temperature\nvalues1 = 0.1, 1\naxis2 = gamma_scale\nvalues2 = 1, 2, 4\noutputs = tau, h_final\n"
    )
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    header, rows = _read(tmp_path / "sweep.csv")
    assert header == ["temperature", "gamma_scale", "tau", "h_final"]
    assert [(float(r[0]), float(r[1])) for r in rows] == [(0.1, 1), (0.1, 2), (0.1, 4), (1, 1), (1, 2), (1, 4)]


@pytest.mark.parametrize(
    "axes, fragment",
    [
        ((), "one or two axes"),
        ((("speed", (1.0,)),), "unknown sweep axis"),
        ((("temperature", (1.0,)),) * 2, "must differ"),
        ((("temperature", (1.0,)), ("eta_scale", (1.0,)), ("gamma_scale", (1.0,))), "one or two"),
    ],
)
def test_sweep_spec_validation(axes, fragment):
    with pytest.raises(ConfigError, match=fragment):
        scenario.SweepSpec(axes)


def test_sweep_grid_limit():
    big = tuple(float(i) for i in range(1001))
    with pytest.raises(ConfigError, match="exceeds"):
        scenario.SweepSpec((("temperature", big), ("eta_scale", big)))


def test_parse_values():
    assert scenario.parse_values("1, 2,lin:0:1:3") == [1.0, 2.0, 0.0, 0.5, 1.0]
    assert scenario.parse_values("log:1:100:3") == pytest.approx([1, 10, 100])
    for bad in ("", "log:0:1:3", "cube:1:2:3", "x"):
        with pytest.raises(ConfigError):
            scenario.parse_values(bad)


def test_oracle_check_default(tmp_path):
    assert main(["oracle-check", "--out", str(tmp_path)]) == 0
    header, rows = _read(tmp_path / "oracle.csv")
    assert header == ["check", "achieved", "tolerance", "status", "note"]
    assert {r[3] for r in rows} <= {"pass", "skip"}


def test_oracle_check_corrupted_tolerance(tmp_path):
    cfg = tmp_path / "o.ini"
    cfg.write_text("[oracle]\ntrajectory_tol = 0\n")
    assert main(["oracle-check", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_ORACLE
    _, rows = _read(tmp_path / "oracle.csv")
    assert [r[3] for r in rows if r[0] == "trajectory_rk4"] == ["fail"]


def test_oracle_check_noiseless_row(tmp_path):
    assert main(["oracle-check", "--preset", "noiseless", "--out", str(tmp_path)]) == 0
    _, rows = _read(tmp_path / "oracle.csv")
    row = [r for r in rows if r[0] == "noiseless_overlap"]
    assert row and row[0][3] == "pass"
