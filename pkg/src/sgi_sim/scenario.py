"""Scenario evaluation: the pipeline behind each CLI subcommand.

Everything here returns plain data; file emission lives in ``cli``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from itertools import product

import numpy as np

from . import oracle
from .config import ConfigError, Scenario
from .constants import HBAR, KB
from .density import coherence, decoherence_time, h_factor, log_coherence_closed, make_trace
from .kernels import SpectralFunction, noise_kernel_highT_weight
from .model import DerivedBath, derive_bath
from .propagator import coeff_ABC_highT, coeff_ABC_quadrature, coefficients, packet_center

SWEEP_AXES = ("temperature", "ring_width", "beam_velocity", "eta_scale", "gamma_scale")
SWEEP_OUTPUTS = ("tau", "coherence_final", "h_final")
MAX_GRID_POINTS = 10**6


@dataclass(frozen=True)
class Resolved:
    """Numbers the propagator needs, derived from a Scenario."""

    bath: DerivedBath
    spectral: SpectralFunction
    gamma: float
    weight: float
    mass: float
    sigma: float
    temperature: float
    duration: float
    profile: object


def resolve(sc: Scenario) -> Resolved:
    bath = derive_bath(
        sc.squid,
        sc.apparatus,
        threshold=sc.many_minima_threshold,
        strict=sc.strict_validity,
        gamma_divisor=sc.gamma_divisor,
        eta_scale=sc.eta_scale,
    )
    sf = SpectralFunction.from_bath(bath, sc.spectral)
    # gamma_scale acts on the damping rate alone; the noise weight keeps eta
    gamma = bath.damping_rate * sc.gamma_scale
    T = sc.apparatus.temperature
    weight = noise_kernel_highT_weight(sf, T, gamma) if sf.eta > 0 else 0.0
    return Resolved(
        bath=bath,
        spectral=sf,
        gamma=gamma,
        weight=weight,
        mass=sc.apparatus.mass,
        sigma=sc.apparatus.initial_width,
        temperature=T,
        duration=sc.duration,
        profile=sc.profile(bath.force_magnitude),
    )


def sample_times(sc: Scenario) -> np.ndarray:
    return np.linspace(0.0, sc.duration, sc.samples)


def run(sc: Scenario, with_tau: bool = True):
    r = resolve(sc)
    trace = make_trace(sample_times(sc), r.mass, r.gamma, r.weight, r.sigma, r.profile, sc.mode, sc.check_rtol)
    if with_tau:
        trace.decoherence_time = decoherence_time(r.mass, r.gamma, r.weight, r.sigma, sc.t_max)
    return trace


# (name, unit) rows of the parameter report
ESTIMATE_ROWS = (
    ("L0", "H"),
    ("epsilon", "T/(m Wb)"),
    ("eta", "kg/s"),
    ("Omega", "rad/s"),
    ("Omega_prime", "rad/s"),
    ("gamma", "1/s"),
    ("inv_gamma", "s"),
    ("f0", "N"),
    ("many_minima_ratio", "1"),
    ("many_minima_ok", "bool"),
)


def estimate(sc: Scenario):
    """Parameter report as a list of (name, value, unit)."""
    r = resolve(sc)
    b = r.bath
    values = (
        b.effective_inductance,
        b.coupling,
        b.friction,
        b.cutoff,
        b.cutoff2,
        r.gamma,
        1.0 / r.gamma if r.gamma > 0 else math.inf,
        b.force_magnitude,
        b.many_minima_ratio,
        b.many_minima,
    )
    return [(name, v, unit) for (name, unit), v in zip(ESTIMATE_ROWS, values)]


# ---- sweeps ---------------------------------------------------------------


def parse_values(text: str) -> list[float]:
    """Comma list whose items are numbers, ``log:a:b:n`` or ``lin:a:b:n``."""
    out: list[float] = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if ":" in item:
            kind, *rest = item.split(":")
            if kind not in ("log", "lin") or len(rest) != 3:
                raise ConfigError(f"bad range {item!r}; use log:a:b:n or lin:a:b:n")
            a, b, n = float(rest[0]), float(rest[1]), int(rest[2])
            if n < 1:
                raise ConfigError(f"range {item!r} needs n >= 1")
            if kind == "log":
                if a <= 0 or b <= 0:
                    raise ConfigError(f"log range {item!r} needs positive ends")
                out.extend(np.geomspace(a, b, n).tolist())
            else:
                out.extend(np.linspace(a, b, n).tolist())
        else:
            try:
                out.append(float(item))
            except ValueError:
                raise ConfigError(f"bad sweep value {item!r}") from None
    if not out:
        raise ConfigError("empty sweep value list")
    return out


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple  # ((name, values), ...)
    outputs: tuple = ("tau", "coherence_final")

    def __post_init__(self):
        if not 1 <= len(self.axes) <= 2:
            raise ConfigError("a sweep needs one or two axes")
        for name, values in self.axes:
            if name not in SWEEP_AXES:
                raise ConfigError(f"unknown sweep axis {name!r} (choose from {', '.join(SWEEP_AXES)})")
            if not values:
                raise ConfigError(f"axis {name} has no values")
        if len({n for n, _ in self.axes}) != len(self.axes):
            raise ConfigError("sweep axes must differ")
        for o in self.outputs:
            if o not in SWEEP_OUTPUTS:
                raise ConfigError(f"unknown sweep output {o!r} (choose from {', '.join(SWEEP_OUTPUTS)})")
        if math.prod(len(v) for _, v in self.axes) > MAX_GRID_POINTS:
            raise ConfigError(f"sweep grid exceeds {MAX_GRID_POINTS} points")

    @classmethod
    def from_config(cls, section: dict, extra_axes=()) -> "SweepSpec":
        """Build from a parsed ``[sweep]`` section plus ``name=values`` CLI overrides."""
        axes = []
        for i in (1, 2):
            if f"axis{i}" in section:
                if f"values{i}" not in section:
                    raise ConfigError(f"axis{i} given without values{i}", section[f"axis{i}"][1])
                axes.append((section[f"axis{i}"][0], tuple(parse_values(section[f"values{i}"][0]))))
        if extra_axes:
            axes = []
            for item in extra_axes:
                if "=" not in item:
                    raise ConfigError(f"--axis expects name=values, got {item!r}")
                name, values = item.split("=", 1)
                axes.append((name.strip(), tuple(parse_values(values))))
        outputs = ("tau", "coherence_final")
        if "outputs" in section:
            outputs = tuple(s.strip() for s in section["outputs"][0].split(",") if s.strip())
        return cls(tuple(axes), outputs)


def apply_axis(sc: Scenario, name: str, value: float) -> Scenario:
    """Scenario with one sweep axis set to ``value``."""
    app, sq = sc.apparatus, sc.squid
    if name == "temperature":
        return sc.updated(apparatus=replace(app, temperature=value))
    if name == "beam_velocity":
        return sc.updated(apparatus=replace(app, beam_velocity=value))
    if name == "eta_scale":
        return sc.updated(eta_scale=value)
    if name == "gamma_scale":
        return sc.updated(gamma_scale=value)
    if name == "ring_width":
        # uniform geometric scaling of the ring: a ~ A' / A^2 ~ 1 / size^3;
        # circuit L and C stay as configured
        s = value / sq.ring_width
        return sc.updated(
            squid=replace(sq, ring_width=value, ring_length=sq.ring_length * s),
            apparatus=replace(app, geometry_factor=app.geometry_factor / s**3),
        )
    raise ConfigError(f"unknown sweep axis {name!r}")


def sweep_point(sc: Scenario, outputs) -> dict:
    r = resolve(sc)
    res = {}
    if "tau" in outputs:
        tau = decoherence_time(r.mass, r.gamma, r.weight, r.sigma, sc.t_max)
        res["tau"] = math.inf if tau is None else tau
    if "coherence_final" in outputs or "h_final" in outputs:
        c = coefficients(np.array([r.duration]), r.mass, r.gamma, r.weight, r.profile)
        if "coherence_final" in outputs:
            res["coherence_final"] = float(coherence(c, r.sigma, sc.mode)[0])
        if "h_final" in outputs:
            res["h_final"] = float(h_factor(c, r.sigma)[0])
    return res


def sweep(sc: Scenario, spec: SweepSpec, workers: int = 4):
    """Rows of (axis values..., outputs...) in grid order.

    Points are evaluated on a thread pool; ``map`` keeps grid order.
    """
    names = [n for n, _ in spec.axes]
    grid = list(product(*(v for _, v in spec.axes)))

    def one(point):
        s = sc
        for n, v in zip(names, point):
            s = apply_axis(s, n, v)
        vals = sweep_point(s, spec.outputs)
        return tuple(point) + tuple(vals[o] for o in spec.outputs)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(one, grid))
    return names + list(spec.outputs), rows


# ---- oracle checks --------------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    name: str
    achieved: float
    tolerance: float
    status: str  # pass, fail or skip
    note: str = ""


def _rel(a, b, floor=1e-300):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), floor), initial=0.0))


def _verdict(name, err, tol, note=""):
    # strict: a zero tolerance always fails
    return CheckResult(name, err, tol, "pass" if err < tol else "fail", note)


def check_trajectory(sc: Scenario, r: Resolved, steps: int = 4000) -> CheckResult:
    t, z, _ = oracle.classical_trajectory_rk4(r.profile, r.mass, r.gamma, r.duration / steps)
    mine = packet_center(r.profile, t[1:], r.mass, r.gamma)
    scale = max(float(np.max(np.abs(z))), 1e-300)
    err = float(np.max(np.abs(mine - z[1:]))) / scale
    return _verdict("trajectory_rk4", err, sc.oracle.trajectory_tol, f"gamma*T_exp={r.gamma * r.duration:.3g}")


def check_noiseless(sc: Scenario, r: Resolved, points: int = 64) -> CheckResult:
    times = np.linspace(0.0, r.duration, points + 1)[1:]
    c = coefficients(times, r.mass, 0.0, 0.0, r.profile)
    mine = np.exp(log_coherence_closed(c, r.sigma))
    ref = np.array([abs(oracle.noiseless_evolution(r.profile, r.mass, r.sigma, t)) for t in times])
    return _verdict("noiseless_overlap", _rel(mine, ref), sc.oracle.noiseless_tol, "pipeline at eta=0 vs exact overlap")


def check_trace(sc: Scenario, r: Resolved, points: int = 10, floor: float = 1e-10) -> CheckResult:
    times = np.linspace(0.0, r.duration, points + 1)[1:]
    c = coefficients(times, r.mass, r.gamma, r.weight, r.profile)
    closed = np.exp(log_coherence_closed(c, r.sigma))
    keep = closed > floor
    if not np.any(keep):
        return CheckResult("closed_vs_trace", 0.0, sc.oracle.trace_tol, "skip", f"coherence below {floor:g} at every time")
    ref = np.array([abs(oracle.trace_offdiag_numeric(c.at(i), r.sigma)) for i in np.nonzero(keep)[0]])
    return _verdict("closed_vs_trace", _rel(closed[keep], ref), sc.oracle.trace_tol, f"{int(keep.sum())} times")


def check_abc(sc: Scenario, r: Resolved, omega_t: float = 1e3):
    """Kernel coefficients: quadrature vs brute force, and vs the delta-kernel limit."""
    sf = r.spectral
    # brute force needs a grid step well below 1/Omega, so the reference
    # time is capped at omega_t / Omega_max
    t = min(r.duration, omega_t / sf.omega_max)
    if sf.eta == 0:
        return [
            CheckResult("abc_quadrature_vs_brute", 0.0, sc.oracle.abc_tol, "skip", "eta = 0"),
            CheckResult("abc_highT_limit", 0.0, sc.oracle.highT_tol, "skip", "eta = 0"),
        ]
    quad = coeff_ABC_quadrature(t, r.gamma, r.temperature, sf, sc.quadrature)
    brute = oracle.brute_force_abc(t, r.gamma, r.temperature, sf)
    out = [_verdict("abc_quadrature_vs_brute", _rel(quad, brute), sc.oracle.abc_tol, f"t={t:.3g} s")]
    high = np.array([float(np.squeeze(v)) for v in coeff_ABC_highT(np.array([t]), r.gamma, r.weight)])
    regime = KB * r.temperature >= 100 * HBAR * max(r.gamma, 1.0 / t)
    err = max(_rel(quad, high), _rel(brute, high))
    if regime:
        out.append(_verdict("abc_highT_limit", err, sc.oracle.highT_tol, f"t={t:.3g} s"))
    else:
        out.append(CheckResult("abc_highT_limit", err, sc.oracle.highT_tol, "skip", "kT < 100 hbar max(gamma, 1/t)"))
    return out


def oracle_checks(sc: Scenario):
    r = resolve(sc)
    return [check_trajectory(sc, r), check_noiseless(sc, r), check_trace(sc, r), *check_abc(sc, r)]
