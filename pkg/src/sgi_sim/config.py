"""Scenario configuration: a flat ``[section]`` / ``key = value`` text format.

A hand-rolled parser is used so that every error can name the offending
line, and unknown sections or keys are rejected rather than ignored.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

from .model import ApparatusParams, ParameterError, SquidParams
from .propagator import ForceProfile, balanced_profile
from .quadrature import QuadratureSpec

PRESETS = ("paper-squid", "noiseless", "noisy-desk")
DEFAULT_PRESET = "paper-squid"


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = "<config>"):
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)
        self.line = line


def _float(v):
    return float(v)


def _int(v):
    x = float(v)
    if x != int(x):
        raise ValueError(f"expected an integer, got {v}")
    return int(x)


def _bool(v):
    s = v.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {v}")


def _opt_float(v):
    return None if v.strip().lower() in ("", "none", "derived") else float(v)


def _str(v):
    return v.strip()


SCHEMA = {
    "squid": {
        "capacitance": _float,
        "inductance": _float,
        "critical_current": _float,
        "resistance": _float,
        "flux_index": _int,
        "ring_width": _float,
        "ring_length": _float,
        "effective_inductance": _opt_float,
    },
    "apparatus": {
        "geometry_factor": _float,
        "magnetic_moment": _float,
        "mass": _float,
        "initial_width": _float,
        "beam_velocity": _float,
        "apparatus_length": _float,
        "temperature": _float,
    },
    "bath": {
        "eta_scale": _float,
        "gamma_scale": _float,
        "gamma_divisor": _float,
        "many_minima_threshold": _float,
        "strict_validity": _bool,
        "spectral": _str,
    },
    "profile": {
        "preset": _str,
        "f0": _opt_float,
        "total_time": _opt_float,
        "segments": _str,
    },
    "run": {
        "samples": _int,
        "mode": _str,
        "check_rtol": _opt_float,
        "t_max": _float,
    },
    "quadrature": {
        "node_count": _int,
        "panel_count": _int,
        "relative_tolerance": _float,
    },
    "oracle": {
        "trajectory_tol": _float,
        "noiseless_tol": _float,
        "trace_tol": _float,
        "abc_tol": _float,
        "highT_tol": _float,
    },
    "sweep": {
        "axis1": _str,
        "values1": _str,
        "axis2": _str,
        "values2": _str,
        "outputs": _str,
    },
    "output": {
        "dir": _str,
        "svg": _bool,
    },
}


def parse_text(text: str, source: str = "<config>") -> dict:
    """Parse config text into ``{section: {key: (value, line)}}``."""
    out: dict = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {raw.strip()!r}", lineno, source)
            section = line[1:-1].strip()
            if section not in SCHEMA:
                raise ConfigError(f"unknown section [{section}]", lineno, source)
            out.setdefault(section, {})
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno, source)
        if section is None:
            raise ConfigError("key outside of any [section]", lineno, source)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA[section]:
            raise ConfigError(f"unknown key {key!r} in [{section}]", lineno, source)
        if key in out[section]:
            raise ConfigError(f"duplicate key {key!r} in [{section}]", lineno, source)
        try:
            out[section][key] = (SCHEMA[section][key](value), lineno)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}", lineno, source) from None
    return out


def merge(base: dict, over: dict) -> dict:
    merged = {s: dict(v) for s, v in base.items()}
    for s, kv in over.items():
        merged.setdefault(s, {}).update(kv)
    return merged


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r} (choose from {', '.join(PRESETS)})")
    return resources.files("sgi_sim.presets").joinpath(f"{name}.ini").read_text()


@dataclass(frozen=True)
class OracleTolerances:
    trajectory_tol: float = 1e-6
    noiseless_tol: float = 1e-4
    trace_tol: float = 1e-4
    abc_tol: float = 5e-3
    highT_tol: float = 1e-2


@dataclass(frozen=True)
class Scenario:
    squid: SquidParams = SquidParams()
    apparatus: ApparatusParams = ApparatusParams()
    eta_scale: float = 1.0
    gamma_scale: float = 1.0
    gamma_divisor: float = 2.0
    many_minima_threshold: float = 100.0
    strict_validity: bool = False
    spectral: str = "sharp"
    profile_preset: str = "balanced4"
    f0: float | None = None
    total_time: float | None = None
    segments: tuple | None = None
    samples: int = 1000
    mode: str = "closed_form_highT"
    check_rtol: float | None = None
    t_max: float = 1e12
    quadrature: QuadratureSpec = QuadratureSpec(relative_tolerance=1e-8)
    oracle: OracleTolerances = OracleTolerances()
    sweep: dict = field(default_factory=dict)
    out_dir: str = "out"
    svg: bool = False

    @property
    def duration(self) -> float:
        if self.segments:
            return self.segments[-1][1]
        return self.total_time if self.total_time is not None else self.apparatus.duration

    def profile(self, f0_default: float) -> ForceProfile:
        if self.segments:
            return ForceProfile(self.segments)
        f0 = self.f0 if self.f0 is not None else f0_default
        return balanced_profile(f0, self.duration)

    def updated(self, **changes) -> "Scenario":
        return replace(self, **changes)


def _parse_segments(text: str, line: int, source: str):
    segs = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        bits = part.split(":")
        if len(bits) != 3:
            raise ConfigError(f"segment {part!r} must be t_start:t_end:force", line, source)
        try:
            segs.append(tuple(float(b) for b in bits))
        except ValueError:
            raise ConfigError(f"segment {part!r} is not numeric", line, source) from None
    try:
        ForceProfile(tuple(segs))
    except ValueError as exc:
        raise ConfigError(str(exc), line, source) from None
    return tuple(segs)


def build_scenario(parsed: dict, source: str = "<config>") -> Scenario:
    def values(section):
        return {k: v for k, (v, _) in parsed.get(section, {}).items()}

    def line_of(section):
        lines = [ln for _, ln in parsed.get(section, {}).values()]
        return min(lines) if lines else None

    try:
        squid = SquidParams(**values("squid"))
    except (ParameterError, TypeError) as exc:
        raise ConfigError(f"[squid] {exc}", line_of("squid"), source) from None
    try:
        app = ApparatusParams(**values("apparatus"))
    except (ParameterError, TypeError) as exc:
        raise ConfigError(f"[apparatus] {exc}", line_of("apparatus"), source) from None

    kw: dict = dict(squid=squid, apparatus=app)
    bath = values("bath")
    kw.update({k: v for k, v in bath.items()})
    if kw.get("spectral", "sharp") not in ("sharp", "squid"):
        raise ConfigError("spectral must be 'sharp' or 'squid'", parsed["bath"]["spectral"][1], source)

    prof = parsed.get("profile", {})
    if "preset" in prof:
        if prof["preset"][0] != "balanced4":
            raise ConfigError("profile preset must be 'balanced4'", prof["preset"][1], source)
        kw["profile_preset"] = "balanced4"
    if "f0" in prof:
        kw["f0"] = prof["f0"][0]
    if "total_time" in prof:
        kw["total_time"] = prof["total_time"][0]
    if "segments" in prof and prof["segments"][0]:
        kw["segments"] = _parse_segments(prof["segments"][0], prof["segments"][1], source)

    run = parsed.get("run", {})
    for key in ("samples", "mode", "check_rtol", "t_max"):
        if key in run:
            kw[key] = run[key][0]
    if kw.get("samples", 2) < 2:
        raise ConfigError("samples must be >= 2", run["samples"][1], source)
    if kw.get("mode", "closed_form_highT") not in ("closed_form_highT", "trace_integral"):
        raise ConfigError("mode must be closed_form_highT or trace_integral", run["mode"][1], source)

    quad = values("quadrature")
    tol_env = os.environ.get("SGI_QUAD_TOL")
    if tol_env:
        try:
            quad["relative_tolerance"] = float(tol_env)
        except ValueError:
            raise ConfigError(f"SGI_QUAD_TOL is not a number: {tol_env!r}", source="environment") from None
    base_q = QuadratureSpec(relative_tolerance=1e-8)
    try:
        kw["quadrature"] = replace(base_q, **quad)
    except ValueError as exc:
        raise ConfigError(f"[quadrature] {exc}", line_of("quadrature"), source) from None

    kw["oracle"] = OracleTolerances(**values("oracle"))
    kw["sweep"] = parsed.get("sweep", {})
    out = values("output")
    if "dir" in out:
        kw["out_dir"] = out["dir"]
    if "svg" in out:
        kw["svg"] = out["svg"]
    return Scenario(**kw)


def load_scenario(preset: str | None = None, path: str | os.PathLike | None = None) -> Scenario:
    """Preset values first, then the config file on top."""
    parsed = parse_text(preset_text(preset or DEFAULT_PRESET), f"preset:{preset or DEFAULT_PRESET}")
    source = "<config>"
    if path is not None:
        source = str(path)
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}", source=source) from None
        parsed = merge(parsed, parse_text(text, source))
    return build_scenario(parsed, source)
