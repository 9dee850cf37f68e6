"""SQUID circuit and apparatus parameters, and the effective Ohmic bath they induce."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from .constants import MU0, MU_B, PHI0

log = logging.getLogger(__name__)

#: default value of 2*pi*i0*L/Phi0 regarded as "many minima"
MANY_MINIMA_THRESHOLD = 100.0

#: gamma = eta / (GAMMA_DIVISOR * m); 2 is the Caldeira-Leggett convention
GAMMA_DIVISOR = 2.0


class ParameterError(ValueError):
    """Raised for physically unusable parameter sets."""


def _require_positive(**values):
    for name, v in values.items():
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            raise ParameterError(f"{name} must be finite and > 0, got {v!r}")


@dataclass(frozen=True)
class SquidParams:
    """Circuit values of the SQUID whose flux sources the field gradient.

    ``effective_inductance`` optionally pins L0 directly instead of deriving
    it from L, i0 and n.
    """

    capacitance: float = 1e-12
    inductance: float = 1e-10
    critical_current: float = 1e-5
    resistance: float = 1.0
    flux_index: int = 1
    ring_width: float = 1e-5
    ring_length: float = 1e-3
    effective_inductance: float | None = None

    def __post_init__(self):
        _require_positive(
            capacitance=self.capacitance,
            inductance=self.inductance,
            resistance=self.resistance,
            ring_width=self.ring_width,
            ring_length=self.ring_length,
        )
        if not (self.critical_current >= 0 and math.isfinite(self.critical_current)):
            raise ParameterError("critical_current must be >= 0")
        if int(self.flux_index) != self.flux_index or self.flux_index < 1:
            raise ParameterError("flux_index must be a positive integer")
        if self.effective_inductance is not None:
            _require_positive(effective_inductance=self.effective_inductance)


@dataclass(frozen=True)
class ApparatusParams:
    geometry_factor: float = 1e13
    magnetic_moment: float = MU_B
    mass: float = 1.8e-25
    initial_width: float = 1e-6
    beam_velocity: float = 1000.0
    apparatus_length: float = 1e-3
    temperature: float = 0.1

    def __post_init__(self):
        _require_positive(
            geometry_factor=self.geometry_factor,
            magnetic_moment=self.magnetic_moment,
            mass=self.mass,
            initial_width=self.initial_width,
            beam_velocity=self.beam_velocity,
            apparatus_length=self.apparatus_length,
            temperature=self.temperature,
        )

    @property
    def duration(self) -> float:
        return self.apparatus_length / self.beam_velocity


@dataclass(frozen=True)
class DerivedBath:
    effective_inductance: float
    coupling: float
    friction: float
    cutoff: float
    cutoff2: float
    damping_rate: float
    force_magnitude: float
    relaxation_time: float
    many_minima_ratio: float = field(default=float("nan"))
    many_minima: bool = True

    @property
    def effective_cutoff(self) -> float:
        return min(self.cutoff, self.cutoff2)


def effective_inductance(sq: SquidParams) -> float:
    """L0 = [1/L + 2 pi i0 / (n Phi0)]^-1, or the pinned value if one is set."""
    if sq.effective_inductance is not None:
        return sq.effective_inductance
    return 1.0 / (1.0 / sq.inductance + 2.0 * math.pi * sq.critical_current / (sq.flux_index * PHI0))


def many_minima_ratio(sq: SquidParams) -> float:
    return 2.0 * math.pi * sq.critical_current * sq.inductance / PHI0


def many_minima_check(sq: SquidParams, threshold: float = MANY_MINIMA_THRESHOLD) -> bool:
    return many_minima_ratio(sq) >= threshold


def coupling_constant(app: ApparatusParams) -> float:
    """epsilon = mu * a."""
    return app.magnetic_moment * app.geometry_factor


def geometry_factor_estimate(ring_width: float, ring_length: float, z: float) -> float:
    """Flux-to-gradient factor a(z) = A'(z) / A(z)^2 of a thin rectangular ring.

    The ring's long sides are treated as two infinite antiparallel wires a
    distance ``ring_width`` apart. The field they produce at height ``z``
    above the midpoint is ``B(z) = B(0) (w/2)^2 / (z^2 + (w/2)^2)``; flux
    conservation ``B(0) A_ring = B(z) A(z)`` then fixes the effective area
    ``A(z) = A_ring (1 + 4 z^2 / w^2)``.
    """
    _require_positive(ring_width=ring_width, ring_length=ring_length)
    if z == 0 or not math.isfinite(z):
        raise ParameterError("z must be finite and non-zero")
    w = ring_width
    area = ring_width * ring_length
    a_of_z = area * (1.0 + 4.0 * z * z / (w * w))
    da_dz = area * 8.0 * z / (w * w)
    return da_dz / (a_of_z * a_of_z)


def effective_area(ring_width: float, ring_length: float, z: float) -> float:
    w = ring_width
    return ring_width * ring_length * (1.0 + 4.0 * z * z / (w * w))


def wire_pair_field(current: float, separation: float, z: float) -> float:
    """Field of two antiparallel infinite wires at height z above their midpoint."""
    r2 = z * z + 0.25 * separation * separation
    return MU0 * current * separation / (2.0 * math.pi * r2)


def derive_bath(
    sq: SquidParams,
    app: ApparatusParams,
    *,
    threshold: float = MANY_MINIMA_THRESHOLD,
    strict: bool = False,
    gamma_divisor: float = GAMMA_DIVISOR,
    eta_scale: float = 1.0,
) -> DerivedBath:
    """Effective bath seen by the particle.

    ``eta_scale`` multiplies the friction coefficient (and hence both the
    damping rate and the noise strength); it exists for sweeps and the
    synthetic presets.
    """
    L0 = effective_inductance(sq)
    ratio = many_minima_ratio(sq)
    ok = ratio >= threshold
    if not ok:
        msg = f"many-minima ratio 2*pi*i0*L/Phi0 = {ratio:.3g} below threshold {threshold:g}"
        if strict:
            raise ParameterError(msg)
        log.warning(msg)

    disc = L0 * L0 / (sq.resistance * sq.resistance) - 2.0 * sq.capacitance * L0
    if disc <= 0:
        raise ParameterError(
            "cutoff Omega is imaginary: need L0^2/R^2 > 2 C L0 "
            f"(L0={L0:.3e}, R={sq.resistance:.3e}, C={sq.capacitance:.3e})"
        )
    omega = 1.0 / math.sqrt(disc)
    omega2 = 1.0 / math.sqrt(sq.capacitance * L0)

    eps = coupling_constant(app)
    eta = eta_scale * eps * eps * L0 * L0 / sq.resistance
    gamma = eta / (gamma_divisor * app.mass)
    return DerivedBath(
        effective_inductance=L0,
        coupling=eps,
        friction=eta,
        cutoff=omega,
        cutoff2=omega2,
        damping_rate=gamma,
        force_magnitude=eps * sq.flux_index * PHI0,
        relaxation_time=1.0 / gamma if gamma > 0 else math.inf,
        many_minima_ratio=ratio,
        many_minima=ok,
    )
