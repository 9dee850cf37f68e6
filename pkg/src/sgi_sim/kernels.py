"""Spectral densities and the bath kernels gamma(t) and alpha_R(t)."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .constants import HBAR, KB
from .quadrature import QuadratureSpec, integrate_1d

log = logging.getLogger(__name__)

SHARP = "sharp"
SQUID = "squid"

#: EffectiveSquid quadratures stop at this multiple of min(Omega, Omega').
#: Beyond it J ~ eta Omega'^4 / w^3, so the dropped tail of the gamma(t)
#: integrand is below (Omega'/w_max)^3 / 3 ~ 4e-5 of its total weight.
SQUID_OMEGA_MAX_FACTOR = 20.0


@dataclass(frozen=True)
class SpectralFunction:
    kind: str
    eta: float
    cutoff: float
    cutoff2: float = math.inf

    def __post_init__(self):
        if self.kind not in (SHARP, SQUID):
            raise ValueError(f"unknown spectral function kind {self.kind!r}")
        if self.eta < 0 or self.cutoff <= 0 or self.cutoff2 <= 0:
            raise ValueError("eta must be >= 0 and cutoffs > 0")

    @classmethod
    def sharp(cls, eta: float, cutoff: float) -> "SpectralFunction":
        return cls(SHARP, eta, cutoff)

    @classmethod
    def squid(cls, eta: float, cutoff: float, cutoff2: float) -> "SpectralFunction":
        return cls(SQUID, eta, cutoff, cutoff2)

    @classmethod
    def from_bath(cls, bath, kind: str = SHARP) -> "SpectralFunction":
        if kind == SHARP:
            return cls.sharp(bath.friction, bath.effective_cutoff)
        return cls.squid(bath.friction, bath.cutoff, bath.cutoff2)

    @property
    def omega_max(self) -> float:
        if self.kind == SHARP:
            return self.cutoff
        return SQUID_OMEGA_MAX_FACTOR * min(self.cutoff, self.cutoff2)


def _j_over_omega(sf: SpectralFunction, w):
    w = np.asarray(w, dtype=float)
    if sf.kind == SHARP:
        return np.where(w < sf.cutoff, sf.eta, 0.0)
    return sf.eta / (1.0 + (w / sf.cutoff) ** 2 + (w / sf.cutoff2) ** 4)


def j_eval(sf: SpectralFunction, omega):
    """J(omega) for either spectral-function kind."""
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise ValueError("J(omega) is defined for omega >= 0 only")
    out = w * _j_over_omega(sf, w)
    return out[()] if out.ndim == 0 else out


def _x_coth_x(x):
    # x coth x, even and -> 1 at x = 0
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    xs = np.where(small, 1.0, x)
    return np.where(small, 1.0 + x * x / 3.0, xs / np.tanh(xs))


def _resolve_panels(sf, s_max, q):
    # one panel per half oscillation of cos(w s) at the largest lag
    need = int(math.ceil(sf.omega_max * s_max / math.pi)) + 1
    return q if need <= q.panel_count else q.with_panels(need)


def noise_kernel(sf: SpectralFunction, s, temperature: float, q: QuadratureSpec = QuadratureSpec(), chunk: int = 512):
    """alpha_R(s) = (1/pi) int_0^inf J(w) coth(hbar w / 2kT) cos(w s) dw.

    ``s`` may be an array. Large arrays are processed in chunks to bound
    memory.
    """
    if temperature <= 0:
        raise ValueError("temperature must be > 0")
    scalar = np.ndim(s) == 0
    s = np.abs(np.atleast_1d(np.asarray(s, dtype=float)))
    if not np.all(np.isfinite(s)):
        raise ValueError("lag must be finite")
    c = HBAR / (2.0 * KB * temperature)
    # J coth(c w) = (J / w) (w coth(c w)) with the w -> 0 limit 2 eta kT / hbar
    prefactor = 1.0 / (math.pi * c)
    out = np.empty_like(s)
    for i in range(0, s.size, chunk):
        part = s[i : i + chunk]
        qq = _resolve_panels(sf, float(part.max(initial=0.0)), q)

        def f(w, part=part):
            g = _j_over_omega(sf, w) * _x_coth_x(c * w)
            return g[:, None] * np.cos(np.outer(w, part))

        out[i : i + chunk] = prefactor * integrate_1d(f, 0.0, sf.omega_max, qq).value
    return float(out[0]) if scalar else out


def noise_kernel_highT_weight(sf: SpectralFunction, temperature: float, damping_rate: float | None = None) -> float:
    """Weight 2 eta kT / hbar of the delta-function limit of alpha_R."""
    if damping_rate is not None and KB * temperature <= HBAR * damping_rate:
        log.warning("kT <= hbar*gamma: the high-temperature kernel is not justified")
    return 2.0 * sf.eta * KB * temperature / HBAR


def damping_kernel(sf: SpectralFunction, t, mass: float, q: QuadratureSpec = QuadratureSpec()):
    """gamma(t) = (2 / m pi) int_0^inf (J(w)/w) cos(w t) dw for t >= 0."""
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 0):
        raise ValueError("damping kernel requires t >= 0")
    if sf.eta == 0:
        return 0.0 if scalar else np.zeros_like(t)
    qq = _resolve_panels(sf, float(t.max()), q)

    def f(w):
        return _j_over_omega(sf, w)[:, None] * np.cos(np.outer(w, t))

    out = 2.0 / (mass * math.pi) * integrate_1d(f, 0.0, sf.omega_max, qq).value
    return float(out[0]) if scalar else out


def damping_kernel_sharp(sf: SpectralFunction, t, mass: float):
    """Closed form (2 eta / m pi) sin(Omega t) / t of the sharp-cutoff gamma(t)."""
    t = np.asarray(t, dtype=float)
    return 2.0 * sf.eta / (mass * math.pi) * sf.cutoff * np.sinc(sf.cutoff * t / math.pi)
