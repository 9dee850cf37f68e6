"""Reduced density-matrix blocks, packet observables and spin coherence.

The spatial state of each spin branch starts as a Gaussian of width sigma
centred at the origin. All exponents are assembled before exponentiation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .constants import HBAR
from .propagator import CoeffSet, ForceProfile, coefficients, packet_center
from .quadrature import QuadratureError, QuadratureSpec, integrate_1d

CLOSED_FORM = "closed_form_highT"
TRACE_INTEGRAL = "trace_integral"


class RegimeError(ArithmeticError):
    """Raised when a' <= 0, i.e. the off-diagonal block is not normalisable."""


def _D(c: CoeffSet, sigma: float):
    # a * hbar^2
    return c.Lp**2 * sigma**2 / 2 + HBAR * c.C / 2 + HBAR**2 / (8 * sigma**2)


def _one_minus(c: CoeffSet, sigma: float):
    # 1 - sigma^2 L+^2 / (2 a hbar^2), without the cancellation
    return (HBAR * c.C / 2 + HBAR**2 / (8 * sigma**2)) / _D(c, sigma)


def a_of_t(c: CoeffSet, sigma: float):
    """a = (L+^2 sigma^2 / 2 + hbar C / 2 + hbar^2 / 8 sigma^2) / hbar^2."""
    return _D(c, sigma) / HBAR**2


def a_prime(c: CoeffSet, sigma: float):
    """Coefficient of -q^2 in the exponent of the off-diagonal block."""
    D = _D(c, sigma)
    s2 = sigma * sigma
    return (
        2 * s2 * c.N**2 / HBAR**2 * _one_minus(c, sigma)
        - (2 / HBAR) * (c.B**2 * HBAR / (2 * D) - c.A)
        + 2 * s2 * c.Lp * c.N * c.B / (D * HBAR)
    )


def packet_width(c: CoeffSet, sigma: float):
    return HBAR * np.sqrt(2 * a_of_t(c, sigma)) / c.M


def _log_norm(c: CoeffSet, sigma: float):
    # log of sqrt(pi / a) G(t)
    return 0.5 * np.log(math.pi / a_of_t(c, sigma)) + np.log(c.G)


def rho_diagonal(q, xi, c: CoeffSet, sigma: float, spin_sign: int = 1):
    """Diagonal spin block rho_ss(q, xi, t); ``spin_sign`` = +1 or -1."""
    s = float(spin_sign)
    D = _D(c, sigma)
    s2 = sigma * sigma
    K = s2 * c.N * c.Lp - HBAR * c.B
    xi_coeff = (
        c.A / (2 * HBAR)
        + c.N**2 * s2 / (2 * HBAR**2) * _one_minus(c, sigma)
        + s2 * c.N * c.Lp * c.B / (2 * D * HBAR)
        - c.B**2 / (4 * D)
    )
    expo = (
        -(c.M**2) / (4 * D) * (q - s * c.Z / c.M) ** 2
        - xi * xi * xi_coeff
        + 1j / HBAR * (c.Lm - c.M * K / (2 * D)) * q * xi
        + s * 1j / HBAR * (c.X + c.Z * K / (2 * D)) * xi
    )
    return np.exp(_log_norm(c, sigma) + expo)


def rho_offdiagonal(q, xi, c: CoeffSet, sigma: float, branch: int = 1):
    """Off-diagonal spin block; ``branch`` picks the upper (+1) or lower (-1) signs."""
    b = float(branch)
    D = _D(c, sigma)
    s2 = sigma * sigma
    lin = c.B * HBAR / (2 * D) - s2 * c.N * c.Lp / (2 * D)
    shift = xi * c.M - 2 * b * c.Z
    expo = (
        -a_prime(c, sigma) * q * q
        + 1j / HBAR * (shift * lin + (xi * c.Lm + 2 * b * c.X)) * q
        - shift**2 / (16 * D)
    )
    return np.exp(_log_norm(c, sigma) + expo)


def log_h_factor(c: CoeffSet, sigma: float):
    ap = a_prime(c, sigma)
    if np.any(ap <= 0):
        raise RegimeError("a'(t) <= 0: off-diagonal block not normalisable")
    return np.log(c.M) - math.log(2 * HBAR) - 0.5 * (np.log(a_of_t(c, sigma)) + np.log(ap))


def h_factor(c: CoeffSet, sigma: float):
    """h = M / (2 hbar sqrt(a a')), the irreversible attenuation."""
    return np.exp(log_h_factor(c, sigma))


def log_coherence_closed(c: CoeffSet, sigma: float):
    D = _D(c, sigma)
    ap = a_prime(c, sigma)
    lin = c.B * HBAR / (2 * D) - sigma**2 * c.N * c.Lp / (2 * D)
    phase_term = (c.Z * lin - c.X) ** 2 / (ap * HBAR**2)
    # (1/2)(dz/sigma~)^2 with dz = Z/M, the displacement of each branch
    overlap_term = c.Z**2 / (4 * D)
    return log_h_factor(c, sigma) - phase_term - overlap_term


def offdiag_trace(c: CoeffSet, sigma: float, q: QuadratureSpec = QuadratureSpec(relative_tolerance=1e-12), width: float = 10.0):
    """int rho_od(q, 0, t) dq by quadrature, one time at a time."""
    t = np.atleast_1d(c.t)
    out = np.empty(t.shape, dtype=complex)
    widths = np.atleast_1d(packet_width(c, sigma))
    for i in range(t.size):
        ci = c.at(i) if np.ndim(c.t) else c
        L = width * widths[i]
        out[i] = integrate_1d(lambda x: rho_offdiagonal(x, 0.0, ci, sigma), -L, L, q).value
    return out


def coherence(c: CoeffSet, sigma: float, mode: str = CLOSED_FORM, q: QuadratureSpec | None = None):
    """Magnitude of the off-diagonal trace relative to its t = 0 value of 1."""
    if mode == CLOSED_FORM:
        return np.exp(log_coherence_closed(c, sigma))
    if mode == TRACE_INTEGRAL:
        return np.abs(offdiag_trace(c, sigma, q or QuadratureSpec(relative_tolerance=1e-12)))
    raise ValueError(f"unknown coherence mode {mode!r}")


def sx_expectation(c: CoeffSet, sigma: float, mode: str = CLOSED_FORM):
    """<S_x> for the |+x> initial state, normalised to 1 at t = 0.

    The two off-diagonal blocks are complex conjugates, so <S_x> is the real
    part of one block's trace. The closed-form trace is real and positive.
    """
    if mode == CLOSED_FORM:
        return np.exp(log_coherence_closed(c, sigma))
    return np.real(offdiag_trace(c, sigma))


@dataclass
class CoherenceTrace:
    times: np.ndarray
    z_plus: np.ndarray
    z_minus: np.ndarray
    sigma_tilde: np.ndarray
    h: np.ndarray
    coherence: np.ndarray
    sx: np.ndarray
    decoherence_time: float | None = None
    diagnostics: list = field(default_factory=list)

    COLUMNS = ("t", "z_plus", "z_minus", "sigma_tilde", "h", "coherence", "sx")

    def rows(self):
        cols = (self.times, self.z_plus, self.z_minus, self.sigma_tilde, self.h, self.coherence, self.sx)
        return list(zip(*(np.asarray(c, dtype=float) for c in cols)))


def make_trace(
    times,
    mass: float,
    gamma: float,
    weight: float,
    sigma: float,
    profile: ForceProfile | None = None,
    mode: str = CLOSED_FORM,
    check_rtol: float | None = None,
) -> CoherenceTrace:
    """Sample every observable on ``times`` (t = 0 gets the initial values).

    With ``check_rtol`` set, the trace-integral coherence is computed too
    and disagreements larger than that are recorded in ``diagnostics``.
    """
    times = np.asarray(times, dtype=float)
    n = times.size
    zp = np.zeros(n)
    width = np.full(n, sigma)
    h = np.ones(n)
    coh = np.ones(n)
    sx = np.ones(n)
    diagnostics = []
    pos = times > 0
    if np.any(pos):
        c = coefficients(times[pos], mass, gamma, weight, profile)
        zp[pos] = packet_center(profile, times[pos], mass, gamma)
        width[pos] = packet_width(c, sigma)
        h[pos] = h_factor(c, sigma)
        coh[pos] = coherence(c, sigma, mode)
        sx[pos] = sx_expectation(c, sigma, mode)
        if check_rtol is not None:
            other_mode = TRACE_INTEGRAL if mode == CLOSED_FORM else CLOSED_FORM
            for i, (t, mine) in enumerate(zip(times[pos], coh[pos])):
                try:
                    other = float(np.squeeze(coherence(c.at(i), sigma, other_mode)))
                except QuadratureError as exc:
                    diagnostics.append(f"t={t:.6e}: cross-check skipped, {exc}")
                    continue
                r = abs(other - mine) / max(abs(mine), 1e-300)
                if r > check_rtol:
                    diagnostics.append(f"t={t:.6e}: coherence modes differ by {r:.3e} (relative)")
    return CoherenceTrace(times, zp, 0.0 - zp, width, h, coh, sx, diagnostics=diagnostics)


def h_of_t(t, mass: float, gamma: float, weight: float, sigma: float):
    c = coefficients(t, mass, gamma, weight)
    return h_factor(c, sigma)


def decoherence_time(
    mass: float,
    gamma: float,
    weight: float,
    sigma: float,
    t_max: float = 1e12,
    t_min: float | None = None,
    points: int = 481,
) -> float | None:
    """First time h(t) falls to 1/e, or ``None`` if it never does before ``t_max``.

    The crossing is bracketed on a log-spaced grid and refined by Brent's
    method; no extrapolation past ``t_max`` is attempted.
    """
    if weight == 0 and gamma == 0:
        return None
    t_min = t_min or t_max * 1e-36
    grid = np.geomspace(t_min, t_max, points)
    target = -1.0
    logs = np.log(h_of_t(grid, mass, gamma, weight, sigma))
    below = np.nonzero(logs <= target)[0]
    if below.size == 0:
        return None
    i = below[0]
    if i == 0:
        raise ValueError(f"h(t) already below 1/e at t_min = {t_min:.3e} s; lower t_min")

    def f(t):
        return float(np.log(h_of_t(np.array([t]), mass, gamma, weight, sigma))[0]) - target

    return brentq(f, grid[i - 1], grid[i], xtol=1e-300, rtol=1e-12)
