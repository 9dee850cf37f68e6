"""Time-dependent coefficients of the dissipative propagator.

Notation follows the usual Caldeira-Leggett Gaussian propagator: the
friction-dependent kernels L+, L-, N, M, the force terms X, Z, the noise
terms A, B, C and the normalisation G. All closed forms are written in terms
of x = gamma*t through helpers that stay accurate (and finite) as x -> 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .constants import HBAR
from .kernels import SpectralFunction, noise_kernel
from .quadrature import QuadratureSpec, integrate_2d

#: below this value of gamma*t the closed forms switch to Taylor series
SERIES_SWITCH = 1e-6
#: the A, B, C closed forms cancel to O(x^2); they switch to series earlier
ABC_SERIES_SWITCH = 0.05

# Taylor coefficients of A/(w t), B/(w t), C/(w t) in powers of x = gamma t
_A_SERIES = (1 / 3, -1 / 6, 1 / 45, 1 / 90, -1 / 315, -1 / 945, 2 / 4725, 1 / 9450, -1 / 18711, -1 / 93555)
_B_SERIES = (1 / 6, 0.0, -1 / 45, 0.0, 1 / 315, 0.0, -2 / 4725, 0.0, 1 / 18711, 0.0)
_C_SERIES = (1 / 3, 1 / 6, 1 / 45, -1 / 90, -1 / 315, 1 / 945, 2 / 4725, -1 / 9450, -1 / 18711, 1 / 93555)


@dataclass(frozen=True)
class ForceProfile:
    """Piecewise-constant spin-dependent force f0(t) on [0, total_time]."""

    segments: tuple
    total_time: float = field(init=False)

    def __post_init__(self):
        segs = tuple((float(a), float(b), float(f)) for a, b, f in self.segments)
        if not segs:
            raise ValueError("force profile needs at least one segment")
        if segs[0][0] != 0.0:
            raise ValueError("force profile must start at t = 0")
        for (a, b, _), nxt in zip(segs, segs[1:] + (None,)):
            if not b > a:
                raise ValueError(f"segment [{a}, {b}] has non-positive length")
            if nxt is not None and not math.isclose(nxt[0], b, rel_tol=1e-12, abs_tol=0.0):
                raise ValueError(f"segments not contiguous at t = {b}")
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "total_time", segs[-1][1])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for a, b, f in self.segments:
            out = np.where((t >= a) & (t < b), f, out)
        out = np.where(t == self.total_time, self.segments[-1][2], out)
        return out

    def scaled(self, factor: float) -> "ForceProfile":
        return ForceProfile(tuple((a, b, f * factor) for a, b, f in self.segments))

    def impulse(self) -> float:
        return sum(f * (b - a) for a, b, f in self.segments)

    def first_moment(self) -> float:
        return sum(0.5 * f * (b * b - a * a) for a, b, f in self.segments)

    def is_balanced(self, rtol: float = 1e-12) -> bool:
        """Zero net impulse and zero undamped endpoint displacement."""
        T = self.total_time
        scale = max(abs(f) for _, _, f in self.segments) * T
        # undamped displacement at T is (T * impulse - first moment) / m
        return abs(self.impulse()) <= rtol * scale and abs(self.first_moment()) <= rtol * scale * T

    def _check(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t > self.total_time * (1 + 1e-12)):
            raise ValueError(f"t outside force profile [0, {self.total_time}]")
        return t


def balanced_profile(f0: float, total_time: float) -> ForceProfile:
    """Four equal quarters with force signs (+, -, -, +)."""
    q = total_time / 4.0
    return ForceProfile(
        ((0.0, q, f0), (q, 2 * q, -f0), (2 * q, 3 * q, -f0), (3 * q, total_time, f0))
    )


@dataclass(frozen=True)
class CoeffSet:
    t: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    Lp: np.ndarray
    Lm: np.ndarray
    N: np.ndarray
    M: np.ndarray
    X: np.ndarray
    Z: np.ndarray
    G: np.ndarray

    def at(self, i) -> "CoeffSet":
        return CoeffSet(**{k: np.asarray(getattr(self, k))[i] for k in self.__dataclass_fields__})


# --- stable elementary functions -------------------------------------------


def _x_over_sinh(x):
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < SERIES_SWITCH
    xs = np.where(small, 1.0, x)
    with np.errstate(over="ignore"):  # x / inf -> 0 is the right limit
        return np.where(small, 1.0 - x * x / 6.0, xs / np.sinh(xs))


def _two_x_over_expm1(y):
    """2x / (e^{2x} - 1) evaluated with y = 2x."""
    y = np.asarray(y, dtype=float)
    small = np.abs(y) < SERIES_SWITCH
    ys = np.where(small, 1.0, y)
    with np.errstate(over="ignore"):
        return np.where(small, 1.0 - y / 2.0 + y * y / 12.0, ys / np.expm1(ys))


def _phi(y):
    """(e^y - 1 - y) / y^2, -> 1/2 at y = 0."""
    y = np.asarray(y, dtype=float)
    small = np.abs(y) < 1e-3
    ys = np.where(small, 1.0, y)
    series = 0.5 + y / 6.0 + y * y / 24.0 + y**3 / 120.0 + y**4 / 720.0
    return np.where(small, series, (np.expm1(ys) - ys) / (ys * ys))


def _positive_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("coefficients require t > 0")
    return t


# --- coefficient functions ---------------------------------------------------


def coeff_L_N_M(t, m: float, gamma: float):
    """L+(t), L-(t), N(t), M(t).

    Since m gamma (coth x + 1) = m gamma e^x / sinh x, L+ coincides with M
    and L- with N.
    """
    t = _positive_t(t)
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    x = gamma * t
    base = m / t  # free-particle value
    Lp = base * _two_x_over_expm1(-2.0 * x)
    Lm = base * _two_x_over_expm1(2.0 * x)
    return Lp, Lm, Lm.copy(), Lp.copy()


def prefactor_G(t, m: float, gamma: float):
    """G(t) = m gamma e^{gamma t} / (2 pi hbar sinh gamma t)."""
    t = _positive_t(t)
    return m / t * _two_x_over_expm1(-2.0 * gamma * t) / (2.0 * math.pi * HBAR)


def coeff_X_Z(fp: ForceProfile | None, t, gamma: float, m: float = 1.0):
    """Force integrals X(t) and Z(t) for a piecewise-constant profile.

    Z depends on m only through M(t); ``m`` is needed because Z is returned
    as M(t) z(t) with z the classical centre trajectory.
    """
    t = _positive_t(t)
    if fp is None:
        return np.zeros_like(t), np.zeros_like(t)
    t = fp._check(t)
    x = gamma * t
    xsum = np.zeros_like(t)
    for a, b, f in fp.segments:
        lo = np.minimum(a, t)
        hi = np.minimum(b, t)
        # int_a^b (e^{2 g u} - 1)/2 du = g [u^2 phi(2 g u)]_a^b
        xsum += f * (hi * hi * _phi(2 * gamma * hi) - lo * lo * _phi(2 * gamma * lo))
    X = xsum / t * _two_x_over_expm1(2.0 * x)
    z = packet_center(fp, t, m, gamma)
    M = m / t * _two_x_over_expm1(-2.0 * x)
    return X, M * z


def packet_center(fp: ForceProfile | None, t, m: float, gamma: float):
    """z(t) = (1/2 m gamma) int_0^t f0(t') (1 - e^{-2 gamma (t - t')}) dt'."""
    t = np.asarray(t, dtype=float)
    if fp is None:
        return np.zeros_like(t)
    t = fp._check(t)
    z = np.zeros_like(t)
    for a, b, f in fp.segments:
        lo = np.minimum(a, t)
        hi = np.minimum(b, t)
        s_hi = t - lo
        s_lo = t - hi
        # int (1 - e^{-2 g s}) ds = 2 g s^2 phi(-2 g s)
        z += f * (s_hi * s_hi * _phi(-2 * gamma * s_hi) - s_lo * s_lo * _phi(-2 * gamma * s_lo))
    return z / m


def _series(coeffs, x):
    out = np.zeros_like(x)
    for c in reversed(coeffs):
        out = out * x + c
    return out


def coeff_ABC_highT(t, gamma: float, weight: float):
    """A, B, C for the delta-correlated kernel alpha_R(s) = weight * delta(s).

    With x = gamma t and E_k = 1 - e^{-k x}::

        A = w t [E_4/(4x) + e^{-4x} - (e^{-2x} - e^{-4x})/x] / E_2^2
        B = w t [E_4/(4x) - e^{-2x}] / E_2^2
        C = w t [1 + E_4/(4x) - E_2/x] / E_2^2

    For small x the terms cancel to O(x^2) and a Taylor series is used.
    """
    t = _positive_t(t)
    x = gamma * t
    small = x < ABC_SERIES_SWITCH
    xs = np.where(small, 1.0, x)
    e2 = -np.expm1(-2.0 * xs)
    e4 = -np.expm1(-4.0 * xs)
    d = e2 * e2
    a_n = (e4 / (4 * xs) + np.exp(-4 * xs) - (np.exp(-2 * xs) - np.exp(-4 * xs)) / xs) / d
    b_n = (e4 / (4 * xs) - np.exp(-2 * xs)) / d
    c_n = (1.0 + e4 / (4 * xs) - e2 / xs) / d
    a_n = np.where(small, _series(_A_SERIES, x), a_n)
    b_n = np.where(small, _series(_B_SERIES, x), b_n)
    c_n = np.where(small, _series(_C_SERIES, x), c_n)
    return weight * t * a_n, weight * t * b_n, weight * t * c_n


def _sinh_ratio(gamma, u, t):
    """sinh(gamma u) / sinh(gamma t), -> u/t as gamma -> 0."""
    if gamma * t < SERIES_SWITCH:
        return u / t * (1.0 + gamma * gamma * (u * u - t * t) / 6.0)
    return np.sinh(gamma * u) / np.sinh(gamma * t)


def noise_kernel_interpolant(sf: SpectralFunction, t: float, temperature: float, q: QuadratureSpec, grid_points: int = 4096):
    """Cubic interpolant of alpha_R on [0, t] (alpha_R is even)."""
    n = max(int(grid_points), int(math.ceil(16.0 * sf.omega_max * t)))
    grid = np.linspace(0.0, t, n + 1)
    vals = noise_kernel(sf, grid, temperature, q)
    spline = CubicSpline(grid, vals)
    return lambda s: spline(np.abs(s))


def coeff_ABC_quadrature(
    t: float,
    gamma: float,
    temperature: float,
    sf: SpectralFunction,
    q: QuadratureSpec = QuadratureSpec(relative_tolerance=1e-8),
    grid_points: int = 4096,
    kernel=None,
):
    """A, B, C from the double integrals over [0, t]^2 with the full kernel.

    The integrals are done in (u, v) = (t' - t'', t''), with alpha_R(u)
    taken from a cubic interpolant; u is split at 0 where the v-range kinks.
    """
    t = float(t)
    if t <= 0:
        raise ValueError("coefficients require t > 0")
    if sf.eta == 0:
        return 0.0, 0.0, 0.0
    alpha = kernel or noise_kernel_interpolant(sf, t, temperature, q, grid_points)
    g = gamma

    def weight(u, v):
        t1, t2 = v + u, v
        return np.exp(g * (t1 + t2 - 2 * t)) * alpha(u), t1, t2

    def fa(u, v):
        w, t1, t2 = weight(u, v)
        return w * _sinh_ratio(g, t1, t) * _sinh_ratio(g, t2, t)

    def fb(u, v):
        w, t1, t2 = weight(u, v)
        return w * np.exp(g * t) * _sinh_ratio(g, t1, t) * _sinh_ratio(g, t - t2, t)

    def fc(u, v):
        w, t1, t2 = weight(u, v)
        return w * np.exp(2 * g * t) * _sinh_ratio(g, t - t1, t) * _sinh_ratio(g, t - t2, t)

    panels = max(q.panel_count, int(math.ceil(sf.omega_max * t / math.pi)) + 1)
    outer = q.with_panels(panels)
    inner = QuadratureSpec(q.node_count, 1, q.relative_tolerance, max_panels=4)
    lower = (-t, 0.0, lambda u: -u, lambda u: np.full_like(u, t))
    upper = (0.0, t, lambda u: np.zeros_like(u), lambda u: t - u)
    out = []
    for fn in (fa, fb, fc):
        out.append(float(integrate_2d(fn, lower, outer, inner).value + integrate_2d(fn, upper, outer, inner).value))
    return tuple(out)


def coefficients(
    t,
    m: float,
    gamma: float,
    weight: float = 0.0,
    profile: ForceProfile | None = None,
    abc=None,
) -> CoeffSet:
    """All ten coefficients at times ``t`` (high-temperature noise unless ``abc`` given)."""
    t = _positive_t(np.atleast_1d(np.asarray(t, dtype=float)))
    Lp, Lm, N, M = coeff_L_N_M(t, m, gamma)
    X, Z = coeff_X_Z(profile, t, gamma, m)
    if abc is None:
        A, B, C = coeff_ABC_highT(t, gamma, weight)
    else:
        A, B, C = (np.broadcast_to(np.asarray(v, dtype=float), t.shape).copy() for v in abc)
    return CoeffSet(t=t, A=A, B=B, C=C, Lp=Lp, Lm=Lm, N=N, M=M, X=X, Z=Z, G=prefactor_G(t, m, gamma))
