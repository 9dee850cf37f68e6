"""Brute-force reference computations.

Nothing here calls into the propagator, density or quadrature modules; the
only shared objects are physical constants and the input containers.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from .constants import HBAR, KB


def _segment_steps(fp, dt):
    # steps aligned with segment boundaries so the force never jumps inside a step
    for a, b, f in fp.segments:
        n = max(1, int(math.ceil((b - a) / dt - 1e-9)))
        h = (b - a) / n
        for k in range(n):
            yield a + k * h, h, f


def classical_trajectory_rk4(fp, m: float, gamma: float, dt: float):
    """RK4 solution of m z'' = f0(t) - 2 m gamma z', z(0) = z'(0) = 0.

    Returns (t, z, v) sampled at every step.
    """
    def rhs(z, v, f):
        return v, f / m - 2.0 * gamma * v

    ts, zs, vs = [0.0], [0.0], [0.0]
    z = v = 0.0
    for t0, h, f in _segment_steps(fp, dt):
        k1z, k1v = rhs(z, v, f)
        k2z, k2v = rhs(z + 0.5 * h * k1z, v + 0.5 * h * k1v, f)
        k3z, k3v = rhs(z + 0.5 * h * k2z, v + 0.5 * h * k2v, f)
        k4z, k4v = rhs(z + h * k3z, v + h * k3v, f)
        z += h / 6.0 * (k1z + 2 * k2z + 2 * k3z + k4z)
        v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        ts.append(t0 + h)
        zs.append(z)
        vs.append(v)
    return np.array(ts), np.array(zs), np.array(vs)


def _branch_state(fp, m, sign, t):
    """Exact undamped centre (z, p) and classical action of one spin branch at t."""
    z = p = action = 0.0
    for a, b, f in fp.segments:
        if t <= a:
            break
        h = min(b, t) - a
        force = sign * f
        z1 = z + p / m * h + 0.5 * force / m * h * h
        p1 = p + force * h
        zm = z + p / m * (h / 2) + 0.5 * force / m * (h / 2) ** 2
        pm = p + force * h / 2
        # the Lagrangian p^2/2m + F z is quadratic in time: Simpson is exact
        lag = lambda zz, pp: pp * pp / (2 * m) + force * zz
        action += h / 6.0 * (lag(z, p) + 4 * lag(zm, pm) + lag(z1, p1))
        z, p = z1, p1
    return z, p, action


def noiseless_evolution(fp, m: float, sigma: float, t: float) -> complex:
    """Overlap <psi_-(t)|psi_+(t)> for friction- and noise-free evolution.

    Each branch is the free-evolved initial Gaussian displaced in phase
    space, ``|psi_s> = e^{i phi_s} D(z_s, p_s) U_free |psi_0>``. Pulling the
    free evolution through the displacement gives a displacement by
    (dz - dp t / m, dp) of the initial state, whose overlap with itself is
    exp(-d^2 / 8 sigma^2 - k^2 sigma^2 / 2 hbar^2).
    """
    if t <= 0:
        return 1.0 + 0.0j
    zp, pp, sp = _branch_state(fp, m, +1.0, t)
    zm, pm, sm = _branch_state(fp, m, -1.0, t)
    phase_p = (sp - 0.5 * zp * pp) / HBAR
    phase_m = (sm - 0.5 * zm * pm) / HBAR
    dz, dp = zp - zm, pp - pm
    d = dz - dp * t / m
    # Weyl phase from composing D(-alpha_-) D(alpha_+)
    cross = (pm * zp - zm * pp) / (2 * HBAR)
    mag = math.exp(-d * d / (8 * sigma * sigma) - dp * dp * sigma * sigma / (2 * HBAR * HBAR))
    phase = phase_p - phase_m + cross
    return mag * complex(math.cos(phase), math.sin(phase))


def _alpha_direct(sf, lags, temperature, omega_points):
    """alpha_R at each lag by composite Simpson in omega (odd point count)."""
    wmax = sf.omega_max
    w = np.linspace(0.0, wmax, omega_points)
    c = HBAR / (2 * KB * temperature)
    with np.errstate(invalid="ignore", divide="ignore"):
        jcoth = np.where(w > 0, w / np.tanh(c * w), 1.0 / c)
    if sf.kind == "sharp":
        jw = np.full_like(w, sf.eta)
    else:
        jw = sf.eta / (1 + (w / sf.cutoff) ** 2 + (w / sf.cutoff2) ** 4)
    g = jw * jcoth
    out = np.empty(len(lags))
    for i in range(0, len(lags), 256):
        chunk = lags[i : i + 256]
        out[i : i + 256] = integrate.simpson(g[None, :] * np.cos(np.outer(chunk, w)), x=w, axis=1) / math.pi
    return out


def brute_force_abc(t: float, gamma: float, temperature: float, sf, n: int = 2000, omega_points: int | None = None):
    """A, B, C by the trapezoidal rule on an n x n grid over [0, t]^2.

    alpha_R is evaluated directly (own omega quadrature, no interpolation)
    at every grid lag. On a uniform grid t' - t'' only takes the values
    k*h, so each distinct lag is computed once and reused.
    """
    if sf.eta == 0:
        return 0.0, 0.0, 0.0
    grid = np.linspace(0.0, t, n + 1)
    h = t / n
    if omega_points is None:
        omega_points = 2 * int(max(2000, 8 * sf.omega_max * t)) + 1
    alpha_k = _alpha_direct(sf, np.arange(n + 1) * h, temperature, omega_points)
    idx = np.abs(np.subtract.outer(np.arange(n + 1), np.arange(n + 1)))
    kernel = alpha_k[idx]
    w = np.full(n + 1, h)
    w[0] = w[-1] = h / 2
    g = gamma
    e = np.exp(g * grid)
    s = np.sinh(g * grid) if g > 0 else grid
    sr = np.sinh(g * (t - grid)) if g > 0 else t - grid
    sh2 = np.sinh(g * t) ** 2 if g > 0 else t * t
    u = w * e * s
    v = w * e * sr
    A = math.exp(-2 * g * t) / sh2 * (u @ kernel @ u)
    B = math.exp(-g * t) / sh2 * (u @ kernel @ v)
    C = 1.0 / sh2 * (v @ kernel @ v)
    return float(A), float(B), float(C)


def trace_offdiag_numeric(c, sigma: float, width: float = 10.0) -> complex:
    """int rho_od(q, 0, t) dq with rho_od written out term by term from its closed form.

    ``c`` holds scalar coefficients at one time. Integration uses scipy's
    adaptive QUADPACK routine over +-width packet widths.

    No cancellation-free rewriting is done here: the factor
    1 - sigma^2 L+^2 / (2 a hbar^2) loses about 2 log10(2 m sigma^2 / hbar t)
    digits, so the form is unreliable when hbar t / (m sigma^2) < ~1e-6. The
    integrand must also not oscillate more than a few hundred times over the
    window (QUADPACK subdivision limit).
    """
    A, B, C = float(c.A), float(c.B), float(c.C)
    Lp, Lm, N, M, X, Z, G = (float(getattr(c, k)) for k in ("Lp", "Lm", "N", "M", "X", "Z", "G"))
    hb = HBAR
    a = (Lp**2 * sigma**2 / 2 + hb * C / 2 + hb**2 / (8 * sigma**2)) / hb**2
    quad_coef = (
        -2 * sigma**2 * N**2 / hb**2 * (1 - sigma**2 * Lp**2 / (2 * a * hb**2))
        + 2 / hb * (B**2 / (2 * a * hb) - A)
        - 2 * sigma**2 * Lp * N * B / (a * hb**3)
    )
    lin = (-2 * Z) * (B / (2 * a * hb) - sigma**2 * N * Lp / (2 * a * hb**2)) + 2 * X
    const = -((2 * Z) ** 2) / (16 * a * hb**2)
    pref = G * math.sqrt(math.pi / a)
    sig_t = hb * math.sqrt(2 * a) / M
    L = width * sig_t

    def re(q):
        return pref * math.exp(quad_coef * q * q + const) * math.cos(lin * q / hb)

    def im(q):
        return pref * math.exp(quad_coef * q * q + const) * math.sin(lin * q / hb)

    opts = dict(limit=400, epsabs=1e-15 * pref * 2 * L, epsrel=1e-12)
    r, _ = integrate.quad(re, -L, L, **opts)
    i, _ = integrate.quad(im, -L, L, **opts)
    return complex(r, i)
