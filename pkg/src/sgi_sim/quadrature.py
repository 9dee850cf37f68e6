"""Panel Gauss-Legendre quadrature with global panel doubling.

Every integrand is called with numpy arrays of abscissae and must be
vectorised. Integrands may return arrays with extra trailing axes; the
integral is then taken component-wise and convergence is judged on the
largest component.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np


class QuadratureError(RuntimeError):
    """Raised when a quadrature does not reach its tolerance."""

    def __init__(self, message: str, value, error: float):
        super().__init__(f"{message} (achieved error estimate {error:.3e})")
        self.value = value
        self.error = error


class QuadResult(NamedTuple):
    value: np.ndarray | float
    error: float


@dataclass(frozen=True)
class QuadratureSpec:
    node_count: int = 16
    panel_count: int = 4
    relative_tolerance: float = 1e-10
    max_panels: int = 1 << 15

    def __post_init__(self):
        if self.node_count < 2:
            raise ValueError("node_count must be >= 2")
        if self.panel_count < 1:
            raise ValueError("panel_count must be >= 1")
        if not (0.0 < self.relative_tolerance <= 1e-2):
            raise ValueError("relative_tolerance must lie in (0, 1e-2]")

    def with_panels(self, panel_count: int) -> "QuadratureSpec":
        return QuadratureSpec(
            self.node_count,
            max(int(panel_count), 1),
            self.relative_tolerance,
            max(self.max_panels, 2 * int(panel_count)),
        )


@lru_cache(maxsize=32)
def _legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _panel_nodes(a: float, b: float, panels: int, n: int):
    x, w = _legendre(n)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _fixed_1d(f, a, b, panels, n):
    nodes, weights = _panel_nodes(a, b, panels, n)
    vals = np.asarray(f(nodes))
    return np.tensordot(weights, vals, axes=(0, 0)), np.tensordot(weights, np.abs(vals), axes=(0, 0))


ROUNDOFF_FLOOR = 100 * np.finfo(float).eps


def _converged(new, old, scale, tol):
    err = float(np.max(np.abs(new - old)))
    # relative test, with a roundoff floor set by the integral of |f| for
    # results that cancel down to near zero
    ref = max(tol * float(np.max(np.abs(new))), ROUNDOFF_FLOOR * float(np.max(scale)), np.finfo(float).tiny)
    return err, err <= ref


def integrate_1d(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    q: QuadratureSpec = QuadratureSpec(),
) -> QuadResult:
    """Integrate ``f`` over ``[a, b]``.

    The panel count is doubled until two successive results agree to
    ``q.relative_tolerance``; the difference is returned as the error
    estimate.
    """
    if not (np.isfinite(a) and np.isfinite(b)):
        raise ValueError("integration limits must be finite")
    if a == b:
        val, _ = _fixed_1d(f, a, a + 1.0, 1, q.node_count)
        return QuadResult(np.zeros_like(val), 0.0)
    panels = q.panel_count
    old, _ = _fixed_1d(f, a, b, panels, q.node_count)
    while True:
        panels *= 2
        new, scale = _fixed_1d(f, a, b, panels, q.node_count)
        err, ok = _converged(new, old, scale, q.relative_tolerance)
        if ok:
            return QuadResult(new[()] if np.ndim(new) == 0 else new, err)
        if panels >= q.max_panels:
            raise QuadratureError("1-D quadrature did not converge", new, err)
        old = new


def integrate_2d(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    domain: tuple,
    q: QuadratureSpec = QuadratureSpec(),
    inner: QuadratureSpec | None = None,
) -> QuadResult:
    """Iterated integral of ``f(x, y)``.

    ``domain`` is ``(x0, x1, y_lo, y_hi)`` where the y limits are numbers or
    vectorised callables of x. Outer and inner panel counts are doubled
    together until the result settles; the inner count stops growing at
    ``inner.max_panels``.
    """
    x0, x1, ylo, yhi = domain
    lo = ylo if callable(ylo) else (lambda x, c=ylo: np.full_like(x, c, dtype=float))
    hi = yhi if callable(yhi) else (lambda x, c=yhi: np.full_like(x, c, dtype=float))
    inner = inner or q

    def evaluate(px, py):
        xs, wx = _panel_nodes(x0, x1, px, q.node_count)
        t, w = _legendre(inner.node_count)
        a, b = lo(xs), hi(xs)
        # y nodes per outer node: (nx, py * n)
        frac = np.linspace(0.0, 1.0, py + 1)
        e = a[:, None] + (b - a)[:, None] * frac[None, :]
        half = 0.5 * np.diff(e, axis=1)
        mid = 0.5 * (e[:, 1:] + e[:, :-1])
        ys = (mid[:, :, None] + half[:, :, None] * t[None, None, :]).reshape(len(xs), -1)
        wy = (half[:, :, None] * w[None, None, :]).reshape(len(xs), -1)
        vals = f(np.broadcast_to(xs[:, None], ys.shape), ys)
        rows = np.sum(wy * vals, axis=1)
        absrows = np.sum(wy * np.abs(vals), axis=1)
        return np.dot(wx, rows), np.dot(wx, absrows)

    px, py = q.panel_count, inner.panel_count
    old, _ = evaluate(px, py)
    while True:
        px, py = 2 * px, min(2 * py, inner.max_panels)
        new, scale = evaluate(px, py)
        err, ok = _converged(new, old, scale, q.relative_tolerance)
        if ok:
            return QuadResult(new, err)
        if px >= q.max_panels:
            raise QuadratureError("2-D quadrature did not converge", new, err)
        old = new
