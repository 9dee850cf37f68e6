"""SVG figures written next to the CSV output.

Output is deterministic: no date metadata and a fixed hash salt for the
element ids matplotlib generates.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

SVG_RC = {"svg.hashsalt": "sgi-sim", "svg.fonttype": "none", "font.size": 10}


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_trace(trace, path, title: str = ""):
    """h(t) and |coherence|(t) against time."""
    with plt.rc_context(SVG_RC):
        fig, ax = plt.subplots(figsize=(6.4, 4.0))
        t = np.asarray(trace.times)
        ax.plot(t, trace.coherence, label="coherence")
        ax.plot(t, trace.h, "--", label="h")
        ax.set_xlabel("t [s]")
        ax.set_ylabel("value")
        ax.set_ylim(-0.02, 1.05)
        ax.legend(loc="best", frameon=False)
        if title:
            ax.set_title(title)
        fig.tight_layout()
        _save(fig, path)


def plot_sweep(header, rows, path):
    """One-axis sweeps only: each output column against the axis (log x)."""
    x = np.array([r[0] for r in rows], dtype=float)
    with plt.rc_context(SVG_RC):
        fig, axes = plt.subplots(len(header) - 1, 1, figsize=(6.4, 2.6 * (len(header) - 1)), squeeze=False)
        for k, ax in enumerate(axes[:, 0], start=1):
            y = np.array([r[k] for r in rows], dtype=float)
            ok = np.isfinite(y)
            ax.plot(x[ok], y[ok], "o-", ms=3)
            if np.all(x > 0):
                ax.set_xscale("log")
            if header[k] == "tau" and np.all(y[ok] > 0):
                ax.set_yscale("log")
            ax.set_ylabel(header[k])
        axes[-1, 0].set_xlabel(header[0])
        fig.tight_layout()
        _save(fig, path)
