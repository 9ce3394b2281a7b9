"""SVG figures for the CLI reports.

Output is byte-stable: the Agg backend, no date metadata and a fixed hash
salt for SVG element ids.
"""

from __future__ import annotations

from contextlib import contextmanager
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

golden = (np.sqrt(5) - 1.0) / 2.0
fig_width = 5.0

params = {
    "figure.figsize": (fig_width, fig_width * golden),
    "font.family": "DejaVu Sans",
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.linewidth": 0.6,
    "legend.fontsize": 8,
    "legend.frameon": False,
    "lines.linewidth": 1.0,
    "lines.markersize": 3,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "svg.hashsalt": "segregate",
    "svg.fonttype": "path",
    "path.simplify": False,
}


@contextmanager
def figure(path, **subplot_kw):
    with matplotlib.rc_context(params):
        fig, ax = plt.subplots(**subplot_kw)
        try:
            yield fig, ax
            fig.tight_layout()
            fig.savefig(Path(path), format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)


def plot_isotherms(path, curves, coexistence):
    """curves: list of (T, V, P); coexistence: list of (T, V1, V2, Pstar) for subcritical T."""
    with figure(path) as (fig, ax):
        for T, V, P in curves:
            ax.plot(V, P, label=f"T = {T:g}")
        for T, V1, V2, Ps in coexistence:
            ax.plot([V1, V2], [Ps, Ps], "k--", lw=0.7)
        ax.set_xscale("log")
        ax.set_xlabel("molar volume V")
        ax.set_ylabel("pressure P")
        finite = np.concatenate([P[np.isfinite(P)] for _, _, P in curves])
        if finite.size:
            hi = np.percentile(finite, 95)
            ax.set_ylim(min(0.0, finite.min()), 1.5 * hi)
        ax.legend()


def plot_envelopes(path, tables):
    """tables: list of (kT, EnvelopeTable)."""
    with figure(path) as (fig, ax):
        for kT, t in tables:
            line, = ax.plot(t.u_grid, t.G_values, lw=0.8, label=f"kT = {kT:g}")
            ax.plot(t.u_grid, t.Gstar_values, "--", color=line.get_color(), lw=0.8)
        ax.set_xlabel("order parameter u")
        ax.set_ylabel("G (solid), convex envelope (dashed)")
        ax.legend()


def plot_field(path, x, u, title=""):
    with figure(path) as (fig, ax):
        ax.plot(x, u)
        ax.axhline(0.0, color="0.7", lw=0.5)
        ax.set_xlabel("x")
        ax.set_ylabel("u")
        ax.set_ylim(-1.05, 1.05)
        if title:
            ax.set_title(title, fontsize=9)


def plot_continuation(path, x, sharp, fields):
    """fields: list of (eps, u)."""
    with figure(path) as (fig, ax):
        ax.plot(x, sharp, "k", lw=0.7, label="sharp pattern")
        for eps, u in fields:
            ax.plot(x, u, label=f"eps = {eps:g}")
        ax.set_xlabel("x")
        ax.set_ylabel("u")
        ax.legend()


def plot_loglog(path, fits):
    """fits: list of ExponentFit."""
    with figure(path) as (fig, ax):
        for f in fits:
            d = f.kT_critical - np.asarray(f.kT)
            line, = ax.loglog(d, f.c0, "o", label=f"{f.family}: mu = {f.mu:.3f}, R2 = {f.r2:.4f}")
            ax.loglog(d, np.exp(f.intercept) * d**f.mu, "-", color=line.get_color(), lw=0.7)
        ax.set_xlabel("kT_c - kT")
        ax.set_ylabel("interface cost c0")
        ax.legend()


def plot_refinement(path, n, gaps):
    """gaps: array (fields, len(n)) of relative gaps."""
    with figure(path) as (fig, ax):
        for row in np.atleast_2d(gaps):
            ax.loglog(n, row, "o-", color="0.4", lw=0.6)
        n = np.asarray(n, dtype=float)
        ref = np.atleast_2d(gaps)[:, 0].max() * (n[0] / n) ** 2
        ax.loglog(n, ref, "k--", lw=0.8, label="slope -2")
        ax.set_xlabel("grid size n")
        ax.set_ylabel("relative energy gap")
        ax.legend()
