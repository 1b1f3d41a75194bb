"""Figure rendering for scans, fits, and analytic-vs-empirical checks.

Everything draws through the Agg backend straight into files; nothing here
ever opens a window, so the functions are safe on headless machines.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .scaling import LogQuadraticFit, PowerFit

_LN10 = math.log(10.0)


def _fit_label(fit) -> str:
    if isinstance(fit, PowerFit):
        return f"{fit.producer}: slope {fit.exponent:.3f}"
    if isinstance(fit, LogQuadraticFit):
        return f"{fit.producer}: A = {fit.A:.3f}"
    return str(fit)


def _fit_curve(fit, ks: np.ndarray) -> np.ndarray:
    logk = np.log(ks)
    if isinstance(fit, PowerFit):
        return (fit.exponent * logk + fit.log_prefactor) / _LN10
    return (fit.A * logk**2 + fit.B * logk + fit.C) / _LN10


def scan_fit_figure(pairs, path, title: str | None = None) -> str:
    """Log-log scatter of each scan with its fitted law drawn through it.

    pairs holds (ScanResult, fit) tuples; a fit of None plots data only.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("nothing to plot")
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    for scan_result, fit in pairs:
        x = np.log10(scan_result.ks)
        y = scan_result.log_values / _LN10
        label = _fit_label(fit) if fit is not None else scan_result.producer
        pts = ax.plot(x, y, "o", markersize=4, label=label)[0]
        if fit is not None:
            dense = np.geomspace(scan_result.ks.min(), scan_result.ks.max(), 64)
            ax.plot(np.log10(dense), _fit_curve(fit, dense), "-",
                    color=pts.get_color(), alpha=0.6, linewidth=1.0)
    ax.set_xlabel(r"$\log_{10} k$")
    ax.set_ylabel(r"$\log_{10} Z$")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def mc_comparison_figure(ks, analytic, empirical, label: str, path) -> str:
    """Analytic Z curve with the periodogram estimates on top."""
    ks = np.asarray(ks, dtype=float)
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    ax.plot(ks, np.asarray(analytic, dtype=float), "-", label=f"{label} analytic")
    ax.plot(ks, np.asarray(empirical, dtype=float), "o", markersize=4,
            label=f"{label} empirical")
    ax.set_xlabel("k")
    ax.set_ylabel("Z(k)")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)
