"""Figure rendering for the report path (written alongside CSV output)."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .euclidean import RadialProfile
from .sphere import SPHERE_VOLUME


def profile_figure(profile: RadialProfile, path, title: str = ""):
    """Four-panel radial summary: u, v, Delta u and scalar curvature."""
    r = profile.radii
    fig, axes = plt.subplots(2, 2, figsize=(9.0, 6.5), sharex=True)
    panels = [
        ("u", r"$u(r)$", "linear"),
        ("v", r"$v(r)$", "linear"),
        ("delta_u", r"$\Delta u(r)$", "linear"),
        ("scalar_curvature", r"$R_{g_u}(r)$", "symlog"),
    ]
    for ax, (key, label, yscale) in zip(axes.flat, panels):
        series = profile[key]
        if yscale == "symlog":
            # saturated curvature tails overflow the symlog transform
            series = np.clip(series, -1e30, 1e30)
        ax.plot(r, series, lw=1.2)
        ax.set_xscale("log")
        if yscale == "symlog":
            ax.set_yscale("symlog", linthresh=1.0)
        ax.set_ylabel(label)
        ax.grid(True, alpha=0.3)
    for ax in axes[1]:
        ax.set_xlabel(r"$r$")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def sweep_figure(rows, path):
    """Volume and scaling-identity summary across a mu sweep.

    rows: sequence of dicts with keys mu, V, pohozaev_lhs, pohozaev_rhs.
    Rows with non-finite entries (failed solves) are skipped.
    """
    ok = [row for row in rows if np.isfinite(row["V"])]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 3.6))
    if ok:
        mu = np.array([row["mu"] for row in ok])
        vol = np.array([row["V"] for row in ok])
        ax1.plot(mu, vol, "o-", label="measured V")
        ax1.plot(mu, (1.0 - mu) * SPHERE_VOLUME, "--", label=r"$(1-\mu)\,2\pi^2$")
        ax1.axhline(SPHERE_VOLUME, color="k", lw=0.8, label=r"$2\pi^2$ bound")
        ax1.set_xlabel(r"$\mu$")
        ax1.set_ylabel("volume")
        ax1.legend(fontsize=8)
        ax1.grid(True, alpha=0.3)
        lhs = np.array([row["pohozaev_lhs"] for row in ok])
        rhs = np.array([row["pohozaev_rhs"] for row in ok])
        ax2.plot(mu, lhs, "o-", label="alpha(alpha-2)")
        ax2.plot(mu, rhs, "x--", label="kernel integral")
        ax2.set_xlabel(r"$\mu$")
        ax2.set_ylabel("scaling identity")
        ax2.legend(fontsize=8)
        ax2.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
