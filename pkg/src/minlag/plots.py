"""Matplotlib renderings saved alongside the delimited CLI outputs."""

from __future__ import annotations

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    return plt


def ray_figure(rows, result, path):
    """Branch diagram: min u against t, colour-split by stability, plus the
    smallest eigenvalue to show the fold crossing."""
    plt = _pyplot()
    t = np.array([r[0] for r in rows])
    min_u = np.array([r[1] for r in rows])
    lam = np.array([r[3] for r in rows])
    stable = lam > 0
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6.0, 6.0), sharex=True)
    ax1.plot(t[stable], min_u[stable], "o-", ms=3, label="stable")
    if np.any(~stable):
        ax1.plot(t[~stable], min_u[~stable], "s--", ms=3, label="unstable")
    if result.fold_t is not None:
        ax1.axvline(result.fold_t, color="k", lw=0.8, ls=":", label="fold T1")
    ax1.axvline(result.t0, color="gray", lw=0.8, ls="--", label="T0")
    ax1.set_ylabel("min u")
    ax1.legend(fontsize=8)
    ax2.plot(t, lam, ".-", ms=3)
    ax2.axhline(0.0, color="k", lw=0.8)
    ax2.set_xlabel("t")
    ax2.set_ylabel("lambda_min")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def expmap_figure(rows, Q0, path):
    """Completeness bound and density growth across the fibre disc."""
    plt = _pyplot()
    r = np.array([row[1] for row in rows])
    lb = np.array([row[6] for row in rows])
    da = np.array([row[8] for row in rows])
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.0, 3.4))
    ax1.plot(r, lb, ".", ms=2)
    ax1.axhline(0.0, color="k", lw=0.8)
    ax1.set_xlabel("r")
    ax1.set_ylabel("l^2 - |k|^2")
    ax1.set_title(f"completeness bound, Q0={Q0}")
    ax2.plot(r, da, ".", ms=2)
    ax2.axhline(0.0, color="k", lw=0.8)
    ax2.set_xlabel("r")
    ax2.set_ylabel("da/dr")
    ax2.set_title("density growth")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def toda_figure(data, r1, flatness, path):
    """Heat maps of the first chart residual and the curvature norm."""
    plt = _pyplot()
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.0, 3.4))
    g = data.grid.interior()
    im1 = ax1.imshow(
        np.abs(r1),
        origin="lower",
        extent=(g.x0, g.x1, g.y0, g.y1),
        cmap="viridis",
    )
    ax1.set_title("|toda residual 1|")
    fig.colorbar(im1, ax=ax1, shrink=0.85)
    g2 = g.interior()
    im2 = ax2.imshow(
        flatness,
        origin="lower",
        extent=(g2.x0, g2.x1, g2.y0, g2.y1),
        cmap="magma",
    )
    ax2.set_title("curvature norm")
    fig.colorbar(im2, ax=ax2, shrink=0.85)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
