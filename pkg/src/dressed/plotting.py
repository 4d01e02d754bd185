"""Figure rendering for the CLI report paths.

Everything draws on the Agg backend and returns raw PNG bytes; the CLI owns
file placement and atomic writes.  Figures are companions to the CSV data,
not the primary artifact, so styling stays minimal.
"""

from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_PNG_META = {"Software": "dressed"}


def _render(fig) -> bytes:
    buf = io.BytesIO()
    fig.savefig(buf, format="png", dpi=120, metadata=_PNG_META)
    plt.close(fig)
    return buf.getvalue()


def spectrum_figure(curves) -> bytes:
    """Overlay of the photon density and spectrum for a frequency sweep.

    curves: sequence of dicts with keys omega, density, spectrum, label.
    """
    fig, (ax_n, ax_s) = plt.subplots(1, 2, figsize=(9.0, 3.6), sharex=True)
    for cur in curves:
        ax_n.plot(cur["omega"], cur["density"], label=cur["label"], lw=1.2)
        ax_s.plot(cur["omega"], cur["spectrum"], label=cur["label"], lw=1.2)
    ax_n.set_ylabel("photon number density")
    ax_s.set_ylabel("photon energy density")
    for ax in (ax_n, ax_s):
        ax.set_xlabel("frequency / cutoff")
        ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    return _render(fig)


def correlations_figure(grid, x_b_plus, p_b_minus) -> bytes:
    fig, ax = plt.subplots(figsize=(5.4, 3.6))
    ax.plot(grid, x_b_plus, label="position-quadrature correlation", lw=1.2)
    ax.plot(grid, p_b_minus, label="momentum-quadrature correlation", lw=1.2)
    ax.axhline(0.0, color="0.7", lw=0.8)
    ax.set_xlabel("frequency / cutoff")
    ax.set_ylabel("atom-field correlation")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    return _render(fig)


def convergence_figure(rows, keys) -> bytes:
    """Log-log relative error against mode count for the oracle comparison."""
    fig, ax = plt.subplots(figsize=(5.4, 3.6))
    ms = [r["m"] for r in rows]
    for key in keys:
        ax.loglog(ms, [r[key] for r in rows], marker="o", ms=3, lw=1.0,
                  label=key)
    ax.set_xlabel("oracle modes M")
    ax.set_ylabel("relative error vs continuum")
    ax.legend(frameon=False, fontsize=7)
    fig.tight_layout()
    return _render(fig)
