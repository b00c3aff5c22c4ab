"""SVG figures. Plotting only reads results; it never changes them."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_SVG_META = {"Date": None}


def plot_outage(curves, path, title: str = "") -> None:
    """Log-y outage versus SNR; closed-form bounds drawn dashed in the same colour."""
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    for curve in curves:
        snr, out = curve.snr_db, curve.outage
        positive = out > 0
        line, = ax.semilogy(snr[positive], out[positive], "o-", label=curve.scheme_label)
        if curve.bound is not None:
            ax.semilogy(snr, curve.bound, "--", color=line.get_color(),
                        label=f"{curve.scheme_label} (bound)")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("Outage probability")
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)


def plot_diversity(estimates: dict, path, title: str = "") -> None:
    """Finite-SNR slope per scheme, with a dotted line at each target order."""
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    for label, est in estimates.items():
        line, = ax.plot(est.snr_db_midpoints, est.values, "o-", label=label)
        if est.asymptote_claim == est.asymptote_claim:
            ax.axhline(est.asymptote_claim, ls=":", color=line.get_color())
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("Diversity order")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)
