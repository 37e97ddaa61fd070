"""Figure rendering for campaign and bound outputs.

The CSV/JSON emitted by the command line is the canonical record; these
helpers draw quick-look PNGs next to it when asked.  Everything uses the
Agg backend so rendering works headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .scenarios import CampaignSummary


def render_campaign(summary: CampaignSummary, path: str | Path) -> None:
    """Error CCDF plus model-order histogram for one campaign."""
    fig, (ax_err, ax_order) = plt.subplots(1, 2, figsize=(10, 4))

    errs = np.sort(summary.nearest_sq_errs)
    if errs.size:
        ccdf = 1.0 - np.arange(1, errs.size + 1) / errs.size
        positive = errs > 0
        ax_err.loglog(errs[positive], np.maximum(ccdf[positive], 1.0 / errs.size), drawstyle="steps-post")
        crbs = summary.crb_values
        if crbs.size and np.all(np.isfinite(crbs)):
            ax_err.axvline(float(np.mean(crbs)), color="k", ls="--", lw=1, label="mean CRB")
            ax_err.legend()
    ax_err.set_xlabel(r"squared frequency error [rad$^2$]")
    ax_err.set_ylabel("CCDF")
    ax_err.set_title("per-tone error tail")

    counts = summary.model_order_counts()
    if counts:
        ax_order.bar(list(counts.keys()), list(counts.values()), color="tab:blue")
    ax_order.axvline(summary.config.k, color="k", ls="--", lw=1, label="true K")
    ax_order.set_xlabel("estimated model order")
    ax_order.set_ylabel("trials")
    ax_order.legend()

    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_bounds(snr_db: np.ndarray, crb: np.ndarray, zzb: np.ndarray, path: str | Path) -> None:
    """CRB and ZZB against SNR on a log scale."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(snr_db, zzb, label="ZZB")
    ax.semilogy(snr_db, crb, "--", label="CRB")
    ax.set_xlabel("SNR [dB]")
    ax.set_ylabel(r"frequency MSE bound [rad$^2$]")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_roc(p_fa: np.ndarray, p_miss: np.ndarray, path: str | Path) -> None:
    """Modeled miss rate against nominal false-alarm rate."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(p_fa, np.maximum(p_miss, 1e-16), "o-")
    ax.set_xlabel(r"nominal $P_{fa}$")
    ax.set_ylabel(r"modeled $P_{miss}$")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
