"""Optional figure rendering for the analysis report path.

Only the value-vs-rank distribution (with its logarithmic fit) is drawn;
all other analysis outputs stay data-only.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analyze import LogFit


def render_rank_plot(
    series: Mapping[str, tuple[np.ndarray, np.ndarray]],
    fits: Mapping[str, LogFit],
    path,
) -> str:
    """Semilog rank plot of normalized indicator values, fits overlaid."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for name, (ranks, values) in series.items():
        ax.semilogx(ranks, values, lw=1.2, label=name)
        fit = fits.get(name)
        if fit is not None and ranks.size > 1:
            ax.semilogx(
                ranks,
                fit.slope * np.log(ranks) + fit.intercept,
                lw=0.8,
                ls="--",
                color="gray",
            )
    ax.set_xlabel("rank")
    ax.set_ylabel("value / max value")
    ax.set_ylim(bottom=0)
    ax.legend(frameon=False)
    fig.tight_layout()
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return str(out)
