"""Static SVG plots rendered from CSV artifacts."""

import logging
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

logger = logging.getLogger(__name__)

# Fixed hash salt and no date metadata keep SVG output reproducible
matplotlib.rcParams["svg.hashsalt"] = "paircal"
SVG_METADATA = {"Date": None}


def _column(rows: list[dict], name: str) -> np.ndarray:
    return np.array([float(r[name]) for r in rows], dtype=np.float64)


def _save(fig, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=SVG_METADATA)
    plt.close(fig)
    logger.info("Saved plot to %s", path)
    return path


def plot_variance_profile(rows: list[dict], path: Path) -> Path:
    """Predicted variances against the realized squared error along x."""
    x = _column(rows, "x")
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    top.plot(x, _column(rows, "p_true"), color="black", label="p(1|x)")
    top.plot(x, _column(rows, "p_hat"), color="tab:blue", label="model")
    top.set_ylabel("P(Y=1)")
    top.legend(loc="upper right")

    bottom.plot(x, _column(rows, "sq_err"), color="black", label="(p_hat - p)^2")
    bottom.plot(x, _column(rows, "v_cheat"), color="tab:blue", label="cheat-corrected")
    if "v_naive" in rows[0]:
        bottom.plot(x, _column(rows, "v_naive"), color="tab:orange", linestyle="--", label="naive")
    bottom.set_yscale("symlog", linthresh=1e-4)
    bottom.set_xlabel("x")
    bottom.set_ylabel("variance")
    bottom.legend(loc="upper right")
    return _save(fig, path)


def plot_reliability(rows: list[dict], path: Path, title: str = "Reliability") -> Path:
    """Mean predicted against mean realized value per bin, one series per kind."""
    series = defaultdict(list)
    for row in rows:
        series[row.get("kind", "")].append(row)
    fig, ax = plt.subplots(figsize=(5, 5))
    lo = hi = None
    for kind, items in series.items():
        pred, real = _column(items, "mean_predicted"), _column(items, "mean_realized")
        ax.plot(pred, real, marker="o", markersize=3, linewidth=1, label=kind)
        lo = min(pred.min(), real.min()) if lo is None else min(lo, pred.min(), real.min())
        hi = max(pred.max(), real.max()) if hi is None else max(hi, pred.max(), real.max())
    if lo is not None:
        ax.plot([lo, hi], [lo, hi], color="gray", linestyle=":", linewidth=1)
    ax.set_xlabel("predicted")
    ax.set_ylabel("realized")
    ax.set_title(title)
    ax.legend(loc="upper left")
    return _save(fig, path)


def plot_ranking_curves(rows: list[dict], path: Path) -> Path:
    """Hallucination rate against response rate for each ranking strategy."""
    series = defaultdict(list)
    for row in rows:
        series[row["strategy"]].append(row)
    fig, ax = plt.subplots(figsize=(7, 5))
    colors = plt.cm.tab10.colors
    for i, (strategy, items) in enumerate(sorted(series.items())):
        ax.plot(
            _column(items, "response_rate"),
            _column(items, "hallucination_rate"),
            color=colors[i % len(colors)],
            linewidth=1.5,
            label=strategy,
        )
    ax.set_xlabel("response rate")
    ax.set_ylabel("hallucination rate")
    ax.set_xlim(0.0, 1.0)
    ax.legend(loc="upper left", fontsize=8)
    ax.grid(True, alpha=0.3)
    return _save(fig, path)


def plot_coverage(rows: list[dict], path: Path) -> Path:
    """Interval failure rate against the tolerance beta."""
    beta = _column(rows, "beta")
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(beta, _column(rows, "failure_rate"), marker="o", label="observed failure rate")
    ax.plot(beta, beta, color="gray", linestyle=":", label="beta")
    ax.set_xlabel("beta")
    ax.set_ylabel("failure rate")
    ax.legend(loc="upper left")
    return _save(fig, path)


def plot_confidence_hallucination(rows: list[dict], path: Path) -> Path:
    """Hallucination rate per confidence bin next to the implied bound."""
    upper = _column(rows, "upper")
    lower = _column(rows, "lower")
    finite_upper = np.where(np.isfinite(upper), upper, lower * 2.0 + 1.0)
    centers = np.sqrt(np.maximum(lower, 1e-3) * finite_upper)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(centers, _column(rows, "mean_realized"), marker="o", label="hallucination rate")
    ax.plot(centers, _column(rows, "mean_predicted"), linestyle="--", label="1 - mean min(C, 1)")
    ax.set_xscale("log")
    ax.set_xlabel("confidence C")
    ax.set_ylabel("rate")
    ax.legend(loc="upper right")
    return _save(fig, path)


PLOTS = {
    "profile.csv": ("variance_profile.svg", plot_variance_profile),
    "reliability.csv": ("reliability.svg", plot_reliability),
    "ranking.csv": ("ranking.svg", plot_ranking_curves),
    "coverage.csv": ("coverage.svg", plot_coverage),
    "confidence.csv": ("confidence.svg", plot_confidence_hallucination),
}
