"""Figure builders and the deterministic save path.

Every figure is created and saved under a fixed style context, so rendering
the same inputs twice produces byte-identical files (SVG element ids are
seeded through ``svg.hashsalt``; date/software metadata is stripped).
"""
from pathlib import Path

import matplotlib

matplotlib.use("Agg", force=False)

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .errors import PlotInputError  # noqa: E402

# red/blue/green for the first three curves (density overlays are plotted in
# ascending f, giving the conventional color order); extras cycle through
# distinguishable fallbacks.
SERIES_COLORS = ("red", "blue", "green", "orange", "purple", "brown")

STYLE = {
    "figure.dpi": 100,
    "savefig.dpi": 100,
    "font.family": "DejaVu Sans",
    "font.size": 11.0,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.8,
    "legend.frameon": False,
    "svg.hashsalt": "frontierplots",
    "svg.fonttype": "none",
}

_AXIS_MARGIN = 0.03   # fraction of the data span kept clear on each side

_X_LABELS = {
    "std_dev": "standard deviation of exit wealth",
    "variance": "variance of exit wealth",
}


def _pad_limits(ax, xs, ys):
    """Set explicit limits with at least a 2% margin around all points."""
    for setter, values in ((ax.set_xlim, xs), (ax.set_ylim, ys)):
        lo, hi = float(np.min(values)), float(np.max(values))
        span = hi - lo
        if span == 0.0:
            span = max(abs(hi), 1.0)
        setter(lo - _AXIS_MARGIN * span, hi + _AXIS_MARGIN * span)


def frontier_overlay_figure(series, x_field: str = "std_dev"):
    """Overlay frontier curves: one labeled line per series, y = target mean."""
    if x_field not in _X_LABELS:
        raise ValueError(f"x_field must be one of {sorted(_X_LABELS)}")
    if not series:
        raise ValueError("at least one series is required")
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(7.0, 5.0), layout="constrained")
        for k, s in enumerate(series):
            ax.plot(getattr(s, x_field), s.z, label=s.label,
                    color=SERIES_COLORS[k % len(SERIES_COLORS)])
        ax.set_xlabel(_X_LABELS[x_field])
        ax.set_ylabel("target mean z")
        ax.set_title("efficient frontier")
        ax.legend(loc="upper left")
        _pad_limits(ax,
                    np.concatenate([getattr(s, x_field) for s in series]),
                    np.concatenate([s.z for s in series]))
    return fig


def solutions_figure(table):
    """Three stacked panels (psi, p, g against t), one line per regime."""
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(3, 1, figsize=(7.0, 8.0), sharex=True,
                                 layout="constrained")
        panels = (("psi", table.psi), ("p", table.p), ("g", table.g))
        for ax, (name, values) in zip(axes, panels):
            for i in table.regimes:
                ax.plot(table.t[i], values[i], label=f"regime {i}")
            ax.set_ylabel(name)
            _pad_limits(ax,
                        np.concatenate([table.t[i] for i in table.regimes]),
                        np.concatenate([values[i] for i in table.regimes]))
        axes[0].set_title("backward solutions")
        axes[0].legend(loc="best")
        axes[-1].set_xlabel("t")
    return fig


def save_figure(fig, out_path) -> Path:
    """Write the figure deterministically; the format follows the suffix."""
    out_path = Path(out_path)
    suffix = out_path.suffix.lower()
    if suffix == ".svg":
        metadata = {"Date": None}
    elif suffix == ".png":
        metadata = {"Software": None}
    else:
        raise PlotInputError(
            f"{out_path}: unsupported output format {suffix!r} "
            "(use .svg or .png)")
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with plt.rc_context(STYLE):
        fig.savefig(out_path, metadata=metadata)
    plt.close(fig)
    return out_path
