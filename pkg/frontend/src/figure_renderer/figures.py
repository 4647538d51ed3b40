"""Figure assembly: grouping sweep rows into series and drawing them.

One figure per scenario CSV. Every distinct strategy label becomes one
series over N (the labels already carry the swept parameter, e.g.
"noise-optimal-with-emi:rho=10dB"), and reference lines from meta.json are
drawn as horizontal asymptotes. Rendering is deterministic for identical
inputs: fixed geometry and dpi, a fixed SVG hash salt, and no embedded
timestamps.
"""

import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

NORMALIZATIONS = ("none", "per-element", "per-element-squared")


@dataclass(frozen=True)
class FigureSpec:
    """What to draw for one scenario CSV.

    normalization divides the linear SNR by N or N^2 before the dB/linear
    transform, which is how convergence-to-asymptote plots are read.
    reference_keys names the meta.json reference_lines entries to draw.
    """

    name: str
    x_log: bool = True
    normalization: str = "none"
    reference_keys: tuple = ()
    title: str = ""

    def __post_init__(self):
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"unknown normalization {self.normalization!r}")


@dataclass(frozen=True)
class RenderSummary:
    out_path: Path
    series_labels: tuple
    reference_lines: dict = field(default_factory=dict)


DEFAULT_SPECS = {
    "fig2": FigureSpec(
        name="fig2", title="Mean SNR vs N under increasing interference"
    ),
    "fig3": FigureSpec(
        name="fig3", title="Mean SNR vs N with a direct link"
    ),
    "fig4": FigureSpec(
        name="fig4",
        normalization="per-element",
        reference_keys=("prop2_limit",),
        title="Mean SNR per element and its asymptote",
    ),
    "fig5": FigureSpec(
        name="fig5", title="Mean SNR vs N for directive interference"
    ),
    "fig6": FigureSpec(
        name="fig6", title="Interference-aware tuning and its upper bound"
    ),
}


def figure_spec_for(stem, meta):
    """The drawing recipe for a scenario: builtin style or meta-derived.

    Unknown scenarios fall back to a plain SNR-vs-N figure unless their
    meta entry carries reference lines, in which case the normalization
    that makes those lines horizontal is chosen (per-element for a
    linear-scaling limit, per-element-squared for a square-law limit; the
    former wins when both are present).
    """
    if stem in DEFAULT_SPECS:
        return DEFAULT_SPECS[stem]
    lines = meta.get(stem, {}).get("reference_lines", {})
    if "prop2_limit" in lines:
        return FigureSpec(
            name=stem, normalization="per-element", reference_keys=("prop2_limit",)
        )
    if "prop1_limit" in lines:
        return FigureSpec(
            name=stem,
            normalization="per-element-squared",
            reference_keys=("prop1_limit",),
        )
    return FigureSpec(name=stem)


def group_series(points):
    """Strategy label -> sorted (N, linear SNR) pairs, in CSV order."""
    series = {}
    for p in points:
        series.setdefault(p.strategy, []).append((p.n, p.mean_snr_linear))
    return {label: sorted(pairs) for label, pairs in series.items()}


def _transform(values_linear, n_values, normalization, y_scale):
    out = []
    for value, n in zip(values_linear, n_values):
        if normalization == "per-element":
            value = value / n
        elif normalization == "per-element-squared":
            value = value / n**2
        if y_scale == "db":
            value = 10 * math.log10(value) if value > 0 else math.nan
        out.append(value)
    return out


def _y_label(normalization, y_scale):
    core = {
        "none": "mean SNR",
        "per-element": "mean SNR / N",
        "per-element-squared": "mean SNR / N^2",
    }[normalization]
    return f"{core} [dB]" if y_scale == "db" else core


def render(spec, points, reference_lines, out_path, y_scale="db"):
    """Draw one figure and save it; returns what was drawn.

    reference_lines maps limit names to linear per-element (or
    per-element-squared) values; they are drawn as horizontal lines after
    the same dB transform as the curves.
    """
    if y_scale not in ("db", "linear"):
        raise ValueError(f"unknown y scale {y_scale!r}")
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)

    series = group_series(points)
    with plt.rc_context({"svg.hashsalt": spec.name}):
        fig, ax = plt.subplots(figsize=(6.4, 4.2), dpi=150)
        for label, pairs in series.items():
            ns = [n for n, _ in pairs]
            ys = _transform([v for _, v in pairs], ns, spec.normalization, y_scale)
            ax.plot(ns, ys, marker="o", markersize=3.5, label=label)
        for key, value in reference_lines.items():
            y = value
            if y_scale == "db":
                y = 10 * math.log10(value) if value > 0 else math.nan
            ax.axhline(
                y, color="black", linestyle="--", linewidth=1.0,
                label=f"{key} asymptote",
            )
        if spec.x_log:
            ax.set_xscale("log", base=2)
            ax.set_xticks(sorted({p.n for p in points}))
            ax.get_xaxis().set_major_formatter(matplotlib.ticker.ScalarFormatter())
        ax.set_xlabel("number of elements N")
        ax.set_ylabel(_y_label(spec.normalization, y_scale))
        if spec.title:
            ax.set_title(spec.title)
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(fontsize=8)
        fig.tight_layout()
        fig.savefig(out_path, metadata=_clean_metadata(out_path))
        plt.close(fig)

    return RenderSummary(
        out_path=out_path,
        series_labels=tuple(series),
        reference_lines=dict(reference_lines),
    )


def _clean_metadata(out_path):
    # SVG output embeds a creation date unless told otherwise, which would
    # break byte-identical re-renders
    if out_path.suffix.lower() == ".svg":
        return {"Date": None}
    return None
