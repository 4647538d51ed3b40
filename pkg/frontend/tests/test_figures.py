import math

import pytest

from figure_renderer.figures import (
    DEFAULT_SPECS,
    FigureSpec,
    figure_spec_for,
    group_series,
    render,
    _transform,
)
from figure_renderer.schema import read_sweep

from conftest import FIG2_STRATEGIES, FIG4_STRATEGIES, HEADER


def test_group_series_keeps_csv_order_and_sorts_n(sweep_dir):
    points = read_sweep(sweep_dir / "fig2.csv")
    series = group_series(points)
    assert tuple(series) == FIG2_STRATEGIES
    for pairs in series.values():
        ns = [n for n, _ in pairs]
        assert ns == sorted(ns) == [16, 64, 256, 1024]


def test_transform_normalizations():
    assert _transform([200.0], [100], "none", "linear") == [200.0]
    assert _transform([200.0], [100], "per-element", "linear") == [2.0]
    assert _transform([200.0], [100], "per-element-squared", "linear") == [0.02]
    (db,) = _transform([100.0], [10], "per-element", "db")
    assert db == pytest.approx(10.0)
    (gap,) = _transform([0.0], [10], "none", "db")
    assert math.isnan(gap)


def test_render_fig2_series_count(sweep_dir, tmp_path):
    points = read_sweep(sweep_dir / "fig2.csv")
    out = tmp_path / "fig2.png"
    summary = render(DEFAULT_SPECS["fig2"], points, {}, out)
    assert summary.series_labels == FIG2_STRATEGIES
    assert summary.reference_lines == {}
    assert out.exists() and out.stat().st_size > 0


def test_render_fig4_draws_reference_line(sweep_dir, tmp_path):
    points = read_sweep(sweep_dir / "fig4.csv")
    out = tmp_path / "fig4.png"
    summary = render(
        DEFAULT_SPECS["fig4"], points, {"prop2_limit": 55.0}, out
    )
    assert summary.series_labels == FIG4_STRATEGIES
    assert summary.reference_lines == {"prop2_limit": 55.0}
    assert out.exists() and out.stat().st_size > 0


@pytest.mark.parametrize("fmt", ["png", "svg"])
def test_render_is_deterministic(sweep_dir, tmp_path, fmt):
    points = read_sweep(sweep_dir / "fig4.csv")
    a = tmp_path / f"a.{fmt}"
    b = tmp_path / f"b.{fmt}"
    render(DEFAULT_SPECS["fig4"], points, {"prop2_limit": 55.0}, a)
    render(DEFAULT_SPECS["fig4"], points, {"prop2_limit": 55.0}, b)
    assert a.read_bytes() == b.read_bytes()


def test_nan_rows_render_as_gaps(tmp_path):
    path = tmp_path / "sweep.csv"
    path.write_text(
        HEADER
        + "\nx,no-emi,16,100.0,20.0,1.0,5,0,0.0"
        + "\nx,no-emi,64,nan,nan,nan,5,0,0.0"
        + "\nx,no-emi,256,2000.0,33.0,1.0,5,0,0.0\n"
    )
    out = tmp_path / "x.png"
    summary = render(FigureSpec(name="x"), read_sweep(path), {}, out)
    assert summary.series_labels == ("no-emi",)
    assert out.exists()


def test_builtin_stems_have_tailored_specs():
    assert set(DEFAULT_SPECS) == {"fig2", "fig3", "fig4", "fig5", "fig6"}
    assert DEFAULT_SPECS["fig4"].normalization == "per-element"
    assert DEFAULT_SPECS["fig4"].reference_keys == ("prop2_limit",)
    assert DEFAULT_SPECS["fig2"].normalization == "none"


def test_spec_fallback_follows_meta():
    assert figure_spec_for("fig4", {}) is DEFAULT_SPECS["fig4"]
    meta = {"custom": {"reference_lines": {"prop2_limit": 3.0}}}
    spec = figure_spec_for("custom", meta)
    assert spec.normalization == "per-element"
    assert spec.reference_keys == ("prop2_limit",)
    meta = {"custom": {"reference_lines": {"prop1_limit": 0.03}}}
    assert figure_spec_for("custom", meta).normalization == "per-element-squared"
    assert figure_spec_for("plain", {}).normalization == "none"


def test_bad_arguments_rejected(sweep_dir, tmp_path):
    with pytest.raises(ValueError, match="normalization"):
        FigureSpec(name="x", normalization="sqrt")
    points = read_sweep(sweep_dir / "fig2.csv")
    with pytest.raises(ValueError, match="y scale"):
        render(DEFAULT_SPECS["fig2"], points, {}, tmp_path / "x.png", y_scale="log")
