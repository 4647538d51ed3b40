from figure_renderer.cli import main

from conftest import HEADER


def test_renders_every_csv_in_directory(sweep_dir, tmp_path, capsys):
    out = tmp_path / "figs"
    assert main([str(sweep_dir), "--out", str(out)]) == 0
    assert (out / "fig2.png").exists()
    assert (out / "fig4.png").exists()
    stdout = capsys.readouterr().out
    assert "fig2.png (4 series, 0 reference lines)" in stdout
    assert "fig4.png (2 series, 1 reference lines)" in stdout


def test_svg_format(sweep_dir, tmp_path):
    out = tmp_path / "figs"
    assert main([str(sweep_dir), "--out", str(out), "--format", "svg"]) == 0
    assert (out / "fig2.svg").exists()
    assert (out / "fig4.svg").exists()


def test_linear_axis_flag(sweep_dir, tmp_path):
    assert main([str(sweep_dir), "--out", str(tmp_path / "f"), "--linear"]) == 0


def test_truncated_csv_fails_with_named_schema_error(sweep_dir, tmp_path, capsys):
    bad = HEADER.replace(",mean_snr_db", "") + "\nfig9,no-emi,16,1.0,0.1,5,0,0.0\n"
    (sweep_dir / "fig9.csv").write_text(bad)
    assert main([str(sweep_dir), "--out", str(tmp_path / "figs")]) == 2
    err = capsys.readouterr().err
    assert "schema error" in err
    assert "mean_snr_db" in err


def test_empty_csv_fails_nonzero(tmp_path, capsys):
    src = tmp_path / "src"
    src.mkdir()
    (src / "empty.csv").write_text("")
    assert main([str(src), "--out", str(tmp_path / "figs")]) == 2
    assert "empty" in capsys.readouterr().err


def test_directory_without_csvs_fails(tmp_path, capsys):
    src = tmp_path / "src"
    src.mkdir()
    assert main([str(src), "--out", str(tmp_path / "figs")]) == 2
    assert "no sweep CSVs" in capsys.readouterr().err


def test_missing_directory_fails(tmp_path, capsys):
    assert main([str(tmp_path / "nope"), "--out", str(tmp_path / "figs")]) == 2
    assert "not a directory" in capsys.readouterr().err
