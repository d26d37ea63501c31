import csv
from pathlib import Path

import matplotlib.pyplot as plt
import pytest

import plot_phase as pp

GOLDENS = Path(__file__).parent / "goldens"
SWEEP_GOLDEN = GOLDENS / "sweep_beta3_21x21.csv"
SMOKE_GOLDEN = GOLDENS / "sweep_smoke_4cell.csv"
THEORY_GOLDEN = GOLDENS / "theory_beta3.csv"


def test_renders_golden_sweep(tmp_path):
    out = tmp_path / "phase.png"
    pp.render_phase_diagram(SWEEP_GOLDEN, out, pp.parse_overlays("all"))
    assert out.exists() and out.stat().st_size > 0
    img = plt.imread(out)
    assert img.shape[0] > 100 and img.shape[1] > 100


def test_golden_grid_is_21_by_21():
    rows, meta = pp.read_sweep_csv(SWEEP_GOLDEN)
    lams, kappas, levels = pp.build_grid(rows)
    assert len(lams) == 21 and len(kappas) == 21
    assert levels.shape == (21, 21)
    assert float(meta["beta"]) == 3.0


def test_four_cell_smoke(tmp_path):
    out = tmp_path / "smoke.png"
    pp.render_phase_diagram(SMOKE_GOLDEN, out, ())
    assert out.exists() and out.stat().st_size > 0


def test_overlay_values_match_theory_subcommand_csv():
    """The local curve formulas must track the main package's output."""
    with open(THEORY_GOLDEN, encoding="utf-8") as fh:
        first = fh.readline()
        assert first.startswith("#")
        beta = float(first.rsplit("beta=", 1)[1])
        rows = list(csv.DictReader(fh))
    assert len(rows) == 100
    column_of = {
        "small_product": "lambda_small_product",
        "fast_updates": "lambda_fast_updates",
        "forest": "lambda_forest",
        "simple": "lambda_simple",
        "nonadaptive": "lambda_nonadaptive",
    }
    for row in rows:
        kappa = float(row["kappa"])
        for name, column in column_of.items():
            ours = pp.OVERLAY_CURVES[name](beta, kappa)
            theirs = float(row[column])
            assert abs(ours - theirs) <= 1e-9, (name, kappa)


def test_small_product_line_is_vertical_at_007():
    for kappa in (0.0, 1.0, 5.0):
        assert abs(pp.curve_small_product(3.0, kappa) - 0.07) < 1e-12


def test_header_only_errors_without_writing(tmp_path):
    bad = tmp_path / "empty.csv"
    bad.write_text("# parameter sweep over (lambda, kappa)\n# beta=3\n"
                   + ",".join(("model", "beta", "n", "epsilon", "lambda",
                               "kappa", "samples", "epidemics", "p_hat",
                               "stderr", "classification",
                               "mean_ever_infected", "budget_hits", "seed"))
                   + "\n")
    out = tmp_path / "never.png"
    with pytest.raises(ValueError, match="no data rows"):
        pp.render_phase_diagram(bad, out, ())
    assert not out.exists()


def test_missing_column_is_named(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("lambda,kappa\n0.5,1.0\n")
    with pytest.raises(ValueError, match="classification"):
        pp.render_phase_diagram(bad, tmp_path / "never.png", ())


def test_ragged_grid_rejected(tmp_path):
    bad = tmp_path / "ragged.csv"
    bad.write_text(
        "lambda,kappa,classification\n"
        "0.1,1.0,undetermined\n"
        "0.2,1.0,undetermined\n"
        "0.1,2.0,undetermined\n")
    with pytest.raises(ValueError, match="rectangular"):
        pp.render_phase_diagram(bad, tmp_path / "never.png", ())


def test_overlay_parsing():
    assert pp.parse_overlays("all") == tuple(pp.OVERLAY_CURVES)
    assert pp.parse_overlays("none") == ()
    assert pp.parse_overlays("forest, simple") == ("forest", "simple")
    with pytest.raises(ValueError, match="garbage"):
        pp.parse_overlays("garbage")


def test_overlays_without_beta_in_preamble(tmp_path):
    bare = tmp_path / "bare.csv"
    bare.write_text(
        "lambda,kappa,classification\n"
        "0.1,1.0,undetermined\n")
    with pytest.raises(ValueError, match="beta"):
        pp.render_phase_diagram(bare, tmp_path / "never.png", ("forest",))
    # without overlays the same file renders fine
    out = tmp_path / "ok.png"
    pp.render_phase_diagram(bare, out, ())
    assert out.exists() and out.stat().st_size > 0


def test_cli_end_to_end(tmp_path, capsys):
    out = tmp_path / "cli.png"
    rc = pp.main(["--csv", str(SMOKE_GOLDEN), "--out", str(out),
                  "--overlays", "small_product,forest"])
    assert rc == 0 and out.exists()

    rc = pp.main(["--csv", str(SMOKE_GOLDEN), "--out",
                  str(tmp_path / "x.png"), "--overlays", "nope"])
    assert rc == 1
    assert "nope" in capsys.readouterr().err
