"""Command-line surface: parsing, exit codes, files, reproducibility."""

import json
import math
import shutil
import subprocess
import sys

import pytest

from kvar import (
    Uniform01,
    estimate_kvar,
    gmm_sweep,
    harmonic,
    kvar_two_point,
    kvar_uniform,
)
from kvar.cli import main, parse_kgrid, load_config


def run_cli(*argv) -> int:
    return main([str(a) for a in argv])


def drop_elapsed(csv_text: str) -> list[str]:
    """Sweep CSV rows minus the trailing elapsed_seconds column."""
    return [",".join(line.split(",")[:-1]) for line in csv_text.strip().splitlines()]


# ---------------------------------------------------------------------------
# argument parsing helpers


def test_parse_kgrid_forms():
    assert parse_kgrid("2:16:x2") == (2, 4, 8, 16)
    assert parse_kgrid("2:17:x2") == (2, 4, 8, 16)
    assert parse_kgrid("1:9:x3") == (1, 3, 9)
    assert parse_kgrid("2:8:+3") == (2, 5, 8)
    assert parse_kgrid("5:5:+1") == (5,)
    assert parse_kgrid("7") == (7,)
    assert parse_kgrid("1, 2,3") == (1, 2, 3)


@pytest.mark.parametrize(
    "bad",
    ["", "0:8:x2", "8:2:x2", "2:8:x1", "2:8:+0", "2:8:y2", "2:8", "1:2:3:4", "a,b", "2:8:xq"],
)
def test_parse_kgrid_rejects_malformed_grids(bad):
    from kvar import ParameterError

    with pytest.raises(ParameterError):
        parse_kgrid(bad)


def test_load_config_parses_flat_keys(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("# comment\nk = 5\n\nn=12  # trailing comment\nfamily = uniform01\n")
    assert load_config(p) == {"k": "5", "n": "12", "family": "uniform01"}


def test_load_config_rejects_lines_without_equals(tmp_path):
    from kvar import ParameterError

    p = tmp_path / "bad.cfg"
    p.write_text("just-a-word\n")
    with pytest.raises(ParameterError, match="line 1"):
        load_config(p)


# ---------------------------------------------------------------------------
# closed-form subcommand


def test_closed_form_uniform(capsys):
    assert run_cli("closed-form", "uniform", "--k", 10) == 0
    assert float(capsys.readouterr().out) == pytest.approx(kvar_uniform(10), rel=1e-15)


def test_closed_form_exponential(capsys):
    assert run_cli("closed-form", "exponential", "--k", 3, "--rate", 2) == 0
    assert float(capsys.readouterr().out) == pytest.approx(harmonic(3) / 4.0, rel=1e-15)


def test_closed_form_weibull_divergent_prints_infinite(capsys):
    assert run_cli("closed-form", "weibull-inf", "--alpha", 2) == 0
    assert capsys.readouterr().out.strip() == "infinite"


def test_closed_form_weibull_finite(capsys):
    assert run_cli("closed-form", "weibull-inf", "--alpha", 3) == 0
    assert float(capsys.readouterr().out) == pytest.approx(0.4513726464754668, rel=1e-12)


def test_closed_form_tukey(capsys):
    assert run_cli("closed-form", "tukey-inf", "--lambda", 0) == 0
    assert float(capsys.readouterr().out) == pytest.approx(1.0, rel=1e-15)


def test_closed_form_tukey_divergent_is_usage_error(capsys):
    assert run_cli("closed-form", "tukey-inf", "--lambda", -1.5) == 2
    assert "error:" in capsys.readouterr().err


def test_closed_form_tukey_limsup_warns_but_succeeds(capsys):
    with pytest.warns(RuntimeWarning):
        assert run_cli("closed-form", "tukey-inf", "--lambda", 0.5) == 0
    assert float(capsys.readouterr().out) > 0


def test_closed_form_two_point(capsys):
    assert run_cli("closed-form", "two-point", "--k", 4, "--d", 8) == 0
    assert float(capsys.readouterr().out) == pytest.approx(kvar_two_point(4, 8), rel=1e-15)


def test_closed_form_unit_square(capsys):
    assert run_cli("closed-form", "unit-square-inf") == 0
    assert float(capsys.readouterr().out) == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-15)


# ---------------------------------------------------------------------------
# estimate subcommand


def test_estimate_stdout_matches_library(capsys):
    assert run_cli("estimate", "--family", "uniform01", "--k", 5, "--n", 40, "--seed", 3) == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert out[0] == "k,d,n,estimate,stderr,mcdiarmid_radius"
    k, d, n, est, se, radius = out[1].split(",")
    ref = estimate_kvar(Uniform01(), 5, 40, 3)
    assert (int(k), int(d), int(n)) == (5, 1, 40)
    assert float(est) == ref.estimate
    assert float(se) == ref.stderr
    assert radius == ""


def test_estimate_is_reproducible(capsys):
    run_cli("estimate", "--family", "gaussian", "--k", 4, "--n", 30, "--seed", 11)
    first = capsys.readouterr().out
    run_cli("estimate", "--family", "gaussian", "--k", 4, "--n", 30, "--seed", 11)
    assert capsys.readouterr().out == first


def test_estimate_radius_column(capsys):
    assert (
        run_cli("estimate", "--family", "uniform01", "--k", 4, "--n", 6, "--seed", 1, "--radius", 1)
        == 0
    )
    line = capsys.readouterr().out.strip().splitlines()[1]
    radius = float(line.split(",")[-1])
    ref = estimate_kvar(Uniform01(), 4, 6, 1, support_radius=1.0)
    assert radius == ref.mcdiarmid


def test_estimate_writes_csv_and_manifest(tmp_path, capsys):
    out = tmp_path / "est.csv"
    assert (
        run_cli("estimate", "--family", "uniform01", "--k", 3, "--n", 8, "--seed", 2, "--out", out)
        == 0
    )
    manifest = json.loads((tmp_path / "est.csv.manifest.json").read_text())
    assert manifest["command"] == "estimate"
    assert manifest["master_seed"] == 2
    assert manifest["outputs"] == ["est.csv"]
    assert "--family" in manifest["argv"]

    replay_dir = tmp_path / "replayed"
    assert run_cli("replay", tmp_path / "est.csv.manifest.json", "--out", replay_dir / "est.csv") == 0
    capsys.readouterr()
    assert (replay_dir / "est.csv").read_text() == out.read_text()


def test_estimate_manifest_carries_family_parameters(tmp_path, capsys):
    out = tmp_path / "est.csv"
    assert (
        run_cli(
            "estimate", "--family", "two-point", "--dim", 4,
            "--k", 16, "--n", 40, "--seed", 3, "--out", out,
        )
        == 0
    )
    argv = json.loads((tmp_path / "est.csv.manifest.json").read_text())["argv"]
    assert argv[argv.index("--dim") + 1] == "4"

    replay_dir = tmp_path / "replayed"
    assert run_cli("replay", tmp_path / "est.csv.manifest.json", "--out", replay_dir / "est.csv") == 0
    capsys.readouterr()
    replayed = (replay_dir / "est.csv").read_text()
    assert replayed == out.read_text()
    assert replayed.splitlines()[1].split(",")[1] == "4"  # d survives the round trip


def test_estimate_requires_exactly_one_source(capsys):
    assert run_cli("estimate", "--k", 3, "--n", 5) == 2
    assert run_cli(
        "estimate", "--family", "uniform01", "--dataset", "x.csv", "--k", 3, "--n", 5
    ) == 2
    capsys.readouterr()


def test_estimate_parameter_errors_exit_2(capsys):
    assert run_cli("estimate", "--family", "uniform01", "--k", 0, "--n", 5) == 2
    assert run_cli("estimate", "--family", "weibull", "--k", 3, "--n", 5) == 2
    assert run_cli("estimate", "--family", "nosuch", "--k", 3, "--n", 5) == 2
    capsys.readouterr()


def test_estimate_dataset_roundtrip(tmp_path, capsys):
    data = tmp_path / "rows.csv"
    data.write_text("0.1,0.2\n0.3,0.4\n0.5,0.6\n")
    assert run_cli("estimate", "--dataset", data, "--k", 2, "--n", 12, "--seed", 4) == 0
    line = capsys.readouterr().out.strip().splitlines()[1]
    assert line.split(",")[1] == "2"  # dimension from the table width


def test_estimate_dataset_io_errors_exit_3(tmp_path, capsys):
    assert run_cli("estimate", "--dataset", tmp_path / "nope.csv", "--k", 2, "--n", 3) == 3
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("1,2\n3\n")
    assert run_cli("estimate", "--dataset", ragged, "--k", 2, "--n", 3) == 3
    assert "row 2" in capsys.readouterr().err


def test_estimate_honours_config_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "est.cfg"
    cfg.write_text("family = uniform01\nk = 5\nn = 30\nseed = 9\n")
    run_cli("estimate", "--config", cfg)
    base = capsys.readouterr().out
    assert base.strip().splitlines()[1].split(",")[2] == "30"
    run_cli("estimate", "--config", cfg, "--n", 7)
    overridden = capsys.readouterr().out
    assert overridden.strip().splitlines()[1].split(",")[2] == "7"


def test_unknown_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as err:
        main(["frobnicate"])
    assert err.value.code == 2


# ---------------------------------------------------------------------------
# sweep subcommand


def test_sweep_family_matches_library_run(tmp_path, capsys):
    out = tmp_path / "fam"
    assert (
        run_cli(
            "sweep", "family", "--family", "uniform01", "--kgrid", "2,4,8",
            "--n", 25, "--seed", 5, "--out", out, "--no-plot",
        )
        == 0
    )
    capsys.readouterr()
    rows = (out / "uniform01.csv").read_text().strip().splitlines()
    assert rows[0] == "label,k,estimate,stderr,n,elapsed_seconds"
    from kvar import SweepConfig, run_sweep

    ref = run_sweep(
        SweepConfig(
            spec=Uniform01(), k_grid=(2, 4, 8), n_per_k=25,
            master_seed=5, label="uniform01",
        )
    )
    for row, rec in zip(rows[1:], ref):
        label, k, est, se, n, _ = row.split(",")
        assert (label, int(k), int(n)) == ("uniform01", rec.k, 25)
        assert float(est) == rec.estimate
        assert float(se) == rec.stderr
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "sweep family"
    assert "uniform01.csv" in manifest["outputs"]
    assert "sweep.png" not in manifest["outputs"]


def test_sweep_gmm_matches_library_curves(tmp_path, capsys):
    out = tmp_path / "gmm"
    assert (
        run_cli(
            "sweep", "gmm", "--d", 3, "--x", "0,0.9", "--kgrid", "2,4",
            "--n", 15, "--seed", 21, "--out", out, "--no-plot",
        )
        == 0
    )
    capsys.readouterr()
    ref = gmm_sweep([0.0, 0.9], dim=3, k_grid=(2, 4), n_per_k=15, master_seed=21)
    for label, fname in (("x=0", "x_0.csv"), ("x=0.9", "x_0.9.csv")):
        rows = (out / fname).read_text().strip().splitlines()[1:]
        for row, rec in zip(rows, ref[label]):
            assert float(row.split(",")[2]) == rec.estimate


def test_sweep_fit_prints_slopes(tmp_path, capsys):
    out = tmp_path / "fit"
    code = run_cli(
        "sweep", "family", "--family", "uniform01", "--kgrid", "2:16:x2",
        "--n", 20, "--seed", 2, "--out", out, "--no-plot", "--fit", "--cutoff", 1,
    )
    assert code == 0
    printed = capsys.readouterr().out
    assert "uniform01: slope=" in printed
    assert "r2=" in printed


def test_sweep_fit_failure_leaves_tables_behind(tmp_path, capsys):
    out = tmp_path / "short"
    code = run_cli(
        "sweep", "gmm", "--d", 2, "--x", "0", "--kgrid", "2,4",
        "--n", 5, "--seed", 1, "--out", out, "--no-plot", "--fit",
    )
    assert code == 2
    assert "error:" in capsys.readouterr().err
    assert (out / "x_0.csv").exists()  # tables written before the fit ran


def test_sweep_renders_figure_by_default(tmp_path, capsys):
    out = tmp_path / "figs"
    assert (
        run_cli(
            "sweep", "family", "--family", "uniform01", "--kgrid", "2,4",
            "--n", 5, "--seed", 3, "--out", out,
        )
        == 0
    )
    capsys.readouterr()
    png = out / "sweep.png"
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    manifest = json.loads((out / "manifest.json").read_text())
    assert "sweep.png" in manifest["outputs"]


def test_sweep_threads_do_not_change_tables(tmp_path, capsys):
    outs = []
    for threads in (1, 2):
        out = tmp_path / f"t{threads}"
        assert (
            run_cli(
                "sweep", "family", "--family", "exponential", "--kgrid", "2,4",
                "--n", 16, "--seed", 8, "--out", out, "--no-plot", "--threads", threads,
            )
            == 0
        )
        outs.append(drop_elapsed((out / "exponential.csv").read_text()))
    capsys.readouterr()
    assert outs[0] == outs[1]


def test_kvar_threads_env_is_the_fallback(tmp_path, capsys, monkeypatch):
    out_env = tmp_path / "env"
    monkeypatch.setenv("KVAR_THREADS", "2")
    run_cli(
        "sweep", "family", "--family", "uniform01", "--kgrid", "2,4",
        "--n", 12, "--seed", 6, "--out", out_env, "--no-plot",
    )
    monkeypatch.delenv("KVAR_THREADS")
    out_plain = tmp_path / "plain"
    run_cli(
        "sweep", "family", "--family", "uniform01", "--kgrid", "2,4",
        "--n", 12, "--seed", 6, "--out", out_plain, "--no-plot",
    )
    capsys.readouterr()
    assert drop_elapsed((out_env / "uniform01.csv").read_text()) == drop_elapsed(
        (out_plain / "uniform01.csv").read_text()
    )


def test_sweep_config_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text("kgrid = 2,4\nn = 30\nseed = 9\nd = 2\nx = 0\n")
    out_a = tmp_path / "a"
    run_cli("sweep", "gmm", "--config", cfg, "--out", out_a, "--no-plot")
    out_b = tmp_path / "b"
    run_cli("sweep", "gmm", "--config", cfg, "--n", 10, "--out", out_b, "--no-plot")
    capsys.readouterr()
    assert (out_a / "x_0.csv").read_text().splitlines()[1].split(",")[4] == "30"
    assert (out_b / "x_0.csv").read_text().splitlines()[1].split(",")[4] == "10"


def test_sweep_dataset_mode(tmp_path, capsys):
    data = tmp_path / "pts.csv"
    data.write_text("\n".join(f"{v},{v * 2}" for v in range(30)) + "\n")
    out = tmp_path / "ds"
    assert (
        run_cli(
            "sweep", "dataset", "--path", data, "--kgrid", "2,4", "--n", 8,
            "--seed", 3, "--out", out, "--no-plot",
        )
        == 0
    )
    capsys.readouterr()
    assert (out / "dataset.csv").exists()


def test_replay_reproduces_a_sweep(tmp_path, capsys):
    out = tmp_path / "orig"
    run_cli(
        "sweep", "lowdim", "--d", 6, "--dprime", "2", "--kgrid", "2,4",
        "--n", 10, "--seed", 13, "--out", out, "--no-plot",
    )
    replayed = tmp_path / "again"
    assert run_cli("replay", out / "manifest.json", "--out", replayed) == 0
    capsys.readouterr()
    assert drop_elapsed((replayed / "dprime_2.csv").read_text()) == drop_elapsed(
        (out / "dprime_2.csv").read_text()
    )


def test_replay_requires_an_output_directory(tmp_path, capsys):
    out = tmp_path / "orig"
    run_cli(
        "sweep", "family", "--family", "uniform01", "--kgrid", "2",
        "--n", 3, "--seed", 1, "--out", out, "--no-plot",
    )
    assert run_cli("replay", out / "manifest.json") == 2
    capsys.readouterr()


def test_replay_with_broken_manifest_is_io_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    assert run_cli("replay", bad, "--out", tmp_path / "x") == 3
    assert run_cli("replay", tmp_path / "missing.json", "--out", tmp_path / "y") == 3
    capsys.readouterr()


# ---------------------------------------------------------------------------
# console script


def test_console_script_is_installed():
    exe = shutil.which("kvar")
    assert exe, "the kvar entry point should be on PATH after installation"
    res = subprocess.run([exe, "--version"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.startswith("kvar ")


def test_console_script_reports_usage_errors():
    res = subprocess.run(
        [sys.executable, "-m", "kvar.cli", "closed-form", "uniform", "--k", "0"],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 2
    assert "error:" in res.stderr
