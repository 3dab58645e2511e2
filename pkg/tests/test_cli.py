import csv
import io
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from qlink import __version__
from qlink.cli import main
from qlink.config import PARAMETERS, build_config, load_config, parse_assignments
from qlink.sweep import (OUTPUTS, ResultRecord, columns, emit, format_value, metadata,
                         render, run_point, run_sweep, sidecar_path)

RECIPES = sorted((Path(__file__).resolve().parent.parent / "recipes").glob("*.cfg"))


def modes_config(lengths="1, 5, 30 m"):
    return build_config(parse_assignments([f"length = {lengths}"]), experiment="modes")


@pytest.fixture(scope="module")
def modes_records():
    return run_sweep(modes_config())


# --------------------------------------------------------------- sweep

def test_records_follow_axis_order(modes_records):
    assert [r.values["length_m"] for r in modes_records] == [1.0, 5.0, 30.0]
    assert modes_records[2].values["central_mode"] == 1051
    assert all(not r.failed for r in modes_records)


@pytest.mark.parametrize("experiment", sorted(OUTPUTS))
def test_column_set_is_fixed(experiment):
    cols = columns(experiment)
    assert len(cols) == len(set(cols))
    assert cols[:len(PARAMETERS)] == tuple(p.column(n) for n, p in PARAMETERS.items())
    assert cols[-3:] == ("error", "version", "config_hash")


def test_no_missing_cells(modes_records):
    for r in modes_records:
        assert tuple(r.values) == columns("modes")
        assert r.values["regime"] == "none" and r.values["steps"] == 0
        assert r.values["version"] == __version__ and r.values["error"] == ""


def test_failed_point_is_recorded():
    cfg = build_config(parse_assignments(["length = 1 m", "kappa = 20 MHz"]),
                       experiment="gate-transfer")
    (rec,) = run_sweep(cfg)
    assert rec.failed and "needs t1" in rec.values["error"]
    assert math.isnan(rec.values["optimal_fidelity"])
    assert rec.values["length_m"] == 1.0


def test_run_point_reports_errors():
    out, err, wall = run_point("transfer", {**{k: p.default for k, p in PARAMETERS.items()},
                                            "length": 1.0, "kappa": 1e8, "eta": 0.5})
    assert out == {} and err.startswith("DomainError") and wall >= 0


def test_parallel_sweep_matches_serial():
    cfg = build_config(parse_assignments(["length = 5, 30 m", "kappa = 1, 5 MHz"]),
                       experiment="lamb")
    assert render(run_sweep(cfg, workers=1)) == render(run_sweep(cfg, workers=3))


# --------------------------------------------------------------- emission

def test_format_value():
    assert format_value(1 / 3) == "0.333333333333"
    assert format_value(1.5e-12) == "1.5e-12"
    assert format_value(math.nan) == "nan" and format_value(None) == "nan"
    assert format_value(True) == "true" and format_value(7) == "7"


def test_csv_roundtrip(modes_records):
    text = render(modes_records, "csv")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == 3 and list(rows[0]) == list(columns("modes"))
    for row, rec in zip(rows, modes_records):
        for key, value in rec.values.items():
            if isinstance(value, float) and not isinstance(value, bool):
                assert float(row[key]) == pytest.approx(value, rel=1e-11)
    numeric = [c for c in columns("modes") if c not in ("regime", "error", "version",
                                                        "config_hash", "method")]
    assert all("," not in row[c] for row in rows for c in numeric)


def test_jsonl_mirrors_columns(modes_records):
    lines = render(modes_records, "jsonl").splitlines()
    first = json.loads(lines[0])
    assert list(first) == list(columns("modes"))
    assert first["kappa_mhz"] is None and first["resonant"] is True


def test_render_errors(modes_records):
    with pytest.raises(ValueError):
        render([], "csv")
    with pytest.raises(ValueError):
        render(modes_records, "xml")


def test_emit_writes_dataset_and_sidecar(tmp_path, modes_records):
    cfg = modes_config()
    out = tmp_path / "modes.csv"
    emit(modes_records, "csv", str(out), cfg)
    assert out.read_text() == render(modes_records)
    meta = json.loads(Path(sidecar_path(str(out))).read_text())
    assert meta["config_hash"] == cfg.digest() == modes_records[0].values["config_hash"]
    assert meta["points"] == 3 and meta["failed"] == 0
    assert len(meta["wall_time_s"]) == 3
    assert meta["config"]["axes"] == [["length", [1.0, 5.0, 30.0]]]
    buf = io.StringIO()
    emit(modes_records, "jsonl", None, cfg, stream=buf)
    assert buf.getvalue() == render(modes_records, "jsonl")


def test_metadata_counts_failures():
    rec = ResultRecord({"error": "boom"}, 0.5)
    assert metadata(modes_config(), [rec], "csv")["failed"] == 1


# --------------------------------------------------------------- command line

def test_experiment_command_to_stdout(capsys):
    assert main(["modes", "length=30m"]) == 0
    out = capsys.readouterr().out
    header, row = out.strip().splitlines()
    assert header.split(",")[0] == "length_m" and "1051" in row.split(",")


def test_flags_before_and_after_subcommand(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert main(["--format", "jsonl", "--out", str(a), "modes", "length=5m"]) == 0
    assert main(["modes", "length=5m", "--format", "jsonl", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["length_m"] == 5.0


def test_physics_flags(capsys):
    assert main(["lamb", "length=30m", "kappa=1MHz", "--off-resonant",
                 "--no-lamb-compensation", "--tolerance", "1e-8"]) == 0
    row = next(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert row["resonant"] == "false" and row["lamb_compensation"] == "false"
    assert float(row["tolerance"]) == 1e-8


def test_sweep_file_with_overrides(tmp_path):
    conf = tmp_path / "s.cfg"
    conf.write_text("experiment = lamb\nlength = 30 m\nkappa = 1 MHz\n"
                    "resonant = true, false\nout = ignored.csv\n")
    out = tmp_path / "o.csv"
    assert main(["sweep", str(conf), "--off-resonant", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 1 and rows[0]["resonant"] == "false"


def test_config_error_exit_code(capsys):
    assert main(["transfer", "length=30m"]) == 1
    assert "missing required key 'kappa'" in capsys.readouterr().err
    assert main(["modes", "lenght=30m"]) == 1
    assert main(["modes", "length=30m", "--workers", "0"]) == 1


def test_all_failed_exit_code(capsys):
    assert main(["gate-transfer", "length=1m", "kappa=20MHz"]) == 2
    captured = capsys.readouterr()
    assert "needs t1" in captured.err and "needs t1" in captured.out


def test_io_error_exit_codes(tmp_path, capsys):
    assert main(["sweep", str(tmp_path / "missing.cfg")]) == 3
    assert main(["modes", "length=1m", "--out", str(tmp_path / "no" / "dir.csv")]) == 3
    assert "cannot" in capsys.readouterr().err


def test_usage_errors_exit_through_argparse():
    with pytest.raises(SystemExit) as info:
        main(["--format", "xml", "modes"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qlink.cli", "modes", "length=1m"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.startswith("length_m,")


# --------------------------------------------------------------- recipes

def test_recipes_are_shipped():
    assert len(RECIPES) >= 6


@pytest.mark.parametrize("path", RECIPES, ids=lambda p: p.stem)
def test_recipe_loads(path):
    cfg = load_config(path)
    assert cfg.out == path.stem + ".csv"
    assert len(cfg.points()) >= 1
