import csv
import json

import pytest

from blbvs.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, load_schema, main, validate_report

FAST = ["--n", "1500", "--r", "4", "--subsets", "2", "--r-total", "8", "--lam", "0.001"]


def run(tmp_path, *extra, name="out"):
    out = tmp_path / name
    code = main(["run", "--out", str(out), *extra])
    return code, out


def test_simulated_run_writes_artifacts(tmp_path):
    code, out = run(tmp_path, "--simulate", "default", *FAST, "--method", "both")
    assert code == EXIT_OK
    report = json.loads((out / "report.json").read_text())
    assert set(report) == {"blbvs", "bootvs"}
    validate_report(report)
    rows = list(csv.DictReader(open(out / "proportions.csv")))
    assert len(rows) == 16 and set(rows[0]) == {"method", "group", "p_g", "selected"}
    traj = list(csv.DictReader(open(out / "trajectory.csv")))
    assert {r["metric"] for r in traj} == {"xi_mean"}


def test_same_seed_is_byte_identical(tmp_path):
    a = run(tmp_path, "--simulate", "default", *FAST, "--method", "both", name="a")[1]
    b = run(tmp_path, "--simulate", "default", *FAST, "--method", "both", name="b")[1]
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()


@pytest.mark.parametrize("argv", [
    ["--simulate", "default", "--gamma", "1.5"],
    ["--simulate", "default", "--cutoff", "2"],
    ["--simulate", "other"],
    ["--gamma", "abc"],
    [],
    ["--simulate", "default", "--input", "x.csv"],
])
def test_usage_errors(tmp_path, argv, capsys):
    code, _ = run(tmp_path, *argv)
    assert code == EXIT_USAGE
    assert "usage error" in capsys.readouterr().err


def test_data_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,y\n1,2\n3,0\n")
    code, _ = run(tmp_path, "--input", str(bad), "--lam", "0.1")
    assert code == EXIT_DATA
    assert "data error" in capsys.readouterr().err


def test_csv_input_with_categoricals(tmp_path):
    lines = ["color,size,y"]
    for k in range(120):
        color = ["red", "green", "blue"][k % 3]
        lines.append(f"{color},{(k * 37) % 11 / 3:.3f},{int(color == 'red')}")
    f = tmp_path / "in.csv"
    f.write_text("\n".join(lines) + "\n")
    code, out = run(tmp_path, "--input", str(f), "--gamma", "0.9", "--subsets", "1",
                    "--r", "5", "--lam", "0.01", "--reference", "color=red")
    assert code == EXIT_OK
    report = json.loads((out / "report.json").read_text())
    assert report["group_names"] == ["color", "size"]
    assert report["selected"][0]


def test_ground_truth_adds_rd_rows(tmp_path):
    code, out = run(tmp_path, "--simulate", "default", *FAST, "--method", "bootvs",
                    "--ground-truth", "3")
    assert code == EXIT_OK
    traj = list(csv.DictReader(open(out / "trajectory.csv")))
    assert {r["metric"] for r in traj} == {"xi_mean", "rd"}


def test_schema_loads():
    assert load_schema()["title"] == "blbvs report"
