import json

import pytest

from cylinder_lab.cli import cli_dispatch


def run(capsys, *argv):
    code = cli_dispatch(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_no_command_prints_help(capsys):
    code, _, err = run(capsys)
    assert code == 1
    assert "usage" in err.lower()


def test_unknown_command_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        cli_dispatch(["frobnicate"])
    assert exc.value.code == 1


def test_bad_alpha_descriptor(tmp_path, capsys):
    code, _, err = run(
        capsys, "convergents", "--alpha", "nonsense:1", "--n", "3",
        "--out", str(tmp_path),
    )
    assert code == 1 and "descriptor" in err


def test_convergents_periodic(tmp_path, capsys):
    code, out, _ = run(
        capsys, "convergents", "--alpha", "periodic:2,2", "--n", "4",
        "--out", str(tmp_path),
    )
    assert code == 0
    text = (tmp_path / "convergents.csv").read_text()
    assert text == "n,p,q\n1,1,2\n2,2,5\n3,5,12\n4,12,29\n"


def test_convergents_json_format(tmp_path, capsys):
    code, _, _ = run(
        capsys, "convergents", "--alpha", "rational:5/12", "--n", "3",
        "--out", str(tmp_path), "--format", "json",
    )
    assert code == 0
    rows = json.loads((tmp_path / "convergents.json").read_text())
    assert rows[-1]["p"] == "5" and rows[-1]["q"] == "12"


def test_orbit_and_occupancy(tmp_path, capsys):
    code, out, _ = run(
        capsys, "orbit", "--alpha", "periodic:1", "--x", "0", "--steps", "50",
        "--out", str(tmp_path),
    )
    assert code == 0 and (tmp_path / "orbit.csv").exists()
    code, out, _ = run(
        capsys, "occupancy", "--alpha", "periodic:1", "--x", "0",
        "--horizon", "4", "--out", str(tmp_path),
    )
    assert code == 0
    assert (tmp_path / "occupancy.csv").read_text() == "level,count\n0,2\n1,2\n"


def test_balanced_outputs(tmp_path, capsys):
    code, out, _ = run(
        capsys, "balanced", "--alpha", "periodic:1", "--x", "0",
        "--horizon", "4", "--out", str(tmp_path),
    )
    assert code == 0
    assert (tmp_path / "balanced.csv").read_text() == "n\n2\n4\n"
    assert (tmp_path / "sums.csv").read_text().startswith("N,lower,upper,delta\n4,")
    assert "2 balanced times" in out


def test_peaks_and_schedule_round_trip(tmp_path, capsys):
    code, out, _ = run(
        capsys, "schedule", "--depth", "4", "--out", str(tmp_path),
    )
    assert code == 0
    sched = json.loads((tmp_path / "schedule.json").read_text())
    assert [int(a) for a in sched["a"][:4]] == [5, 9, 20, 48]
    code, out, _ = run(
        capsys, "peaks", "--schedule", str(tmp_path / "schedule.json"),
        "--depth", "2", "--out", str(tmp_path),
    )
    assert code == 0
    lines = (tmp_path / "peaks.csv").read_text().strip().split("\n")
    assert lines[0] == "level,count" and len(lines) == 16  # support 5+9+1


def test_bound_command(tmp_path, capsys):
    code, out, _ = run(
        capsys, "bound", "--depth", "4", "--out", str(tmp_path),
    )
    assert code == 0 and "sup-sum bound" in out
    lines = (tmp_path / "bound_blocks.csv").read_text().strip().split("\n")
    assert lines[0] == "k,lower,upper" and len(lines) == 6


def test_prop1_command(tmp_path, capsys):
    code, out, _ = run(
        capsys, "prop1", "--horizon", "1000", "--out", str(tmp_path),
    )
    assert code == 0
    assert "< epsilon 1/4: True" in out
    assert (tmp_path / "sparse_set.json").exists()


def test_experiment_diverge_small(tmp_path, capsys):
    code, out, _ = run(
        capsys, "experiment", "diverge", "--trials", "3", "--n1", "1000",
        "--n2", "3000", "--out", str(tmp_path),
    )
    assert code == 0
    summary = json.loads((tmp_path / "diverge_summary.json").read_text())
    assert summary["trials"] == 3
    assert (tmp_path / "diverge_trials.csv").exists()


def test_experiment_converge_small(tmp_path, capsys):
    code, out, _ = run(
        capsys, "experiment", "converge", "--grid", "8", "--depth", "2",
        "--out", str(tmp_path),
    )
    assert code == 0  # sup within bound for the canonical schedule
    summary = json.loads((tmp_path / "converge_summary.json").read_text())
    assert summary["sup_within_bound"] is True


def test_verify_exit_codes(tmp_path, capsys):
    code, out, _ = run(
        capsys, "verify", "--suite", "max-level", "--trials", "3",
        "--out", str(tmp_path), "--budget-steps", "2000",
    )
    assert code == 0
    assert "max-level" in out and "pass" in out.lower()
    code, _, err = run(capsys, "verify", "--suite", "no-such-suite")
    assert code == 1
