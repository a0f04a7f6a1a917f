import json
import subprocess
import sys

import numpy as np
import pytest

from qaoa_transfer import cli
from qaoa_transfer.annealing import read_schedule
from qaoa_transfer.optimizer import linear_ramp
from qaoa_transfer.records import ExperimentRecord, atomic_write_text, timestamp
from qaoa_transfer.simulator import QaoaSimulator, SampleSet
from qaoa_transfer.transfer import ParameterBank


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv(cli.OUTDIR_ENV, raising=False)
    return tmp_path


def run(*args):
    return cli.main([str(a) for a in args])


def test_generate_bpp3_file(workdir):
    assert run("generate", "--kind", "bpp", "--size", 3, "--seed", 7, "--out", "a.json") == 0
    d = json.loads((workdir / "a.json").read_text())
    assert d["kind"] == "bpp" and d["size"] == 3 and len(d["weights"]) == 3
    assert run("generate", "--kind", "bpp", "--size", 3, "--seed", 7, "--out", "b.json") == 0
    assert (workdir / "a.json").read_bytes() == (workdir / "b.json").read_bytes()


def test_invalid_kind_is_usage_error(workdir):
    proc = subprocess.run([sys.executable, "-m", "qaoa_transfer", "generate", "--kind", "sat",
                           "--size", "3", "--seed", "0"], capture_output=True, text=True)
    assert proc.returncode == 2
    assert "invalid choice" in proc.stderr


def test_out_of_range_size_is_usage_error(workdir):
    assert run("generate", "--kind", "tsp", "--size", 9, "--seed", 0) == 2


def test_output_directory_from_environment(workdir, monkeypatch):
    monkeypatch.setenv(cli.OUTDIR_ENV, str(workdir / "out"))
    assert run("generate", "--kind", "kp", "--size", 5, "--seed", 1) == 0
    assert (workdir / "out" / "kp5_seed1.json").exists()


def test_zero_budget_keeps_ramp(workdir):
    run("generate", "--kind", "bpp", "--size", 3, "--seed", 7, "--out", "bpp3.json")
    assert run("optimize", "bpp3.json", "--budget-multiplier", 0) == 0
    entry = ParameterBank.load(workdir / "bank.json")["bpp3"]
    assert entry.params == linear_ramp(10, 0.7)
    assert entry.provenance["source"] == {"kind": "bpp", "size": 3, "seed": 7}


def test_optimize_rerun_identical(workdir):
    run("generate", "--kind", "bpp", "--size", 3, "--seed", 7, "--out", "bpp3.json")
    args = ["optimize", "bpp3.json", "--budget-multiplier", 1, "--seed", 3]
    assert run(*args, "--bank", "b1.json", "--trace", "t1.csv") == 0
    assert run(*args, "--bank", "b2.json", "--trace", "t2.csv") == 0
    assert (workdir / "b1.json").read_bytes() == (workdir / "b2.json").read_bytes()
    assert (workdir / "t1.csv").read_bytes() == (workdir / "t2.csv").read_bytes()
    assert len((workdir / "t1.csv").read_text().splitlines()) == 1 + 120


def test_qubit_cap_is_resource_exit(workdir):
    run("generate", "--kind", "bpp", "--size", 6, "--seed", 0, "--out", "big.json")
    assert run("optimize", "big.json") == 3


def test_numeric_failure_exit(workdir, monkeypatch):
    run("generate", "--kind", "kp", "--size", 4, "--seed", 0, "--out", "kp.json")
    monkeypatch.setattr(QaoaSimulator, "expectation", lambda self, s: float("inf"))
    assert run("optimize", "kp.json", "--p", 2) == 4


def test_penalty_override_recorded(workdir):
    run("generate", "--kind", "kp", "--size", 4, "--seed", 0, "--out", "kp.json")
    assert run("optimize", "kp.json", "--p", 1, "--budget-multiplier", 0, "--lambda2", 0.5) == 0
    prov = ParameterBank.load(workdir / "bank.json")["kp4"].provenance
    assert prov["penalties"] == {"lambda0": None, "lambda1": 0.96, "lambda2": 0.5}


def _bank_with_ramp(workdir):
    run("generate", "--kind", "bpp", "--size", 3, "--seed", 7, "--out", "bpp3.json")
    run("optimize", "bpp3.json", "--budget-multiplier", 0)


def test_transfer_report_files(workdir):
    _bank_with_ramp(workdir)
    assert run("transfer", "--label", "bpp3", "--kind", "mis", "--sizes", 4, 6,
               "--seeds", 3, "--out", "tr") == 0
    lines = (workdir / "tr" / "transfer.csv").read_text().splitlines()
    assert lines[0] == "kind,size,n_qubits,n_instances,mean,median,q1,q3,grover"
    assert [ln.split(",")[:4] for ln in lines[1:]] == [["mis", "4", "4", "3"],
                                                      ["mis", "6", "6", "3"]]
    rec = ExperimentRecord.from_json((workdir / "tr" / "transfer.json").read_text())
    assert len(rec.results["instances"]) == 6


def test_transfer_with_no_sizes(workdir):
    _bank_with_ramp(workdir)
    assert run("transfer", "--label", "bpp3", "--kind", "kp", "--sizes", "--out", "tr") == 0
    assert (workdir / "tr" / "transfer.csv").read_text().count("\n") == 1


def test_transfer_unknown_label(workdir):
    _bank_with_ramp(workdir)
    assert run("transfer", "--label", "nope", "--kind", "kp", "--sizes", 4) == 2


def test_sample_with_mitigation(workdir):
    _bank_with_ramp(workdir)
    run("generate", "--kind", "mis", "--size", 8, "--seed", 0, "--out", "mis8.json")
    args = ["sample", "mis8.json", "--label", "bpp3", "--shots", 1000, "--seed", 4, "--mitigate"]
    assert run(*args, "--out", "s1") == 0
    assert run(*args, "--out", "s2") == 0
    a = SampleSet.from_json((workdir / "s1" / "samples.json").read_text())
    b = SampleSet.from_json((workdir / "s2" / "samples.json").read_text())
    assert a == b and a.n_shots == 1000
    rep = json.loads((workdir / "s1" / "sample_report.json").read_text())["mitigation"]
    assert rep["mitigated_optimal_fraction"] >= rep["raw_optimal_fraction"]


def test_zero_shots_is_usage_error(workdir):
    _bank_with_ramp(workdir)
    run("generate", "--kind", "mis", "--size", 4, "--seed", 0, "--out", "mis.json")
    assert run("sample", "mis.json", "--label", "bpp3", "--shots", 0) == 2


def test_default_schedule(workdir):
    assert run("schedule", "--t-f", 40, "--out", "d.csv") == 0
    assert read_schedule(workdir / "d.csv").points == ((0.0, 0.0), (40.0, 1.0))


def test_schedule_from_bank_with_table(workdir):
    _bank_with_ramp(workdir)
    s = np.linspace(0, 1, 11)
    (workdir / "table.csv").write_text(
        "s,A_GHz,B_GHz\n" + "".join(f"{a!r},{1 - a!r},{a!r}\n" for a in s.tolist()))
    assert run("schedule", "--bank", "bank.json", "--label", "bpp3", "--table", "table.csv",
               "--mode", "mixer", "--out", "s.csv") == 0
    sch = read_schedule(workdir / "s.csv")
    assert 2 <= len(sch.points) <= 12 and sch.source == "bpp3"
    b = linear_ramp(10, 0.7).betas
    expected = 1 - b / b.max()
    for t, sv in sch.points[1:-1]:
        k = round(t / 100.0 * 11) - 1
        assert sv == pytest.approx(expected[k], abs=1e-12)


def test_schedule_label_without_bank(workdir):
    assert run("schedule", "--label", "bpp3") == 2


SMALL_RUN = {
    "source": {"kind": "bpp", "size": 3, "seed": 7},
    "p": 3, "budget_multiplier": 1,
    "targets": [{"kind": "kp", "sizes": [4, 5], "n_seeds": 2}],
    "sample": {"kind": "mis", "size": 5, "seed": 0, "shots": 200, "shot_seed": 1,
               "mitigate": True},
    "schedule": {"mode": "cost", "t_f": 20.0, "table": None},
}


def test_run_and_replay_from_record(workdir, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    (workdir / "cfg.json").write_text(json.dumps(SMALL_RUN))
    assert run("run", "--config", "cfg.json", "--out", "r1") == 0
    assert run("run", "--config", "r1/record.json", "--out", "r2") == 0
    names = sorted(p.name for p in (workdir / "r1").iterdir())
    assert names == ["bank.json", "mitigated.json", "record.json", "samples.json",
                     "schedule.csv", "source_instance.json", "trace.csv", "transfer.csv"]
    for name in names:
        assert (workdir / "r1" / name).read_bytes() == (workdir / "r2" / name).read_bytes()
    rec = json.loads((workdir / "r1" / "record.json").read_text())
    assert rec["timestamps"]["started"] == "2023-11-14T22:13:20+00:00"


def test_atomic_write_leaves_no_temp_files(tmp_path):
    atomic_write_text(tmp_path / "sub" / "x.txt", "hello")
    atomic_write_text(tmp_path / "sub" / "x.txt", "again")
    assert [p.name for p in (tmp_path / "sub").iterdir()] == ["x.txt"]
    assert (tmp_path / "sub" / "x.txt").read_text() == "again"


def test_timestamp_pinned_by_environment(monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
    assert timestamp() == "1970-01-01T00:00:00+00:00"
