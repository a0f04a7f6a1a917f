import numpy as np
import pytest

from conftest import random_model
from qaoa_transfer import problems
from qaoa_transfer.encoding import IsingModel, encode
from qaoa_transfer.exceptions import ResourceError
from qaoa_transfer.oracle import brute_force
from qaoa_transfer.params import QaoaParams
from qaoa_transfer.transfer import (CSV_COLUMNS, ParameterBank, grover_baseline, sweep,
                                    transfer_run)


@pytest.mark.parametrize("n,expected", [(12, 0.015625), (4, 0.25), (20, 9.765625e-4)])
def test_grover_baseline(n, expected):
    assert grover_baseline(n) == pytest.approx(expected)


def test_zero_angles_give_ground_state_fraction_of_uniform():
    inst = problems.GraphInstance(4, ((0, 1),), (1.0,), problems.ProblemKind.MIS, 0)
    m = encode(inst)
    g = brute_force(m)
    r = transfer_run(QaoaParams(np.zeros(3), np.zeros(3)), m, g)
    assert r.n_ground_states == 2
    assert r.prob_optimal == pytest.approx(2 / 16)


def test_plain_ground_set_accepted():
    m = random_model(5, 3)
    g = brute_force(m)
    a = transfer_run(QaoaParams([0.3], [0.2]), m, g)
    b = transfer_run(QaoaParams([0.3], [0.2]), m, set(g.ground_states))
    assert a.prob_optimal == b.prob_optimal
    assert a.ground_energy == pytest.approx(b.ground_energy, abs=1e-12)


def test_transfer_cap():
    with pytest.raises(ResourceError):
        transfer_run(QaoaParams([0.1], [0.1]), IsingModel(np.zeros((25, 25)), np.zeros(25)),
                     {"0" * 25})


def test_bpp3_angles_on_another_bpp3(bpp3):
    m = encode(problems.generate("bpp", 3, 0))
    r = transfer_run(bpp3["params"], m, brute_force(m))
    assert r.prob_optimal > 2 ** -6 and r.above_grover


def test_bpp3_angles_on_twelve_qubit_mis(bpp3):
    m = encode(problems.generate("mis", 12, 0))
    assert transfer_run(bpp3["params"], m, brute_force(m)).prob_optimal > 2 ** -6


def test_mis8_sweep_mean_above_grover(bpp3):
    targets = [problems.generate("mis", 8, s) for s in range(5)]
    report = sweep("bpp3", bpp3["params"], targets)
    (row,) = report.rows()
    assert row.n_instances == 5 and row.n_qubits == 8
    assert row.mean > 0.0625
    assert row.q1 <= row.median <= row.q3


def test_empty_sweep():
    report = sweep("x", QaoaParams([0.1], [0.1]), [])
    assert report.rows() == [] and report.results == []
    assert report.to_csv() == ",".join(CSV_COLUMNS) + "\n"


def test_sweep_is_repeatable_and_worker_independent():
    params = QaoaParams([0.2, 0.4], [0.5, 0.3])
    targets = [problems.generate(k, 6, s) for k in ("kp", "po", "maxcut") for s in range(3)]
    a = sweep("x", params, targets)
    b = sweep("x", params, targets)
    c = sweep("x", params, targets, workers=3)
    assert a.to_csv() == b.to_csv() == c.to_csv()
    assert a.to_dict() == c.to_dict()
    assert [r.kind for r in a.rows()] == ["kp", "po", "maxcut"]


def test_failed_instance_does_not_stop_sweep():
    targets = [problems.generate("mis", 4, 0), problems.generate("bpp", 6, 0),
               problems.generate("mis", 4, 1)]
    report = sweep("x", QaoaParams([0.1], [0.1]), targets)
    assert len(report.failures) == 1
    assert "ResourceError" in report.failures[0].error
    assert report.rows()[0].n_instances == 2


def test_bank_round_trip_and_lookup(tmp_path):
    bank = ParameterBank()
    bank.add("bpp3", QaoaParams([0.1, 0.2], [0.3, 0.4]), {"source": {"kind": "bpp"}})
    path = tmp_path / "bank.json"
    path.write_text(bank.to_json())
    back = ParameterBank.load(path)
    assert back["bpp3"].params == bank["bpp3"].params
    assert back["bpp3"].provenance == {"source": {"kind": "bpp"}}
    with pytest.raises(KeyError):
        back["kp4"]
    assert ParameterBank.load(tmp_path / "missing.json").entries == {}


def test_bank_refuses_silent_overwrite_when_asked():
    bank = ParameterBank()
    bank.add("a", QaoaParams([0.1], [0.1]))
    with pytest.raises(ValueError):
        bank.add("a", QaoaParams([0.2], [0.2]), replace=False)
