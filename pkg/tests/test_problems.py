import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qaoa_transfer import problems
from qaoa_transfer.bits import index_to_bitstring
from qaoa_transfer.encoding import encode
from qaoa_transfer.exceptions import DimensionError, SizeError
from qaoa_transfer.oracle import brute_force
from qaoa_transfer.problems import ProblemKind


def test_bpp3_has_twelve_variables():
    inst = problems.generate(ProblemKind.BPP, 3, 7)
    assert inst.n_vars == 12


def test_bpp_qubit_counts_by_item_count():
    assert [problems.generate("bpp", n, 0).n_vars for n in (3, 4, 5, 6)] == [12, 20, 30, 42]


def test_tsp_qubit_counts_by_city_count():
    assert [problems.generate("tsp", n, 0).n_vars for n in (3, 4, 5, 6)] == [9, 16, 25, 36]


@pytest.mark.parametrize("kind,size", [("tsp", 2), ("tsp", 7), ("bpp", 7), ("kp", 0), ("mis", 25)])
def test_unsupported_size_rejected(kind, size):
    with pytest.raises(SizeError):
        problems.generate(kind, size, 0)


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        problems.generate("sat", 4, 0)


def test_empty_graph_optimum_takes_every_vertex():
    seed = next(s for s in range(1000) if not problems.generate("mis", 4, s).edges)
    inst = problems.generate("mis", 4, seed)
    assert inst.n_vars == 4
    ground = brute_force(encode(inst))
    assert ground.ground_states == {"1111"}
    assert inst.evaluate("1111") == (4.0, True)


def test_empty_knapsack_is_feasible():
    inst = problems.generate("kp", 6, 3)
    assert inst.evaluate([0] * 6) == (0.0, True)


def test_adjacent_vertices_break_independence():
    inst = problems.generate("mis", 6, 1)
    i, j = inst.edges[0]
    bits = [0] * 6
    bits[i] = bits[j] = 1
    assert inst.evaluate(bits) == (2.0, False)


def test_assignment_length_mismatch():
    inst = problems.generate("kp", 5, 0)
    with pytest.raises(DimensionError):
        inst.evaluate("0101")


def _min_bins_by_assignment(weights, capacity):
    """Independent oracle: try every item -> bin map, count used bins."""
    n = len(weights)
    best = n
    for assign in itertools.product(range(n), repeat=n):
        loads = np.bincount(assign, weights=weights, minlength=n)
        if np.all(loads <= capacity):
            best = min(best, len(set(assign)))
    return best


@pytest.mark.parametrize("seed", [0, 7, 11])
def test_bpp3_enumeration_finds_minimal_bin_count(seed):
    inst = problems.generate("bpp", 3, seed)
    feasible_objs = []
    for k in range(1 << inst.n_vars):
        obj, ok = inst.evaluate(index_to_bitstring(k, inst.n_vars))
        if ok:
            feasible_objs.append(obj)
    best = min(feasible_objs)
    assert best == _min_bins_by_assignment(inst.weights, inst.max_weight)
    # the penalized ground state is a feasible packing with that bin count
    for s in brute_force(encode(inst)).ground_states:
        assert inst.evaluate(s) == (best, True)


def test_tsp_distances_symmetric_and_positive():
    inst = problems.generate("tsp", 5, 2)
    assert np.allclose(inst.dist, inst.dist.T)
    assert np.all(np.diag(inst.dist) == 0)
    off = inst.dist[~np.eye(5, dtype=bool)]
    assert np.all(off > 0) and abs(off.mean() - 10.0) < 0.2


def test_tsp_tour_length_closes_the_loop():
    inst = problems.generate("tsp", 3, 0)
    # identity permutation: city t visited at time t
    bits = np.eye(3, dtype=int).ravel()
    d = inst.dist
    assert inst.evaluate(bits) == pytest.approx((d[0, 1] + d[1, 2] + d[2, 0], True))


def test_kp_capacity_is_half_total_weight():
    inst = problems.generate("kp", 7, 5)
    assert inst.max_weight == sum(inst.weights) // 2
    assert all(5 <= v <= 63 for v in inst.values)
    assert all(1 <= w <= 20 for w in inst.weights)


def test_po_budget_and_covariance():
    inst = problems.generate("po", 6, 4)
    assert inst.budget == pytest.approx(inst.costs.sum() / 2)
    assert np.array_equal(inst.cov, inst.cov.T)
    assert set(np.unique(inst.cov)) <= {-0.1, 0.0, 0.1, 0.2}
    assert np.all((inst.costs >= 0.5) & (inst.costs <= 1.5))


def test_maxcut_weights_in_unit_interval():
    inst = problems.generate("maxcut", 8, 3)
    assert inst.edges
    assert all(0.0 < w <= 1.0 for w in inst.edge_weights)


@settings(max_examples=40, deadline=None)
@given(kind=st.sampled_from(list(ProblemKind)), seed=st.integers(0, 2**31 - 1),
       data=st.data())
def test_generation_is_deterministic_and_round_trips(kind, seed, data):
    lo, hi = problems.SIZE_RANGES[kind]
    size = data.draw(st.integers(lo, min(hi, 10)))
    a = problems.generate(kind, size, seed)
    b = problems.generate(kind, size, seed)
    assert problems.instances_equal(a, b)
    c = problems.from_json(problems.to_json(a))
    assert problems.instances_equal(a, c)
    assert c.n_vars == a.n_vars and c.kind is kind


def test_different_seeds_give_different_instances():
    a = problems.generate("kp", 10, 0)
    b = problems.generate("kp", 10, 1)
    assert not problems.instances_equal(a, b)
