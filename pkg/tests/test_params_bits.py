import numpy as np
import pytest
from hypothesis import given, strategies as st

from qaoa_transfer.bits import as_bits, bitstring_to_index, index_bits, index_to_bitstring
from qaoa_transfer.exceptions import DimensionError
from qaoa_transfer.params import QaoaParams


@given(n=st.integers(1, 20), data=st.data())
def test_index_and_string_are_inverse(n, data):
    k = data.draw(st.integers(0, (1 << n) - 1))
    s = index_to_bitstring(k, n)
    assert len(s) == n and bitstring_to_index(s) == k
    assert index_bits(np.array([k]), n)[0].tolist() == [int(c) for c in s]


def test_leftmost_character_is_least_significant():
    assert index_to_bitstring(1, 4) == "1000"
    assert bitstring_to_index("0001") == 8


def test_as_bits_validation():
    assert as_bits("0110").tolist() == [0, 1, 1, 0]
    with pytest.raises(DimensionError):
        as_bits("011", 4)
    with pytest.raises(ValueError):
        as_bits("01a")


def test_params_vector_round_trip():
    p = QaoaParams([0.1, 0.2], [0.3, 0.4])
    assert p.to_vector().tolist() == [0.1, 0.2, 0.3, 0.4]
    assert QaoaParams.from_vector(p.to_vector()) == p
    assert QaoaParams.from_dict(p.to_dict()) == p
    assert p.p == 2


def test_params_are_read_only():
    p = QaoaParams([0.1], [0.2])
    with pytest.raises(ValueError):
        p.gammas[0] = 1.0


@pytest.mark.parametrize("g,b", [([0.1], [0.1, 0.2]), ([], [])])
def test_params_shape_checked(g, b):
    with pytest.raises(ValueError):
        QaoaParams(g, b)
