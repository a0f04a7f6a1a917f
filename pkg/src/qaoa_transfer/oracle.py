"""Slow, independent references: exhaustive ground states and a dense-unitary QAOA.

Nothing in here calls into :mod:`qaoa_transfer.simulator`; these routines are
what the fast path is checked against.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Optional

import numpy as np
from scipy.linalg import expm

from .bits import index_bits, index_to_bitstring
from .encoding import IsingModel
from .exceptions import ResourceError
from .params import QaoaParams

ENUMERATION_CAP = 26
DENSE_CAP = 8
DEGENERACY_TOL = 1e-9
_CHUNK = 1 << 16


@dataclass(frozen=True)
class GroundTruth:
    ground_energy: float
    ground_states: frozenset[str]
    energy_histogram: Optional[dict[float, int]] = field(default=None, compare=False)

    @property
    def n_ground_states(self) -> int:
        return len(self.ground_states)


def enumerate_energies(model: IsingModel, start: int = 0, stop: Optional[int] = None) -> np.ndarray:
    """Energies of basis states ``start..stop-1`` from explicit spin rows."""
    n = model.n_qubits
    stop = (1 << n) if stop is None else stop
    z = 1.0 - 2.0 * index_bits(np.arange(start, stop), n)
    return np.einsum("ki,ij,kj->k", z, model.couplings, z) + z @ model.fields + model.offset


def brute_force(model: IsingModel, histogram: bool = False,
                tol: float = DEGENERACY_TOL) -> GroundTruth:
    """Exact minimum over all ``2**n`` assignments, degenerate states included."""
    n = model.n_qubits
    if n > ENUMERATION_CAP:
        raise ResourceError(f"{n} qubits exceeds the enumeration cap of {ENUMERATION_CAP}")
    best = np.inf
    candidates: list[tuple[int, float]] = []
    hist: dict[float, int] = {}
    total = 1 << n
    for start in range(0, total, _CHUNK):
        e = enumerate_energies(model, start, min(start + _CHUNK, total))
        best = min(best, float(e.min()))
        idx = np.nonzero(e <= best + tol)[0]
        candidates = [c for c in candidates if c[1] <= best + tol]
        candidates.extend((start + int(k), float(e[k])) for k in idx)
        if histogram:
            vals, counts = np.unique(np.round(e, 9), return_counts=True)
            for v, c in zip(vals.tolist(), counts.tolist()):
                hist[v] = hist.get(v, 0) + c
    states = frozenset(index_to_bitstring(k, n) for k, v in candidates if v <= best + tol)
    return GroundTruth(best, states, hist if histogram else None)


_X = np.array([[0.0, 1.0], [1.0, 0.0]])
_I = np.eye(2)


def _single_qubit_op(op: np.ndarray, qubit: int, n: int) -> np.ndarray:
    # kron order: most significant index first, so qubit 0 is the last factor
    factors = [op if q == qubit else _I for q in reversed(range(n))]
    return reduce(np.kron, factors)


def dense_reference(model: IsingModel, params: QaoaParams) -> np.ndarray:
    """QAOA state built from explicit ``2**n x 2**n`` matrices and ``expm``.

    Cost unitary ``exp(-i gamma H)`` with the offset dropped; mixer
    ``exp(-i beta B)`` with ``B = -sum_q X_q``; start state ``|+>^n``.
    """
    n = model.n_qubits
    if n > DENSE_CAP:
        raise ResourceError(f"dense reference is limited to {DENSE_CAP} qubits, got {n}")
    dim = 1 << n
    diag = np.array([model.energy(index_to_bitstring(k, n)) for k in range(dim)]) - model.offset
    H_cost = np.diag(diag)
    H_mix = -sum(_single_qubit_op(_X, q, n) for q in range(n)) if n else np.zeros((1, 1))
    psi = np.full(dim, 1.0 / np.sqrt(dim), dtype=complex)
    for g, b in zip(params.gammas, params.betas):
        psi = expm(-1j * g * H_cost) @ psi
        psi = expm(-1j * b * H_mix) @ psi
    return psi
