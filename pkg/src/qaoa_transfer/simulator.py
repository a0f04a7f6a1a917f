"""Dense state-vector QAOA simulation.

The circuit is ``prod_l [exp(-i beta_l B) exp(-i gamma_l H)] |+>^n`` with
mixer Hamiltonian ``B = -sum_q X_q`` (so ``|+>^n`` is its ground state and
positive ramped angles follow an annealing path) and ``H`` the Ising energy
without its offset, which would only add a global phase. Per qubit the mixer
is ``Rx(-2 beta)``.

The cost layer is a diagonal multiply and the mixer is one in-place
butterfly pass per qubit, so a layer costs O(n 2**n).
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from .bits import bitstring_to_index, index_to_bitstring
from .encoding import IsingModel
from .exceptions import DimensionError, NumericError, ResourceError
from .params import QaoaParams

MAX_QUBITS = 24


def cost_diagonal(model: IsingModel) -> np.ndarray:
    """Offset-free Ising energy of every basis state, built one qubit at a time."""
    n = model.n_qubits
    J = model.couplings
    diag = np.zeros(1)
    for k in range(n):
        size = 1 << k
        idx = np.arange(size, dtype=np.int64)
        local = np.full(size, model.fields[k])
        for j in np.nonzero(J[:k, k])[0]:
            local += J[j, k] * (1.0 - 2.0 * ((idx >> j) & 1))
        # the new qubit is the top bit so far: lower half has x_k = 0 (z_k = +1)
        diag = np.concatenate([diag + local, diag - local])
    return diag


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes.setflags(write=False)

    @property
    def n_qubits(self) -> int:
        return int(self.amplitudes.size).bit_length() - 1

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.sum(self.probabilities()))


@dataclass(frozen=True)
class SampleSet:
    counts: dict[str, int]
    n_shots: int

    @classmethod
    def from_counts(cls, counts: dict[str, int]) -> "SampleSet":
        counts = {k: int(v) for k, v in sorted(counts.items()) if v}
        return cls(counts, sum(counts.values()))

    @property
    def n_qubits(self) -> int:
        return len(next(iter(self.counts))) if self.counts else 0

    def fraction(self, targets: Iterable[str]) -> float:
        return sum(self.counts.get(t, 0) for t in set(targets)) / self.n_shots

    def to_json(self) -> str:
        return json.dumps(self.counts, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SampleSet":
        return cls.from_counts(json.loads(text))


def _mix(psi: np.ndarray, beta: float, n: int) -> None:
    c, s = np.cos(beta), 1j * np.sin(beta)
    for q in range(n):
        v = psi.reshape(-1, 2, 1 << q)
        a = v[:, 0, :].copy()
        b = v[:, 1, :]
        v[:, 0, :] = c * a + s * b
        v[:, 1, :] = c * b + s * a


def _check_model(model: IsingModel) -> None:
    if model.n_qubits > MAX_QUBITS:
        raise ResourceError(f"{model.n_qubits} qubits exceeds the simulator cap of {MAX_QUBITS}")
    if not model.is_normalized(1e-9):
        warnings.warn("simulating an unnormalized Ising model; angles will not transfer",
                      stacklevel=3)


class QaoaSimulator:
    """QAOA on one model, with the cost diagonal computed once.

    Reuse an instance when evaluating many parameter sets on the same model.
    """

    def __init__(self, model: IsingModel):
        _check_model(model)
        self.model = model
        self.n_qubits = model.n_qubits
        self.diag = cost_diagonal(model)
        self.diag.setflags(write=False)

    def evolve(self, params: QaoaParams) -> StateVector:
        n = self.n_qubits
        psi = np.full(1 << n, 2.0 ** (-n / 2), dtype=np.complex128)
        for gamma, beta in zip(params.gammas, params.betas):
            psi *= np.exp(-1j * gamma * self.diag)
            _mix(psi, beta, n)
        if not np.all(np.isfinite(psi)):
            raise NumericError("non-finite amplitude after evolution")
        psi /= np.sqrt(np.vdot(psi, psi).real)
        return StateVector(psi)

    def expectation(self, state: Union[StateVector, QaoaParams]) -> float:
        if isinstance(state, QaoaParams):
            state = self.evolve(state)
        if state.amplitudes.size != self.diag.size:
            raise DimensionError("state and model sizes differ")
        return float(state.probabilities() @ self.diag + self.model.offset)


def evolve(model: IsingModel, params: QaoaParams) -> StateVector:
    return QaoaSimulator(model).evolve(params)


def expectation(state: StateVector, model: IsingModel) -> float:
    if state.amplitudes.size != 1 << model.n_qubits:
        raise DimensionError(f"state has {state.amplitudes.size} amplitudes, "
                             f"model has {model.n_qubits} qubits")
    return float(state.probabilities() @ cost_diagonal(model) + model.offset)


def probability_of(state: StateVector, targets: Iterable[str]) -> float:
    """Total probability of the given bitstrings (duplicates counted once)."""
    targets = set(targets)
    if not targets:
        raise ValueError("targets must be non-empty")
    n = state.n_qubits
    if any(len(t) != n for t in targets):
        raise DimensionError(f"target bitstrings must have length {n}")
    idx = np.fromiter((bitstring_to_index(t) for t in targets), dtype=np.int64)
    return float(np.sum(np.abs(state.amplitudes[idx]) ** 2))


def sample(state: StateVector, n_shots: int, seed: int) -> SampleSet:
    """Multinomial shots from the Born distribution, reproducible per ``seed``."""
    if n_shots < 1:
        raise ValueError("n_shots must be at least 1")
    probs = state.probabilities()
    probs = probs / probs.sum()
    rng = np.random.Generator(np.random.PCG64(seed))
    counts = rng.multinomial(n_shots, probs)
    n = state.n_qubits
    return SampleSet.from_counts({index_to_bitstring(int(k), n): int(counts[k])
                                  for k in np.nonzero(counts)[0]})
