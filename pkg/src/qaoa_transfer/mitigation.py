"""Hamming-distance-1 post-processing of measured bitstrings.

Each sample is replaced by the lowest-energy string among itself and its ``n``
single-bitflip neighbours. Flip energies come from local fields, so a string
costs one O(n^2) field computation and then O(1) per neighbour. Ties keep the
original string; among equally good improving flips the lowest index wins.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .bits import as_bits, to_bitstring
from .encoding import IsingModel
from .exceptions import DimensionError
from .oracle import brute_force
from .simulator import SampleSet

_IMPROVE_TOL = 1e-12


@dataclass(frozen=True)
class MitigationReport:
    raw_optimal_fraction: float
    mitigated_optimal_fraction: float
    moved_samples: int
    within_distance1_fraction: float
    raw_mean_energy: float
    mitigated_mean_energy: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _spins(strings: list[str], n: int) -> np.ndarray:
    return 1.0 - 2.0 * np.array([as_bits(s) for s in strings], dtype=float).reshape(-1, n)


def flip_deltas(model: IsingModel, spins: np.ndarray) -> np.ndarray:
    """Energy change of flipping each spin, for a batch of spin rows."""
    Jsym = model.couplings + model.couplings.T
    local = spins @ Jsym + model.fields
    return -2.0 * spins * local


def best_neighbors(model: IsingModel, strings: list[str]) -> list[str]:
    n = model.n_qubits
    if not strings:
        return []
    z = _spins(strings, n)
    delta = flip_deltas(model, z)
    k = np.argmin(delta, axis=1)  # first minimum = lowest flipped index
    move = delta[np.arange(len(strings)), k] < -_IMPROVE_TOL
    out = []
    for s, kk, mv in zip(strings, k, move):
        if mv:
            s = s[:kk] + ("0" if s[kk] == "1" else "1") + s[kk + 1:]
        out.append(s)
    return out


def _within_one(s: str, ground: Iterable[str]) -> bool:
    return any(sum(a != b for a, b in zip(s, g)) <= 1 for g in ground)


def mitigate(samples: SampleSet, model: IsingModel,
             ground_states: Optional[Iterable[str]] = None) -> tuple[SampleSet, MitigationReport]:
    """Move every sample to its best Hamming-1 neighbour and re-aggregate counts.

    Ground states are found by brute force when not supplied.
    """
    n = model.n_qubits
    strings = list(samples.counts)
    if any(len(s) != n for s in strings):
        raise DimensionError(f"sample bitstrings must have length {n}")
    ground = frozenset(ground_states) if ground_states is not None \
        else brute_force(model).ground_states
    moved_to = dict(zip(strings, best_neighbors(model, strings)))
    counts: dict[str, int] = {}
    moved = 0
    for s, c in samples.counts.items():
        t = moved_to[s]
        counts[t] = counts.get(t, 0) + c
        moved += c if t != s else 0
    mitigated = SampleSet.from_counts(counts)

    def mean_energy(ss: SampleSet) -> float:
        return sum(model.energy(s) * c for s, c in ss.counts.items()) / ss.n_shots

    report = MitigationReport(
        raw_optimal_fraction=samples.fraction(ground),
        mitigated_optimal_fraction=mitigated.fraction(ground),
        moved_samples=moved,
        within_distance1_fraction=sum(c for s, c in samples.counts.items()
                                      if _within_one(s, ground)) / samples.n_shots,
        raw_mean_energy=mean_energy(samples),
        mitigated_mean_energy=mean_energy(mitigated),
    )
    return mitigated, report


def bitflip_channel(samples: SampleSet, p_flip: float, seed: int) -> SampleSet:
    """Flip each bit of each shot independently with probability ``p_flip``."""
    rng = np.random.Generator(np.random.PCG64(seed))
    counts: dict[str, int] = {}
    for s, c in samples.counts.items():
        bits = np.tile(as_bits(s), (c, 1))
        bits ^= (rng.random(bits.shape) < p_flip).astype(np.uint8)
        for row in bits:
            t = to_bitstring(row)
            counts[t] = counts.get(t, 0) + 1
    return SampleSet.from_counts(counts)
