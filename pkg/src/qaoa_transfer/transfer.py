"""Reuse optimized angles on other instances and score them.

The score is the exact probability of measuring a ground state of the target's
normalized Ising model, compared against the ``2**(-n/2)`` Grover guide line.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .encoding import IsingModel, PenaltyConfig, encode
from .exceptions import ResourceError
from .oracle import GroundTruth, brute_force
from .params import QaoaParams
from .problems import ProblemInstance, ProblemKind
from .simulator import MAX_QUBITS, QaoaSimulator, probability_of

log = logging.getLogger(__name__)


@dataclass
class BankEntry:
    params: QaoaParams
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {**self.params.to_dict(), "provenance": self.provenance}

    @classmethod
    def from_dict(cls, d: dict) -> "BankEntry":
        return cls(QaoaParams.from_dict(d), dict(d.get("provenance", {})))


class ParameterBank:
    """Labelled parameter sets with where they came from, stored as JSON."""

    def __init__(self, entries: Optional[Mapping[str, BankEntry]] = None):
        self.entries: dict[str, BankEntry] = dict(entries or {})

    def __contains__(self, label: str) -> bool:
        return label in self.entries

    def __getitem__(self, label: str) -> BankEntry:
        try:
            return self.entries[label]
        except KeyError:
            raise KeyError(f"no bank entry {label!r}; have {sorted(self.entries)}") from None

    def add(self, label: str, params: QaoaParams, provenance: Optional[dict] = None,
            replace: bool = True) -> None:
        if label in self.entries and not replace:
            raise ValueError(f"bank already has an entry {label!r}")
        self.entries[label] = BankEntry(params, dict(provenance or {}))

    def to_json(self) -> str:
        return json.dumps({"entries": {k: v.to_dict() for k, v in sorted(self.entries.items())}},
                          indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ParameterBank":
        d = json.loads(text)
        return cls({k: BankEntry.from_dict(v) for k, v in d.get("entries", {}).items()})

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ParameterBank":
        path = Path(path)
        return cls.from_json(path.read_text()) if path.exists() else cls()


@dataclass(frozen=True)
class TlMetrics:
    prob_optimal: float
    expectation: float
    grover_baseline: float
    n_qubits: int
    ground_energy: float
    n_ground_states: int

    @property
    def above_grover(self) -> bool:
        return self.prob_optimal >= self.grover_baseline


def grover_baseline(n_qubits: int) -> float:
    """Quadratic-speedup guide: ``2**(-n/2)``."""
    if n_qubits < 1:
        raise ValueError("n_qubits must be at least 1")
    return 2.0 ** (-n_qubits / 2)


def transfer_run(params: QaoaParams, model: IsingModel,
                 ground: Union[GroundTruth, Iterable[str]]) -> TlMetrics:
    if model.n_qubits > MAX_QUBITS:
        raise ResourceError(f"{model.n_qubits} qubits exceeds the simulator cap of {MAX_QUBITS}")
    if isinstance(ground, GroundTruth):
        states, e0 = ground.ground_states, ground.ground_energy
    else:
        states = frozenset(ground)
        if not states:
            raise ValueError("ground state set must be non-empty")
        e0 = model.energy(next(iter(states)))
    sim = QaoaSimulator(model)
    state = sim.evolve(params)
    return TlMetrics(
        prob_optimal=probability_of(state, states),
        expectation=sim.expectation(state),
        grover_baseline=grover_baseline(model.n_qubits),
        n_qubits=model.n_qubits,
        ground_energy=float(e0),
        n_ground_states=len(states),
    )


@dataclass
class InstanceResult:
    kind: str
    size: int
    seed: int
    metrics: Optional[TlMetrics] = None
    error: Optional[str] = None

    def to_dict(self) -> dict:
        return {"kind": self.kind, "size": self.size, "seed": self.seed,
                "metrics": asdict(self.metrics) if self.metrics else None,
                "error": self.error}


@dataclass(frozen=True)
class SizeRow:
    kind: str
    size: int
    n_qubits: int
    n_instances: int
    mean: float
    median: float
    q1: float
    q3: float
    grover: float


CSV_COLUMNS = ("kind", "size", "n_qubits", "n_instances", "mean", "median", "q1", "q3", "grover")


@dataclass
class SweepReport:
    label: str
    results: list[InstanceResult] = field(default_factory=list)

    @property
    def failures(self) -> list[InstanceResult]:
        return [r for r in self.results if r.error is not None]

    def rows(self) -> list[SizeRow]:
        groups: dict[tuple[str, int], list[TlMetrics]] = {}
        for r in self.results:
            if r.metrics is not None:
                groups.setdefault((r.kind, r.size), []).append(r.metrics)
        rows = []
        for (kind, size), ms in groups.items():
            probs = np.array([m.prob_optimal for m in ms])
            q1, med, q3 = np.percentile(probs, [25, 50, 75])
            rows.append(SizeRow(kind, size, ms[0].n_qubits, len(ms), float(probs.mean()),
                                float(med), float(q1), float(q3), ms[0].grover_baseline))
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in self.rows():
            w.writerow([repr(v) if isinstance(v, float) else v for v in asdict(row).values()])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"label": self.label,
                "instances": [r.to_dict() for r in self.results],
                "summary": [asdict(r) for r in self.rows()]}


def _run_one(params: QaoaParams, inst: ProblemInstance,
             penalties: Mapping[ProblemKind, PenaltyConfig]) -> InstanceResult:
    res = InstanceResult(inst.kind.value, inst.size, inst.seed)
    try:
        model = encode(inst, penalties.get(inst.kind))
        if model.n_qubits > MAX_QUBITS:
            raise ResourceError(f"{model.n_qubits} qubits exceeds the simulator cap")
        res.metrics = transfer_run(params, model, brute_force(model))
    except Exception as exc:  # recorded per instance, the sweep goes on
        log.warning("transfer to %s(%d, seed=%d) failed: %s",
                    inst.kind.value, inst.size, inst.seed, exc)
        res.error = f"{type(exc).__name__}: {exc}"
    return res


def sweep(label: str, params: QaoaParams, targets: Sequence[ProblemInstance],
          penalties: Optional[Mapping[ProblemKind, PenaltyConfig]] = None,
          workers: int = 1) -> SweepReport:
    """Transfer ``params`` to every target and summarize per (kind, size).

    Failures are recorded on the instance and do not stop the sweep.
    """
    penalties = dict(penalties or {})
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda t: _run_one(params, t, penalties), targets))
    else:
        results = [_run_one(params, t, penalties) for t in targets]
    return SweepReport(label, results)
