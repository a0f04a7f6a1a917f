"""Linear-ramp initialization and COBYLA minimization of the QAOA energy."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np
from scipy.optimize import minimize

from .encoding import IsingModel
from .exceptions import NumericError
from .params import QaoaParams
from .records import atomic_write_text
from .simulator import QaoaSimulator

DEFAULT_DELTA = 0.7
BUDGET_MULTIPLIER = 20


@dataclass(frozen=True)
class OptimizerConfig:
    """``max_evals`` counts energy evaluations, the initial one included.

    ``seed`` is carried for provenance; COBYLA itself draws no random numbers.
    """

    max_evals: int
    initial_step: float = 0.1
    tolerance: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.max_evals < 1:
            raise ValueError("max_evals must be at least 1")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")

    @classmethod
    def for_problem(cls, n_qubits: int, p: int, multiplier: int = BUDGET_MULTIPLIER,
                    **kwargs) -> "OptimizerConfig":
        return cls(max_evals=multiplier * n_qubits * p, **kwargs)

    def to_dict(self) -> dict:
        return {"max_evals": self.max_evals, "initial_step": self.initial_step,
                "tolerance": self.tolerance, "seed": self.seed}


@dataclass
class OptTrace:
    entries: list[tuple[int, QaoaParams, float]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    def best(self) -> tuple[int, QaoaParams, float]:
        return min(self.entries, key=lambda e: (e[2], e[0]))

    def write_csv(self, path: Union[str, Path]) -> None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        p = self.entries[0][1].p if self.entries else 0
        w.writerow(["eval_index", "expectation"]
                   + [f"gamma_{i}" for i in range(p)] + [f"beta_{i}" for i in range(p)])
        for k, params, e in self.entries:
            w.writerow([k, repr(e)] + [repr(float(v)) for v in params.to_vector()])
        atomic_write_text(path, buf.getvalue())


def linear_ramp(p: int, delta: float = DEFAULT_DELTA) -> QaoaParams:
    """Annealing-style start: gammas rise and betas fall linearly, sampled at layer midpoints."""
    if p < 1:
        raise ValueError("p must be at least 1")
    if delta <= 0:
        raise ValueError("delta must be positive")
    f = (np.arange(p) + 0.5) / p
    return QaoaParams(delta * f, delta * (1.0 - f))


class _BudgetExhausted(Exception):
    pass


def optimize(model: IsingModel, init: QaoaParams,
             cfg: OptimizerConfig) -> tuple[QaoaParams, OptTrace]:
    """Minimize the QAOA energy from ``init`` with at most ``cfg.max_evals`` evaluations.

    Returns the lowest-energy parameters seen, which is never worse than ``init``.
    """
    sim = QaoaSimulator(model)
    trace = OptTrace()

    def energy(x: np.ndarray) -> float:
        if len(trace) >= cfg.max_evals:
            raise _BudgetExhausted
        params = QaoaParams.from_vector(x)
        e = sim.expectation(params)
        if not math.isfinite(e):
            raise NumericError(f"non-finite expectation {e} at evaluation {len(trace)}")
        trace.entries.append((len(trace), params, e))
        return e

    x0 = init.to_vector()
    # scipy wants maxiter >= n + 2; the wrapper enforces the real budget
    maxiter = max(cfg.max_evals, x0.size + 2)
    try:
        minimize(energy, x0, method="COBYLA", tol=cfg.tolerance,
                 options={"rhobeg": cfg.initial_step, "maxiter": maxiter})
    except _BudgetExhausted:
        pass
    _, best, _ = trace.best()
    return best, trace
