"""QUBO construction with penalty terms, and conversion to a normalized Ising model.

Everything here minimizes. Maximization objectives (KP, PO, MIS, MaxCut) are
negated before any penalty is added.

Equality constraints ``sum(c_i x_i) == C`` add ``lambda0 * (sum(c_i x_i) - C)**2``.
Inequalities ``sum(w_i x_i) <= W`` use the unbalanced form
``-lambda1 * h + lambda2 * h**2`` with slack ``h = W - sum(w_i x_i)``, which
rewards a little slack and punishes violation (``h < 0``) harder than it
rewards the same amount of slack.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Union

import numpy as np

from .bits import BitsLike, as_bits
from .exceptions import PenaltyConfigError
from .problems import (BppInstance, GraphInstance, KpInstance, PoInstance, ProblemInstance,
                       ProblemKind, TspInstance)
from .records import atomic_write_text


@dataclass(frozen=True)
class PenaltyConfig:
    lambda0: Optional[float] = None
    lambda1: Optional[float] = None
    lambda2: Optional[float] = None

    def to_dict(self) -> dict:
        return {"lambda0": self.lambda0, "lambda1": self.lambda1, "lambda2": self.lambda2}

    def merged(self, lambda0=None, lambda1=None, lambda2=None) -> "PenaltyConfig":
        """Copy with any non-None argument overriding the stored value."""
        return PenaltyConfig(
            self.lambda0 if lambda0 is None else lambda0,
            self.lambda1 if lambda1 is None else lambda1,
            self.lambda2 if lambda2 is None else lambda2,
        )


# MIS keeps its tabulated (-1, 1) pair for reference only; the encoding uses
# a 2 * x_i * x_j term per edge.
TABLE_PENALTIES: dict[ProblemKind, PenaltyConfig] = {
    ProblemKind.TSP: PenaltyConfig(lambda0=23.0),
    ProblemKind.BPP: PenaltyConfig(lambda0=15.0, lambda1=4.2, lambda2=0.4),
    ProblemKind.KP: PenaltyConfig(lambda1=0.96, lambda2=0.04),
    ProblemKind.PO: PenaltyConfig(lambda1=0.97, lambda2=0.06),
    ProblemKind.MIS: PenaltyConfig(lambda1=-1.0, lambda2=1.0),
    ProblemKind.MAXCUT: PenaltyConfig(),
}
MIS_EDGE_PENALTY = 2.0


def default_penalties(kind: Union[ProblemKind, str]) -> PenaltyConfig:
    return TABLE_PENALTIES[ProblemKind.parse(kind)]


@dataclass(frozen=True, eq=False)
class Qubo:
    """``f(x) = x^T q x + offset`` with symmetric ``q`` and ``x_i**2 == x_i``.

    The diagonal holds the linear coefficients; each off-diagonal pair
    ``q[i, j] == q[j, i]`` contributes ``2 * q[i, j] * x_i * x_j``.
    """

    q: np.ndarray
    offset: float = 0.0

    @property
    def n_vars(self) -> int:
        return self.q.shape[0]

    def energy(self, bits: BitsLike) -> float:
        x = as_bits(bits, self.n_vars).astype(float)
        return float(x @ self.q @ x + self.offset)


@dataclass(frozen=True, eq=False)
class IsingModel:
    """``H(z) = sum_{i<j} J_ij z_i z_j + sum_i h_i z_i + offset`` over spins ``z = 1 - 2x``.

    ``couplings`` is stored as a strictly upper-triangular matrix.
    ``norm_factor`` records the divisor applied by :func:`normalize`.
    """

    couplings: np.ndarray
    fields: np.ndarray
    offset: float = 0.0
    norm_factor: float = 1.0

    def __post_init__(self):
        J = np.triu(np.array(self.couplings, dtype=float), 1)
        h = np.array(self.fields, dtype=float)
        if J.shape != (h.size, h.size):
            raise ValueError(f"couplings shape {J.shape} does not match {h.size} fields")
        if self.norm_factor <= 0:
            raise ValueError("norm_factor must be positive")
        J.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "couplings", J)
        object.__setattr__(self, "fields", h)
        object.__setattr__(self, "offset", float(self.offset))
        object.__setattr__(self, "norm_factor", float(self.norm_factor))

    @classmethod
    def from_terms(cls, n: int, couplings: Mapping[tuple[int, int], float] = (),
                   fields: Mapping[int, float] = (), offset: float = 0.0) -> "IsingModel":
        J = np.zeros((n, n))
        for (i, j), v in dict(couplings).items():
            if i == j:
                raise ValueError("self-coupling is not allowed")
            J[min(i, j), max(i, j)] += v
        h = np.zeros(n)
        for i, v in dict(fields).items():
            h[i] += v
        return cls(J, h, offset)

    @property
    def n_qubits(self) -> int:
        return self.fields.size

    def max_abs_coefficient(self) -> float:
        if self.n_qubits == 0:
            return 0.0
        return float(max(np.abs(self.couplings).max(), np.abs(self.fields).max()))

    def is_normalized(self, tol: float = 1e-12) -> bool:
        m = self.max_abs_coefficient()
        return m == 0.0 or abs(m - 1.0) <= tol

    def energy(self, bits: BitsLike) -> float:
        z = 1.0 - 2.0 * as_bits(bits, self.n_qubits)
        return float(z @ self.couplings @ z + self.fields @ z + self.offset)

    def with_offset(self, offset: float) -> "IsingModel":
        return IsingModel(self.couplings, self.fields, offset, self.norm_factor)


class _QuboBuilder:
    def __init__(self, n: int):
        self.linear = np.zeros(n)
        self.quad = np.zeros((n, n))  # coefficient of x_i x_j, i < j
        self.const = 0.0

    def add_linear(self, i: int, c: float):
        self.linear[i] += c

    def add_quadratic(self, i: int, j: int, c: float):
        if i == j:
            self.linear[i] += c
        else:
            self.quad[min(i, j), max(i, j)] += c

    def add_squared(self, coeffs: Mapping[int, float], target: float, lam: float):
        """``lam * (sum(c_i x_i) - target)**2``."""
        items = list(coeffs.items())
        for a, (i, ci) in enumerate(items):
            self.add_linear(i, lam * (ci * ci - 2.0 * target * ci))
            for j, cj in items[a + 1:]:
                self.add_quadratic(i, j, 2.0 * lam * ci * cj)
        self.const += lam * target * target

    def add_unbalanced(self, coeffs: Mapping[int, float], bound: float, lam1: float, lam2: float):
        """``-lam1 * h + lam2 * h**2`` with ``h = bound - sum(c_i x_i)``."""
        self.const -= lam1 * bound
        for i, c in coeffs.items():
            self.add_linear(i, lam1 * c)
        self.add_squared(coeffs, bound, lam2)

    def build(self) -> Qubo:
        half = self.quad / 2.0
        q = half + half.T + np.diag(self.linear)
        q.setflags(write=False)
        return Qubo(q, float(self.const))


def _require(penalties: PenaltyConfig, kind: ProblemKind, *names: str):
    missing = [n for n in names if getattr(penalties, n) is None]
    if missing:
        raise PenaltyConfigError(f"{kind.value} needs penalty coefficient(s) {', '.join(missing)}")
    if "lambda2" in names and penalties.lambda2 < 0:
        raise PenaltyConfigError("lambda2 must be non-negative for an inequality penalty")


def _tsp_qubo(inst: TspInstance, pen: PenaltyConfig) -> Qubo:
    _require(pen, ProblemKind.TSP, "lambda0")
    n = inst.n_cities
    b = _QuboBuilder(inst.n_vars)
    for t in range(n):
        t1 = (t + 1) % n
        for i in range(n):
            for j in range(n):
                if i != j:
                    b.add_quadratic(inst.var(i, t), inst.var(j, t1), inst.dist[i, j])
    for t in range(n):
        b.add_squared({inst.var(i, t): 1.0 for i in range(n)}, 1.0, pen.lambda0)
    for i in range(n):
        b.add_squared({inst.var(i, t): 1.0 for t in range(n)}, 1.0, pen.lambda0)
    return b.build()


def _bpp_qubo(inst: BppInstance, pen: PenaltyConfig) -> Qubo:
    _require(pen, ProblemKind.BPP, "lambda0", "lambda1", "lambda2")
    n, m = inst.n_items, inst.n_bins
    b = _QuboBuilder(inst.n_vars)
    for j in range(m):
        b.add_linear(inst.y_var(j), 1.0)
    for i in range(n):
        b.add_squared({inst.x_var(i, j): 1.0 for j in range(m)}, 1.0, pen.lambda0)
    for j in range(m):
        # sum_i w_i x_ij - W y_j <= 0
        coeffs = {inst.x_var(i, j): float(inst.weights[i]) for i in range(n)}
        coeffs[inst.y_var(j)] = -float(inst.max_weight)
        b.add_unbalanced(coeffs, 0.0, pen.lambda1, pen.lambda2)
    return b.build()


def _kp_qubo(inst: KpInstance, pen: PenaltyConfig, rescale: bool) -> Qubo:
    _require(pen, ProblemKind.KP, "lambda1", "lambda2")
    b = _QuboBuilder(inst.n_vars)
    v_unit = float(np.mean(inst.values)) if rescale else 1.0
    w_unit = float(np.mean(inst.weights)) if rescale else 1.0
    for i, v in enumerate(inst.values):
        b.add_linear(i, -float(v) / v_unit)
    b.add_unbalanced({i: float(w) / w_unit for i, w in enumerate(inst.weights)},
                     float(inst.max_weight) / w_unit, pen.lambda1, pen.lambda2)
    return b.build()


def _po_qubo(inst: PoInstance, pen: PenaltyConfig) -> Qubo:
    _require(pen, ProblemKind.PO, "lambda1", "lambda2")
    n = inst.n_assets
    b = _QuboBuilder(n)
    for i in range(n):
        b.add_linear(i, -float(inst.returns[i]) + inst.risk_factor * inst.cov[i, i])
        for j in range(i + 1, n):
            b.add_quadratic(i, j, inst.risk_factor * (inst.cov[i, j] + inst.cov[j, i]))
    b.add_unbalanced({i: float(c) for i, c in enumerate(inst.costs)},
                     inst.budget, pen.lambda1, pen.lambda2)
    return b.build()


def _graph_qubo(inst: GraphInstance) -> Qubo:
    b = _QuboBuilder(inst.n_vars)
    if inst.kind is ProblemKind.MIS:
        for v in range(inst.n_nodes):
            b.add_linear(v, -1.0)
        for i, j in inst.edges:
            b.add_quadratic(i, j, MIS_EDGE_PENALTY)
    else:
        # -(w (x_i + x_j - 2 x_i x_j))
        for (i, j), w in zip(inst.edges, inst.edge_weights):
            b.add_linear(i, -w)
            b.add_linear(j, -w)
            b.add_quadratic(i, j, 2.0 * w)
    return b.build()


def to_qubo(instance: ProblemInstance, penalties: Optional[PenaltyConfig] = None,
            *, rescale_knapsack: bool = True) -> Qubo:
    """Penalized QUBO whose minimum encodes the instance's optimum.

    ``penalties`` defaults to the tabulated coefficients for the problem kind.
    MIS and MaxCut ignore it.

    With ``rescale_knapsack`` the knapsack values, weights and capacity are
    expressed in units of the mean value and mean weight, the same O(1)
    per-item scale as portfolio returns and costs. On raw integers (values up
    to 63) the objective swamps the knapsack penalty coefficients and the
    ground state overfills the knapsack.
    """
    pen = penalties if penalties is not None else default_penalties(instance.kind)
    if isinstance(instance, TspInstance):
        return _tsp_qubo(instance, pen)
    if isinstance(instance, BppInstance):
        return _bpp_qubo(instance, pen)
    if isinstance(instance, KpInstance):
        return _kp_qubo(instance, pen, rescale_knapsack)
    if isinstance(instance, PoInstance):
        return _po_qubo(instance, pen)
    return _graph_qubo(instance)


def qubo_to_ising(qubo: Qubo) -> IsingModel:
    """Substitute ``x_i = (1 - z_i) / 2``; energies agree exactly, offset included."""
    q = np.asarray(qubo.q, dtype=float)
    diag = np.diag(q).copy()
    off = q - np.diag(diag)
    J = np.triu(off, 1) / 2.0
    h = -diag / 2.0 - off.sum(axis=1) / 2.0
    offset = qubo.offset + diag.sum() / 2.0 + np.triu(off, 1).sum() / 2.0
    return IsingModel(J, h, float(offset))


def normalize(model: IsingModel) -> IsingModel:
    """Divide every coefficient and the offset by the largest ``|J_ij|`` or ``|h_i|``.

    A model that is identically zero comes back unchanged with ``norm_factor == 1``.
    """
    factor = model.max_abs_coefficient()
    if factor == 0.0:
        return IsingModel(model.couplings, model.fields, model.offset, 1.0)
    return IsingModel(model.couplings / factor, model.fields / factor,
                      model.offset / factor, factor)


def encode(instance: ProblemInstance, penalties: Optional[PenaltyConfig] = None,
           *, rescale_knapsack: bool = True) -> IsingModel:
    """Instance to normalized Ising model, the form every QAOA routine expects."""
    return normalize(qubo_to_ising(to_qubo(instance, penalties,
                                           rescale_knapsack=rescale_knapsack)))


def ising_energy(model: IsingModel, bits: BitsLike) -> float:
    return model.energy(bits)


def qubo_energy(qubo: Qubo, bits: BitsLike) -> float:
    return qubo.energy(bits)


def write_ising(model: IsingModel, path: Union[str, Path]) -> None:
    """Coordinate text: ``i j J_ij`` per coupling, ``i i h_i`` per field."""
    lines = [f"# n_qubits={model.n_qubits} offset={model.offset!r} "
             f"norm_factor={model.norm_factor!r}"]
    for i, h in enumerate(model.fields):
        if h != 0.0:
            lines.append(f"{i} {i} {float(h)!r}")
    for i, j in zip(*np.nonzero(model.couplings)):
        lines.append(f"{i} {j} {float(model.couplings[i, j])!r}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_ising(path: Union[str, Path]) -> IsingModel:
    text = Path(path).read_text().splitlines()
    header = dict(tok.split("=", 1) for tok in text[0].lstrip("# ").split())
    n = int(header["n_qubits"])
    J, h = np.zeros((n, n)), np.zeros(n)
    for line in text[1:]:
        if not line.strip() or line.startswith("#"):
            continue
        i, j, v = line.split()
        i, j = int(i), int(j)
        if i == j:
            h[i] = float(v)
        else:
            J[min(i, j), max(i, j)] = float(v)
    return IsingModel(J, h, float(header["offset"]), float(header["norm_factor"]))
