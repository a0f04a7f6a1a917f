"""Seeded random instances of the six benchmark problems.

Every instance is drawn from ``numpy.random.Generator(PCG64(seed))`` and the
draws happen in a fixed order, listed in each ``_generate_*`` function, so an
instance is reproducible from ``(kind, size, seed)`` alone.

Assignments follow the variable layouts below (see :mod:`qaoa_transfer.bits`
for how they map onto bitstrings):

* TSP: ``x[i * n + t]`` is 1 when city ``i`` is visited at time ``t``.
* BPP: ``x[i * m + j]`` puts item ``i`` into bin ``j``; ``x[n * m + j]`` marks
  bin ``j`` as used.
* KP, PO, MIS, MaxCut: one variable per item, asset or vertex.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Union

import numpy as np

from .bits import BitsLike, as_bits
from .exceptions import SizeError


class ProblemKind(str, Enum):
    TSP = "tsp"
    BPP = "bpp"
    KP = "kp"
    PO = "po"
    MIS = "mis"
    MAXCUT = "maxcut"

    @classmethod
    def parse(cls, value: Union[str, "ProblemKind"]) -> "ProblemKind":
        if isinstance(value, ProblemKind):
            return value
        try:
            return cls(value.lower())
        except ValueError:
            raise ValueError(f"unknown problem kind {value!r}; choose from "
                             f"{', '.join(k.value for k in cls)}") from None


MAX_VARS = 24
SIZE_RANGES = {
    ProblemKind.TSP: (3, 6),
    ProblemKind.BPP: (3, 6),
    ProblemKind.KP: (1, MAX_VARS),
    ProblemKind.PO: (1, MAX_VARS),
    ProblemKind.MIS: (1, MAX_VARS),
    ProblemKind.MAXCUT: (1, MAX_VARS),
}

TSP_MEAN_DISTANCE = 10.0
TSP_STD_DISTANCE = 0.1
TSP_MIN_DISTANCE = 1e-6
BPP_WEIGHT_RANGE = (1, 10)
BPP_MAX_WEIGHT = 20
KP_VALUE_RANGE = (5, 63)
KP_WEIGHT_RANGE = (1, 20)
PO_COV_CHOICES = (-0.1, 0.0, 0.1, 0.2)
PO_COST_RANGE = (0.5, 1.5)
MIS_EDGE_PROB = 0.5
MAXCUT_EDGE_PROB = 0.7


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _frozen(a: Any, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


@dataclass(frozen=True, eq=False)
class TspInstance:
    n_cities: int
    dist: np.ndarray
    seed: int
    kind: ProblemKind = field(default=ProblemKind.TSP, init=False)

    @property
    def size(self) -> int:
        return self.n_cities

    @property
    def n_vars(self) -> int:
        return self.n_cities ** 2

    def var(self, city: int, time: int) -> int:
        return city * self.n_cities + time

    def evaluate(self, bits: BitsLike) -> tuple[float, bool]:
        n = self.n_cities
        x = as_bits(bits, self.n_vars).reshape(n, n).astype(float)
        # x[i, t]: city i at time t; the tour closes back to t = 0
        nxt = np.roll(x, -1, axis=1)
        objective = float(np.einsum("ij,it,jt->", self.dist, x, nxt))
        feasible = bool(np.all(x.sum(axis=0) == 1) and np.all(x.sum(axis=1) == 1))
        return objective, feasible

    def params(self) -> dict:
        return {"dist": self.dist.tolist()}


@dataclass(frozen=True)
class BppInstance:
    n_items: int
    weights: tuple[int, ...]
    max_weight: int
    n_bins: int
    seed: int
    kind: ProblemKind = field(default=ProblemKind.BPP, init=False)

    @property
    def size(self) -> int:
        return self.n_items

    @property
    def n_vars(self) -> int:
        return self.n_items * self.n_bins + self.n_bins

    def x_var(self, item: int, bin_: int) -> int:
        return item * self.n_bins + bin_

    def y_var(self, bin_: int) -> int:
        return self.n_items * self.n_bins + bin_

    def evaluate(self, bits: BitsLike) -> tuple[float, bool]:
        n, m = self.n_items, self.n_bins
        b = as_bits(bits, self.n_vars).astype(int)
        x = b[: n * m].reshape(n, m)
        y = b[n * m:]
        loads = np.asarray(self.weights) @ x
        feasible = bool(np.all(x.sum(axis=1) == 1) and np.all(loads <= self.max_weight * y))
        return float(y.sum()), feasible

    def params(self) -> dict:
        return {"weights": list(self.weights), "max_weight": self.max_weight,
                "n_bins": self.n_bins}


@dataclass(frozen=True)
class KpInstance:
    n_items: int
    values: tuple[int, ...]
    weights: tuple[int, ...]
    max_weight: int
    seed: int
    kind: ProblemKind = field(default=ProblemKind.KP, init=False)

    @property
    def size(self) -> int:
        return self.n_items

    @property
    def n_vars(self) -> int:
        return self.n_items

    def evaluate(self, bits: BitsLike) -> tuple[float, bool]:
        x = as_bits(bits, self.n_vars).astype(int)
        value = int(np.dot(self.values, x))
        weight = int(np.dot(self.weights, x))
        return float(value), weight <= self.max_weight

    def params(self) -> dict:
        return {"values": list(self.values), "weights": list(self.weights),
                "max_weight": self.max_weight}


@dataclass(frozen=True, eq=False)
class PoInstance:
    n_assets: int
    returns: np.ndarray
    cov: np.ndarray
    costs: np.ndarray
    budget: float
    risk_factor: float
    seed: int
    kind: ProblemKind = field(default=ProblemKind.PO, init=False)

    @property
    def size(self) -> int:
        return self.n_assets

    @property
    def n_vars(self) -> int:
        return self.n_assets

    def evaluate(self, bits: BitsLike) -> tuple[float, bool]:
        x = as_bits(bits, self.n_vars).astype(float)
        objective = float(self.returns @ x - self.risk_factor * (x @ self.cov @ x))
        return objective, bool(self.costs @ x <= self.budget)

    def params(self) -> dict:
        return {"returns": self.returns.tolist(), "cov": self.cov.tolist(),
                "costs": self.costs.tolist(), "budget": self.budget,
                "risk_factor": self.risk_factor}


@dataclass(frozen=True)
class GraphInstance:
    """Weighted undirected graph for MIS (unit weights) or MaxCut."""

    n_nodes: int
    edges: tuple[tuple[int, int], ...]
    edge_weights: tuple[float, ...]
    kind: ProblemKind
    seed: int

    @property
    def size(self) -> int:
        return self.n_nodes

    @property
    def n_vars(self) -> int:
        return self.n_nodes

    def evaluate(self, bits: BitsLike) -> tuple[float, bool]:
        x = as_bits(bits, self.n_vars).astype(int)
        if self.kind is ProblemKind.MIS:
            independent = all(not (x[i] and x[j]) for i, j in self.edges)
            return float(x.sum()), independent
        cut = sum(w for (i, j), w in zip(self.edges, self.edge_weights) if x[i] != x[j])
        return float(cut), True

    def params(self) -> dict:
        return {"edges": [[i, j, w] for (i, j), w in zip(self.edges, self.edge_weights)]}


ProblemInstance = Union[TspInstance, BppInstance, KpInstance, PoInstance, GraphInstance]


def _generate_tsp(n: int, seed: int) -> TspInstance:
    # one normal draw per pair (i < j), row-major
    rng = _rng(seed)
    pairs = _pairs(n)
    d = rng.normal(TSP_MEAN_DISTANCE, TSP_STD_DISTANCE, size=len(pairs))
    d = np.maximum(d, TSP_MIN_DISTANCE)
    dist = np.zeros((n, n))
    for (i, j), v in zip(pairs, d):
        dist[i, j] = dist[j, i] = v
    return TspInstance(n, _frozen(dist), seed)


def _generate_bpp(n: int, seed: int) -> BppInstance:
    # item weights only
    rng = _rng(seed)
    lo, hi = BPP_WEIGHT_RANGE
    w = rng.integers(lo, hi, size=n, endpoint=True)
    return BppInstance(n, tuple(int(v) for v in w), BPP_MAX_WEIGHT, n, seed)


def _generate_kp(n: int, seed: int) -> KpInstance:
    # all values, then all weights
    rng = _rng(seed)
    v = rng.integers(*KP_VALUE_RANGE, size=n, endpoint=True)
    w = rng.integers(*KP_WEIGHT_RANGE, size=n, endpoint=True)
    return KpInstance(n, tuple(int(a) for a in v), tuple(int(a) for a in w),
                      int(w.sum()) // 2, seed)


def _generate_po(n: int, seed: int, risk_factor: float = 1.0) -> PoInstance:
    # returns, then covariance upper triangle incl. diagonal (row-major), then costs
    rng = _rng(seed)
    mu = rng.random(n)
    iu = np.triu_indices(n)
    picks = rng.choice(np.array(PO_COV_CHOICES), size=len(iu[0]))
    cov = np.zeros((n, n))
    cov[iu] = picks
    cov = cov + np.triu(cov, 1).T
    costs = rng.uniform(*PO_COST_RANGE, size=n)
    return PoInstance(n, _frozen(mu), _frozen(cov), _frozen(costs),
                      float(costs.sum() / 2), float(risk_factor), seed)


def _generate_graph(kind: ProblemKind, n: int, seed: int) -> GraphInstance:
    # one uniform per pair for the edge coin, then (MaxCut) one weight per pair
    rng = _rng(seed)
    pairs = _pairs(n)
    prob = MIS_EDGE_PROB if kind is ProblemKind.MIS else MAXCUT_EDGE_PROB
    present = rng.random(len(pairs)) < prob
    if kind is ProblemKind.MAXCUT:
        weights = 1.0 - rng.random(len(pairs))  # (0, 1]
    else:
        weights = np.ones(len(pairs))
    edges = tuple(p for p, keep in zip(pairs, present) if keep)
    ew = tuple(float(w) for w, keep in zip(weights, present) if keep)
    return GraphInstance(n, edges, ew, kind, seed)


def generate(kind: Union[ProblemKind, str], size: int, seed: int,
             *, risk_factor: float = 1.0) -> ProblemInstance:
    """Draw a random instance of ``kind`` with ``size`` cities/items/assets/vertices.

    ``risk_factor`` only applies to portfolio optimization.
    """
    kind = ProblemKind.parse(kind)
    lo, hi = SIZE_RANGES[kind]
    if not lo <= size <= hi:
        raise SizeError(f"{kind.value} size must be in [{lo}, {hi}], got {size}")
    seed = int(seed)
    if kind is ProblemKind.TSP:
        return _generate_tsp(size, seed)
    if kind is ProblemKind.BPP:
        return _generate_bpp(size, seed)
    if kind is ProblemKind.KP:
        return _generate_kp(size, seed)
    if kind is ProblemKind.PO:
        return _generate_po(size, seed, risk_factor)
    return _generate_graph(kind, size, seed)


def evaluate(instance: ProblemInstance, bits: BitsLike) -> tuple[float, bool]:
    """Classical ``(objective, feasible)`` of an assignment.

    The objective keeps the problem's own sense: tour length and bin count are
    minimized, the rest are maximized.
    """
    return instance.evaluate(bits)


def to_dict(instance: ProblemInstance) -> dict:
    return {"kind": instance.kind.value, "size": instance.size, "seed": instance.seed,
            **instance.params()}


def from_dict(d: dict) -> ProblemInstance:
    kind = ProblemKind.parse(d["kind"])
    n, seed = int(d["size"]), int(d["seed"])
    if kind is ProblemKind.TSP:
        return TspInstance(n, _frozen(d["dist"]), seed)
    if kind is ProblemKind.BPP:
        return BppInstance(n, tuple(d["weights"]), int(d["max_weight"]), int(d["n_bins"]), seed)
    if kind is ProblemKind.KP:
        return KpInstance(n, tuple(d["values"]), tuple(d["weights"]), int(d["max_weight"]), seed)
    if kind is ProblemKind.PO:
        return PoInstance(n, _frozen(d["returns"]), _frozen(d["cov"]), _frozen(d["costs"]),
                          float(d["budget"]), float(d["risk_factor"]), seed)
    edges = tuple((int(i), int(j)) for i, j, _ in d["edges"])
    weights = tuple(float(w) for _, _, w in d["edges"])
    return GraphInstance(n, edges, weights, kind, seed)


def to_json(instance: ProblemInstance) -> str:
    return json.dumps(to_dict(instance), indent=2, sort_keys=True)


def from_json(text: str) -> ProblemInstance:
    return from_dict(json.loads(text))


def instances_equal(a: ProblemInstance, b: ProblemInstance) -> bool:
    """Exact equality, including every float parameter."""
    return to_json(a) == to_json(b)
