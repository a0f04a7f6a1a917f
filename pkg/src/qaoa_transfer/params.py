"""QAOA angle container shared by the simulator, optimizer and transfer code."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True, eq=False)
class QaoaParams:
    """Cost angles ``gammas`` and mixer angles ``betas`` for ``p`` layers (radians)."""

    gammas: np.ndarray
    betas: np.ndarray

    def __post_init__(self):
        g = np.array(self.gammas, dtype=float).reshape(-1)
        b = np.array(self.betas, dtype=float).reshape(-1)
        if g.size != b.size:
            raise ValueError(f"got {g.size} gammas but {b.size} betas")
        if g.size < 1:
            raise ValueError("need at least one layer")
        g.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "gammas", g)
        object.__setattr__(self, "betas", b)

    @property
    def p(self) -> int:
        return self.gammas.size

    @classmethod
    def from_vector(cls, x: Sequence[float]) -> "QaoaParams":
        """Inverse of :meth:`to_vector`: first half gammas, second half betas."""
        x = np.asarray(x, dtype=float)
        if x.size % 2:
            raise ValueError("parameter vector must have even length")
        return cls(x[: x.size // 2], x[x.size // 2:])

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.gammas, self.betas])

    def to_dict(self) -> dict:
        return {"p": self.p, "gammas": self.gammas.tolist(), "betas": self.betas.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "QaoaParams":
        return cls(d["gammas"], d["betas"])

    def __eq__(self, other):
        if not isinstance(other, QaoaParams):
            return NotImplemented
        return (np.array_equal(self.gammas, other.gammas)
                and np.array_equal(self.betas, other.betas))

    __hash__ = None
