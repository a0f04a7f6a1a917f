"""Annealing schedules s(t) synthesized from QAOA angles.

The annealer evolves under ``H(s) = -A(s)/2 sum X + B(s)/2 H_c`` and accepts
a piecewise-linear ``s = f(t)`` of at most 12 points. To carry a QAOA angle
sequence over, each layer's angle is turned into a target amplitude:

* ``MIXER``: ``a_k = A(0) * beta_k / max(beta)``, solved for ``s_k`` on the
  ``A`` curve;
* ``COST``: ``b_k = B(1) * gamma_k / max(gamma)``, solved on the ``B`` curve.

So the mixer (or cost) amplitude at layer ``k`` is proportional to that
layer's angle. Layers sit on a uniform time grid inside ``(0, t_f)``. The
points are made non-decreasing by forward clamping, pinned to ``(0, 0)`` and
``(t_f, 1)``, and then thinned to 12 points by greedy largest-deviation
insertion.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .exceptions import ScheduleError
from .params import QaoaParams
from .records import atomic_write_text

MAX_POINTS = 12
_FLAT_TOL = 1e-12


class ScheduleMode(str, Enum):
    MIXER = "mixer"
    COST = "cost"


@dataclass(frozen=True, eq=False)
class ScheduleTable:
    """Device curves ``A(s)`` and ``B(s)`` in GHz on an increasing ``s`` grid."""

    s: np.ndarray
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        s, A, B = (np.asarray(v, dtype=float) for v in (self.s, self.A, self.B))
        if not (s.ndim == A.ndim == B.ndim == 1 and s.size == A.size == B.size >= 2):
            raise ScheduleError("table columns must be 1-D and of equal length >= 2")
        if s[0] != 0.0 or s[-1] != 1.0 or np.any(np.diff(s) <= 0):
            raise ScheduleError("s must increase strictly from 0 to 1")
        if np.any(np.diff(A) > 0):
            raise ScheduleError("A(s) must be non-increasing")
        if np.any(np.diff(B) < 0):
            raise ScheduleError("B(s) must be non-decreasing")
        if A[0] == A[-1] or B[0] == B[-1]:
            raise ScheduleError("A(s) and B(s) must not be constant")
        for name, v in (("s", s), ("A", A), ("B", B)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @classmethod
    def linear(cls, n_points: int = 11, scale: float = 1.0) -> "ScheduleTable":
        """Synthetic table with ``A(s) = scale * (1 - s)`` and ``B(s) = scale * s``."""
        s = np.linspace(0.0, 1.0, n_points)
        return cls(s, scale * (1.0 - s), scale * s)

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "ScheduleTable":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(line for line in fh if not line.startswith("#")))
        try:
            return cls([float(r["s"]) for r in rows], [float(r["A_GHz"]) for r in rows],
                       [float(r["B_GHz"]) for r in rows])
        except KeyError as exc:
            raise ScheduleError(f"table is missing column {exc}") from None

    def to_csv(self, path: Union[str, Path]) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["s", "A_GHz", "B_GHz"])
            for row in zip(self.s, self.A, self.B):
                w.writerow([repr(float(v)) for v in row])

    def invert_A(self, a: np.ndarray) -> np.ndarray:
        return _invert(self.s, self.A, a, "A")

    def invert_B(self, b: np.ndarray) -> np.ndarray:
        return _invert(self.s, self.B, b, "B")


def _invert(s: np.ndarray, f: np.ndarray, targets: np.ndarray, name: str) -> np.ndarray:
    lo, hi = float(f.min()), float(f.max())
    targets = np.asarray(targets, dtype=float)
    out_of_range = (targets < lo - _FLAT_TOL) | (targets > hi + _FLAT_TOL)
    if np.any(out_of_range):
        warnings.warn(f"{int(out_of_range.sum())} {name} target(s) outside "
                      f"[{lo:g}, {hi:g}]; clamped", stacklevel=3)
    targets = np.clip(targets, lo, hi)
    if f[0] > f[-1]:  # np.interp needs increasing abscissae
        return np.interp(targets, f[::-1], s[::-1])
    return np.interp(targets, f, s)


@dataclass(frozen=True)
class Schedule:
    points: tuple[tuple[float, float], ...]
    mode: Optional[str] = None
    source: Optional[str] = None

    @property
    def t_f(self) -> float:
        return self.points[-1][0]

    def validate(self) -> None:
        pts = self.points
        if not 2 <= len(pts) <= MAX_POINTS:
            raise ScheduleError(f"schedule needs 2..{MAX_POINTS} points, has {len(pts)}")
        if pts[0] != (0.0, 0.0) or pts[-1][1] != 1.0:
            raise ScheduleError("schedule must start at (0, 0) and end at s = 1")
        t = np.array([p[0] for p in pts])
        s = np.array([p[1] for p in pts])
        if np.any(np.diff(t) <= 0) or np.any(np.diff(s) < 0):
            raise ScheduleError("t must increase strictly and s must not decrease")

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# mode={self.mode or 'default'} t_f={self.t_f!r} "
                  f"source={self.source or '-'}\n")
        buf.write("# columns: t_us,s\n")
        for t, s in self.points:
            buf.write(f"{t!r},{s!r}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Schedule":
        lines = text.splitlines()
        header = dict(tok.split("=", 1) for tok in lines[0].lstrip("# ").split())
        pts = tuple((float(t), float(s)) for t, s in
                    (ln.split(",") for ln in lines if ln and not ln.startswith("#")))
        mode = None if header.get("mode") == "default" else header.get("mode")
        source = None if header.get("source") == "-" else header.get("source")
        return cls(pts, mode, source)


def default_schedule(t_f: float) -> Schedule:
    """The device default ``s = t / t_f``."""
    if t_f <= 0:
        raise ValueError("t_f must be positive")
    return Schedule(((0.0, 0.0), (float(t_f), 1.0)))


def _interp_deviation(t: np.ndarray, s: np.ndarray, kept: list[int]) -> np.ndarray:
    return np.abs(s - np.interp(t, t[kept], s[kept]))


def downsample(t: Sequence[float], s: Sequence[float],
               max_points: int = MAX_POINTS) -> list[int]:
    """Indices kept by greedy largest-deviation insertion, endpoints always kept.

    Insertion stops at ``max_points`` or once every dropped point lies on the
    kept polyline.
    """
    t, s = np.asarray(t, dtype=float), np.asarray(s, dtype=float)
    kept = [0, t.size - 1]
    while len(kept) < max_points:
        dev = _interp_deviation(t, s, kept)
        dev[kept] = -1.0
        k = int(np.argmax(dev))
        if dev[k] <= _FLAT_TOL:
            break
        kept = sorted(kept + [k])
    return kept


def schedule_from_params(params: QaoaParams, table: ScheduleTable,
                         mode: Union[ScheduleMode, str], t_f: float,
                         source: Optional[str] = None) -> Schedule:
    if t_f <= 0:
        raise ValueError("t_f must be positive")
    mode = ScheduleMode(mode)
    angles = params.betas if mode is ScheduleMode.MIXER else params.gammas
    peak = float(angles.max())
    if peak <= 0:
        # non-positive angle sequences: scale by magnitude, negatives then clamp
        peak = float(np.abs(angles).max())
    ratio = angles / peak if peak > 0 else np.zeros_like(angles)
    if mode is ScheduleMode.MIXER:
        s_layers = table.invert_A(table.A[0] * ratio)
    else:
        s_layers = table.invert_B(table.B[-1] * ratio)
    s_layers = np.maximum.accumulate(np.clip(s_layers, 0.0, 1.0))
    p = params.p
    t_layers = t_f * np.arange(1, p + 1) / (p + 1)
    t_all = np.concatenate([[0.0], t_layers, [t_f]])
    s_all = np.concatenate([[0.0], s_layers, [1.0]])
    kept = downsample(t_all, s_all)
    points = tuple((float(t_all[k]), float(s_all[k])) for k in kept)
    return Schedule(points, mode.value, source)


def export_schedule(schedule: Schedule, path: Union[str, Path]) -> None:
    schedule.validate()
    atomic_write_text(path, schedule.to_csv())


def read_schedule(path: Union[str, Path]) -> Schedule:
    return Schedule.from_csv(Path(path).read_text())
