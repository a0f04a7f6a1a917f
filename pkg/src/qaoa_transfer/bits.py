"""Bit ordering helpers.

Convention used everywhere in the package: variable ``x_0`` is the leftmost
character of a bitstring and the least-significant bit of a state-vector
index. So basis index ``k`` holds ``x_i = (k >> i) & 1`` and its bitstring is
``"".join(str(x_i) for i in range(n))``.
"""

from __future__ import annotations

from typing import Sequence, Union

import numpy as np

from .exceptions import DimensionError

BitsLike = Union[str, Sequence[int], np.ndarray]


def as_bits(a: BitsLike, n: int | None = None) -> np.ndarray:
    """Return ``a`` as a uint8 vector of 0/1, checking its length against ``n``."""
    if isinstance(a, str):
        if any(c not in "01" for c in a):
            raise ValueError(f"not a bitstring: {a!r}")
        bits = np.fromiter((c == "1" for c in a), dtype=np.uint8, count=len(a))
    else:
        bits = np.asarray(a)
        if bits.ndim != 1:
            raise DimensionError(f"assignment must be one-dimensional, got shape {bits.shape}")
        if bits.size and not np.all((bits == 0) | (bits == 1)):
            raise ValueError("assignment entries must be 0 or 1")
        bits = bits.astype(np.uint8)
    if n is not None and bits.size != n:
        raise DimensionError(f"assignment has {bits.size} bits, expected {n}")
    return bits


def to_bitstring(bits: BitsLike) -> str:
    return "".join("1" if b else "0" for b in as_bits(bits))


def index_to_bitstring(k: int, n: int) -> str:
    return "".join("1" if (k >> i) & 1 else "0" for i in range(n))


def bitstring_to_index(s: str) -> int:
    return sum(1 << i for i, c in enumerate(s) if c == "1")


def index_bits(indices: np.ndarray, n: int) -> np.ndarray:
    """Bit matrix of shape ``(len(indices), n)`` for an array of basis indices."""
    indices = np.asarray(indices, dtype=np.int64)
    return ((indices[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(np.uint8)
