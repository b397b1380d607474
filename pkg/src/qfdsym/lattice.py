"""Support geometry and index bijections for square and hexagonal lattices.

All scalar index helpers here are 1-based: a pixel label ``(i, j)`` maps to a
2-index in ``[1, N]`` and a pair of 2-indices maps to a 4-index in
``[1, N**2]``.  Array-valued helpers (``pixel_labels``, ``coordinates``) are
ordered by 2-index, so row ``d`` of their output belongs to 2-index ``d + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np


class LatticeKind(str, Enum):
    SQUARE = "square"
    HEXAGONAL = "hexagonal"


@dataclass(frozen=True)
class LatticeSpec:
    """A detector support: lattice kind plus linear dimension ``n``.

    For the square lattice ``n`` is the side length in pixels.  For the
    hexagonal lattice ``n`` counts concentric hexagons, the centre pixel being
    the first.
    """

    kind: LatticeKind
    n: int

    def __post_init__(self):
        object.__setattr__(self, "kind", LatticeKind(self.kind))
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)):
            raise TypeError(f"n must be an integer, got {self.n!r}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def N(self) -> int:
        return pixel_count(self)

    def __str__(self):
        return f"{self.kind.value}(n={self.n})"


def square(n: int) -> LatticeSpec:
    return LatticeSpec(LatticeKind.SQUARE, n)


def hexagonal(n: int) -> LatticeSpec:
    return LatticeSpec(LatticeKind.HEXAGONAL, n)


def pixel_count(spec: LatticeSpec) -> int:
    n = spec.n
    if spec.kind is LatticeKind.SQUARE:
        return n * n
    return 1 + 3 * n * (n - 1)


def ring_size(j: int) -> int:
    """Number of lattice points on hexagonal ring ``j`` (the centre is ring 1)."""
    if j < 1:
        raise ValueError(f"ring index must be >= 1, got {j}")
    return max(6 * (j - 1), 1)


def _check_int(name, value, lo, hi):
    if not lo <= value <= hi:
        raise ValueError(f"{name}={value} outside [{lo}, {hi}]")


def flatten_square(i: int, j: int, n: int) -> int:
    """Column-ordered 2-index of row ``i``, column ``j``."""
    _check_int("i", i, 1, n)
    _check_int("j", j, 1, n)
    return i + (j - 1) * n


def unflatten_square(index: int, n: int) -> tuple[int, int]:
    _check_int("index", index, 1, n * n)
    j, i = divmod(index - 1, n)
    return i + 1, j + 1


def flatten_hex(i: int, j: int) -> int:
    """Spiral 2-index of arc position ``i`` on ring ``j``."""
    if j < 1:
        raise ValueError(f"ring j={j} must be >= 1")
    _check_int("i", i, 1, ring_size(j))
    return i + min(1, j - 1) + 3 * (j - 2) * (j - 1)


def unflatten_hex(index: int) -> tuple[int, int]:
    if index < 1:
        raise ValueError(f"index={index} must be >= 1")
    if index == 1:
        return 1, 1
    # ring j holds 2-indices 2 + 3(j-1)(j-2) .. 1 + 3j(j-1)
    j = max(2, math.isqrt((index - 1) // 3))
    while 1 + 3 * j * (j - 1) < index:
        j += 1
    while j > 2 and 1 + 3 * (j - 1) * (j - 2) >= index:
        j -= 1
    i = index - 1 - 3 * (j - 2) * (j - 1)
    return i, j


def flatten(spec: LatticeSpec, i: int, j: int) -> int:
    if spec.kind is LatticeKind.SQUARE:
        return flatten_square(i, j, spec.n)
    _check_int("j", j, 1, spec.n)
    return flatten_hex(i, j)


def unflatten(spec: LatticeSpec, index: int) -> tuple[int, int]:
    if spec.kind is LatticeKind.SQUARE:
        return unflatten_square(index, spec.n)
    _check_int("index", index, 1, spec.N)
    return unflatten_hex(index)


def pair_index(a: int, b: int, N: int) -> int:
    """4-index of the ordered pair of 2-indices ``(a, b)``."""
    _check_int("a", a, 1, N)
    _check_int("b", b, 1, N)
    return a + (b - 1) * N


def unpair_index(index: int, N: int) -> tuple[int, int]:
    _check_int("index", index, 1, N * N)
    b, a = divmod(index - 1, N)
    return a + 1, b + 1


def pixel_labels(spec: LatticeSpec) -> np.ndarray:
    """``(N, 2)`` integer array of ``(i, j)`` labels ordered by 2-index."""
    labels = np.empty((spec.N, 2), dtype=np.int64)
    if spec.kind is LatticeKind.SQUARE:
        n = spec.n
        d = np.arange(spec.N)
        labels[:, 0] = d % n + 1
        labels[:, 1] = d // n + 1
        return labels
    d = 0
    for j in range(1, spec.n + 1):
        for i in range(1, ring_size(j) + 1):
            labels[d] = (i, j)
            d += 1
    return labels


def coordinates(spec: LatticeSpec) -> np.ndarray:
    """``(N, 2)`` planar positions of each pixel in lattice-spacing units.

    Square pixels sit on the integer grid centred on the support centre
    (row ``i`` along the first axis).  Hexagonal arc position 1 of every ring
    lies on the positive x-axis and arc positions advance anticlockwise.
    """
    labels = pixel_labels(spec)
    if spec.kind is LatticeKind.SQUARE:
        centre = (spec.n + 1) / 2.0
        return labels.astype(float) - centre
    xy = np.zeros((spec.N, 2))
    corners = np.array(
        [[math.cos(k * math.pi / 3), math.sin(k * math.pi / 3)] for k in range(7)]
    )
    for d, (i, j) in enumerate(labels):
        r = j - 1
        if r == 0:
            continue
        side, step = divmod(i - 1, r)
        xy[d] = r * corners[side] + step * (corners[side + 1] - corners[side])
    return xy
