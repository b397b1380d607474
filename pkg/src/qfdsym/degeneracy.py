"""Orbit partitions of coefficient indices and the degeneracy map built on them.

The degeneracy matrix is a 0/1 matrix with one column per orbit.  It is never
materialised: a partition keeps a class id per index, which is all that the
reduce (``D.T @ v``) and expand (``D @ f``) operations need.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from qfdsym.group import GroupRep, generate_group
from qfdsym.lattice import LatticeSpec


class UnionFind:
    """Disjoint sets over ``0..size-1`` with path halving and union by size."""

    def __init__(self, size: int):
        self.parent = list(range(size))
        self.size = [1] * size

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, x: int, y: int) -> None:
        x, y = self.find(x), self.find(y)
        if x == y:
            return
        if self.size[x] < self.size[y]:
            x, y = y, x
        self.parent[y] = x
        self.size[x] += self.size[y]

    def roots(self) -> np.ndarray:
        return np.fromiter((self.find(x) for x in range(len(self.parent))), dtype=np.int64,
                           count=len(self.parent))


def _union_actions(size: int, actions) -> np.ndarray:
    uf = UnionFind(size)
    for images in actions:
        for x, y in enumerate(images.tolist()):
            if x != y:
                uf.union(x, y)
    return uf.roots()


@dataclass(frozen=True, eq=False)
class OrbitPartition:
    """``labels[k]`` is the class id of 0-based index ``k``.

    Class ids are ordered by their smallest member.
    """

    labels: np.ndarray
    sizes: np.ndarray

    @classmethod
    def from_roots(cls, roots) -> "OrbitPartition":
        _, first, inverse = np.unique(roots, return_index=True, return_inverse=True)
        rank = np.empty(len(first), dtype=np.int64)
        rank[np.argsort(first)] = np.arange(len(first))
        labels = rank[inverse.ravel()]
        labels.flags.writeable = False
        sizes = np.bincount(labels)
        sizes.flags.writeable = False
        return cls(labels, sizes)

    @property
    def domain_size(self) -> int:
        return len(self.labels)

    @property
    def count(self) -> int:
        return len(self.sizes)

    def classes(self) -> list[np.ndarray]:
        order = np.argsort(self.labels, kind="stable")
        return np.split(order, np.cumsum(self.sizes)[:-1])

    def reduce(self, v) -> np.ndarray:
        """Sum entries of ``v`` (last axis) over each class."""
        v = np.asarray(v, dtype=float)
        if v.shape[-1] != self.domain_size:
            raise ValueError(f"expected length {self.domain_size}, got {v.shape[-1]}")
        if v.ndim == 1:
            return np.bincount(self.labels, weights=v, minlength=self.count)
        rows = v.reshape(-1, self.domain_size)
        k = self.count
        offsets = (np.arange(len(rows)) * k)[:, None]
        flat = np.bincount((self.labels[None, :] + offsets).ravel(), weights=rows.ravel(),
                           minlength=len(rows) * k)
        return flat.reshape(v.shape[:-1] + (k,))

    def expand(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if r.shape[-1] != self.count:
            raise ValueError(f"expected length {self.count}, got {r.shape[-1]}")
        return r[..., self.labels]


def swap_perm(N: int) -> np.ndarray:
    """Image of every 0-based 4-index under ``(a, b) -> (b, a)``."""
    return np.arange(N * N).reshape(N, N).T.ravel()


def orbit_partition_rank2(rep: GroupRep) -> OrbitPartition:
    N = rep.lattice.N
    return OrbitPartition.from_roots(_union_actions(N, (op.perm for op in rep.ops)))


def orbit_partition_rank4(rep: GroupRep, swap: bool = True) -> OrbitPartition:
    """Orbits of pixel pairs under the group, combined with the pair swap unless ``swap`` is off."""
    N = rep.lattice.N
    actions = [op.rank4_perm() for op in _generating_subset(rep)]
    if swap:
        actions.append(swap_perm(N))
    return OrbitPartition.from_roots(_union_actions(N * N, actions))


def _generating_subset(rep: GroupRep):
    # orbits only need a generating set; drop elements the kept ones produce
    kept = []
    for op in rep.ops:
        if kept and generate_group(kept, rep.lattice).find(op) is not None:
            continue
        if op.label == "T1":
            continue
        kept.append(op)
    return kept


class DofCounts(NamedTuple):
    linear: int
    quadratic: int
    total: int


@dataclass(frozen=True, eq=False)
class DegeneracyMatrix:
    lattice: LatticeSpec
    selector: str
    order: int
    linear: OrbitPartition
    quadratic: OrbitPartition

    @property
    def N(self) -> int:
        return self.lattice.N

    @property
    def dof_linear(self) -> int:
        return self.linear.count

    @property
    def dof_quadratic(self) -> int:
        return self.quadratic.count

    @property
    def dof(self) -> int:
        return self.dof_linear + self.dof_quadratic

    @property
    def full_size(self) -> int:
        return self.N + self.N * self.N

    @property
    def class_sizes(self) -> np.ndarray:
        return np.concatenate([self.linear.sizes, self.quadratic.sizes])

    @property
    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(f"{self.lattice.kind.value}:{self.lattice.n}:".encode())
        h.update(self.linear.labels.astype("<i8").tobytes())
        h.update(self.quadratic.labels.astype("<i8").tobytes())
        return h.hexdigest()[:16]

    def counts(self) -> DofCounts:
        return DofCounts(self.dof_linear, self.dof_quadratic, self.dof)

    def reduce_vector(self, full) -> np.ndarray:
        full = np.asarray(full, dtype=float)
        if full.shape[-1] != self.full_size:
            raise ValueError(f"expected length {self.full_size}, got {full.shape[-1]}")
        N = self.N
        return np.concatenate([self.linear.reduce(full[..., :N]),
                               self.quadratic.reduce(full[..., N:])], axis=-1)

    def expand_vector(self, reduced) -> np.ndarray:
        reduced = np.asarray(reduced, dtype=float)
        if reduced.shape[-1] != self.dof:
            raise ValueError(f"expected length {self.dof}, got {reduced.shape[-1]}")
        k = self.dof_linear
        return np.concatenate([self.linear.expand(reduced[..., :k]),
                               self.quadratic.expand(reduced[..., k:])], axis=-1)

    def reduce_chips(self, chips, batch: int = 256) -> np.ndarray:
        """Reduced feature vectors ``D.T @ [x; x (x) x]`` for each chip row."""
        chips = np.atleast_2d(np.asarray(chips, dtype=float))
        N = self.N
        if chips.shape[1] != N:
            raise ValueError(f"chips must have {N} pixels, got {chips.shape[1]}")
        out = np.empty((len(chips), self.dof))
        k = self.dof_linear
        for start in range(0, len(chips), batch):
            x = chips[start:start + batch]
            out[start:start + batch, :k] = self.linear.reduce(x)
            # 4-index a + b*N is row b, column a of the outer product
            quad = (x[:, :, None] * x[:, None, :]).reshape(len(x), N * N)
            out[start:start + batch, k:] = self.quadratic.reduce(quad)
        return out


def degeneracy_matrix(rep: GroupRep) -> DegeneracyMatrix:
    return DegeneracyMatrix(rep.lattice, rep.name, rep.order,
                            orbit_partition_rank2(rep), orbit_partition_rank4(rep))


def reduce_vector(D: DegeneracyMatrix, full) -> np.ndarray:
    return D.reduce_vector(full)


def expand_vector(D: DegeneracyMatrix, reduced) -> np.ndarray:
    return D.expand_vector(reduced)


def dof_table(spec: LatticeSpec, rep: GroupRep) -> DofCounts:
    if rep.lattice != spec:
        raise ValueError(f"group was built for {rep.lattice}, not {spec}")
    return degeneracy_matrix(rep).counts()
