"""Pixel-permutation representations of the square and hexagonal point groups.

A symmetry operation is stored as a permutation ``perm`` of 0-based pixel
positions: ``perm[d]`` is the source pixel whose value lands on destination
pixel ``d``, so the transformed chip is ``x[perm]``.  The product ``A * B``
follows matrix convention (apply ``B`` first, then ``A``).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from qfdsym.lattice import LatticeKind, LatticeSpec, pixel_labels, ring_size


class GroupError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SymmetryOp:
    perm: np.ndarray
    label: str
    lattice: LatticeSpec

    def __post_init__(self):
        perm = np.asarray(self.perm, dtype=np.int64)
        N = self.lattice.N
        if perm.shape != (N,):
            raise GroupError(f"{self.label}: permutation length {perm.shape} != ({N},)")
        if not np.array_equal(np.sort(perm), np.arange(N)):
            raise GroupError(f"{self.label}: not a permutation of 0..{N - 1}")
        perm = perm.copy()
        perm.flags.writeable = False
        object.__setattr__(self, "perm", perm)

    @property
    def N(self) -> int:
        return self.lattice.N

    def same_as(self, other: "SymmetryOp") -> bool:
        return np.array_equal(self.perm, other.perm)

    def __mul__(self, other: "SymmetryOp") -> "SymmetryOp":
        if other.lattice != self.lattice:
            raise GroupError("cannot compose operations from different supports")
        return SymmetryOp(other.perm[self.perm], f"{self.label}{other.label}", self.lattice)

    def inverse(self) -> "SymmetryOp":
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(self.N)
        return SymmetryOp(inv, f"{self.label}^-1", self.lattice)

    def cycle_lengths(self) -> list[int]:
        seen = np.zeros(self.N, dtype=bool)
        lengths = []
        for start in range(self.N):
            if seen[start]:
                continue
            k, length = start, 0
            while not seen[k]:
                seen[k] = True
                k = self.perm[k]
                length += 1
            lengths.append(length)
        return lengths

    def rank4_perm(self) -> np.ndarray:
        """Destination-to-source permutation over 0-based 4-indices."""
        p = self.perm
        N = self.N
        # row b, column a holds the source of destination a + b*N
        return (p[:, None] * N + p[None, :]).ravel()

    def matrix(self) -> np.ndarray:
        """Dense 0/1 matrix; only for small-N checks."""
        T = np.zeros((self.N, self.N))
        T[np.arange(self.N), self.perm] = 1.0
        return T


def apply_rank1(op: SymmetryOp, x) -> np.ndarray:
    """Transform chip(s) ``x``; the last axis must have length N."""
    x = np.asarray(x)
    if x.shape[-1] != op.N:
        raise ValueError(f"expected length {op.N} along last axis, got {x.shape[-1]}")
    return x[..., op.perm]


def apply_rank4(op: SymmetryOp, idx: int) -> int:
    """Image of the 1-based 4-index ``idx`` (a basis-vector position) under ``op``."""
    N = op.N
    if not 1 <= idx <= N * N:
        raise ValueError(f"4-index {idx} outside [1, {N * N}]")
    inv = op.inverse().perm
    b, a = divmod(idx - 1, N)
    return int(inv[a] + inv[b] * N + 1)


def apply_rank4_vector(op: SymmetryOp, v) -> np.ndarray:
    """Transform a length ``N**2`` quadratic-term vector."""
    v = np.asarray(v)
    if v.shape[-1] != op.N ** 2:
        raise ValueError(f"expected length {op.N ** 2}, got {v.shape[-1]}")
    return v[..., op.rank4_perm()]


# ---------------------------------------------------------------------------
# closed-form operations

def _square_sources(m: int, i: np.ndarray, j: np.ndarray, n: int):
    r = n + 1
    return {
        1: (i, j),
        2: (j, r - i),
        3: (r - i, r - j),
        4: (r - j, i),
        5: (r - i, j),
        6: (r - j, r - i),
        7: (i, r - j),
        8: (j, i),
    }[m]


def _square_op(spec: LatticeSpec, m: int) -> SymmetryOp:
    n = spec.n
    labels = pixel_labels(spec)
    si, sj = _square_sources(m, labels[:, 0], labels[:, 1], n)
    return SymmetryOp((si - 1) + (sj - 1) * n, f"T{m}", spec)


def _hex_dest_arc(m: int, i: int, j: int) -> int:
    """Destination arc position of source pixel ``(i, j)`` under ``T{m}``."""
    circ = 6 * (j - 1)
    if m <= 6:
        k = m - 1
        raw = i + k * j - (k + 1)
    else:
        k = m - 7
        raw = (6 + k) * j - i - (5 + k)
    # mod 0 is defined as 0 at the centre pixel
    return (raw % circ if circ else 0) + 1


def _hex_op(spec: LatticeSpec, m: int) -> SymmetryOp:
    N = spec.N
    perm = np.empty(N, dtype=np.int64)
    offset = 0
    for j in range(1, spec.n + 1):
        size = ring_size(j)
        for i in range(1, size + 1):
            dest = offset + _hex_dest_arc(m, i, j) - 1
            perm[dest] = offset + i - 1
        offset += size
    return SymmetryOp(perm, f"T{m}", spec)


def table_op(spec: LatticeSpec, m: int) -> SymmetryOp:
    """Operation ``T{m}`` built directly from its closed-form pixel mapping."""
    s = full_order(spec)
    if not 1 <= m <= s:
        raise GroupError(f"T{m} is not an element of the {spec.kind.value} point group")
    if spec.kind is LatticeKind.SQUARE:
        return _square_op(spec, m)
    return _hex_op(spec, m)


def full_order(spec: LatticeSpec) -> int:
    return 8 if spec.kind is LatticeKind.SQUARE else 12


# Factorisation of each element over the two generators (rotation, reflection):
# T_m = rot**a * ref**b.
_FACTORS = {
    LatticeKind.SQUARE: {1: (0, 0), 2: (1, 0), 3: (2, 0), 4: (3, 0),
                         5: (0, 1), 6: (1, 1), 7: (2, 1), 8: (3, 1)},
    LatticeKind.HEXAGONAL: {m: ((m - 1) % 6, (m - 1) // 6) for m in range(1, 13)},
}
_GENERATORS = {LatticeKind.SQUARE: (2, 5), LatticeKind.HEXAGONAL: (2, 7)}


def build_generators(spec: LatticeSpec) -> list[SymmetryOp]:
    """The rotation and reflection generators (T2, T5 square; T2, T7 hexagonal)."""
    return [table_op(spec, m) for m in _GENERATORS[spec.kind]]


def identity(spec: LatticeSpec) -> SymmetryOp:
    return SymmetryOp(np.arange(spec.N), "T1", spec)


def _power(op: SymmetryOp, k: int) -> SymmetryOp:
    out = identity(op.lattice)
    for _ in range(k):
        out = out * op
    return out


def factorised_elements(spec: LatticeSpec) -> dict[int, SymmetryOp]:
    """Every ``T_m`` computed as its generator product, keyed by ``m``."""
    rot, ref = build_generators(spec)
    out = {}
    for m, (a, b) in _FACTORS[spec.kind].items():
        out[m] = SymmetryOp((_power(rot, a) * _power(ref, b)).perm, f"T{m}", spec)
    return out


@dataclass(frozen=True, eq=False)
class GroupRep:
    ops: tuple[SymmetryOp, ...]
    lattice: LatticeSpec
    generators: tuple[str, ...] = field(default=())
    name: str = ""

    @property
    def order(self) -> int:
        return len(self.ops)

    @property
    def labels(self) -> list[str]:
        return [op.label for op in self.ops]

    def __getitem__(self, label: str) -> SymmetryOp:
        for op in self.ops:
            if op.label == label:
                return op
        raise KeyError(label)

    def __iter__(self):
        return iter(self.ops)

    def __len__(self):
        return len(self.ops)

    def find(self, op: SymmetryOp) -> SymmetryOp | None:
        for candidate in self.ops:
            if candidate.same_as(op):
                return candidate
        return None

    def perm_stack(self) -> np.ndarray:
        return np.stack([op.perm for op in self.ops])


def generate_group(generators, spec: LatticeSpec | None = None, max_order: int | None = None,
                   name: str = "") -> GroupRep:
    """Close ``generators`` under composition and label the result.

    The identity is inserted directly.  Elements are labelled by matching them
    against the generator factorisations of the full point group, and every
    label whose permutation lies in the closure is kept.  For the one-pixel
    support all labels coincide with the identity permutation, so the full
    group then still lists ``s`` (equal) operations.
    """
    generators = list(generators)
    if spec is None:
        if not generators:
            raise GroupError("need a lattice when no generators are given")
        spec = generators[0].lattice
    for g in generators:
        if g.lattice != spec:
            raise GroupError("generators drawn from different supports")
    bound = max_order or full_order(spec)

    closure = {identity(spec).perm.tobytes(): identity(spec)}
    frontier = list(closure.values())
    while frontier:
        nxt = []
        for a in frontier:
            for g in generators:
                c = a * g
                key = c.perm.tobytes()
                if key not in closure:
                    closure[key] = c
                    nxt.append(c)
                    if len(closure) > bound:
                        raise GroupError(f"closure exceeds {bound} elements; not a point-group generating set")
        frontier = nxt

    catalogue = factorised_elements(spec)
    ops = [op for m, op in sorted(catalogue.items()) if op.perm.tobytes() in closure]
    covered = {op.perm.tobytes() for op in ops}
    if covered != set(closure):
        raise GroupError("closure contains permutations outside the point group")
    return GroupRep(tuple(ops), spec, tuple(g.label for g in generators), name)


def full_group(spec: LatticeSpec) -> GroupRep:
    return generate_group(build_generators(spec), spec, name="full")


def trivial_group(spec: LatticeSpec) -> GroupRep:
    return generate_group([], spec, name="trivial")


SUBGROUPS = {
    LatticeKind.SQUARE: {
        "full": (1, 2, 3, 4, 5, 6, 7, 8),
        "rot4": (1, 2, 3, 4),
        "rect": (1, 3, 5, 7),
        "rect-diag": (1, 3, 6, 8),
        "rot2": (1, 3),
        "mirror-x": (1, 5),
        "mirror-diag": (1, 6),
        "mirror-y": (1, 7),
        "mirror-antidiag": (1, 8),
        "trivial": (1,),
    },
    LatticeKind.HEXAGONAL: {
        "full": tuple(range(1, 13)),
        "rot6": (1, 2, 3, 4, 5, 6),
        "tri": (1, 3, 5, 7, 9, 11),
        "tri-alt": (1, 3, 5, 8, 10, 12),
        "rot3": (1, 3, 5),
        **{f"mirror-{m}": (1, m) for m in range(7, 13)},
        "trivial": (1,),
    },
}
# side-looking SAR keeps only the range-direction mirror line
SUBGROUPS[LatticeKind.SQUARE]["range-mirror"] = (1, 7)


def parse_selector(spec: LatticeSpec, selector: str) -> tuple[int, ...]:
    """Resolve a subgroup name or an explicit label list like ``"T1,T7"``."""
    catalogue = SUBGROUPS[spec.kind]
    sel = selector.strip()
    if sel in catalogue:
        return catalogue[sel]
    try:
        members = tuple(sorted({int(tok.strip().upper().lstrip("T")) for tok in sel.strip("{}").split(",")}))
    except ValueError:
        raise GroupError(f"unknown subgroup selector {selector!r}") from None
    for elements in catalogue.values():
        if elements == members:
            return members
    raise GroupError(f"{selector!r} is not a listed {spec.kind.value} subgroup")


def canonical_selector(spec: LatticeSpec, selector: str) -> str:
    members = parse_selector(spec, selector)
    for name, elements in SUBGROUPS[spec.kind].items():
        if elements == members:
            return name
    raise AssertionError("unreachable")


def subgroup(rep: GroupRep, selector: str) -> GroupRep:
    members = parse_selector(rep.lattice, selector)
    ops = tuple(rep[f"T{m}"] for m in members)
    sub = GroupRep(ops, rep.lattice, rep.generators, canonical_selector(rep.lattice, selector))
    report = verify_group(sub, check_witness=False)
    if not report.ok:
        raise GroupError(f"subgroup {selector!r} failed verification: {report.failures}")
    return sub


def group_for(spec: LatticeSpec, selector: str = "full") -> GroupRep:
    return subgroup(full_group(spec), selector)


# ---------------------------------------------------------------------------
# verification

@dataclass
class GroupReport:
    order: int
    checks: dict[str, bool] = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def record(self, name: str, passed: bool, detail: str = ""):
        self.checks[name] = self.checks.get(name, True) and passed
        if not passed:
            self.failures.append(f"{name}: {detail}" if detail else name)


def verify_group(rep: GroupRep, samples: int = 64, seed: int = 0, check_witness: bool = True) -> GroupReport:
    report = GroupReport(rep.order)
    N = rep.lattice.N
    ident = np.arange(N)

    for op in rep.ops:
        valid = np.array_equal(np.sort(op.perm), ident)
        report.record("permutation", valid, f"{op.label} is not a permutation")

    report.record("identity", any(np.array_equal(op.perm, ident) for op in rep.ops), "no identity element")

    for a in rep.ops:
        for b in rep.ops:
            report.record("closure", rep.find(a * b) is not None, f"{a.label}{b.label} not in group")
        inv = a.inverse()
        report.record("inverse", rep.find(inv) is not None, f"inverse of {a.label} missing")
        report.record("orthogonality", np.array_equal((a * inv).perm, ident),
                      f"{a.label} times its inverse is not the identity")

    rng = random.Random(seed)
    for _ in range(samples):
        a, b, c = (rng.choice(rep.ops) for _ in range(3))
        report.record("associativity", ((a * b) * c).same_as(a * (b * c)),
                      f"({a.label}{b.label}){c.label} != {a.label}({b.label}{c.label})")

    if check_witness and rep.order == full_order(rep.lattice) and N > 1:
        if rep.lattice.kind is LatticeKind.SQUARE:
            t2, t4, t5, t6 = (rep[f"T{m}"] for m in (2, 4, 5, 6))
            ok = (t5 * t6).same_as(t4) and (t6 * t5).same_as(t2) and not t4.same_as(t2)
            report.record("non_abelian", ok, "T5 T6 = T4 != T2 = T6 T5 does not hold")
        else:
            t2, t7, t8 = rep["T2"], rep["T7"], rep["T8"]
            ok = (t2 * t7).same_as(t8) and not (t7 * t2).same_as(t8)
            report.record("non_abelian", ok, "T2 T7 = T8 != T7 T2 does not hold")
        for m, op in factorised_elements(rep.lattice).items():
            report.record("closed_form", op.same_as(table_op(rep.lattice, m)),
                          f"T{m} generator product differs from its closed form")
    return report
