"""Ensemble moments of the stacked pixel/pixel-product feature vector.

The production path accumulates moments of reduced features
``z = D.T @ [x; x (x) x]`` only.  Full-coordinate helpers
(``full_stats``, ``symmetrise_full_stats``) exist for small-support
verification.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from qfdsym.degeneracy import DegeneracyMatrix
from qfdsym.group import GroupRep


@dataclass(frozen=True)
class FeatureVector:
    linear: np.ndarray
    quadratic: np.ndarray

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.linear, self.quadratic])


def features(chip) -> FeatureVector:
    """Pixel values and all ordered pixel-pair products of one chip."""
    x = np.asarray(chip, dtype=float)
    if x.ndim != 1:
        raise ValueError("features() takes a single chip vector")
    # entry a + b*N is x[a] * x[b]
    return FeatureVector(x.copy(), np.outer(x, x).ravel())


def full_features(chips) -> np.ndarray:
    chips = np.atleast_2d(np.asarray(chips, dtype=float))
    M, N = chips.shape
    quad = (chips[:, :, None] * chips[:, None, :]).reshape(M, N * N)
    return np.hstack([chips, quad])


class InsufficientDataError(ValueError):
    pass


@dataclass
class EnsembleStats:
    """Mergeable running mean and scatter of reduced features.

    ``scatter`` is the sum of outer products of deviations from the mean, so
    the sample covariance is ``scatter / (count - 1)``.
    """

    degeneracy: DegeneracyMatrix
    count: int = 0
    mean: np.ndarray = field(default=None)
    scatter: np.ndarray = field(default=None)

    def __post_init__(self):
        k = self.degeneracy.dof
        if self.mean is None:
            self.mean = np.zeros(k)
        if self.scatter is None:
            self.scatter = np.zeros((k, k))
        if self.mean.shape != (k,) or self.scatter.shape != (k, k):
            raise ValueError(f"moment shapes do not match {k} degrees of freedom")

    @property
    def dof(self) -> int:
        return self.degeneracy.dof

    @property
    def fingerprint(self) -> str:
        return self.degeneracy.fingerprint

    @property
    def cov(self) -> np.ndarray:
        if self.count < 2:
            raise InsufficientDataError(f"covariance needs >= 2 chips, have {self.count}")
        return self.scatter / (self.count - 1)

    @property
    def cov_valid(self) -> bool:
        return self.count >= 2

    def _combine(self, count, mean, scatter):
        if count == 0:
            return self
        total = self.count + count
        delta = mean - self.mean
        self.mean = self.mean + delta * (count / total)
        self.scatter = self.scatter + scatter + np.outer(delta, delta) * (self.count * count / total)
        self.count = total
        return self

    def add_reduced(self, z) -> "EnsembleStats":
        z = np.atleast_2d(np.asarray(z, dtype=float))
        if z.shape[1] != self.dof:
            raise ValueError(f"reduced features must have length {self.dof}, got {z.shape[1]}")
        if len(z) == 0:
            return self
        mean = z.mean(axis=0)
        dev = z - mean
        scatter = dev.T @ dev
        return self._combine(len(z), mean, 0.5 * (scatter + scatter.T))

    def add(self, chips, batch: int = 256) -> "EnsembleStats":
        chips = np.atleast_2d(np.asarray(chips, dtype=float))
        if chips.shape[1] != self.degeneracy.N:
            raise ValueError(f"chips must have {self.degeneracy.N} pixels, got {chips.shape[1]}")
        for start in range(0, len(chips), batch):
            self.add_reduced(self.degeneracy.reduce_chips(chips[start:start + batch]))
        return self

    def merge(self, other: "EnsembleStats") -> "EnsembleStats":
        """Combined accumulator; neither input is modified."""
        if other.fingerprint != self.fingerprint:
            raise ValueError("cannot merge statistics built on different degeneracy matrices")
        out = self.copy()
        return out._combine(other.count, other.mean, other.scatter)

    def copy(self) -> "EnsembleStats":
        return EnsembleStats(self.degeneracy, self.count, self.mean.copy(), self.scatter.copy())


def accumulate(stats: EnsembleStats, chip) -> EnsembleStats:
    return stats.add(chip)


def ensemble_stats(D: DegeneracyMatrix, chips) -> EnsembleStats:
    return EnsembleStats(D).add(chips)


def full_stats(chips) -> tuple[np.ndarray, np.ndarray]:
    """Mean and sample covariance of full ``N + N**2`` feature vectors."""
    X = full_features(chips)
    if len(X) < 2:
        raise InsufficientDataError("covariance needs >= 2 chips")
    g = X.mean(axis=0)
    dev = X - g
    return g, dev.T @ dev / (len(X) - 1)


def block_perm(op) -> np.ndarray:
    """Destination-to-source permutation of the stacked ``N + N**2`` vector."""
    return np.concatenate([op.perm, op.N + op.rank4_perm()])


def symmetrise_full_stats(g, C, rep: GroupRep) -> tuple[np.ndarray, np.ndarray]:
    """Group-averaged mean and two-sided group-averaged covariance."""
    g = np.asarray(g, dtype=float)
    C = np.asarray(C, dtype=float)
    N = rep.lattice.N
    F = N + N * N
    if g.shape != (F,) or C.shape != (F, F):
        raise ValueError(f"full statistics must have dimension {F}")
    g_sym = np.zeros(F)
    C_sym = np.zeros((F, F))
    for op in rep.ops:
        P = block_perm(op)
        g_sym += g[P]
        C_sym += C[np.ix_(P, P)]
    s = rep.order
    return g_sym / s, C_sym / s


def project_cov(D: DegeneracyMatrix, C) -> np.ndarray:
    """``D.T @ C @ D`` through the class map."""
    return D.reduce_vector(D.reduce_vector(np.asarray(C, dtype=float)).T)


@dataclass
class EquivalenceReport:
    mean_dev: float
    mean_dev_symmetrised: float
    cov_dev: float
    cov_dev_symmetrised: float

    def max_deviation(self) -> float:
        return max(self.mean_dev, self.mean_dev_symmetrised, self.cov_dev, self.cov_dev_symmetrised)

    def ok(self, tol: float = 1e-10) -> bool:
        return self.max_deviation() <= tol


def _rel(a, b) -> float:
    scale = max(np.max(np.abs(b), initial=0.0), np.finfo(float).tiny)
    diff = np.max(np.abs(a - b), initial=0.0)
    return 0.0 if diff == 0 else float(diff / scale)


def reduced_equivalence_check(stats: EnsembleStats, g, C, D: DegeneracyMatrix,
                              rep: GroupRep) -> EquivalenceReport:
    """Compare reduced-path moments with projections of full statistics.

    Deviations are max-abs differences relative to the largest projected
    entry.  Both the raw and the group-symmetrised full statistics are
    projected, which must agree with each other as well.
    """
    g_sym, C_sym = symmetrise_full_stats(g, C, rep)
    g_hat = D.reduce_vector(g)
    C_hat = project_cov(D, C)
    return EquivalenceReport(
        mean_dev=_rel(stats.mean, g_hat),
        mean_dev_symmetrised=_rel(D.reduce_vector(g_sym), g_hat),
        cov_dev=_rel(stats.cov, C_hat),
        cov_dev_symmetrised=_rel(project_cov(D, C_sym), C_hat),
    )
