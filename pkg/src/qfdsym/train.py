"""Regularised pseudoinverse solve for reduced QFD coefficients."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from qfdsym.degeneracy import DegeneracyMatrix, degeneracy_matrix
from qfdsym.group import group_for
from qfdsym.lattice import LatticeSpec
from qfdsym.stats import EnsembleStats, InsufficientDataError

DEFAULT_PINV_TOL = 1e-10

# clutter - target mean difference puts clutter on the high-score side
POLARITY = "low-target"


class FingerprintMismatch(ValueError):
    pass


class DegenerateDirection(ZeroDivisionError):
    """The coefficient vector has zero output variance."""


def difference_stats(clutter: EnsembleStats, target: EnsembleStats) -> tuple[np.ndarray, np.ndarray]:
    """Mean difference (clutter minus target) and covariance sum."""
    if clutter.fingerprint != target.fingerprint:
        raise FingerprintMismatch("clutter and target statistics use different degeneracy matrices")
    for name, st in (("clutter", clutter), ("target", target)):
        if st.count < 2:
            raise InsufficientDataError(f"{name} ensemble has {st.count} chips, need >= 2")
    return clutter.mean - target.mean, clutter.cov + target.cov


def pinv_solve(C, g, lam: float = 0.0, pinv_tol: float = DEFAULT_PINV_TOL) -> tuple[np.ndarray, int]:
    """Minimum-norm least-squares solution of ``(C + lam I) f = g``.

    Returns the solution and the number of eigenvalues kept.  Eigenvalues at
    or below ``pinv_tol`` times the largest are treated as exactly zero.
    """
    C = np.asarray(C, dtype=float)
    g = np.asarray(g, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1] or g.shape != (C.shape[0],):
        raise ValueError(f"incompatible shapes {C.shape} and {g.shape}")
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    if not (np.isfinite(C).all() and np.isfinite(g).all()):
        raise ValueError("NaN or infinite entries in training statistics")
    scale = np.max(np.abs(C), initial=0.0)
    if np.max(np.abs(C - C.T), initial=0.0) > 1e-12 * max(scale, 1.0):
        raise ValueError("covariance matrix is not symmetric")
    A = 0.5 * (C + C.T) + lam * np.eye(len(C))
    w, V = np.linalg.eigh(A)
    top = w.max(initial=0.0)
    keep = w > pinv_tol * top if top > 0 else np.zeros(len(w), dtype=bool)
    coef = V[:, keep].T @ g / w[keep]
    return V[:, keep] @ coef, int(keep.sum())


@dataclass(frozen=True, eq=False)
class QfdModel:
    reduced_coeffs: np.ndarray
    lattice: LatticeSpec
    selector: str
    lam: float = 0.0
    pinv_tol: float = DEFAULT_PINV_TOL
    fingerprint: str = ""
    rank: int | None = None
    polarity: str = POLARITY

    @property
    def dof(self) -> int:
        return len(self.reduced_coeffs)

    @cached_property
    def degeneracy(self) -> DegeneracyMatrix:
        D = degeneracy_matrix(group_for(self.lattice, self.selector))
        if self.fingerprint and D.fingerprint != self.fingerprint:
            raise FingerprintMismatch("rebuilt degeneracy matrix does not match the model")
        if D.dof != self.dof:
            raise FingerprintMismatch(f"model has {self.dof} coefficients, degeneracy matrix {D.dof}")
        return D


def train(g_hat, C_hat, lam: float = 0.0, pinv_tol: float = DEFAULT_PINV_TOL,
          D: DegeneracyMatrix | None = None) -> QfdModel:
    f_hat, rank = pinv_solve(C_hat, g_hat, lam, pinv_tol)
    if D is None:
        return QfdModel(f_hat, None, "", lam, pinv_tol, "", rank)
    if len(f_hat) != D.dof:
        raise ValueError(f"statistics have {len(f_hat)} components, degeneracy matrix {D.dof}")
    return QfdModel(f_hat, D.lattice, D.selector, lam, pinv_tol, D.fingerprint, rank)


def train_from_stats(clutter: EnsembleStats, target: EnsembleStats, lam: float = 0.0,
                     pinv_tol: float = DEFAULT_PINV_TOL) -> QfdModel:
    g_hat, C_hat = difference_stats(clutter, target)
    model = train(g_hat, C_hat, lam, pinv_tol, clutter.degeneracy)
    # hand over the D already in memory instead of rebuilding it on first use
    model.__dict__["degeneracy"] = clutter.degeneracy
    return model


def objective(f_hat, g_hat, C_hat) -> float:
    """Fisher ratio ``(f.g)**2 / (f.C.f)``."""
    f = np.asarray(f_hat, dtype=float)
    num = float(f @ np.asarray(g_hat, dtype=float)) ** 2
    den = float(f @ np.asarray(C_hat, dtype=float) @ f)
    if den <= 0.0:
        raise DegenerateDirection(f"output variance {den} is not positive")
    return num / den


def expand_model(model: QfdModel, D: DegeneracyMatrix | None = None) -> np.ndarray:
    """Full ``N + N**2`` coefficient vector ``D @ f_hat``."""
    if D is None:
        D = model.degeneracy
    elif model.fingerprint and D.fingerprint != model.fingerprint:
        raise FingerprintMismatch("degeneracy matrix does not match the model")
    return D.expand_vector(model.reduced_coeffs)
