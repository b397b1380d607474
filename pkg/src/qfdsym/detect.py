"""Scoring chips with a trained model and DET-curve evaluation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qfdsym.group import GroupRep, apply_rank1
from qfdsym.stats import full_features
from qfdsym.train import POLARITY, QfdModel, expand_model


def score(model: QfdModel, chips) -> np.ndarray:
    """Detector response for one chip (scalar) or a stack of chips."""
    arr = np.asarray(chips, dtype=float)
    D = model.degeneracy
    z = D.reduce_chips(arr)
    y = z @ model.reduced_coeffs
    return float(y[0]) if arr.ndim == 1 else y


def score_full(model: QfdModel, chips) -> np.ndarray:
    """Same response through the expanded ``N + N**2`` coefficients."""
    return full_features(chips) @ expand_model(model)


@dataclass
class InvarianceReport:
    max_abs: float
    max_rel: float
    worst_op: str
    tol: float

    @property
    def ok(self) -> bool:
        return self.max_rel <= self.tol


def check_response_invariance(model: QfdModel, chips, rep: GroupRep, tol: float = 1e-9) -> InvarianceReport:
    """Largest change in response over chips and their group transforms.

    Relative deviation is ``|y(Tx) - y(x)| / max(1, |y(x)|)``.
    """
    chips = np.atleast_2d(np.asarray(chips, dtype=float))
    base = score(model, chips)
    scale = np.maximum(1.0, np.abs(base))
    max_abs, max_rel, worst = 0.0, 0.0, rep.ops[0].label
    for op in rep.ops:
        dev = np.abs(score(model, apply_rank1(op, chips)) - base)
        rel = float(np.max(dev / scale, initial=0.0))
        if rel > max_rel:
            max_rel, worst = rel, op.label
        max_abs = max(max_abs, float(np.max(dev, initial=0.0)))
    return InvarianceReport(max_abs, max_rel, worst, tol)


@dataclass
class DetCurve:
    thresholds: np.ndarray
    p_fa: np.ndarray
    p_miss: np.ndarray
    polarity: str = POLARITY

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.p_fa.tolist(), self.p_miss.tolist()))

    def __len__(self):
        return len(self.thresholds)


def det_curve(clutter_scores, target_scores, polarity: str = POLARITY) -> DetCurve:
    """False-alarm and miss probabilities at every distinct threshold.

    With ``low-target`` polarity a chip is declared a target when its score is
    strictly below the threshold; chips scoring exactly the threshold count as
    clutter.  ``high-target`` mirrors this (target when strictly above).
    Thresholds are the sorted distinct scores plus one value just beyond the
    far extreme, so the curve reaches both ``(0, 1)`` and ``(1, 0)``.
    """
    c = np.sort(np.asarray(clutter_scores, dtype=float).ravel())
    t = np.sort(np.asarray(target_scores, dtype=float).ravel())
    if len(c) == 0 or len(t) == 0:
        raise ValueError("both score sets must be nonempty")
    if not (np.isfinite(c).all() and np.isfinite(t).all()):
        raise ValueError("scores must be finite")
    union = np.unique(np.concatenate([c, t]))
    if polarity == "low-target":
        thr = np.append(union, np.nextafter(union[-1], np.inf))
        p_fa = np.searchsorted(c, thr, side="left") / len(c)
        p_miss = (len(t) - np.searchsorted(t, thr, side="left")) / len(t)
    elif polarity == "high-target":
        thr = np.insert(union, 0, np.nextafter(union[0], -np.inf))
        p_fa = (len(c) - np.searchsorted(c, thr, side="right")) / len(c)
        p_miss = np.searchsorted(t, thr, side="right") / len(t)
    else:
        raise ValueError(f"unknown polarity {polarity!r}")
    return DetCurve(thr, p_fa, p_miss, polarity)


def binomial_sd(p, M: int) -> np.ndarray:
    if M < 1:
        raise ValueError("count must be >= 1")
    p = np.asarray(p, dtype=float)
    return np.sqrt(p * (1.0 - p) / M)


def std_error_bars(curve: DetCurve, clutter_count: int, target_count: int) -> tuple[np.ndarray, np.ndarray]:
    """One-sigma binomial error bars for false-alarm and miss probabilities."""
    return binomial_sd(curve.p_fa, clutter_count), binomial_sd(curve.p_miss, target_count)
