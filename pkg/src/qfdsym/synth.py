"""Synthetic clutter/target chip ensembles with controllable symmetry.

Textures are stationary Gaussian fields with squared-exponential correlation
``variance * exp(-d**2 / (2 * corr_length**2))`` drawn via a Cholesky factor of
the pixel covariance.  Targets add a centred Gaussian bump.  Because both the
kernel and the bump depend only on distances from the support centre, the
generating distribution is invariant under the full point group; orbit
augmentation additionally makes the *sample* statistics invariant.

Random numbers come from numpy's Philox-4x64 counter-based generator.  Chip
``k`` of a run with seed ``s`` uses the 128-bit key ``s + (k << 64)`` and draws
``N`` standard normals with ``Generator.standard_normal``, so each chip is
reproducible on its own.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qfdsym.group import apply_rank1, group_for
from qfdsym.lattice import LatticeSpec, coordinates

_JITTER = 1e-10


@dataclass(frozen=True)
class SynthSpec:
    seed: int
    chips: int
    mean: float = 0.0
    variance: float = 1.0
    corr_length: float = 1.0
    amplitude: float = 0.0
    radius: float = 1.0
    symmetry: str | None = None

    def __post_init__(self):
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        if self.chips < 0:
            raise ValueError("chip count must be >= 0")
        if self.amplitude < 0:
            raise ValueError("bump amplitude must be >= 0")
        if self.corr_length <= 0 or self.variance <= 0 or self.radius <= 0:
            raise ValueError("correlation length, variance and radius must be > 0")


def texture_covariance(lattice: LatticeSpec, variance: float, corr_length: float) -> np.ndarray:
    xy = coordinates(lattice)
    d2 = ((xy[:, None, :] - xy[None, :, :]) ** 2).sum(axis=-1)
    return variance * np.exp(-d2 / (2.0 * corr_length ** 2))


def target_bump(lattice: LatticeSpec, amplitude: float, radius: float) -> np.ndarray:
    r2 = (coordinates(lattice) ** 2).sum(axis=1)
    return amplitude * np.exp(-r2 / (2.0 * radius ** 2))


def chip_rng(seed: int, k: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed + (k << 64)))


def synth_ensemble(spec: SynthSpec, lattice: LatticeSpec) -> np.ndarray:
    """``(chips * s, N)`` array; ``s`` is the augmentation group order (1 if none)."""
    N = lattice.N
    K = texture_covariance(lattice, spec.variance, spec.corr_length)
    L = np.linalg.cholesky(K + _JITTER * spec.variance * np.eye(N))
    offset = spec.mean + target_bump(lattice, spec.amplitude, spec.radius)
    z = np.empty((spec.chips, N))
    for k in range(spec.chips):
        z[k] = chip_rng(spec.seed, k).standard_normal(N)
    chips = offset + z @ L.T
    if spec.symmetry is None:
        return chips
    rep = group_for(lattice, spec.symmetry)
    # chip-major: the s transforms of chip k are rows k*s .. k*s + s - 1
    return np.stack([apply_rank1(op, chips) for op in rep.ops], axis=1).reshape(-1, N)
