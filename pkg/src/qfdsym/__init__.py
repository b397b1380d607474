"""Geometrically symmetrised quadratic Fisher discriminants on lattice-sampled image chips."""

from qfdsym.degeneracy import DegeneracyMatrix, OrbitPartition, degeneracy_matrix, dof_table
from qfdsym.detect import DetCurve, check_response_invariance, det_curve, score, std_error_bars
from qfdsym.group import GroupRep, SymmetryOp, full_group, generate_group, group_for, subgroup, verify_group
from qfdsym.lattice import LatticeKind, LatticeSpec, hexagonal, square
from qfdsym.stats import EnsembleStats, ensemble_stats, features, symmetrise_full_stats
from qfdsym.synth import SynthSpec, synth_ensemble
from qfdsym.train import QfdModel, objective, train, train_from_stats

__all__ = [
    "DegeneracyMatrix", "DetCurve", "EnsembleStats", "GroupRep", "LatticeKind", "LatticeSpec",
    "OrbitPartition", "QfdModel", "SymmetryOp", "SynthSpec", "check_response_invariance",
    "degeneracy_matrix", "det_curve", "dof_table", "ensemble_stats", "features", "full_group",
    "generate_group", "group_for", "hexagonal", "objective", "score", "square", "std_error_bars",
    "subgroup", "symmetrise_full_stats", "synth_ensemble", "train", "train_from_stats", "verify_group",
]
