"""Self-check suite behind ``qfdsym verify``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qfdsym.degeneracy import degeneracy_matrix
from qfdsym.detect import check_response_invariance, score, score_full
from qfdsym.group import (SUBGROUPS, apply_rank4, apply_rank4_vector, full_group, group_for, subgroup,
                          trivial_group, verify_group)
from qfdsym.lattice import LatticeSpec
from qfdsym.stats import (block_perm, ensemble_stats, full_stats, reduced_equivalence_check,
                          symmetrise_full_stats)
from qfdsym.synth import SynthSpec, synth_ensemble
from qfdsym.tables import reference_table
from qfdsym.train import expand_model, train_from_stats

# full-coordinate checks hold (N + N^2)^2 doubles
FULL_DIM_LIMIT = 1500


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""
    skipped: bool = False

    def line(self) -> str:
        tag = "SKIP" if self.skipped else ("PASS" if self.passed else "FAIL")
        return f"{tag} {self.name}" + (f": {self.detail}" if self.detail else "")


def _group_checks(spec: LatticeSpec, rep):
    report = verify_group(rep)
    yield Check("group axioms", report.ok, "; ".join(report.failures) or f"order {rep.order}")
    bad = []
    for name in SUBGROUPS[spec.kind]:
        try:
            subgroup(full_group(spec), name)
        except ValueError as exc:
            bad.append(f"{name}: {exc}")
    yield Check("subgroup catalogue", not bad, "; ".join(bad))


def _rank4_checks(spec: LatticeSpec, rep):
    N = spec.N
    if N > 40:
        yield Check("rank-4 Kronecker factorisation", True, f"N={N} too large", skipped=True)
        return
    ok = True
    for op in rep.ops:
        T = op.matrix()
        K = np.kron(T, T)
        images = [apply_rank4(op, k) for k in range(1, N * N + 1)]
        oracle = [int(np.argmax(K[:, k - 1])) + 1 for k in range(1, N * N + 1)]
        v = np.arange(N * N, dtype=float)
        ok &= images == oracle and np.array_equal(apply_rank4_vector(op, v), K @ v)
    yield Check("rank-4 Kronecker factorisation", bool(ok), f"{N * N} four-indices, {rep.order} elements")


def _dof_checks(spec: LatticeSpec, rep, selector: str):
    N = spec.N
    triv = degeneracy_matrix(trivial_group(spec)).counts()
    want = N + N * (N + 1) // 2
    yield Check("permutation-only DOF", triv.total == want, f"{tuple(triv)} expected total {want}")

    D = degeneracy_matrix(rep)
    ref = reference_table(spec.kind.value).get(spec.n)
    if selector == "full" and ref is not None:
        got = D.counts()
        yield Check("tabulated DOF", tuple(got) == ref[2:] and triv.total == ref[1],
                    f"{tuple(got)} vs table {ref[2:]}")

    ok = True
    for op in rep.ops:
        ok &= np.array_equal(D.linear.labels[op.perm], D.linear.labels)
        ok &= np.array_equal(D.quadratic.labels[op.rank4_perm()], D.quadratic.labels)
    yield Check("orbit invariance", bool(ok), f"{D.dof} classes")

    stab_ok = True
    s = rep.order
    for cls in D.linear.classes():
        stab = sum(1 for op in rep.ops if op.perm[cls[0]] == cls[0])
        stab_ok &= stab * len(cls) == s
    yield Check("orbit-stabiliser", bool(stab_ok), f"linear class sizes {sorted(set(D.linear.sizes.tolist()))}")


def _stats_checks(spec: LatticeSpec, rep, seed: int):
    N = spec.N
    F = N + N * N
    if F > FULL_DIM_LIMIT:
        yield Check("full-coordinate oracles", True, f"dimension {F} too large", skipped=True)
        return
    rng = np.random.default_rng(seed)
    g = rng.standard_normal(F)
    A = rng.standard_normal((F, F))
    C = A @ A.T / F
    g_sym, C_sym = symmetrise_full_stats(g, C, rep)
    dev = 0.0
    for op in rep.ops:
        P = block_perm(op)
        dev = max(dev, np.max(np.abs(g_sym[P] - g_sym)), np.max(np.abs(C_sym[np.ix_(P, P)] - C_sym)))
    yield Check("statistics invariance", dev <= 1e-12, f"max deviation {dev:.2e}")
    g2, C2 = symmetrise_full_stats(g_sym, C_sym, rep)
    idem = max(np.max(np.abs(g2 - g_sym)), np.max(np.abs(C2 - C_sym)))
    yield Check("symmetrisation idempotence", idem <= 1e-12, f"max deviation {idem:.2e}")

    D = degeneracy_matrix(rep)
    chips = synth_ensemble(SynthSpec(seed=seed, chips=200, corr_length=1.5), spec)
    stats = ensemble_stats(D, chips)
    gf, Cf = full_stats(chips)
    eq = reduced_equivalence_check(stats, gf, Cf, D, rep)
    yield Check("reduction equivalence", eq.ok(1e-10), f"max relative deviation {eq.max_deviation():.2e}")

    target = synth_ensemble(SynthSpec(seed=seed + 1, chips=200, corr_length=1.5, amplitude=1.0,
                                      variance=1.5), spec)
    model = train_from_stats(stats, ensemble_stats(D, target))
    y_red = score(model, chips[:50])
    y_full = score_full(model, chips[:50])
    rel = np.max(np.abs(y_red - y_full) / np.maximum(1.0, np.abs(y_full)))
    yield Check("score equivalence", rel <= 1e-9, f"max relative deviation {rel:.2e}")
    f_full = expand_model(model)
    coeff_ok = all(np.array_equal(f_full[block_perm(op)], f_full) for op in rep.ops)
    yield Check("coefficient invariance", coeff_ok)
    inv = check_response_invariance(model, chips[:100], rep)
    yield Check("response invariance", inv.ok, f"max relative deviation {inv.max_rel:.2e}")


def run_suite(spec: LatticeSpec, selector: str = "full", seed: int = 0) -> list[Check]:
    rep = group_for(spec, selector)
    checks = []
    for gen in (_group_checks(spec, rep), _rank4_checks(spec, rep), _dof_checks(spec, rep, selector),
                _stats_checks(spec, rep, seed)):
        checks.extend(gen)
    return checks
