"""Acceptance checks, one test per criterion.

Each test records a PASS/FAIL line that is printed in the pytest terminal
summary.
"""

import csv
import io
import time
from contextlib import redirect_stdout

import numpy as np

from qfdsym.cli import main
from qfdsym.degeneracy import degeneracy_matrix, dof_table
from qfdsym.detect import check_response_invariance
from qfdsym.group import apply_rank4, apply_rank4_vector, full_group, group_for, trivial_group, verify_group
from qfdsym.lattice import hexagonal, square
from qfdsym.stats import (block_perm, ensemble_stats, full_stats, reduced_equivalence_check,
                          symmetrise_full_stats)
from qfdsym.synth import SynthSpec, synth_ensemble
from qfdsym.tables import HEXAGONAL_DOF, SQUARE_DOF
from qfdsym.train import difference_stats, objective, pinv_solve, train_from_stats

SQUARE_NS = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 14, 16, 18, 20, 25]


def _dof_cli(lattice, ns):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(["dof", "--lattice", lattice, "--n", ",".join(map(str, ns))])
    assert code == 0
    return {int(r["n"]): (int(r["linear"]), int(r["quadratic"]), int(r["total"]))
            for r in csv.DictReader(io.StringIO(buf.getvalue()))}


def _table_check(criterion, number, lattice, ns, table):
    t0 = time.perf_counter()
    got = _dof_cli(lattice, ns)
    elapsed = time.perf_counter() - t0
    bad = [n for n in ns if got.get(n) != table[n][2:]]
    ok = not bad and elapsed < 60
    criterion(number, f"{lattice} DOF table", ok, f"{len(ns) - len(bad)}/{len(ns)} rows exact, {elapsed:.1f}s")
    assert not bad, {n: (got.get(n), table[n][2:]) for n in bad}
    assert elapsed < 60


def test_c01_square_dof_table(criterion):
    _table_check(criterion, 1, "square", SQUARE_NS, SQUARE_DOF)


def test_c02_hexagonal_dof_table(criterion):
    _table_check(criterion, 2, "hexagonal", list(range(1, 16)), HEXAGONAL_DOF)


def test_c03_permutation_only_dof(criterion):
    cases = [square(n) for n in range(1, 11)] + [hexagonal(n) for n in range(1, 8)]
    bad = []
    for spec in cases:
        N = spec.N
        total = dof_table(spec, trivial_group(spec)).total
        table = SQUARE_DOF if spec.kind.value == "square" else HEXAGONAL_DOF
        if not total == N + N * (N + 1) // 2 == table[spec.n][1]:
            bad.append(str(spec))
    criterion(3, "permutation-symmetry-only DOF", not bad, f"{len(cases)} supports, e.g. square n=9 -> "
              f"{dof_table(square(9), trivial_group(square(9))).total}")
    assert not bad


def test_c04_group_axioms(criterion):
    failures = []
    specs = [square(n) for n in range(2, 7)] + [hexagonal(n) for n in range(2, 6)]
    for spec in specs:
        report = verify_group(full_group(spec))
        for name in ("closure", "identity", "inverse"):
            if not report.checks[name]:
                failures.append(f"{spec}:{name}")
    for n in range(2, 7):
        g = full_group(square(n))
        t2, t4, t5, t6 = (g[f"T{m}"] for m in (2, 4, 5, 6))
        if not ((t5 * t6).same_as(t4) and (t6 * t5).same_as(t2) and not t4.same_as(t2)):
            failures.append(f"square(n={n}):witness")
    criterion(4, "group axioms and non-Abelian witness", not failures, f"{len(specs)} supports")
    assert not failures


def test_c05_rank4_kronecker(criterion):
    mismatches = 0
    total = 0
    for spec in (square(2), hexagonal(2)):
        N = spec.N
        for op in full_group(spec):
            K = np.kron(op.matrix(), op.matrix())
            for idx in range(1, N * N + 1):
                e = np.zeros(N * N)
                e[idx - 1] = 1.0
                image = K @ e
                total += 1
                mismatches += int(np.flatnonzero(image)[0] + 1 != apply_rank4(op, idx))
            v = np.arange(N * N, dtype=float)
            mismatches += int(not np.array_equal(apply_rank4_vector(op, v), K @ v))
    criterion(5, "rank-4 action equals Kronecker square", mismatches == 0, f"{total} index images")
    assert mismatches == 0


def test_c06_statistics_invariance(criterion):
    rng = np.random.default_rng(6)
    worst = 0.0
    for spec in (square(1), square(2), square(3), hexagonal(2)):
        rep = full_group(spec)
        F = spec.N + spec.N ** 2
        for _ in range(3):
            g = rng.standard_normal(F)
            A = rng.standard_normal((F, F))
            g_s, C_s = symmetrise_full_stats(g, A @ A.T / F, rep)
            for op in rep:
                P = block_perm(op)
                worst = max(worst, np.abs(g_s[P] - g_s).max(), np.abs(C_s[np.ix_(P, P)] - C_s).max())
            g_ss, C_ss = symmetrise_full_stats(g_s, C_s, rep)
            worst = max(worst, np.abs(g_ss - g_s).max(), np.abs(C_ss - C_s).max())
    ok = worst <= 1e-12
    criterion(6, "symmetrised statistics invariant and idempotent", ok, f"max deviation {worst:.1e}")
    assert ok


def test_c07_reduction_equivalence(criterion):
    rng = np.random.default_rng(7)
    worst = 0.0
    for spec in (square(2), square(3)):
        rep = full_group(spec)
        D = degeneracy_matrix(rep)
        chips = rng.standard_normal((200, spec.N)) + rng.standard_normal(spec.N)
        g, C = full_stats(chips)
        report = reduced_equivalence_check(ensemble_stats(D, chips), g, C, D, rep)
        worst = max(worst, report.max_deviation())
    ok = worst <= 1e-10
    criterion(7, "reduced covariance equals projected full covariance", ok, f"relative error {worst:.1e}")
    assert ok


def test_c08_solver_contract(criterion):
    rng = np.random.default_rng(8)
    worst = 0.0
    for dim in (1, 5, 61, 200, 476):
        A = rng.standard_normal((dim, dim))
        C = A @ A.T + dim * np.eye(dim)
        g = rng.standard_normal(dim)
        f, rank = pinv_solve(C, g, lam=0.0)
        assert rank == dim
        worst = max(worst, np.linalg.norm(C @ f - g) / np.linalg.norm(g))
    # rank-deficient diagonal: minimum-norm least squares zeroes the null directions
    d = np.array([4.0, 0.0, 0.5, 0.0, 2.0])
    g = np.array([2.0, 3.0, -1.0, 7.0, 1.0])
    f, rank = pinv_solve(np.diag(d), g)
    expected = np.array([0.5, 0.0, -2.0, 0.0, 0.5])
    exact = rank == 3 and np.array_equal(f, expected)
    ok = worst <= 1e-9 and exact
    criterion(8, "pseudoinverse solver", ok, f"max residual {worst:.1e}, diagonal case exact={exact}")
    assert ok


def test_c09_response_invariance(criterion):
    worst = 0.0
    for spec, seed in ((square(3), 90), (hexagonal(2), 91)):
        rep = full_group(spec)
        D = degeneracy_matrix(rep)
        clutter = synth_ensemble(SynthSpec(seed=seed, chips=300, corr_length=1.2), spec)
        target = synth_ensemble(SynthSpec(seed=seed + 10, chips=300, amplitude=1.0, variance=1.5), spec)
        model = train_from_stats(ensemble_stats(D, clutter), ensemble_stats(D, target), lam=1e-3)
        chips = np.random.default_rng(seed).standard_normal((100, spec.N))
        worst = max(worst, check_response_invariance(model, chips, rep, tol=1e-9).max_rel)
    ok = worst <= 1e-9
    criterion(9, "symmetrised response invariance", ok, f"max relative deviation {worst:.1e}")
    assert ok


def _generalisation_seed(seed, spec, Ds, train_count=400, test_count=4000):
    base = 1000 * seed

    def draw(offset, count, target):
        return synth_ensemble(SynthSpec(seed=base + offset, chips=count, corr_length=1.5,
                                        amplitude=0.5 if target else 0.0, radius=1.5,
                                        variance=1.5 if target else 1.0), spec)

    c_train, t_train = draw(1, train_count, False), draw(2, train_count, True)
    c_test, t_test = draw(3, test_count, False), draw(4, test_count, True)
    sigma = {}
    for name, D in Ds.items():
        tr_c, tr_t = ensemble_stats(D, c_train), ensemble_stats(D, t_train)
        model = train_from_stats(tr_c, tr_t)
        g_tr, C_tr = difference_stats(tr_c, tr_t)
        g_te, C_te = difference_stats(ensemble_stats(D, c_test), ensemble_stats(D, t_test))
        f = model.reduced_coeffs
        sigma[name] = (objective(f, g_tr, C_tr), objective(f, g_te, C_te))
    return sigma


def test_c10_generalisation(criterion):
    spec = square(5)
    Ds = {name: degeneracy_matrix(group_for(spec, name)) for name in ("full", "trivial")}
    assert (Ds["full"].dof, Ds["trivial"].dof) == (61, 350)
    t0 = time.perf_counter()
    seeds = 20
    wins = 0
    ratio_sym, ratio_unsym = [], []
    for seed in range(seeds):
        sigma = _generalisation_seed(seed, spec, Ds)
        wins += sigma["full"][1] > sigma["trivial"][1]
        ratio_sym.append(sigma["full"][0] / sigma["full"][1])
        ratio_unsym.append(sigma["trivial"][0] / sigma["trivial"][1])
    elapsed = time.perf_counter() - t0
    med_sym, med_unsym = np.median(ratio_sym), np.median(ratio_unsym)
    closer = abs(med_sym - 1) < abs(med_unsym - 1)
    ok = wins >= 0.8 * seeds and closer and elapsed < 300
    criterion(10, "symmetrised QFD generalises better", ok,
              f"wins {wins}/{seeds}, median train/test ratio {med_sym:.2f} vs {med_unsym:.2f}, {elapsed:.0f}s")
    assert ok


def _pipeline(workdir):
    workdir.mkdir()
    p = lambda name: str(workdir / name)
    steps = [
        ["synth", "--lattice", "square", "--n", "4", "--seed", "21", "--chips", "200", "--corr-length", "1.5",
         "--augment", "full", "-o", p("clutter.qfdc")],
        ["synth", "--lattice", "square", "--n", "4", "--seed", "22", "--chips", "200", "--corr-length", "1.5",
         "--amplitude", "0.8", "--radius", "1.2", "--variance", "1.5", "-o", p("target.qfdc")],
        ["stats", "--chips", p("clutter.qfdc"), "-o", p("clutter.qsta")],
        ["stats", "--chips", p("target.qfdc"), "-o", p("target.qsta")],
        ["train", "--clutter", p("clutter.qsta"), "--target", p("target.qsta"), "--lambda", "1e-3",
         "-o", p("model.qmod")],
        ["score", "--model", p("model.qmod"), "--chips", p("clutter.qfdc"), "-o", p("clutter.csv")],
        ["score", "--model", p("model.qmod"), "--chips", p("target.qfdc"), "-o", p("target.csv")],
        ["det", "--clutter-scores", p("clutter.csv"), "--target-scores", p("target.csv"), "-o", p("det.csv")],
    ]
    for argv in steps:
        assert main(argv) == 0, argv
    return {f.name: f.read_bytes() for f in sorted(workdir.iterdir())}


def test_c11_end_to_end_determinism(criterion, tmp_path):
    first = _pipeline(tmp_path / "run1")
    second = _pipeline(tmp_path / "run2")
    same = first.keys() == second.keys() and all(first[k] == second[k] for k in first)
    criterion(11, "end-to-end determinism", same, f"{len(first)} artifacts byte-identical")
    assert same
