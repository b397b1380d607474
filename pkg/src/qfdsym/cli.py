"""Command-line entry point: ``qfdsym <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

import numpy as np

from qfdsym import formats
from qfdsym.degeneracy import degeneracy_matrix
from qfdsym.detect import det_curve, score, std_error_bars
from qfdsym.group import group_for, verify_group
from qfdsym.lattice import LatticeSpec
from qfdsym.stats import ensemble_stats
from qfdsym.synth import SynthSpec, synth_ensemble
from qfdsym.train import DEFAULT_PINV_TOL, POLARITY, train_from_stats
from qfdsym.verify import run_suite


def parse_n_list(text: str) -> list[int]:
    """``"1..10,12,14"`` -> ``[1, ..., 10, 12, 14]``."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError(f"no support sizes in {text!r}")
    return out


def _fmt(x: float) -> str:
    return repr(float(x))


def _emit(text: str, path: str | None):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _read_scores(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if rows and rows[0] and not _is_number(rows[0][0]):
        rows = rows[1:]
    return np.array([float(r[0]) for r in rows if r], dtype=float)


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def cmd_rep(args) -> int:
    spec = LatticeSpec(args.lattice, args.n)
    rep = group_for(spec, args.group)
    rows = [(op.label, d + 1, int(src) + 1) for op in rep.ops for d, src in enumerate(op.perm)]
    _emit(_csv(["element", "destination", "source"], rows), args.output)
    report = verify_group(rep)
    for name, passed in report.checks.items():
        print(f"{'PASS' if passed else 'FAIL'} {name}", file=sys.stderr)
    return 0 if report.ok else 1


def cmd_dof(args) -> int:
    rows = []
    for n in args.n:
        spec = LatticeSpec(args.lattice, n)
        c = degeneracy_matrix(group_for(spec, args.group)).counts()
        rows.append((n, spec.N, c.linear, c.quadratic, c.total))
    _emit(_csv(["n", "N", "linear", "quadratic", "total"], rows), args.output)
    return 0


def cmd_synth(args) -> int:
    spec = LatticeSpec(args.lattice, args.n)
    synth = SynthSpec(seed=args.seed, chips=args.chips, mean=args.mean, variance=args.variance,
                      corr_length=args.corr_length, amplitude=args.amplitude, radius=args.radius,
                      symmetry=args.augment)
    formats.write_chips(args.output, spec, synth_ensemble(synth, spec))
    return 0


def cmd_stats(args) -> int:
    spec, chips = formats.read_chips(args.chips)
    D = degeneracy_matrix(group_for(spec, args.group))
    formats.write_stats(args.output, ensemble_stats(D, chips))
    return 0


def cmd_train(args) -> int:
    clutter = formats.read_stats(args.clutter)
    target = formats.read_stats(args.target)
    model = train_from_stats(clutter, target, args.lam, args.pinv_tol)
    formats.write_model(args.output, model)
    print(f"trained {model.dof} coefficients, rank {model.rank}", file=sys.stderr)
    return 0


def cmd_score(args) -> int:
    model = formats.read_model(args.model)
    spec, chips = formats.read_chips(args.chips)
    if spec != model.lattice:
        print(f"error: chips are {spec}, model expects {model.lattice}", file=sys.stderr)
        return 2
    y = score(model, chips) if len(chips) else np.zeros(0)
    _emit(_csv(["score"], [(_fmt(v),) for v in y]), args.output)
    return 0


def cmd_det(args) -> int:
    c = _read_scores(args.clutter_scores)
    t = _read_scores(args.target_scores)
    curve = det_curve(c, t, args.polarity)
    sd_fa, sd_miss = std_error_bars(curve, len(c), len(t))
    rows = [tuple(map(_fmt, r)) for r in zip(curve.thresholds, curve.p_fa, curve.p_miss, sd_fa, sd_miss)]
    _emit(_csv(["threshold", "P_fa", "P_miss", "sigma_fa", "sigma_miss"], rows), args.output)
    return 0


def cmd_verify(args) -> int:
    failed = 0
    for n in args.n:
        spec = LatticeSpec(args.lattice, n)
        for check in run_suite(spec, args.group, args.seed):
            print(f"[{spec}] {check.line()}")
            failed += not check.passed
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qfdsym", description="Symmetrised quadratic Fisher discriminants on image chips.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")

    def lattice_args(sp, multi=False):
        sp.add_argument("--lattice", choices=["square", "hexagonal"], required=True)
        if multi:
            sp.add_argument("--n", type=parse_n_list, required=True, help="sizes, e.g. 1..10,12")
        else:
            sp.add_argument("--n", type=int, required=True)
        sp.add_argument("--group", default="full", help="subgroup name or label list like T1,T7")

    sp = sub.add_parser("rep", help="dump group permutations as CSV and verify the axioms")
    lattice_args(sp)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_rep)

    sp = sub.add_parser("dof", help="degrees-of-freedom table as CSV")
    lattice_args(sp, multi=True)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_dof)

    sp = sub.add_parser("synth", help="write a synthetic chip ensemble")
    sp.add_argument("--lattice", choices=["square", "hexagonal"], required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--chips", type=int, required=True)
    sp.add_argument("--mean", type=float, default=0.0)
    sp.add_argument("--variance", type=float, default=1.0)
    sp.add_argument("--corr-length", type=float, default=1.0)
    sp.add_argument("--amplitude", type=float, default=0.0, help="target bump amplitude (0 for clutter)")
    sp.add_argument("--radius", type=float, default=1.0)
    sp.add_argument("--augment", default=None, help="orbit-augment with this subgroup")
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("stats", help="reduced ensemble statistics of a chip file")
    sp.add_argument("--chips", required=True)
    sp.add_argument("--group", default="full")
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_stats)

    sp = sub.add_parser("train", help="train a QFD from clutter and target statistics")
    sp.add_argument("--clutter", required=True)
    sp.add_argument("--target", required=True)
    sp.add_argument("--lambda", dest="lam", type=float, default=0.0)
    sp.add_argument("--pinv-tol", type=float, default=DEFAULT_PINV_TOL)
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("score", help="score chips with a model")
    sp.add_argument("--model", required=True)
    sp.add_argument("--chips", required=True)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_score)

    sp = sub.add_parser("det", help="DET curve from clutter and target score CSVs")
    sp.add_argument("--clutter-scores", required=True)
    sp.add_argument("--target-scores", required=True)
    sp.add_argument("--polarity", choices=["low-target", "high-target"], default=POLARITY)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_det)

    sp = sub.add_parser("verify", help="run the invariance suite")
    lattice_args(sp, multi=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
