"""Command-line entry point: ``cpforge <subcommand> [flags]``."""
import argparse
import sys

import numpy as np

from . import expansion, landscape, solver, transfer
from .pulses import SequenceSpec, format_sequence, principal_angle, read_sequence

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_VERIFY = 0, 2, 3, 4

FIRST_ORDER_TOL = 1e-6
MIXED_TOL = 1e-5

SHORT_MODES = {
    3: {"qubit": "three-qubit-error", "qubit-error": "three-qubit-error", "leakage": "three-leakage"},
    5: {"leakage": "five-leakage", "qubit": "five-qubit", "full-equal": "five-full-equal"},
    7: {"full-equal": "seven-full-equal"},
}


class CliError(Exception):
    def __init__(self, kind, message, code):
        super().__init__(message)
        self.kind = kind
        self.code = code


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _resolve_mode(n, mode):
    table = SHORT_MODES[n]
    if mode is None:
        return {3: "three-leakage", 5: "five-full-equal", 7: "seven-full-equal"}[n]
    if mode in table:
        return table[mode]
    if mode in table.values():
        return mode
    raise CliError("usage", f"mode {mode!r} not valid for n={n}; choose from {sorted(table)}", EXIT_USAGE)


def _solution_lines(k, sol):
    lines = [
        f"solution[{k}].residual_norm = {sol.residual_norm:.3e}",
        f"solution[{k}].alphas = " + ", ".join(f"{a:.12f}" for a in sol.alphas),
        f"solution[{k}].betas = " + ", ".join(f"{b:.12f}" for b in sol.betas),
    ]
    if len(sol.alphas) == 3:
        lines.append(f"solution[{k}].alpha12 = {principal_angle(sol.alphas[0] - sol.alphas[1]):.12f}")
        lines.append(f"solution[{k}].beta12 = {principal_angle(sol.betas[0] - sol.betas[1]):.12f}")
    if sol.varphi7 is not None:
        lines.append(f"solution[{k}].varphi7 = {sol.varphi7:.12f}")
    return lines


def cmd_design(args):
    mode = _resolve_mode(args.n, args.mode)
    try:
        if args.n == 3:
            sols = [solver.solve_three(args.ratio, mode)]
        elif args.n == 5:
            sols = solver.solve_five(args.ratio, mode, starts=args.starts, seed=args.seed)
        else:
            if not np.isclose(args.ratio, 1.0):
                raise CliError("infeasible", "seven-pulse design requires --ratio 1", EXIT_INFEASIBLE)
            sols = solver.solve_seven([args.alpha1], starts=args.starts, seed=args.seed)
    except solver.InfeasibleDesign as exc:
        kind = "singular" if exc.singular else "infeasible"
        raise CliError(kind, str(exc), EXIT_INFEASIBLE) from None
    except ValueError as exc:
        raise CliError("usage", str(exc), EXIT_USAGE) from None
    if not sols:
        raise CliError("infeasible", f"no start converged for {mode} at ratio {args.ratio}", EXIT_INFEASIBLE)
    lines = [f"mode = {mode}", f"ratio = {args.ratio:.12g}", f"solutions = {len(sols)}"]
    for k, sol in enumerate(sols[: args.show]):
        lines += _solution_lines(k, sol)
    report = "\n".join(lines) + "\n"
    if args.out:
        _emit(format_sequence(sols[0].sequence()), args.out)
        _emit(report, args.out + ".report")
    sys.stdout.write(report)
    return EXIT_OK


def cmd_verify_tables(args):
    checks = solver.verify_tables()
    lines = []
    for c in checks:
        line = (
            f"table {c.table} {c.label}: residual {c.residual_before:.3e} -> {c.residual_after:.3e} "
            f"in {c.iterations} it, shift {c.max_shift:.4f}"
        )
        if c.varphi7_computed is not None:
            line += f", varphi7 {c.varphi7_computed:.4f} (table {c.varphi7_published})"
        lines.append(line + (" PASS" if c.passed else " FAIL"))
    failed = sum(not c.passed for c in checks)
    lines.append(f"rows = {len(checks)}, failed = {failed}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_sweep(args):
    try:
        seq = read_sequence(args.seq)
    except (OSError, ValueError) as exc:
        raise CliError("input", f"cannot read sequence {args.seq}: {exc}", EXIT_USAGE) from None
    try:
        grid = landscape.sweep(seq, span=args.range, points=args.points)
    except ValueError as exc:
        raise CliError("usage", str(exc), EXIT_USAGE) from None
    _emit(landscape.format_csv(grid), args.out)
    if args.out:
        _emit(landscape.format_metadata(grid), args.out + ".meta")
    if args.report:
        rep = landscape.robustness_report(grid)
        sys.stdout.write(landscape.format_report(rep))
    return EXIT_OK


def _parse_range(text):
    try:
        lo, hi, count = text.split(":")
        return np.linspace(float(lo), float(hi), int(count))
    except ValueError:
        raise CliError("usage", f"--delta-range expects LO:HI:COUNT, got {text!r}", EXIT_USAGE) from None


def _parse_list(text, flag):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise CliError("usage", f"{flag} expects comma-separated numbers, got {text!r}", EXIT_USAGE) from None


def cmd_transfer(args):
    try:
        seq = transfer.design_sequence(args.n, args.variant)
    except solver.InfeasibleDesign as exc:
        raise CliError("infeasible", str(exc), EXIT_INFEASIBLE) from None
    except ValueError as exc:
        raise CliError("usage", str(exc), EXIT_USAGE) from None
    task = transfer.TransferTask(seq)
    points = transfer.transfer_sweep(
        task,
        _parse_range(args.delta_range),
        _parse_list(args.kappa, "--kappa"),
        _parse_list(args.gamma, "--gamma"),
        g=args.g_over_omega,
        n_max=args.nmax,
    )
    _emit(transfer.format_sweep_csv(points), args.out)
    return EXIT_OK


def cmd_oracle_check(args):
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    m = (args.n + 1) // 2
    for _ in range(args.samples):
        ratio = 1.0 if args.n == 7 else float(rng.uniform(0.4, 2.5))
        seq = SequenceSpec.palindrome(rng.uniform(0, 2 * np.pi, m), rng.uniform(0, 2 * np.pi, m), 1.0, ratio)
        order = "mixed" if args.n == 7 else "first"
        oracle = expansion.taylor_oracle(seq, order, h=args.h, richardson=True)
        worst = max(worst, expansion.max_discrepancy(expansion.analytic_expansion(seq), oracle))
    tol = MIXED_TOL if args.n == 7 else FIRST_ORDER_TOL
    ok = worst <= tol
    sys.stdout.write(
        f"n = {args.n}\nsamples = {args.samples}\nseed = {args.seed}\n"
        f"max_discrepancy = {worst:.3e}\ntolerance = {tol:.0e}\nstatus = {'PASS' if ok else 'FAIL'}\n"
    )
    return EXIT_OK if ok else EXIT_VERIFY


def build_parser():
    p = argparse.ArgumentParser(prog="cpforge", description="Composite-pulse design for Lambda systems.")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("design", help="solve phase constraints for N = 3, 5 or 7")
    d.add_argument("--n", type=int, choices=(3, 5, 7), required=True)
    d.add_argument("--ratio", type=float, default=1.0, help="omega2 / omega1")
    d.add_argument("--mode", help="qubit | leakage | full-equal, or a full mode name")
    d.add_argument("--alpha1", type=float, default=0.0, help="first alpha for N = 7")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--starts", type=int, default=200, help="multistart count")
    d.add_argument("--show", type=int, default=5, help="solutions listed in the report")
    d.add_argument("--out", help="sequence file for the best solution (report goes to OUT.report)")
    d.set_defaults(func=cmd_design)

    v = sub.add_parser("verify-tables", help="polish every embedded table row")
    v.add_argument("--out", help="write the report here instead of stdout")
    v.set_defaults(func=cmd_verify_tables)

    s = sub.add_parser("sweep", help="fidelity grid over (delta1, delta2)")
    s.add_argument("--seq", required=True, help="sequence file")
    s.add_argument("--range", type=float, default=0.5, help="half-width of the square grid")
    s.add_argument("--points", type=int, default=201, help="points per axis")
    s.add_argument("--out", help="CSV path (metadata goes to OUT.meta)")
    s.add_argument("--report", action="store_true", help="print robustness summary")
    s.set_defaults(func=cmd_sweep)

    t = sub.add_parser("transfer", help="two-atom cavity transfer fidelity")
    t.add_argument("--g-over-omega", type=float, default=30.0)
    t.add_argument("--n", type=int, choices=(1, 3, 5), default=5)
    t.add_argument("--variant", choices=("leakage", "qubit", "full-equal", "table"))
    t.add_argument("--delta-range", default="-0.5:0.5:11", help="LO:HI:COUNT")
    t.add_argument("--kappa", default="0", help="comma-separated cavity decay rates (units of omega)")
    t.add_argument("--gamma", default="0", help="comma-separated atomic decay rates (units of omega)")
    t.add_argument("--nmax", type=int, default=1, help="cavity Fock cutoff")
    t.add_argument("--out", help="CSV path")
    t.set_defaults(func=cmd_transfer)

    o = sub.add_parser("oracle-check", help="closed forms vs finite differences")
    o.add_argument("--n", type=int, choices=(1, 3, 5, 7), required=True)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--samples", type=int, default=20)
    o.add_argument("--h", type=float, default=1e-4, help="finite-difference step")
    o.set_defaults(func=cmd_oracle_check)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"cpforge: error: {exc.kind}: {exc}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"cpforge: error: io: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
