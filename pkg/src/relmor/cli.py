"""Command-line harness.

Subcommands::

    relmor reduce  --model M --algo bt --order 10 --out rom.txt
    relmor compare --model M --algos bt,bst,tsia,irhmora --orders 4,6 --out report.json
    relmor sigma   --model M [--model M2 ...] --out sigma.csv
    relmor verify  --model M

Exit codes: 0 on success, 1 when any comparison cell failed or a
verification check failed, 2 on usage or IO errors.
"""

import argparse
import sys

import numpy as np

from . import algorithms, bench, modelio, relerr, sstools
from .exceptions import RelmorError

_ALGO_CHOICES = list(bench.ALGORITHM_ORDER)


def _add_common(parser):
    parser.add_argument("--seed", type=int, default=0, help="base random seed")
    parser.add_argument("--epsilon", type=float, default=0.001,
                        help="D-regularization epsilon (default 0.001)")
    parser.add_argument("--max-iters", type=int, default=200,
                        help="iteration cap for fixed-point algorithms")
    parser.add_argument("--tol", type=float, default=1e-6,
                        help="pole-set convergence tolerance")
    parser.add_argument("--init", choices=("random", "dominant"), default="random",
                        help="initial reduced model strategy")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="relmor",
        description="Model order reduction with a relative-error H2 criterion.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_reduce = sub.add_parser("reduce", help="reduce a model with one algorithm")
    p_reduce.add_argument("--model", required=True)
    p_reduce.add_argument("--format", choices=("auto", "dense", "sparse"), default="auto")
    p_reduce.add_argument("--algo", required=True, choices=_ALGO_CHOICES)
    p_reduce.add_argument("--order", type=int, required=True)
    p_reduce.add_argument("--out", help="write the reduced model here (dense format)")
    _add_common(p_reduce)

    p_cmp = sub.add_parser("compare", help="order sweep across algorithms")
    p_cmp.add_argument("--model", required=True)
    p_cmp.add_argument("--format", choices=("auto", "dense", "sparse"), default="auto")
    p_cmp.add_argument("--algos", default="bt,bst,tsia,irhmora",
                       help="comma-separated algorithm list")
    p_cmp.add_argument("--orders", required=True,
                       help="comma-separated reduced orders, e.g. 15,20,25")
    p_cmp.add_argument("--out", help="report file (JSON tree + table)")
    p_cmp.add_argument("--timings", action="store_true",
                       help="include wall-clock timings in the report file "
                            "(makes re-runs non-byte-identical)")
    _add_common(p_cmp)

    p_sig = sub.add_parser("sigma", help="singular-value CSV over a frequency grid")
    p_sig.add_argument("--model", action="append", required=True,
                       help="model file; repeat for several systems")
    p_sig.add_argument("--format", choices=("auto", "dense", "sparse"), default="auto")
    p_sig.add_argument("--grid-min", type=float, default=1e-2)
    p_sig.add_argument("--grid-max", type=float, default=1e4)
    p_sig.add_argument("--points", type=int, default=400)
    p_sig.add_argument("--out", help="CSV output path (default stdout)")

    p_ver = sub.add_parser("verify", help="run the gramian/gradient identity suite")
    p_ver.add_argument("--model", required=True)
    p_ver.add_argument("--format", choices=("auto", "dense", "sparse"), default="auto")
    p_ver.add_argument("--order", type=int, default=None,
                       help="reduced order for the checks (default: n // 2, max 4)")
    _add_common(p_ver)
    return parser


def _config(args, order=1):
    return algorithms.ReductionConfig(
        order=order,
        max_iterations=args.max_iters,
        epsilon=args.epsilon,
        convergence_tol=args.tol,
        initial_rom=args.seed,
        init=args.init,
    )


def _cmd_reduce(args):
    model = modelio.load_model(args.model, format=args.format)
    cfg = _config(args, order=args.order)
    candidate, trace = bench._run_algorithm(model, args.algo, args.order, cfg, args.seed)
    rom = candidate.rom
    print(f"algorithm: {args.algo}")
    print(f"order: {rom.n} (from n = {model.n})")
    print(f"stable: {rom.is_stable}")
    if trace is not None:
        print(f"iterations: {trace.iterations} converged: {trace.converged}")
    work = sstools.regularize_d(model, args.epsilon)
    rom_reg = candidate.info.get("regularized_rom")
    if rom_reg is None:
        rom_reg = sstools.StateSpace(rom.A, rom.B, rom.C, work.D)
    if rom.is_stable:
        print(f"delta_mul_h2: {relerr.delta_mul_norm(work, rom_reg):.9g}")
    if args.out:
        modelio.save_model(rom, args.out)
        print(f"wrote {args.out}")
    return 0


def _cmd_compare(args):
    model = modelio.load_model(args.model, format=args.format)
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    orders = [int(x) for x in args.orders.split(",") if x.strip()]
    cfg = _config(args)
    report = bench.run_comparison(
        model, algos, orders, cfg, model_name=args.model, seed=args.seed
    )
    text = bench.report_to_text(report, include_timings=args.timings)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    print("\n".join(bench._table_lines(report)))
    for cell in report.failures:
        print(f"FAILED {cell.algorithm} r={cell.order}: {cell.failure}", file=sys.stderr)
    return 1 if report.failures else 0


def _cmd_sigma(args):
    systems = [modelio.load_model(p, format=args.format) for p in args.model]
    grid = bench.default_frequency_grid(args.points, args.grid_min, args.grid_max)
    labels = [f"sigma_max_{k}" for k in range(len(systems))]
    text, warnings_count = bench.emit_sigma_csv(systems, grid, labels)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if warnings_count:
        print(f"warning: {warnings_count} grid points hit a singular resolvent",
              file=sys.stderr)
    return 0


def _cmd_verify(args):
    """Gramian, norm-duality, and gradient identity checks on a model."""
    model = modelio.load_model(args.model, format=args.format)
    work = sstools.regularize_d(model, args.epsilon)
    order = args.order or max(1, min(4, model.n // 2))
    checks = []

    def check(name, fn):
        try:
            fn()
            checks.append((name, True, ""))
        except Exception as exc:  # noqa: BLE001 - report, do not crash
            checks.append((name, False, f"{type(exc).__name__}: {exc}"))

    cfg = _config(args, order=order)
    candidate, _ = algorithms.irhmora(work, cfg)
    rom = candidate.info["regularized_rom"]

    def chk_duality():
        val = relerr.delta_mul_norm(work, rom, route="factor")
        if rom.is_stable and rom.is_minimum_phase:
            g = relerr.compute_gramians(work, rom)
            val2 = relerr.h2_norm_delta_mul(g, work, rom)
            assert abs(val - val2) <= 1e-6 * max(val, val2, 1e-300), (val, val2)

    def chk_prop1():
        if not (rom.is_stable and rom.is_minimum_phase):
            return
        g = relerr.compute_gramians(work, rom)
        scale = np.linalg.norm(g.Q12h) + 1e-300
        assert np.linalg.norm(g.Q12h + g.Q13h) <= 1e-8 * scale
        assert np.linalg.norm(g.Q33h + g.Q23h) <= 1e-8 * np.linalg.norm(g.Q33h)
        assert np.linalg.norm(g.Q33h - g.Q22h) <= 1e-8 * np.linalg.norm(g.Q33h)

    def chk_gradient():
        if not (rom.is_stable and rom.is_minimum_phase):
            return
        bundle = relerr.gradients(work, rom)
        fd = _fd_gradient(work, rom)
        for got, want in zip((bundle.dJ_dAr, bundle.dJ_dBr, bundle.dJ_dCr), fd):
            denom = np.maximum(np.abs(want), 1e-8 * (1.0 + np.max(np.abs(want))))
            assert np.max(np.abs(got - want) / denom) < 1e-4

    check("norm duality (factor route vs gramian trace)", chk_duality)
    check("gramian symmetry identities", chk_prop1)
    check("analytic vs finite-difference gradients", chk_gradient)
    failed = 0
    for name, ok, msg in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  [{msg}]" if msg else ""))
        failed += 0 if ok else 1
    return 1 if failed else 0


def _fd_gradient(full, rom, h_rel=1e-6):
    """Central finite differences of J = ||Hr^{-1}(H - Hr)||_H2^2."""

    def J(Ar, Br, Cr):
        cand = sstools.StateSpace(Ar, Br, Cr, rom.D)
        g = relerr.compute_gramians(full, cand)
        return relerr.h2_norm_delta_mul(g, full, cand) ** 2

    out = []
    for which in range(3):
        mats = [np.array(rom.A), np.array(rom.B), np.array(rom.C)]
        G = np.zeros_like(mats[which])
        for idx in np.ndindex(G.shape):
            step = h_rel * (1.0 + abs(mats[which][idx]))
            mats[which][idx] += step
            up = J(*mats)
            mats[which][idx] -= 2 * step
            dn = J(*mats)
            mats[which][idx] += step
            G[idx] = (up - dn) / (2 * step)
        out.append(G)
    return out


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors already
        return int(exc.code) if exc.code is not None else 0
    handlers = {
        "reduce": _cmd_reduce,
        "compare": _cmd_compare,
        "sigma": _cmd_sigma,
        "verify": _cmd_verify,
    }
    try:
        return handlers[args.command](args)
    except (RelmorError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
