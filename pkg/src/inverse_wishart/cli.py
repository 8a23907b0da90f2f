"""Command-line entry point: ``invwishart <command> [options]``.

Exit codes: 0 all checks pass, 1 runtime error, 2 argument error,
3 at least one statistical check failed.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import ergodic, kernels, orthopoly, stats
from .ensembles import (
    RngStream,
    inverse_wishart_matrices,
    laguerre_spectra,
    mu_spectra,
    replicate,
    spectra_rows,
    wishart_matrices,
)
from .hermitian import eigenvalues
from .io import dumps, write_csv, write_jsonl

EXIT_OK, EXIT_RUNTIME, EXIT_ARGS, EXIT_STAT = 0, 1, 2, 3

ENSEMBLES = ("inverse-wishart", "wishart", "laguerre-spectrum", "mu-spectrum")

# options whose values may start with "-" (negative grid ends)
_VALUE_FLAGS = ("--rgrid", "--grid")


def _spectra_chunk(ensemble: str):
    def run(stream: RngStream, nu: float, dim: int, n: int) -> np.ndarray:
        if ensemble == "inverse-wishart":
            return eigenvalues(inverse_wishart_matrices(stream, nu, dim, n))
        if ensemble == "wishart":
            return eigenvalues(wishart_matrices(stream, nu, dim, n))
        if ensemble == "laguerre-spectrum":
            return laguerre_spectra(stream, nu, dim, n)
        return mu_spectra(stream, nu, dim, n)

    return run


def parse_rgrid(spec: str) -> np.ndarray:
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"{spec!r} is not lo:hi:count")
    lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 1 or (count > 1 and not hi > lo):
        raise ValueError(f"{spec!r} needs lo < hi and count >= 1")
    return np.linspace(lo, hi, count) if count > 1 else np.array([lo])


def parse_dims(spec: str) -> tuple[int, ...]:
    dims = tuple(int(p) for p in spec.split(",") if p.strip())
    if not dims:
        raise ValueError("empty dims list")
    if any(d < 1 for d in dims):
        raise ValueError(f"dims must be positive, got {spec!r}")
    if any(b <= a for a, b in zip(dims, dims[1:])):
        raise ValueError(f"dims must be strictly increasing, got {spec!r}")
    return dims


# ---------------------------------------------------------------------------
# commands


def cmd_sample(args: argparse.Namespace) -> int:
    rng = RngStream(args.seed)
    run = _spectra_chunk(args.ensemble)
    chunk = max(1, min(1000, 200_000 // (args.dim * args.dim)))
    parts = replicate(lambda s, n: run(s, args.nu, args.dim, n), rng, args.samples, chunk, args.threads)
    spectra = np.concatenate(parts, axis=0)
    rows = write_csv(args.out, ("sample_id", "i", "value"), spectra_rows(spectra))
    summary = {
        "ensemble": args.ensemble,
        "nu": args.nu,
        "dim": args.dim,
        "count": int(spectra.shape[0]),
        "rows": rows,
        "mean_trace": float(spectra.sum(axis=1).mean()),
        "seed": rng.key,
    }
    print(dumps(summary))
    return EXIT_OK


def cmd_kernel_table(args: argparse.Namespace) -> int:
    spec = kernels.KernelSpec(args.kernel, args.nu, args.dim)
    rows = kernels.kernel_table(spec, args.grid, diagonal=args.diagonal)
    header = ("x", "value") if args.diagonal else ("x", "y", "value")
    n = write_csv(args.out, header, rows)
    print(dumps({"kernel": args.kernel, "nu": args.nu, "dim": args.dim, "rows": n}))
    return EXIT_OK


def cmd_recurrence(args: argparse.Namespace) -> int:
    if args.family == "laguerre":
        ops = orthopoly.laguerre_ops(args.nu, args.dim)
    else:
        ops = orthopoly.bessel_monic_construct(args.nu, args.dim)
    rows = [(k, "" if np.isnan(a) else a, b) for k, a, b in ops.coefficient_rows()]
    n = write_csv(args.out, ("k", "a_k", "b_k"), rows)
    print(dumps({"family": args.family, "nu": args.nu, "dim": args.dim, "rows": n}))
    return EXIT_OK


def _emit_reports(reports: list[stats.TestReport], out: str | None) -> int:
    if out:
        write_jsonl(out, reports)
        for r in reports:
            print(r.line())
    else:
        for r in reports:
            print(r.to_json())
    return EXIT_OK if all(r.passed for r in reports) else EXIT_STAT


def cmd_verify(args: argparse.Namespace) -> int:
    rng = RngStream(args.seed)
    if args.check == "consistency":
        reports = stats.consistency_test(
            args.nu, args.dim, args.samples, rng, workers=args.threads, min_samples=2
        )
    else:
        reports = stats.dpp_correlation_reports(
            args.nu, args.dim, args.samples, rng, workers=args.threads, min_samples=2
        )
        if args.hist:
            hist = reports[0].details["histogram"]
            write_csv(args.hist, ("lo", "hi", "count", "density"), hist.rows())
    return _emit_reports(reports, args.out)


def cmd_ergodic_scan(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = RngStream(args.seed)
    trajs = ergodic.sample_trajectories(args.nu, args.maxdim, args.dims, args.samples, rng, args.threads)

    def scalar_rows():
        for d, t in enumerate(trajs):
            for n, p in zip(t.dims, t.omega_points):
                yield d, n, p.gamma1, p.delta

    def alpha_rows():
        for d, t in enumerate(trajs):
            for n, p in zip(t.dims, t.omega_points):
                for i, a in enumerate(p.alpha_plus, start=1):
                    yield d, n, i, a

    write_csv(out / "trajectory.csv", ("draw_id", "dim", "c", "d"), scalar_rows())
    write_csv(out / "alphas.csv", ("draw_id", "dim", "i", "alpha_plus"), alpha_rows())
    key = tuple(rng.key)
    reports = ergodic.gamma_diagnostics(trajs, k_top=args.k_top, delta=args.delta, nu=args.nu, seed=key)
    reports.append(ergodic.alpha_minus_report(trajs, key))
    extra = {
        "alpha1_stability": ergodic.alpha1_stability(trajs),
        "mean_count_above_delta": ergodic.count_above(trajs, args.delta).mean(axis=0),
        "dims": list(args.dims),
    }
    write_jsonl(out / "diagnostics.jsonl", [*reports, {"name": "scan-summary", **extra}])
    for r in reports:
        print(r.line())
    return EXIT_OK if all(r.passed for r in reports) else EXIT_STAT


def cmd_ergodic_decompose(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = RngStream(args.seed)
    rep = ergodic.decomposition_check(
        args.nu, args.dim, args.samples, args.rgrid, rng,
        bias_allowance=args.bias_allowance, workers=args.threads,
    )
    rows = [
        (r["r"], r["empirical"].real, r["empirical"].imag, r["predicted"].real, r["predicted"].imag, r["pass"])
        for r in rep.details["rows"]
    ]
    write_csv(
        out / "comparison.csv",
        ("r", "empirical_re", "empirical_im", "predicted_re", "predicted_im", "pass"),
        rows,
    )
    summary = {**rep.to_dict(), "bias_allowance": args.bias_allowance, "dim": args.dim, "nu": args.nu}
    (out / "summary.json").write_text(dumps(summary) + "\n")
    print(rep.line())
    return EXIT_OK if rep.passed else EXIT_STAT


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser, out_required: bool = True, samples: bool = True) -> None:
    p.add_argument("--nu", type=float, default=0.0, help="ensemble parameter, > -1")
    p.add_argument("--dim", type=int, default=3, help="matrix dimension N")
    if samples:
        p.add_argument("--samples", type=int, default=1000, help="number of independent draws")
    p.add_argument("--seed", type=int, default=0, help="64-bit seed")
    p.add_argument("--out", required=out_required, default=None, help="output path")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="replica worker threads")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="invwishart", description="Inverse-Wishart ensemble toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample spectra and write sample_id,i,value CSV")
    p.add_argument("--ensemble", choices=ENSEMBLES, default="inverse-wishart")
    _common(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("kernel-table", help="tabulate a correlation kernel on a grid")
    p.add_argument("--kernel", choices=kernels.FAMILIES, required=True)
    p.add_argument("--grid", required=True, help="lo:hi:count")
    p.add_argument("--diagonal", action="store_true", help="write x,value for K(x, x) only")
    _common(p, samples=False)
    p.set_defaults(func=cmd_kernel_table)

    p = sub.add_parser("recurrence", help="dump monic recurrence coefficients as k,a_k,b_k")
    p.add_argument("--family", choices=("laguerre", "bessel"), required=True)
    _common(p, samples=False)
    p.set_defaults(func=cmd_recurrence)

    p = sub.add_parser("verify", help="Monte Carlo checks, JSON-lines reports")
    p.add_argument("check", choices=("consistency", "dpp-correlations"))
    p.add_argument("--hist", default=None, help="dpp-correlations: write lo,hi,count,density CSV here")
    _common(p, out_required=False)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("ergodic", help="corner-spectrum scans and the decomposition check")
    p.add_argument("mode", choices=("scan", "decompose-check"))
    p.add_argument("--maxdim", type=int, default=None, help="scan: size of the sampled matrices")
    p.add_argument("--dims", default=None, help="scan: comma list of increasing corner sizes")
    p.add_argument("--delta", type=float, default=0.05, help="scan: tail level")
    p.add_argument("--k-top", type=int, default=ergodic.K_TOP, help="scan: top-k for the mass fraction")
    p.add_argument("--rgrid", default="-0.1:0.1:9", help="decompose-check: lo:hi:count")
    p.add_argument("--bias-allowance", type=float, default=ergodic.BIAS_ALLOWANCE)
    _common(p)
    p.set_defaults(func=None)
    return parser


def _validate(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    if not args.nu > -1:
        parser.error(f"--nu: nu must be > -1, got {args.nu}")
    if args.dim < 1:
        parser.error(f"--dim: must be >= 1, got {args.dim}")
    if getattr(args, "samples", 1) < 1:
        parser.error(f"--samples: must be >= 1, got {args.samples}")
    if not 0 <= args.seed < 2**64:
        parser.error(f"--seed: must be a 64-bit unsigned integer, got {args.seed}")
    if args.threads < 1:
        parser.error(f"--threads: must be >= 1, got {args.threads}")
    cmd = args.command
    if cmd == "kernel-table":
        try:
            args.grid = kernels.Grid.parse(args.grid)
        except ValueError as exc:
            parser.error(f"--grid: {exc}")
        if args.kernel in ("bessel", "k-infinity"):
            args.dim = None
    elif cmd == "recurrence":
        if args.family == "bessel" and args.dim > orthopoly.BESSEL_MAX_N:
            parser.error(f"--dim: bessel recurrence supports dim <= {orthopoly.BESSEL_MAX_N}")
    elif cmd == "verify":
        if args.samples < 2:
            parser.error("--samples: verify needs at least 2 draws")
        if args.check == "dpp-correlations" and args.dim < 10:
            parser.error(f"--dim: dpp-correlations needs dim >= 10, got {args.dim}")
    elif cmd == "ergodic":
        if args.mode == "scan":
            if args.maxdim is None:
                parser.error("--maxdim is required for ergodic scan")
            if args.maxdim < 1:
                parser.error(f"--maxdim: must be >= 1, got {args.maxdim}")
            spec = args.dims or ",".join(str(max(1, args.maxdim >> k)) for k in (3, 2, 1, 0))
            try:
                args.dims = parse_dims(spec)
            except ValueError as exc:
                parser.error(f"--dims: {exc}")
            if args.dims[-1] > args.maxdim:
                parser.error(f"--dims: largest dim {args.dims[-1]} exceeds --maxdim {args.maxdim}")
            if args.k_top < 1:
                parser.error("--k-top: must be >= 1")
            if not args.delta > 0:
                parser.error("--delta: must be > 0")
            if args.samples < 2:
                parser.error("--samples: scan needs at least 2 draws")
            args.func = cmd_ergodic_scan
        else:
            try:
                args.rgrid = parse_rgrid(args.rgrid)
            except ValueError as exc:
                parser.error(f"--rgrid: {exc}")
            if args.bias_allowance < 0:
                parser.error("--bias-allowance: must be >= 0")
            args.func = cmd_ergodic_decompose


def _join_value_flags(argv: list[str]) -> list[str]:
    out, i = [], 0
    while i < len(argv):
        if argv[i] in _VALUE_FLAGS and i + 1 < len(argv):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_join_value_flags(argv))
        _validate(parser, args)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_ARGS
    try:
        return args.func(args)
    except (ValueError, ArithmeticError, RuntimeError, OSError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
