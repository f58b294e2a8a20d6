"""Command-line interface.

Exit codes: 0 success, 1 least-squares solver failure, 2 I/O or file-format
error, 3 residual curl violations after ``unwrap`` (shifts and report are
still written, ready for ``hybrid``), 4 invalid parameters.
"""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import fileio, kernels
from .fileio import FormatError
from .grid import WrappedImage, curl, greedy_shift_field, integrate
from .lsq import LsqConvergenceError, hybrid_unwrap, lsq_unwrap
from .model import DEFAULT_SIGMA, ModelParams
from .oracle import enumerate_posterior
from .solver import AnnealSchedule, anneal, pixel_entropy
from .synth import (PRESETS, SmoothnessError, evaluate, format_spec, generate, load_spec,
                    wrap_surface, wrapped_rmse)

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_IO = 2
EXIT_VIOLATIONS = 3
EXIT_PARAMS = 4


class ParamError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARAMS, f"{self.prog}: error: {message}\n")


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _load_image(path) -> WrappedImage:
    phi = fileio.read_raster(path)
    try:
        return WrappedImage(phi)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None


def cmd_synth(args):
    if args.spec:
        try:
            spec = load_spec(args.spec)
        except ValueError as exc:
            raise FormatError(f"{args.spec}: {exc}") from None
    else:
        spec = PRESETS[args.preset](args.rows, args.cols, args.seed)
    psi = generate(spec)
    try:
        img, shifts = wrap_surface(psi)
    except SmoothnessError as exc:
        raise ParamError(str(exc)) from None
    fileio.write_raster(args.out_surface, psi)
    fileio.write_raster(args.out_wrapped, img.phi)
    fileio.write_shifts(args.out_shifts, shifts)
    if args.dump_spec:
        with open(args.dump_spec, "w") as fh:
            fh.write(format_spec(spec))
    print(f"rows={spec.rows} cols={spec.cols} greedy_violations={curl(greedy_shift_field(img)).violation_count}")
    return EXIT_OK


def _schedule(args) -> AnnealSchedule:
    try:
        return AnnealSchedule.geometric(args.t_start, args.t_end, args.t_steps, args.sweeps, args.tol)
    except ValueError as exc:
        raise ParamError(str(exc)) from None


def cmd_unwrap(args):
    schedule = _schedule(args)
    if not args.sigma > 0:
        raise ParamError("--sigma must be positive")
    img = _load_image(args.input)
    if args.backend:
        kernels.use_backend(args.backend)
    report = anneal(img, schedule, args.sigma, order=args.order, seed=args.seed)
    violations = report.violation_count
    if args.out_shifts:
        fileio.write_shifts(args.out_shifts, report.shifts)
    if args.report:
        fileio.write_report(args.report, report.records)
    if args.out_beliefs:
        fileio.write_beliefs(args.out_beliefs, report.beliefs)
    if args.out_entropy:
        fileio.write_raster(args.out_entropy, pixel_entropy(report.beliefs))
    print(f"violations={violations}")
    print(f"converged={_fmt(report.converged)}")
    if violations:
        print(f"{violations} curl violation(s) remain; no surface written "
              "(run `hybrid` on the shifts)", file=sys.stderr)
        return EXIT_VIOLATIONS
    fileio.write_raster(args.out_surface, integrate(img, report.shifts))
    return EXIT_OK


def cmd_greedy(args):
    img = _load_image(args.input)
    shifts = greedy_shift_field(img)
    fileio.write_shifts(args.out_shifts, shifts)
    print(f"violations={curl(shifts).violation_count}")
    return EXIT_OK


def cmd_lsq(args):
    img = _load_image(args.input)
    fileio.write_raster(args.out_surface, lsq_unwrap(img, tol=args.tol))
    return EXIT_OK


def cmd_hybrid(args):
    img = _load_image(args.input)
    shifts = fileio.read_shifts(args.shifts)
    if shifts.shape != img.shape:
        raise FormatError(f"{args.shifts}: shifts for {shifts.shape} do not match image {img.shape}")
    fileio.write_raster(args.out_surface, hybrid_unwrap(img, shifts, tol=args.tol))
    print(f"violations={curl(shifts).violation_count}")
    return EXIT_OK


def cmd_eval(args):
    truth = fileio.read_raster(args.truth)
    estimate = fileio.read_raster(args.estimate)
    if truth.shape != estimate.shape:
        raise FormatError(f"shape mismatch: {truth.shape} vs {estimate.shape}")
    metrics = evaluate(truth, estimate)
    if args.wrapped:
        metrics["wrapped_input_rmse"] = wrapped_rmse(fileio.read_raster(args.wrapped), estimate)
    for key, value in metrics.items():
        print(f"{key}={_fmt(value)}")
    return EXIT_OK


def cmd_entropy(args):
    magic = fileio.read_magic(args.beliefs_report)
    if magic == fileio.BELIEF_MAGIC:
        raster = pixel_entropy(fileio.read_beliefs(args.beliefs_report))
    elif magic == fileio.RASTER_MAGIC:
        raster = fileio.read_raster(args.beliefs_report)
    else:
        raise FormatError(f"{args.beliefs_report}: expected a belief or raster file, found {magic!r}")
    fileio.write_pgm(args.out, raster, stream=sys.stderr)
    return EXIT_OK


def cmd_oracle(args):
    img = _load_image(args.input)
    try:
        params = ModelParams(args.temp, args.sigma)
        post = enumerate_posterior(img, params)
    except ValueError as exc:
        raise ParamError(str(exc)) from None
    alpha, beta = post.edge_marginals
    print(f"Z={_fmt(post.partition_value)}")
    print(f"log_Z={_fmt(post.log_partition)}")
    print(f"map_probability={_fmt(post.map_probability)}")
    print("map_a=" + ";".join(",".join(str(int(v)) for v in row) for row in post.map_config.a))
    print("map_b=" + ";".join(",".join(str(int(v)) for v in row) for row in post.map_config.b))
    for name, marg in (("a", alpha), ("b", beta)):
        for i, j in np.ndindex(marg.shape[:2]):
            p = marg[i, j]
            print(f"marginal_{name}[{i},{j}]={_fmt(float(p[0]))},{_fmt(float(p[1]))},{_fmt(float(p[2]))}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mfunwrap", description="Mean-field phase unwrapping.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", help="generate a synthetic terrain and wrap it")
    src = s.add_mutually_exclusive_group()
    src.add_argument("--spec", help="terrain config file (key = value lines)")
    src.add_argument("--preset", choices=sorted(PRESETS), default="default")
    s.add_argument("--rows", type=int, default=100)
    s.add_argument("--cols", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out-surface", required=True)
    s.add_argument("--out-wrapped", required=True)
    s.add_argument("--out-shifts", required=True)
    s.add_argument("--dump-spec", help="also write the terrain config used")
    s.set_defaults(func=cmd_synth)

    u = sub.add_parser("unwrap", help="annealed mean-field unwrapping")
    u.add_argument("--in", dest="input", required=True)
    u.add_argument("--sigma", type=float, default=DEFAULT_SIGMA)
    u.add_argument("--t-start", type=float, default=10.0)
    u.add_argument("--t-end", type=float, default=0.05)
    u.add_argument("--t-steps", type=int, default=20)
    u.add_argument("--sweeps", type=int, default=10, help="max sweeps per temperature")
    u.add_argument("--tol", type=float, default=1e-7, help="relative F change to stop at")
    u.add_argument("--out-surface", required=True)
    u.add_argument("--out-shifts")
    u.add_argument("--out-entropy", help="per-pixel entropy raster (PUW1)")
    u.add_argument("--out-beliefs", help="final belief triples (PUWB1)")
    u.add_argument("--report", help="per-temperature CSV report")
    u.add_argument("--order", choices=("raster", "random"), default="raster")
    u.add_argument("--seed", type=int, default=0, help="seed for --order random")
    u.add_argument("--backend", choices=kernels.available_backends())
    u.set_defaults(func=cmd_unwrap)

    g = sub.add_parser("greedy", help="independent per-edge shifts (debugging)")
    g.add_argument("--in", dest="input", required=True)
    g.add_argument("--out-shifts", required=True)
    g.set_defaults(func=cmd_greedy)

    ls = sub.add_parser("lsq", help="least-squares unwrapping")
    ls.add_argument("--in", dest="input", required=True)
    ls.add_argument("--out-surface", required=True)
    ls.add_argument("--tol", type=float, default=1e-8)
    ls.set_defaults(func=cmd_lsq)

    h = sub.add_parser("hybrid", help="least-squares fit of a shift-derived gradient field")
    h.add_argument("--in", dest="input", required=True)
    h.add_argument("--shifts", required=True)
    h.add_argument("--out-surface", required=True)
    h.add_argument("--tol", type=float, default=1e-8)
    h.set_defaults(func=cmd_hybrid)

    e = sub.add_parser("eval", help="compare an estimate with the true surface")
    e.add_argument("--truth", required=True)
    e.add_argument("--estimate", required=True)
    e.add_argument("--wrapped", help="wrapped input, to also report RMSE against it")
    e.set_defaults(func=cmd_eval)

    en = sub.add_parser("entropy", help="render an entropy map as PGM")
    en.add_argument("--beliefs-report", required=True,
                    help="PUWB1 beliefs or PUW1 entropy raster from `unwrap`")
    en.add_argument("--out", required=True)
    en.set_defaults(func=cmd_entropy)

    o = sub.add_parser("oracle", help="exact posterior of a tiny image")
    o.add_argument("--in", dest="input", required=True)
    o.add_argument("--sigma", type=float, default=DEFAULT_SIGMA)
    o.add_argument("--temp", type=float, required=True)
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ParamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    except LsqConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
