"""Command-line interface for scheme inspection, single solves, and studies.

Subcommands:
  scheme       print truncation counts and node/weight pairs
  apply        compute the approximate fractional solve for a matrix or mesh
  sinc-study   quadrature-decay sweep, CSV output
  total-study  mesh-refinement study with coupled k(h), CSV output
  check        run the built-in invariant battery

Exit codes: 0 success, 1 invalid input or I/O failure, 2 numerical failure.
List-valued flags take comma-separated values.  Bare study invocations use
the reference experimental setup (512 cells, beta 0.3/0.5/0.7, 50000 series
terms).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from .experiments import (
    H1,
    L2,
    R_AS_BETA,
    SincStudyConfig,
    TotalStudyConfig,
    csv_text,
    emit_csv,
    sinc_error_study,
    total_error_study,
)
from .fem1d import assemble, l2_project
from .operators import DenseAccretiveOperator, NumericalError, read_dense_matrix
from .quadrature import BALANCED, UNIFORM, apply_quadrature, build_scheme

log = logging.getLogger("fracsinc")

# The library accepts any beta in (0, 1); the CLI keeps a safety margin from
# the endpoints, where the truncation counts diverge.
BETA_MIN = 1e-3
BETA_MAX = 1.0 - 1e-3


def _beta(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not BETA_MIN <= value <= BETA_MAX:
        raise argparse.ArgumentTypeError(
            f"beta must lie in [{BETA_MIN}, {BETA_MAX}], got {text}"
        )
    return value


def _positive(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not value > 0.0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _split(text: str) -> list:
    items = [piece.strip() for piece in text.split(",")]
    items = [piece for piece in items if piece]
    if not items:
        raise argparse.ArgumentTypeError("empty list")
    return items


def _beta_list(text: str) -> tuple:
    return tuple(_beta(piece) for piece in _split(text))


def _float_list(text: str) -> tuple:
    try:
        return tuple(float(piece) for piece in _split(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated number list: {text!r}")


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(piece) for piece in _split(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}")


def _r_list(text: str) -> tuple:
    out = []
    for piece in _split(text):
        if piece == R_AS_BETA:
            out.append(piece)
            continue
        try:
            out.append(float(piece))
        except ValueError:
            raise argparse.ArgumentTypeError(
                f"norm orders are numbers or {R_AS_BETA!r}, got {piece!r}"
            )
    return tuple(out)


def _norm_list(text: str) -> tuple:
    out = []
    for piece in _split(text):
        upper = piece.upper()
        if upper not in (L2, H1):
            raise argparse.ArgumentTypeError(f"norms are l2 or h1, got {piece!r}")
        out.append(upper)
    return tuple(out)


def read_vector(path) -> np.ndarray:
    """Read a vector stored one decimal per line (blank lines ignored)."""
    with open(path) as handle:
        lines = [line.strip() for line in handle]
    values = []
    for i, line in enumerate(lines, start=1):
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise ValueError(f"{str(path)!r} line {i}: not a number: {line!r}")
    if not values:
        raise ValueError(f"{str(path)!r} contains no values")
    return np.array(values)


def _write_vector(values, path) -> None:
    lines = "".join(f"{float(v)!r}\n" for v in values)
    if path is None:
        sys.stdout.write(lines)
        return
    with open(path, "w", newline="\n") as handle:
        handle.write(lines)


def _default_workers() -> int:
    return os.cpu_count() or 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracsinc",
        description="Negative fractional powers of accretive operators by sinc quadrature.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p = sub.add_parser(
        "scheme",
        help="print truncation counts and node/weight pairs",
        formatter_class=fmt,
    )
    p.add_argument("--beta", type=_beta, required=True, help="fractional power in (0, 1)")
    p.add_argument("--k", type=_positive, required=True, help="quadrature spacing")
    p.add_argument("--strategy", choices=(BALANCED, UNIFORM), default=BALANCED,
                   help="truncation strategy")
    p.add_argument("--s-plus", type=float, default=0.0,
                   help="balancing index (balanced strategy only)")

    p = sub.add_parser(
        "apply",
        help="apply the quadrature approximation of the negative fractional power",
        formatter_class=fmt,
    )
    p.add_argument("--beta", type=_beta, required=True, help="fractional power in (0, 1)")
    p.add_argument("--k", type=_positive, required=True, help="quadrature spacing")
    p.add_argument("--strategy", choices=(BALANCED, UNIFORM), default=BALANCED,
                   help="truncation strategy")
    p.add_argument("--s-plus", type=float, default=0.0,
                   help="balancing index (balanced strategy only)")
    p.add_argument("--matrix", metavar="FILE", default=None,
                   help="dense operator file (first line n, then n rows of n decimals)")
    p.add_argument("--vector", metavar="FILE", default=None,
                   help="input vector, one decimal per line (with --matrix)")
    p.add_argument("--cells", type=int, default=None,
                   help="build the 1D mesh operator with this many cells instead")
    p.add_argument("--convection", type=float, default=0.0,
                   help="constant convection coefficient (with --cells)")
    p.add_argument("--load", type=float, default=1.0,
                   help="constant load projected onto the mesh (with --cells)")
    p.add_argument("--out", metavar="FILE", default=None,
                   help="write the result here, one decimal per line (default: stdout)")

    p = sub.add_parser(
        "sinc-study",
        help="quadrature error vs spacing on a fixed mesh",
        formatter_class=fmt,
    )
    p.add_argument("--beta", type=_beta_list, default=(0.3, 0.5, 0.7),
                   help="comma-separated fractional powers")
    p.add_argument("--r", type=_r_list, default=(0.0, R_AS_BETA, 1.0),
                   help="comma-separated norm orders in [0, 2]; 'beta' tracks each beta")
    p.add_argument("--k", type=_float_list, default=(1.0, 0.75, 0.6, 0.5, 0.4, 0.35, 0.3),
                   help="comma-separated quadrature spacings")
    p.add_argument("--cells", type=int, default=512, help="mesh cells")
    p.add_argument("--strategy", choices=(BALANCED, UNIFORM), default=BALANCED,
                   help="truncation strategy")
    p.add_argument("--s-plus", type=float, default=None,
                   help="override the per-cell balancing rule")
    p.add_argument("--workers", type=int, default=_default_workers(),
                   help="concurrent study cells")
    p.add_argument("--out", metavar="FILE", default=None,
                   help="CSV output path (default: stdout)")

    p = sub.add_parser(
        "total-study",
        help="L2/H1 error under mesh refinement with coupled quadrature spacing",
        formatter_class=fmt,
    )
    p.add_argument("--beta", type=_beta_list, default=(0.3, 0.5, 0.7),
                   help="comma-separated fractional powers")
    p.add_argument("--j", type=_int_list, default=(3, 4, 5, 6, 7, 8),
                   help="comma-separated mesh levels, cell count 2^j")
    p.add_argument("--norms", type=_norm_list, default=(L2, H1),
                   help="comma-separated error norms (l2, h1)")
    p.add_argument("--series-terms", type=int, default=50000,
                   help="reference series truncation")
    p.add_argument("--l2-constant", type=_positive, default=8.0,
                   help="L2 coupling-rule constant")
    p.add_argument("--h1-constant", type=_positive, default=4.0,
                   help="H1 coupling-rule constant")
    p.add_argument("--workers", type=int, default=_default_workers(),
                   help="concurrent study cells")
    p.add_argument("--out", metavar="FILE", default=None,
                   help="CSV output path (default: stdout)")

    sub.add_parser("check", help="run the built-in invariant battery", formatter_class=fmt)
    return parser


def _emit(table, out) -> None:
    if out is None:
        sys.stdout.write(csv_text(table))
    else:
        emit_csv(table, out)
        log.info("wrote %s", out)


def _run_scheme(args) -> int:
    scheme = build_scheme(args.beta, args.k, args.strategy, args.s_plus)
    print(f"M={scheme.M} N={scheme.N}")
    for node, weight in zip(scheme.nodes, scheme.weights):
        print(f"{float(node)!r} {float(weight)!r}")
    return 0


def _run_apply(args) -> int:
    if (args.matrix is None) == (args.cells is None):
        raise ValueError("pass exactly one of --matrix or --cells")
    scheme = build_scheme(args.beta, args.k, args.strategy, args.s_plus)
    if args.matrix is not None:
        if args.vector is None:
            raise ValueError("--matrix needs --vector with the input data")
        op = DenseAccretiveOperator(read_dense_matrix(args.matrix))
        f = read_vector(args.vector)
    else:
        system = assemble(args.cells, args.convection)
        op = system
        f = l2_project(system, args.load)
        log.info("projected constant load %g onto %d interior nodes", args.load, system.n_dofs)
    result = apply_quadrature(scheme, op, f)
    _write_vector(result, args.out)
    return 0


def _run_sinc_study(args) -> int:
    cfg = SincStudyConfig(
        betas=args.beta,
        rs=args.r,
        ks=args.k,
        n_cells=args.cells,
        strategy=args.strategy,
        s_plus=args.s_plus,
        workers=args.workers,
    )
    log.info("sinc study: %d cells", len(cfg.betas) * len(cfg.rs) * len(cfg.ks))
    _emit(sinc_error_study(cfg), args.out)
    return 0


def _run_total_study(args) -> int:
    cfg = TotalStudyConfig(
        betas=args.beta,
        levels=args.j,
        norms=args.norms,
        n_terms=args.series_terms,
        l2_rule_constant=args.l2_constant,
        h1_rule_constant=args.h1_constant,
        workers=args.workers,
    )
    log.info("total study: %d cells", len(cfg.betas) * len(cfg.norms) * len(cfg.levels))
    _emit(total_error_study(cfg), args.out)
    return 0


def _run_check(args) -> int:
    from .selfcheck import run_checks

    return 0 if run_checks() else 2


_COMMANDS = {
    "scheme": _run_scheme,
    "apply": _run_apply,
    "sinc-study": _run_sinc_study,
    "total-study": _run_total_study,
    "check": _run_check,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; fold into the validation code.
        return 0 if exc.code in (0, None) else 1
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return _COMMANDS[args.command](args)
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
