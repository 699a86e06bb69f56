"""Batch command-line front end.

Exit codes: 0 for success (or a passing verdict), 2 for input errors and
numerical ambiguities, 3 for a verified negative (uncovered family, failing
verdict).  Output is deterministic: floats in CSV and tables use 17
significant digits, JSON keys are sorted, row order is fixed by the inputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from ._parallel import default_jobs
from .circle_dirac import (
    C_TOL,
    I_TOL,
    R_TOL,
    U_TOL,
    HolonomySpec,
    SpinStructure,
    analytic_spectrum,
    kernel_dim,
    truncation_spectrum,
)
from .cohomology import AlgebraContext, format_class, obstruction_product
from .errors import DiracObstructionError, ValidationError
from .fredholm import B_TOL, H_TOL, INV_TOL, PathSpec, SampledFamily, build_cover, spectral_flow
from .obstruction import TorusGridSpec, verify_contrapositive

EXIT_OK = 0
EXIT_ERROR = 2
EXIT_NEGATIVE = 3


@dataclass(frozen=True)
class RunConfig:
    """One parsed invocation: where input comes from, where output goes."""

    subcommand: str
    inputs: tuple[str, ...]
    output: str | None
    tolerances: dict[str, float]
    jobs: int

    def __post_init__(self) -> None:
        for name, value in self.tolerances.items():
            if value <= 0:
                raise ValidationError(f"tolerance {name} must be positive, got {value}")
        if self.jobs < 1:
            raise ValidationError(f"jobs must be >= 1, got {self.jobs}")


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text}")
    return value


def _config(args: argparse.Namespace, tol_names: tuple[str, ...], inputs: tuple[str, ...] = ()) -> RunConfig:
    return RunConfig(
        subcommand=args.command,
        inputs=inputs,
        output=getattr(args, "output", None),
        tolerances={name: getattr(args, name) for name in tol_names},
        jobs=getattr(args, "jobs", 1),
    )


def _emit(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)


def _dump_json(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _load_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"malformed JSON in {path}: {exc}")


def _holonomy_from_args(args: argparse.Namespace) -> HolonomySpec:
    if (args.holonomy is None) == (args.angles is None):
        raise ValidationError("give exactly one of a holonomy file and --angles")
    if args.angles is not None:
        tokens = [t.strip() for t in args.angles.split(",") if t.strip()]
        if not tokens:
            raise ValidationError("--angles must list at least one angle")
        return HolonomySpec.from_angles(tokens)
    return HolonomySpec.from_json(_load_json(args.holonomy))


def _parse_epsilons(text: str) -> list[float]:
    try:
        values = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ValidationError(f"malformed radius list {text!r}; expected comma-separated numbers")
    if not values:
        raise ValidationError("--epsilons must list at least one radius")
    return values


def _cmd_spectrum(args: argparse.Namespace) -> int:
    cfg = _config(args, ("u_tol", "r_tol", "c_tol"))
    holonomy = _holonomy_from_args(args)
    spin = SpinStructure.parse(args.delta)
    if args.truncation is None:
        window = analytic_spectrum(holonomy, spin, args.epsilon, **cfg.tolerances)
    else:
        window = truncation_spectrum(holonomy, spin, args.truncation, args.epsilon, **cfg.tolerances)
    _emit(window.to_csv(), cfg.output)
    return EXIT_OK


def _cmd_kernel_dim(args: argparse.Namespace) -> int:
    cfg = _config(args, ("u_tol", "r_tol", "i_tol"))
    holonomy = _holonomy_from_args(args)
    spin = SpinStructure.parse(args.delta)
    dim = kernel_dim(holonomy, spin, **cfg.tolerances)
    _emit(f"{dim}\n", cfg.output)
    return EXIT_OK


def _cmd_cohomology(args: argparse.Namespace) -> int:
    cfg = _config(args, ())
    try:
        indices = [int(t) for t in args.indices.split(",") if t.strip()]
    except ValueError:
        raise ValidationError(f"malformed index list {args.indices!r}; expected comma-separated integers")
    ctx = AlgebraContext(args.k)
    product = obstruction_product(ctx, indices)
    _emit(
        _dump_json(
            {
                "k": args.k,
                "indices": indices,
                "class": format_class(product),
                "nonzero": not product.is_zero(),
            }
        ),
        cfg.output,
    )
    return EXIT_OK


def _cmd_cover(args: argparse.Namespace) -> int:
    cfg = _config(args, ("inv_tol", "h_tol"), inputs=(args.family,))
    fam = SampledFamily.load(args.family, h_tol=args.h_tol)
    report = build_cover(fam, args.k, args.epsilon, inv_tol=args.inv_tol, jobs=cfg.jobs)
    doc = report.to_json()
    doc["tolerances"] = cfg.tolerances
    _emit(_dump_json(doc), cfg.output)
    if report.covered:
        return EXIT_OK
    if report.indeterminate:
        # a negative tainted by borderline invertibility is not a certificate
        print(
            f"error: {len(report.indeterminate)} borderline invertibility decision(s); "
            "perturb epsilon or inv-tol",
            file=sys.stderr,
        )
        return EXIT_ERROR
    return EXIT_NEGATIVE


def _cmd_verify(args: argparse.Namespace) -> int:
    cfg = _config(args, ("b_tol", "inv_tol", "i_tol"))
    spec = TorusGridSpec(
        k=args.k,
        resolution=args.resolution,
        spin=SpinStructure.parse(args.delta),
        truncation=args.truncation,
        diagonal_only=not args.conjugated,
    )
    verdict = verify_contrapositive(
        spec,
        _parse_epsilons(args.epsilons),
        bounded=args.bounded,
        cover_check=not args.skip_cover,
        jobs=cfg.jobs,
        b_tol=args.b_tol,
        inv_tol=args.inv_tol,
        i_tol=args.i_tol,
    )
    doc = verdict.to_json()
    doc["tolerances"] = cfg.tolerances
    sys.stdout.write(verdict.summary_table())
    _emit(_dump_json(doc), cfg.output)
    if not verdict.passed:
        return EXIT_NEGATIVE
    if any(r.cover_ok is False for r in verdict.reports):
        # counts pass but the pigeonhole cover failed: numerically inconsistent
        print("error: cover cross-check failed despite passing counts", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


def _cmd_flow(args: argparse.Namespace) -> int:
    cfg = _config(args, ("h_tol",), inputs=(args.family,))
    fam = SampledFamily.load(args.family, h_tol=args.h_tol)
    ids = tuple(t.strip() for t in args.path.split(",") if t.strip())
    path = PathSpec(ids, closed=args.closed)
    flow = spectral_flow(fam, path, args.eta, jobs=cfg.jobs)
    _emit(f"{flow}\n", cfg.output)
    return EXIT_OK


def _add_holonomy_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("holonomy", nargs="?", default=None, help="holonomy JSON file")
    p.add_argument("--angles", default=None, help="comma-separated angles (floats or p/q) instead of a file")
    p.add_argument("--delta", default="1/2", help="spin phase exponent, 0 or 1/2 (default 1/2)")


def _add_jobs_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--jobs", type=int, default=default_jobs(), help="worker threads (env DIRAC_OBSTRUCTION_JOBS)")


def _tol_arg(p: argparse.ArgumentParser, flag: str, default: float, doc: str) -> None:
    p.add_argument(flag, type=_positive_float, default=default, help=f"{doc} (default {default:g})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dirac-obstruction",
        description="Spectral-count obstruction toolkit for twisted Dirac families on the circle.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="window eigenvalues of a twisted Dirac operator as CSV")
    _add_holonomy_args(p)
    p.add_argument("--epsilon", type=_positive_float, required=True, help="window radius")
    p.add_argument("--truncation", type=int, default=None, help="use the mode-truncated matrix with |n| <= N")
    _tol_arg(p, "--u-tol", U_TOL, "unitarity tolerance")
    _tol_arg(p, "--r-tol", R_TOL, "eigenpair residual tolerance")
    _tol_arg(p, "--c-tol", C_TOL, "multiplicity clustering tolerance")
    p.add_argument("--output", default=None, help="write CSV here instead of stdout")
    p.set_defaults(handler=_cmd_spectrum)

    p = sub.add_parser("kernel-dim", help="dimension of the zero-mode space")
    _add_holonomy_args(p)
    _tol_arg(p, "--u-tol", U_TOL, "unitarity tolerance")
    _tol_arg(p, "--r-tol", R_TOL, "eigenpair residual tolerance")
    _tol_arg(p, "--i-tol", I_TOL, "integrality tolerance")
    p.add_argument("--output", default=None, help="write the integer here instead of stdout")
    p.set_defaults(handler=_cmd_kernel_dim)

    p = sub.add_parser("cohomology", help="product of odd generator classes, canonical text + nonzero flag")
    p.add_argument("--k", type=int, required=True, help="number of generators")
    p.add_argument("--indices", required=True, help="comma-separated generator indices, strictly ascending")
    p.add_argument("--output", default=None, help="write JSON here instead of stdout")
    p.set_defaults(handler=_cmd_cohomology)

    p = sub.add_parser("cover", help="shifted-invertibility cover of a sampled family")
    p.add_argument("family", help="family JSON file")
    p.add_argument("--k", type=int, required=True, help="window count bound; uses k+1 shift levels")
    p.add_argument("--epsilon", type=_positive_float, required=True, help="window radius")
    _tol_arg(p, "--inv-tol", INV_TOL, "invertibility threshold")
    _tol_arg(p, "--h-tol", H_TOL, "Hermitian deviation tolerance")
    _add_jobs_arg(p)
    p.add_argument("--output", default=None, help="write JSON here instead of stdout")
    p.set_defaults(handler=_cmd_cover)

    p = sub.add_parser("verify", help="end-to-end grid verdict: cohomology product vs window counts")
    p.add_argument("--k", type=int, required=True, help="holonomy rank")
    p.add_argument("--resolution", type=int, required=True, help="grid points per angle circle")
    p.add_argument("--delta", default="1/2", help="spin phase exponent, 0 or 1/2 (default 1/2)")
    p.add_argument("--truncation", type=int, default=4, help="Fourier truncation order N (default 4)")
    p.add_argument("--epsilons", required=True, help="comma-separated window radii")
    p.add_argument("--bounded", action="store_true", help="apply the bounded transform and map radii through it")
    p.add_argument("--conjugated", action="store_true", help="sample conjugated holonomies instead of diagonal ones")
    p.add_argument("--skip-cover", action="store_true", help="skip the cover cross-check")
    _tol_arg(p, "--b-tol", B_TOL, "window boundary guard")
    _tol_arg(p, "--inv-tol", INV_TOL, "invertibility threshold")
    _tol_arg(p, "--i-tol", I_TOL, "integrality tolerance")
    _add_jobs_arg(p)
    p.add_argument("--output", default=None, help="write the verdict JSON here instead of stdout")
    p.set_defaults(handler=_cmd_verify)

    p = sub.add_parser("flow", help="spectral flow along a path through a family file")
    p.add_argument("family", help="family JSON file")
    p.add_argument("--path", required=True, help="comma-separated point ids")
    p.add_argument("--closed", action="store_true", help="append the wrap-around step")
    p.add_argument("--eta", type=_positive_float, required=True, help="step fineness / endpoint gap guard")
    _tol_arg(p, "--h-tol", H_TOL, "Hermitian deviation tolerance")
    _add_jobs_arg(p)
    p.add_argument("--output", default=None, help="write the integer here instead of stdout")
    p.set_defaults(handler=_cmd_flow)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except DiracObstructionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def run() -> None:
    raise SystemExit(main(sys.argv[1:]))


if __name__ == "__main__":
    run()
