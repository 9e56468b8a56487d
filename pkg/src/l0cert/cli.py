"""Command-line front end: trace solution paths, certify supports, query the
brute-force oracle and generate the built-in instance families.

Verdicts are data, not exit codes: a clean run exits 0 whatever the
certificates say.  Exit 2 flags unparseable input or invalid parameters,
exit 3 an enumeration above the subset cap, exit 1 anything else the tool
could not finish.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .certificates import (
    concurrent_check,
    kkt_check_type1,
    most_correlated_concurrent,
    most_correlated_type0,
    most_correlated_type1,
)
from .core import ProblemInstance, Support, standardize
from .dataio import ParseError, load_instance, write_matrix, write_response
from .errors import (
    DegenerateTie,
    L0CertError,
    NotStandardized,
    SpecViolation,
    TiedCorrelations,
    TooLarge,
)
from .generators import ExtremeExampleSpec, make_extreme, make_orthonormal, make_restrictive
from .homotopy import certify_path, solution_at_lambda, solve_path
from .jsonio import dumps
from .oracle import brute_force_p0

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_PARSE = 2
EXIT_TOO_LARGE = 3


def _sha256(path) -> str:
    digest = hashlib.sha256()
    digest.update(Path(path).read_bytes())
    return digest.hexdigest()


def _emit(payload: dict, out: str | None) -> None:
    text = dumps(payload)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _instance_summary(instance: ProblemInstance) -> dict:
    return {
        "n": instance.n,
        "m": instance.m,
        "standardized": instance.standardized,
        "full_column_rank": instance.full_column_rank,
    }


def _load(args) -> ProblemInstance:
    instance = load_instance(args.matrix, args.response, header=args.header)
    if getattr(args, "standardize", False):
        instance = standardize(instance, center=getattr(args, "center", False)).instance
    return instance


def _csv_floats(text: str):
    try:
        return [float(f) for f in text.split(",") if f.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


# ---------------------------------------------------------------------------
# subcommands


def cmd_path(args) -> int:
    instance = _load(args)
    path = solve_path(instance, lambda_floor=args.lambda_floor, tie_policy=args.tie_policy)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "l0cert", "version": __version__},
        "inputs": {
            "matrix": {"path": str(args.matrix), "sha256": _sha256(args.matrix)},
            "response": {"path": str(args.response), "sha256": _sha256(args.response)},
        },
        "instance": _instance_summary(instance),
        "path": path.to_json_dict(),
    }
    if not args.no_timestamp:
        payload["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    _emit(payload, args.out)
    return EXIT_OK


def cmd_certify(args) -> int:
    started = time.perf_counter()
    instance = _load(args)
    timings = {}

    t0 = time.perf_counter()
    path = solve_path(instance, lambda_floor=args.lambda_floor, tie_policy="stop")
    timings["path_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    bundles = certify_path(instance, path, args.lambda0, m_hint=args.m_hint, force=args.force)
    timings["certificates_s"] = time.perf_counter() - t0

    report = {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "l0cert", "version": __version__},
        "inputs": {
            "matrix": {"path": str(args.matrix), "sha256": _sha256(args.matrix)},
            "response": {"path": str(args.response), "sha256": _sha256(args.response)},
        },
        "instance": _instance_summary(instance),
        "parameters": {
            "lambda0": args.lambda0,
            "lambda1": args.lambda1,
            "m_hint": args.m_hint,
            "standardize": args.standardize,
            "lambda_floor": args.lambda_floor,
        },
        "path": {
            "lambda_max": path.lambda_max,
            "lambda_reached": path.lambda_reached,
            "selection_order": list(path.selection_order),
            "n_segments": len(path.segments),
            "degenerate_tie": path.tie,
        },
        "certificates": [bundle.to_json_dict() for bundle in bundles],
    }

    if args.lambda1 is not None:
        x1 = solution_at_lambda(path, args.lambda1)
        support = x1.support()
        kkt = kkt_check_type1(instance, x1, args.lambda1)
        concurrent = concurrent_check(
            instance, support, args.lambda0, args.lambda1,
            mode="oracle" if args.oracle else "certificate", force=args.force)
        report["solution_at_lambda1"] = {
            "lambda1": args.lambda1,
            "support": list(support.indices),
            "x": [float(v) for v in x1.values],
            "kkt": kkt.to_json_dict(),
            "concurrent": concurrent.to_json_dict(),
        }

    if args.all_breakpoints:
        checks = []
        for seg in path.segments:
            lam = seg.lambda_lo
            if lam <= 0:
                continue
            verdict = kkt_check_type1(instance, solution_at_lambda(path, lam), lam)
            checks.append({"lambda1": lam, "kkt": verdict.to_json_dict()})
        report["breakpoint_kkt"] = checks

    if args.most_correlated is not None:
        section = {"k": args.most_correlated}
        try:
            section["type0"] = most_correlated_type0(
                instance, args.most_correlated, args.lambda0).to_json_dict()
            if args.lambda1 is not None:
                section["type1"] = most_correlated_type1(
                    instance, args.most_correlated, args.lambda1).to_json_dict()
                section["concurrent"] = most_correlated_concurrent(
                    instance, args.most_correlated, args.lambda0, args.lambda1).to_json_dict()
        except (NotStandardized, TiedCorrelations) as exc:
            section["error"] = str(exc)
        report["most_correlated"] = section

    if args.oracle:
        t0 = time.perf_counter()
        result = brute_force_p0(instance, args.lambda0, force=args.force)
        timings["oracle_s"] = time.perf_counter() - t0
        report["oracle"] = result.to_json_dict()
        oracle_support = set(result.best_support.indices)
        agreement = []
        for bundle in bundles:
            cert = bundle.certificates["subset_of_type0"]
            if cert.verdict == "certified":
                agreement.append({
                    "support": list(bundle.support.indices),
                    "contained_in_oracle_support": set(bundle.support.indices) <= oracle_support,
                })
        report["oracle_agreement"] = agreement

    if not args.no_timestamp:
        timings["total_s"] = time.perf_counter() - started
        report["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S%z")
        report["timings"] = timings
    _emit(report, args.out)
    return EXIT_OK


def cmd_oracle(args) -> int:
    instance = _load(args)
    result = brute_force_p0(instance, args.lambda0, k_max=args.k_max, force=args.force)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "l0cert", "version": __version__},
        "inputs": {
            "matrix": {"path": str(args.matrix), "sha256": _sha256(args.matrix)},
            "response": {"path": str(args.response), "sha256": _sha256(args.response)},
        },
        "instance": _instance_summary(instance),
        "oracle": result.to_json_dict(),
    }
    if not args.no_timestamp:
        payload["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    _emit(payload, args.out)
    return EXIT_OK


def cmd_generate(args) -> int:
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    if args.family == "extreme":
        spec = ExtremeExampleSpec(m=args.m, signal_size=args.A,
                                  decoy_correlations=tuple(args.a))
        instance = make_extreme(spec)
        echo = {"family": "extreme", "m": args.m, "A": args.A, "a": list(args.a)}
    elif args.family == "restrictive":
        instance = make_restrictive(args.n, args.m, args.k, args.a)
        echo = {"family": "restrictive", "n": args.n, "m": args.m, "k": args.k,
                "a": list(args.a)}
    else:
        instance = make_orthonormal(args.n, args.m, args.coeffs,
                                    seed=args.seed, noise_std=args.noise_std)
        echo = {"family": "orthonormal", "n": args.n, "m": args.m,
                "coeffs": list(args.coeffs), "seed": args.seed,
                "noise_std": args.noise_std}
    write_matrix(outdir / "matrix.csv", instance.phi)
    write_response(outdir / "y.csv", instance.y)
    payload = {"schema_version": SCHEMA_VERSION, **echo,
               "files": {"matrix": "matrix.csv", "response": "y.csv"}}
    (outdir / "instance.json").write_text(dumps(payload), encoding="utf-8")
    sys.stderr.write(f"wrote matrix.csv, y.csv, instance.json to {outdir}\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument wiring


def _add_io_args(p, standardize_flags=True):
    p.add_argument("matrix", help="CSV with one comma-separated row per observation")
    p.add_argument("response", help="file with one response value per line")
    p.add_argument("--header", action="store_true", help="skip the first row of each file")
    if standardize_flags:
        p.add_argument("--standardize", action="store_true",
                       help="scale columns to unit norm before anything else")
        p.add_argument("--center", action="store_true",
                       help="with --standardize, mean-center columns first")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.add_argument("--no-timestamp", action="store_true",
                   help="omit timestamp and timings (deterministic output)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="l0cert",
        description="solution paths and best-subset optimality certificates",
    )
    parser.add_argument("--version", action="version", version=f"l0cert {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("path", help="trace the full solution path")
    _add_io_args(p)
    p.add_argument("--lambda-floor", type=float, default=0.0, dest="lambda_floor")
    p.add_argument("--tie-policy", choices=("error", "stop"), default="error",
                   dest="tie_policy")
    p.set_defaults(func=cmd_path)

    p = sub.add_parser("certify", help="trace a path and certify its supports")
    _add_io_args(p)
    p.add_argument("--lambda0", type=float, required=True)
    p.add_argument("--lambda1", type=float, default=None)
    p.add_argument("--all-breakpoints", action="store_true", dest="all_breakpoints",
                   help="run the exact penalized-fit test at every breakpoint")
    p.add_argument("--M-hint", type=int, default=None, dest="m_hint",
                   help="a-priori bound on the optimal support size")
    p.add_argument("--oracle", action="store_true",
                   help="run the brute-force referee and report agreement")
    p.add_argument("--most-correlated", type=int, default=None, dest="most_correlated",
                   help="also test the k most correlated columns")
    p.add_argument("--lambda-floor", type=float, default=0.0, dest="lambda_floor")
    p.add_argument("--force", action="store_true", help="ignore the enumeration cap")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("oracle", help="exhaustive best-subset search")
    _add_io_args(p)
    p.add_argument("--lambda0", type=float, required=True)
    p.add_argument("--k-max", type=int, default=None, dest="k_max")
    p.add_argument("--force", action="store_true", help="ignore the enumeration cap")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("generate", help="write an instance family to CSV files")
    fam = p.add_subparsers(dest="family", required=True)

    e = fam.add_parser("extreme")
    e.add_argument("--m", type=int, required=True)
    e.add_argument("--A", type=int, required=True, help="number of signal columns")
    e.add_argument("--a", type=_csv_floats, required=True,
                   help="strictly decreasing decoy correlations")
    e.add_argument("--outdir", required=True)
    e.set_defaults(func=cmd_generate)

    r = fam.add_parser("restrictive")
    r.add_argument("--n", type=int, required=True)
    r.add_argument("--m", type=int, required=True)
    r.add_argument("--k", type=int, required=True)
    r.add_argument("--a", type=_csv_floats, required=True,
                   help="diagonal entries, nonincreasing magnitudes")
    r.add_argument("--outdir", required=True)
    r.set_defaults(func=cmd_generate)

    o = fam.add_parser("orthonormal")
    o.add_argument("--n", type=int, required=True)
    o.add_argument("--m", type=int, required=True)
    o.add_argument("--coeffs", type=_csv_floats, required=True)
    o.add_argument("--seed", type=int, default=None)
    o.add_argument("--noise-std", type=float, default=0.0, dest="noise_std")
    o.add_argument("--outdir", required=True)
    o.set_defaults(func=cmd_generate)

    return parser


def _merge_csv_flags(argv):
    """Join '--a -1,1,0' into '--a=-1,1,0' so leading minus signs in CSV values
    are not mistaken for option switches."""
    merged = []
    skip = False
    for pos, token in enumerate(argv):
        if skip:
            skip = False
            continue
        if token in ("--a", "--coeffs") and pos + 1 < len(argv):
            merged.append(f"{token}={argv[pos + 1]}")
            skip = True
        else:
            merged.append(token)
    return merged


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(_merge_csv_flags(sys.argv[1:] if argv is None else list(argv)))
    try:
        return args.func(args)
    except ParseError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARSE
    except (SpecViolation, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARSE
    except TooLarge as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_TOO_LARGE
    except DegenerateTie as exc:
        sys.stderr.write(f"error: {exc} (rerun with --tie-policy stop)\n")
        return EXIT_FAILED
    except L0CertError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
