"""Command-line front end.

Every command prints canonical JSON (sorted keys, reduced fractions) and
exits with 0 on success, 1 when a mathematical counterexample or invalid
family was found, and 2 on usage, input or oracle-protocol errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .embed import (
    CertificateError,
    FamilyError,
    NotDiracPreservingError,
    apply_embedding,
    classify_embedding,
    extract_family,
)
from .family import DEFAULT_EPSILON, AllocationFamily, CurveError, DomainError, builtin_family
from .harness import SUITES, GeneratorConfig, UnknownSuiteError, measure_stream, run_suite
from .measure import MeasureError, mass_to_json, measure_from_json, measure_to_json, to_float
from .metric import (
    PParameter,
    coupling_cost,
    optimal_coupling,
    validate_coupling,
    wasserstein_distance,
    wasserstein_power,
)
from .oracles import OracleProtocolError, PipeOracle, builtin_oracle

EXIT_OK, EXIT_COUNTEREXAMPLE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(", ", ": "), allow_nan=False)


# -- argument types ------------------------------------------------------------

def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"invalid rational {text!r}") from None


def parse_p(text: str) -> PParameter:
    try:
        return PParameter.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def parse_epsilon(text: str) -> Fraction:
    eps = parse_rational(text)
    if eps < 0:
        raise argparse.ArgumentTypeError("epsilon must be >= 0")
    return eps


def parse_window(text: str) -> list[int]:
    """``1,2,5``, ``1-16`` or ``1..16`` (ranges and items may be mixed)."""
    points: set[int] = set()
    try:
        for item in filter(None, (part.strip() for part in text.split(","))):
            sep = ".." if ".." in item else "-" if "-" in item else None
            if sep:
                lo, hi = (int(v) for v in item.split(sep))
                if lo > hi:
                    raise ValueError
                points.update(range(lo, hi + 1))
            else:
                points.add(int(item))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid window {text!r}") from None
    if not points or min(points) < 1:
        raise argparse.ArgumentTypeError("window must name positive integers")
    return sorted(points)


def parse_grid(text: str) -> list[Fraction]:
    grid = [parse_rational(item) for item in text.split(",") if item.strip()]
    if not grid:
        raise argparse.ArgumentTypeError("grid is empty")
    return grid


def parse_points(text: str) -> list[int]:
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid point list {text!r}") from None


def parse_seed(text: str) -> int:
    seed = int(text, 0)
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return seed


# -- inputs --------------------------------------------------------------------

def read_payload(arg: str, what: str) -> str:
    """A path, ``-`` for stdin, or inline JSON."""
    if arg == "-":
        return sys.stdin.read()
    if arg.lstrip().startswith("{"):
        return arg
    try:
        with open(arg, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"{what}: cannot read {arg!r}: {exc.strerror}") from None


def load_measure(arg: str, what: str):
    try:
        return measure_from_json(read_payload(arg, what), probability=True)
    except MeasureError as exc:
        raise UsageError(f"{what}: {exc}") from None


def load_family(arg: str) -> AllocationFamily:
    """``builtin:<name>`` or family JSON."""
    try:
        if arg.startswith("builtin:"):
            return builtin_family(arg[len("builtin:"):])
        text = read_payload(arg, "family")
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"family: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        return AllocationFamily.from_json(payload)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"family: {exc}") from None


def to_backend(mu, backend: str):
    return to_float(mu) if backend == "float64" else mu


def open_oracle(args):
    if args.pipe:
        return PipeOracle(args.pipe)
    try:
        return builtin_oracle(args.builtin_oracle, args.epsilon)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# -- commands ------------------------------------------------------------------

def cmd_distance(args):
    mu = to_backend(load_measure(args.mu, "mu"), args.backend)
    nu = to_backend(load_measure(args.nu, "nu"), args.backend)
    return EXIT_OK, {"power": mass_to_json(wasserstein_power(mu, nu)),
                     "distance": wasserstein_distance(mu, nu, args.p)}


def cmd_coupling(args):
    mu = to_backend(load_measure(args.mu, "mu"), args.backend)
    nu = to_backend(load_measure(args.nu, "nu"), args.backend)
    pi = optimal_coupling(mu, nu)
    atol = 1e-12 if args.backend == "float64" else 0
    if not validate_coupling(pi, mu, nu, atol):
        raise AssertionError("optimal coupling failed marginal validation")
    out = pi.to_json()
    if args.cost:
        out["cost"] = mass_to_json(coupling_cost(pi))
    return EXIT_OK, out


def cmd_embed(args):
    family = load_family(args.family)
    mu = to_backend(load_measure(args.mu, "mu"), args.backend)
    try:
        return EXIT_OK, measure_to_json(apply_embedding(family, mu, args.epsilon))
    except FamilyError as exc:
        return EXIT_COUNTEREXAMPLE, {"error": "invalid family", "report": exc.report.to_json()}
    except DomainError as exc:
        raise UsageError(str(exc)) from None


def cmd_extract(args):
    oracle = open_oracle(args)
    companions = args.companions or _default_companions(args.window)
    try:
        family = extract_family(oracle, args.window, args.grid, companions)
    except CertificateError as exc:
        return EXIT_COUNTEREXAMPLE, {"certificate": exc.certificate.to_json()}
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    finally:
        _close(oracle)
    return EXIT_OK, family.to_json()


def _default_companions(window: list[int]) -> list[int]:
    top = max(window)
    return [top + 1, top + 2, top + 3]


def cmd_classify(args):
    oracle = open_oracle(args)
    cfg = GeneratorConfig(seed=args.seed, window=frozenset(args.window))
    try:
        report = classify_embedding(oracle, args.window, measure_stream(cfg), args.trials)
    finally:
        _close(oracle)
    return EXIT_OK, report.to_json()


def cmd_verify(args):
    if args.list:
        return EXIT_OK, {"suites": sorted(SUITES)}
    if not args.suite:
        raise UsageError("verify needs --suite (or --list)")
    try:
        cfg = GeneratorConfig(seed=args.seed, max_support=args.max_support,
                              max_denominator=args.max_denominator,
                              window=frozenset(args.window or range(1, 17)))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    try:
        report = run_suite(args.suite, cfg, args.trials, workers=args.workers)
    except UnknownSuiteError as exc:
        raise UsageError(exc.args[0]) from None
    out = report.to_json()
    if not args.timing:
        out.pop("wall_time")
    return (EXIT_OK if report.passed else EXIT_COUNTEREXAMPLE), out


def _close(oracle):
    if isinstance(oracle, PipeOracle):
        oracle.close()


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="discrete-wasserstein",
                                     description="Exact Wasserstein geometry over the discrete metric on positive integers.")
    parser.add_argument("--output", "-o", help="write JSON here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, backend=True):
        if backend:
            p.add_argument("--backend", choices=("rational", "float64"), default="rational")
        p.add_argument("--output", "-o", default=argparse.SUPPRESS, help="write JSON here instead of stdout")

    p = sub.add_parser("distance", help="W_p^p and W_p of two measures")
    p.add_argument("mu", help="measure JSON: path, inline, or -")
    p.add_argument("nu")
    p.add_argument("--p", type=parse_p, default=PParameter(Fraction(1)), help="rational p > 0 or inf")
    common(p)
    p.set_defaults(run=cmd_distance)

    p = sub.add_parser("coupling", help="optimal coupling of two measures")
    p.add_argument("mu")
    p.add_argument("nu")
    p.add_argument("--cost", action="store_true", help="also print the coupling cost")
    common(p)
    p.set_defaults(run=cmd_coupling)

    p = sub.add_parser("embed", help="apply the embedding generated by a family")
    p.add_argument("family", help="builtin:<name> or family JSON")
    p.add_argument("mu")
    p.add_argument("--epsilon", type=parse_epsilon, default=DEFAULT_EPSILON)
    common(p)
    p.set_defaults(run=cmd_embed)

    def oracle_args(p):
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--builtin-oracle", metavar="NAME")
        src.add_argument("--pipe", metavar="COMMAND", help="child process answering measure JSON lines")
        p.add_argument("--window", type=parse_window, required=True)
        p.add_argument("--epsilon", type=parse_epsilon, default=DEFAULT_EPSILON)

    p = sub.add_parser("extract", help="recover the allocation family of an embedding")
    oracle_args(p)
    p.add_argument("--grid", type=parse_grid, required=True)
    p.add_argument("--companions", type=parse_points)
    common(p, backend=False)
    p.set_defaults(run=cmd_extract)

    p = sub.add_parser("classify", help="classify an embedding on a window")
    oracle_args(p)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=parse_seed, default=0)
    common(p, backend=False)
    p.set_defaults(run=cmd_classify)

    p = sub.add_parser("verify", help="run a property suite")
    p.add_argument("--suite")
    p.add_argument("--list", action="store_true", help="list the registered suites")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=parse_seed, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--window", type=parse_window)
    p.add_argument("--max-support", type=int, default=8)
    p.add_argument("--max-denominator", type=int, default=64)
    p.add_argument("--timing", action="store_true", help="include wall time (breaks byte stability)")
    common(p, backend=False)
    p.set_defaults(run=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        status, payload = args.run(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OracleProtocolError as exc:
        print(f"error: oracle: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NotDiracPreservingError, CurveError, MeasureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = canonical_json(payload) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
