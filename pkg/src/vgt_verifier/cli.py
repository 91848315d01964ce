#!/usr/bin/env python
"""
Command-line interface for the VGT verifier.

Subcommands count fibers, compute Frobenius traces, cross-check the
special-fiber tables and the mod-8 congruence, run the determinant sieve and
sweep traces over many parameters. Reports go to stdout (or --out); logs go
to stderr.

Exit codes: 0 on success, 1 when a check fails or the prime is bad, 2 on
invalid arguments or configuration.
"""

import argparse
import logging
import sys
from typing import Dict, List, Optional, Sequence

from tqdm import tqdm

from . import __version__
from .config import OUTPUT_FORMATS, RunConfig, load_config
from .counting import divisibility_audit, fiber_count_charsum, fiber_count_naive
from .detsieve import (check_hypotheses, dump_certificates, load_certificates, replay_all,
                       verify_condition_star_star)
from .errors import BadParameter, BadPrime, ConfigError, UndefinedAtZeroOrInfinity, VgtError
from .ff import FieldSpec
from .fibration import INFINITY, ProjPoint, SurfaceParam, classify_fiber, discriminant, projective_line, reduce_param
from .reporter import ReportGenerator
from .trace import (Prop45Status, frobenius_trace, quartic_criterion, quartic_symbol_prediction, table_sweep,
                    verify_prop45)
from .utils import good_primes, setup_logger

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


class CheckFailed(Exception):
    """A verification ran to completion and found a failing check."""


def parse_param(text: str) -> SurfaceParam:
    """argparse type for --a: "n" or "n/d", not 1 or -1."""
    try:
        return SurfaceParam.parse(text)
    except BadParameter as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def parse_param_list(text: str) -> List[SurfaceParam]:
    """argparse type for --a-list: comma-separated rationals."""
    items = [item for item in text.split(",") if item.strip()]
    if not items:
        raise argparse.ArgumentTypeError("the parameter list is empty")
    return [parse_param(item) for item in items]


def parse_t(text: str, spec: FieldSpec) -> Optional[ProjPoint]:
    """"inf", "all" (returns None) or "c0[,c1]"."""
    text = text.strip().lower()
    if text == "all":
        return None
    if text in ("inf", "infinity"):
        return INFINITY
    try:
        coefficients = [int(part) for part in text.split(",")]
    except ValueError as e:
        raise BadParameter(f"--t must be inf, all or c0[,c1], got {text!r}") from e
    if len(coefficients) > 2 or (len(coefficients) == 2 and spec.r == 1):
        raise BadParameter(f"too many coefficients in --t {text!r} for {spec}")
    return ProjPoint(spec.element(*coefficients))


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="Path to a key=value configuration file")
    common.add_argument("--threads", type=int, default=None, help="Worker processes (overrides config and VGT_THREADS)")
    common.add_argument("--verbose", "-v", action="store_true", help="Enable verbose logging")
    common.add_argument("--log-file", default=None, help="Also write logs to this file")
    common.add_argument("--out", default=None, help="Write the report to this path instead of stdout")
    return common


def _add_format(parser: argparse.ArgumentParser, choices: Sequence[str]) -> None:
    parser.add_argument("--format", choices=list(choices), default=None,
                        help="Report format (defaults to output_format from the configuration)")


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """Parse command-line arguments.

    Returns:
        argparse.Namespace: Parsed arguments.
    """
    parser = argparse.ArgumentParser(
        prog="vgt-verify",
        description="Finite-field verification of Frobenius traces and determinant certificates "
                    "for the elliptic surface family E_a."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = _common_parser()
    subparsers = parser.add_subparsers(dest="command", help="Command to run")

    count_parser = subparsers.add_parser("count", parents=[common], help="Count points on fibers")
    count_parser.add_argument("--a", type=parse_param, required=True, help="Parameter a, as n or n/d")
    count_parser.add_argument("--p", type=int, required=True, help="Odd prime")
    count_parser.add_argument("--r", type=int, choices=[1, 2], default=1, help="Extension degree")
    count_parser.add_argument("--t", default="all", help="Fiber: inf, all, or c0[,c1]")
    count_parser.add_argument("--naive", action="store_true", help="Count by enumeration instead of character sums")
    _add_format(count_parser, OUTPUT_FORMATS)

    trace_parser = subparsers.add_parser("trace", parents=[common], help="Compute the Frobenius trace T(a, q)")
    trace_parser.add_argument("--a", type=parse_param, required=True, help="Parameter a, as n or n/d")
    trace_parser.add_argument("--p", type=int, required=True, help="Odd prime")
    trace_parser.add_argument("--r", type=int, choices=[1, 2], default=1, help="Extension degree")
    trace_parser.add_argument("--breakdown", action="store_true", help="List every fiber with non-zero multiplicity")
    _add_format(trace_parser, OUTPUT_FORMATS)

    verify_parser = subparsers.add_parser("verify", parents=[common], help="Run a verification sweep")
    verify_parser.add_argument("target", choices=["tables", "prop45", "divisibility"], help="What to verify")
    verify_parser.add_argument("--a", type=parse_param, required=True, help="Parameter a, as n or n/d")
    verify_parser.add_argument("--p-max", type=int, default=31, help="Largest prime in the sweep")
    verify_parser.add_argument("--r", type=int, choices=[1, 2], default=None,
                               help="Extension degree (tables and divisibility; both when omitted)")
    verify_parser.add_argument("--quartic", action="store_true",
                               help="With prop45, also test the quartic root criterion at every prime")
    _add_format(verify_parser, ("json", "text"))

    sieve_parser = subparsers.add_parser("sieve", parents=[common], help="Eliminate determinant classes")
    sieve_parser.add_argument("--a", type=parse_param, default=None, help="Parameter a, as n or n/d")
    sieve_parser.add_argument("--p-max", type=int, default=None, help="Largest witness prime (defaults to prime_bound)")
    sieve_parser.add_argument("--certificates", default=None, help="Write the certificate bundle to this path")
    sieve_parser.add_argument("--replay", default=None, help="Replay a certificate bundle instead of sieving")
    _add_format(sieve_parser, ("json", "text", "markdown"))

    sweep_parser = subparsers.add_parser("sweep", parents=[common], help="Traces for many parameters and primes")
    sweep_parser.add_argument("--a-list", type=parse_param_list, required=True, help="Comma-separated parameters")
    sweep_parser.add_argument("--p-max", type=int, required=True, help="Largest prime in the sweep")
    sweep_parser.add_argument("--r", type=int, choices=[1, 2], default=1, help="Extension degree")
    sweep_parser.add_argument("--no-progress", action="store_true", help="Hide the progress bar")
    _add_format(sweep_parser, OUTPUT_FORMATS)

    hypotheses_parser = subparsers.add_parser("hypotheses", parents=[common],
                                              help="Check the sufficient conditions on a")
    hypotheses_parser.add_argument("--a", type=parse_param, required=True, help="Parameter a, as n or n/d")
    _add_format(hypotheses_parser, ("json", "text"))

    args = parser.parse_args(argv)

    if args.command is None:
        parser.print_help(sys.stderr)
        sys.exit(EXIT_USAGE)
    if args.command == "sieve" and args.a is None and args.replay is None:
        parser.error("sieve needs --a or --replay")

    return args


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults < --config file < environment < explicit flags."""
    config = load_config(args.config)
    return config.updated({"thread_count": args.threads})


def _format(args: argparse.Namespace, config: RunConfig, allowed: Sequence[str]) -> str:
    if args.format:
        return args.format
    return config.output_format if config.output_format in allowed else "text"


def _emit(reporter: ReportGenerator, content: str, args: argparse.Namespace) -> None:
    if args.out:
        reporter.write_report(content, args.out)
    else:
        sys.stdout.write(content)


def _trace_row(report) -> Dict:
    symbols = report.symbols
    return {
        "a": report.param.label, "p": report.spec.p, "r": report.spec.r, "q": report.q,
        "T": report.trace, "T_mod_8": report.trace_mod_8,
        "two_1plus_a": symbols["two_1plus_a"], "two_1minus_a": symbols["two_1minus_a"],
        "chi_2": symbols["chi_2"], "chi_minus_1": symbols["chi_minus_1"],
        "bound_ok": report.bound_ok, "error": None,
    }


def count_fibers(args: argparse.Namespace, config: RunConfig, reporter: ReportGenerator) -> int:
    """Print the fiber counts requested by --t."""
    spec = FieldSpec.of(args.p, args.r)
    a = reduce_param(args.a, spec)
    t = parse_t(args.t, spec)
    points = list(projective_line(spec)) if t is None else [t]

    fibers = []
    for point in points:
        if args.naive:
            fc = fiber_count_naive(a, point, spec, config.oracle_bound)
        else:
            fc = fiber_count_charsum(a, point, spec, config.charsum_table_threshold)
        try:
            disc = str(discriminant(a, point))
        except UndefinedAtZeroOrInfinity:
            disc = None
        fibers.append({"t": str(point), "class": classify_fiber(a, point).value, "count": fc.count,
                       "smooth": fc.smooth, "discriminant": disc})

    data = {"param_a": args.a.label, "p": spec.p, "r": spec.r, "q": spec.q, "fibers": fibers}
    fmt = _format(args, config, OUTPUT_FORMATS)
    if fmt == "csv":
        content = reporter.render_csv(fibers, ("t", "class", "count", "smooth", "discriminant"))
    else:
        content = reporter.render(data, "count", fmt)
    _emit(reporter, content, args)
    return EXIT_OK


def compute_trace(args: argparse.Namespace, config: RunConfig, reporter: ReportGenerator) -> int:
    """Print T(a, q), optionally with its breakdown."""
    spec = FieldSpec.of(args.p, args.r)
    report = frobenius_trace(args.a, spec, config.thread_count, config.charsum_table_threshold)
    fmt = _format(args, config, OUTPUT_FORMATS)
    if fmt == "csv":
        content = reporter.render_csv([_trace_row(report)])
    else:
        content = reporter.render(report.to_dict(include_breakdown=args.breakdown), "trace", fmt)
    _emit(reporter, content, args)
    return EXIT_OK


def _degrees(args: argparse.Namespace) -> Sequence[int]:
    return (args.r,) if args.r else (1, 2)


def verify_tables(args: argparse.Namespace, config: RunConfig, reporter: ReportGenerator) -> int:
    checks = table_sweep(args.a, good_primes(args.a, args.p_max), _degrees(args), config.charsum_table_threshold)
    mismatches = sum(1 for c in checks if not c.matches)
    data = {
        "param_a": args.a.label,
        "p_max": args.p_max,
        "checks": [c.to_dict() for c in checks],
        "mismatches": mismatches,
        "errata": sum(1 for c in checks if c.known_erratum),
    }
    _emit(reporter, reporter.render(data, "tables", _format(args, config, ("json", "text"))), args)
    if mismatches:
        raise CheckFailed(f"{mismatches} special-fiber contributions disagree with their closed form")
    return EXIT_OK


def verify_congruence(args: argparse.Namespace, config: RunConfig, reporter: ReportGenerator) -> int:
    rows, failures = [], 0
    for p in good_primes(args.a, args.p_max):
        result = verify_prop45(args.a, p, config.thread_count, config.charsum_table_threshold)
        row = result.to_dict()
        failures += result.status is Prop45Status.FAILED
        if args.quartic:
            row["quartic_root"] = quartic_criterion(args.a, p)
            row["quartic_predicted"] = quartic_symbol_prediction(args.a, p)
            failures += row["quartic_root"] != row["quartic_predicted"]
        rows.append(row)

    data = {"param_a": args.a.label, "p_max": args.p_max, "results": rows}
    _emit(reporter, reporter.render(data, "prop45", _format(args, config, ("json", "text"))), args)
    if failures:
        raise CheckFailed(f"{failures} congruence checks failed for a={args.a}")
    return EXIT_OK


def verify_divisibility(args: argparse.Namespace, config: RunConfig, reporter: ReportGenerator) -> int:
    rows = []
    for p in good_primes(args.a, args.p_max):
        for r in _degrees(args):
            spec = FieldSpec.of(p, r)
            for check in divisibility_audit(args.a, spec, config.charsum_table_threshold):
                rows.append({"p": p, "r": r, "t": str(check.t), "rule": check.rule,
                             "target": check.target, "value": check.value, "holds": check.holds})

    rule_counts: Dict[str, int] = {}
    for row in rows:
        rule_counts[row["rule"]] = rule_counts.get(row["rule"], 0) + 1
    failures = sum(1 for row in rows if not row["holds"])
    data = {"param_a": args.a.label, "p_max": args.p_max, "checks": rows,
            "rule_counts": rule_counts, "failures": failures}
    _emit(reporter, reporter.render(data, "divisibility", _format(args, config, ("json", "text"))), args)
    if failures:
        raise CheckFailed(f"{failures} divisibility checks failed for a={args.a}")
    return EXIT_OK


def run_sieve(args: argparse.Namespace, config: RunConfig, reporter: ReportGenerator) -> int:
    """Sieve the determinant classes of a, or replay a certificate bundle."""
    fmt = _format(args, config, ("json", "text", "markdown"))
    if args.replay:
        certificates = load_certificates(args.replay)
        results = replay_all(certificates)
        rejected = sum(1 for _, error in results if error is not None)
        label = certificates[0].param.label if certificates else (args.a.label if args.a else "?")
        data = {
            "param_a": label,
            "results": [dict(cert.to_json(), error=error) for cert, error in results],
            "rejected": rejected,
        }
        _emit(reporter, reporter.render(data, "replay", "json" if fmt == "markdown" else fmt), args)
        if rejected:
            raise CheckFailed(f"{rejected} certificates rejected")
        return EXIT_OK

    hypotheses = check_hypotheses(args.a)
    if not hypotheses.nonsquare_ok:
        logger.warning(f"a={args.a}: 2(1+a) or 2(1-a) is a rational square; sieving anyway")
    prime_bound = args.p_max if args.p_max is not None else config.prime_bound
    if prime_bound < 3:
        raise BadParameter(f"--p-max must be at least 3, got {prime_bound}")

    report = verify_condition_star_star(args.a, prime_bound, config.thread_count)
    if args.certificates:
        reporter.write_report(dump_certificates(report), args.certificates)
    _emit(reporter, reporter.render(report.to_dict(), "sieve", fmt), args)
    if not report.star_star_verified:
        raise CheckFailed(f"classes not eliminated below {prime_bound}: {[c.D for c in report.survivors]}")
    return EXIT_OK


def run_sweep(args: argparse.Namespace, config: RunConfig, reporter: ReportGenerator) -> int:
    """One trace per (a, good prime); errors are recorded per row."""
    jobs = [(param, p) for param in args.a_list for p in good_primes(param, args.p_max)]
    rows, errors = [], 0
    for param, p in tqdm(jobs, desc="traces", unit="trace", disable=args.no_progress):
        spec = FieldSpec.of(p, args.r)
        try:
            rows.append(_trace_row(frobenius_trace(param, spec, config.thread_count,
                                                   config.charsum_table_threshold)))
        except VgtError as e:
            errors += 1
            logger.error(f"a={param}, q={spec.q}: {e}")
            rows.append({"a": param.label, "p": p, "r": args.r, "q": spec.q, "error": str(e)})

    fmt = _format(args, config, OUTPUT_FORMATS)
    if fmt == "csv":
        content = reporter.render_csv(rows)
    else:
        content = reporter.render({"rows": rows}, "sweep", fmt)
    _emit(reporter, content, args)
    if errors:
        raise CheckFailed(f"{errors} sweep rows failed")
    return EXIT_OK


def show_hypotheses(args: argparse.Namespace, config: RunConfig, reporter: ReportGenerator) -> int:
    report = check_hypotheses(args.a)
    _emit(reporter, reporter.render(report.to_dict(), "hypotheses", _format(args, config, ("json", "text"))), args)
    return EXIT_OK


VERIFY_TARGETS = {
    "tables": verify_tables,
    "prop45": verify_congruence,
    "divisibility": verify_divisibility,
}

COMMANDS = {
    "count": count_fibers,
    "trace": compute_trace,
    "sieve": run_sieve,
    "sweep": run_sweep,
    "hypotheses": show_hypotheses,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point for the CLI."""
    args = parse_args(argv)
    setup_logger(level=logging.DEBUG if args.verbose else logging.INFO, log_file=args.log_file)

    try:
        config = resolve_config(args)
        reporter = ReportGenerator()
        if args.command == "verify":
            return VERIFY_TARGETS[args.target](args, config, reporter)
        return COMMANDS[args.command](args, config, reporter)

    except (BadParameter, ConfigError) as e:
        logger.error(f"Error: {e}")
        return EXIT_USAGE
    except BadPrime as e:
        logger.error(str(e))
        return EXIT_FAILED
    except CheckFailed as e:
        logger.error(f"Check failed: {e}")
        return EXIT_FAILED
    except Exception as e:
        logger.error(f"Error: {e}")
        if args.verbose:
            import traceback
            logger.debug(traceback.format_exc())
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
