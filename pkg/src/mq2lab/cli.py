"""Command-line experiment runner.

Exit codes: 0 success / verification passed, 1 verification failed,
2 usage or input error, 3 resource refusal.

Every subcommand accepts ``--config FILE`` (JSON object with the same keys as
the flags' destinations; explicit flags win) and ``--output FILE``.  When
``--output`` is absent and ``MQ2LAB_OUTPUT_DIR`` is set, the result is also
written to ``$MQ2LAB_OUTPUT_DIR/<subcommand>.<format>``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

from mq2lab import fixtures
from mq2lab.classical import (
    BUILTIN_PTMS,
    builtin_ptm,
    compile_ptm,
    decide_classical,
    load_ptm,
    monte_carlo_ptm,
)
from mq2lab.core import DecisionMode
from mq2lab.dj import (
    BUILTIN_ORACLES,
    build_dj_machine,
    classify_oracle,
    dj_closed_form_probability,
    dj_family,
    load_truth_table,
)
from mq2lab.engine import decide
from mq2lab.exceptions import ContractError, DimensionRefusal
from mq2lab.shor import ShorInstance, run_period_finding, shor_family
from mq2lab.verifier import (
    EXACT_TOL,
    SAMPLED_TOL,
    verify_stochastic,
    verify_unitary_exact,
    verify_unitary_sampled,
)

OUTPUT_DIR_ENV = "MQ2LAB_OUTPUT_DIR"
SIGNIFICANT_DIGITS = 12

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_REFUSED = 0, 1, 2, 3

BROKEN_DEMOS = ("short-column", "zeroed-source", "overfull-source")


class UsageError(Exception):
    pass


def _round_floats(obj):
    if isinstance(obj, float):
        return float(f"{obj:.{SIGNIFICANT_DIGITS}g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def render(payload: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_round_floats(payload), indent=2) + "\n"
    histogram = payload.get("a_prime_histogram")
    if histogram is None:
        raise UsageError("csv output is only available for histogram data (shor)")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["a_prime", "probability"])
    for a, p in histogram.items():
        writer.writerow([a, f"{p:.{SIGNIFICANT_DIGITS}g}"])
    return buf.getvalue()


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + m for m in missing))


def _load_oracle(args):
    if args.oracle_file is not None:
        return load_truth_table(args.oracle_file)
    _require(args, "n")
    return BUILTIN_ORACLES[args.builtin or "parity"](args.n)


def run_dj(args) -> tuple[dict, int]:
    oracle = _load_oracle(args)
    report = decide(build_dj_machine(oracle), "")
    oracle_class = classify_oracle(oracle).value if oracle.arity <= 16 else "Unknown"
    return {
        "n": oracle.arity,
        "oracle_class": oracle_class,
        "probability": report.acceptance_probability,
        "closed_form_probability": dj_closed_form_probability(oracle),
        "verdict": report.verdict.value,
    }, EXIT_OK


def _shor_instance(args, bit=0):
    _require(args, "N", "x")
    return ShorInstance(args.N, args.x, args.q, bit)


def run_shor(args) -> tuple[dict, int]:
    run = run_period_finding(_shor_instance(args, args.bit))
    inst = run.instance
    return {
        "N": inst.N,
        "x": inst.x,
        "q": inst.q,
        "target_bit": inst.target_bit,
        "acceptance_probability": run.report.acceptance_probability,
        "verdict": run.report.verdict.value,
        "period_found": run.period,
        "factors": list(run.factors) if run.factors else None,
        "a_prime_histogram": {str(a): p for a, p in run.histogram().items()},
    }, EXIT_OK


def _load_ptm(args):
    """``--ptm`` takes a file path or a bundled machine name."""
    if args.ptm is not None:
        if args.ptm in BUILTIN_PTMS and not Path(args.ptm).exists():
            return builtin_ptm(args.ptm)
        return load_ptm(args.ptm)
    builtin = getattr(args, "builtin", None) if args.command == "classical" else None
    return builtin_ptm(builtin or "majority")


def run_classical(args) -> tuple[dict, int]:
    desc = _load_ptm(args)
    x = args.input or ""
    family = compile_ptm(desc, len(x))
    report = decide_classical(desc, x, args.mode)
    payload = {
        "machine": desc.name,
        "input": x,
        "mode": report.mode.value,
        "probability": report.acceptance_probability,
        "verdict": report.verdict.value,
        "applications": report.applications_performed,
        "dimension": family.dimension(len(x)),
    }
    if args.trials:
        payload["monte_carlo"] = monte_carlo_ptm(desc, x, args.trials, args.seed)
        payload["trials"] = args.trials
        payload["seed"] = args.seed
    return payload, EXIT_OK


def _verify_target(args):
    """Return ``(family, n)`` for the verify subcommand."""
    if args.broken_demo == "short-column":
        return fixtures.short_column_family(), 0
    if args.broken_demo == "zeroed-source":
        return fixtures.zeroed_source_family(dj_family(BUILTIN_ORACLES["parity"](3)), 5), 3
    if args.broken_demo == "overfull-source":
        return fixtures.overfull_source_family(), 0
    if args.machine == "dj":
        oracle = _load_oracle(args)
        return dj_family(oracle), oracle.arity
    if args.machine == "shor":
        inst = _shor_instance(args)
        return shor_family(inst), inst.size_param
    if args.machine == "ptm":
        desc = _load_ptm(args)
        n = args.input_length
        return compile_ptm(desc, n), n
    raise UsageError("verify needs --machine {dj,shor,ptm} or --broken-demo")


def run_verify(args) -> tuple[dict, int]:
    family, n = _verify_target(args)
    if family.kind.value == "stochastic":
        tol = EXACT_TOL if args.tolerance is None else args.tolerance
        kwargs = {"samples": args.sampled, "seed": args.seed} if args.sampled else {}
        report = verify_stochastic(family, n, tol, **kwargs)
    elif args.sampled:
        tol = SAMPLED_TOL if args.tolerance is None else args.tolerance
        report = verify_unitary_sampled(family, n, args.sampled, tol, args.seed)
    else:
        tol = EXACT_TOL if args.tolerance is None else args.tolerance
        report = verify_unitary_exact(family, n, tol)
    payload = {"family": family.name, **report.to_dict()}
    return payload, EXIT_OK if report.passed else EXIT_FAILED


HANDLERS = {"dj": run_dj, "shor": run_shor, "classical": run_classical, "verify": run_verify}


def _add_common(p):
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", help="also write the result to this file")
    p.add_argument("--config", help="JSON file with option defaults")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=None)


def _add_oracle_options(p):
    p.add_argument("--n", type=int)
    p.add_argument("--builtin", choices=sorted(BUILTIN_ORACLES), default=None)
    p.add_argument("--oracle-file")


def _add_shor_options(p):
    p.add_argument("--N", type=int)
    p.add_argument("--x", type=int)
    p.add_argument("--q", type=int, default=None)


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(prog="mq2lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = subs["dj"] = sub.add_parser("dj", help="Deutsch-Jozsa machine")
    _add_oracle_options(p)

    p = subs["shor"] = sub.add_parser("shor", help="Shor period-finding machine")
    _add_shor_options(p)
    p.add_argument("--bit", type=int, default=0)

    p = subs["classical"] = sub.add_parser("classical", help="decide with a toy PTM")
    p.add_argument("--ptm", help="PTM description file or bundled machine name")
    p.add_argument("--builtin", choices=BUILTIN_PTMS, default=None)
    p.add_argument("--input", default="")
    p.add_argument("--mode", choices=[m.value for m in DecisionMode if not m.is_quantum], default="BPP")
    p.add_argument("--trials", type=int, default=0, help="Monte-Carlo cross-check trials")

    p = subs["verify"] = sub.add_parser("verify", help="check unitarity or stochasticity")
    p.add_argument("--machine", choices=("dj", "shor", "ptm"))
    _add_oracle_options(p)
    _add_shor_options(p)
    p.add_argument("--ptm", help="PTM description file or bundled machine name")
    p.add_argument("--input-length", type=int, default=0)
    method = p.add_mutually_exclusive_group()
    method.add_argument("--exact", action="store_true")
    method.add_argument("--sampled", type=int, metavar="SAMPLES", default=0)
    p.add_argument("--broken-demo", choices=BROKEN_DEMOS)

    for p in subs.values():
        _add_common(p)
    return parser, subs


def _apply_config(parser, subs, argv, args):
    path = Path(args.config)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    sub = subs[args.command]
    allowed = {a.dest for a in sub._actions} - {"help", "config"}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise UsageError(f"unknown config field(s): {', '.join(unknown)}")
    sub.set_defaults(**data)
    return parser.parse_args(argv)


def _emit(text: str, args):
    sys.stdout.write(text)
    target = args.output
    if target is None and os.environ.get(OUTPUT_DIR_ENV):
        target = Path(os.environ[OUTPUT_DIR_ENV]) / f"{args.command}.{args.format}"
    if target is not None:
        Path(target).parent.mkdir(parents=True, exist_ok=True)
        Path(target).write_text(text)


def main(argv=None) -> int:
    parser, subs = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.config:
            args = _apply_config(parser, subs, argv, args)
        payload, code = HANDLERS[args.command](args)
        _emit(render(payload, args.format), args)
    except DimensionRefusal as exc:
        print(f"mq2lab: refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except (UsageError, ContractError, OSError) as exc:
        print(f"mq2lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return code


if __name__ == "__main__":
    sys.exit(main())
