# main.py
"""
Main Application

This is the entry point of the workbench. It parses the command line,
layers the run configuration, dispatches to one subcommand and maps
failures to exit statuses:

    0  success
    1  an analysis finding (a guaranteed prevision law falsified, capacity
       flags other than expected, oracle and wp disagreeing)
    2  usage, parse or file errors, with a one-line diagnostic on stderr

Run `python main.py <subcommand> --help` for the flags of each subcommand.
"""

import argparse
import logging
import sys
from pathlib import Path

from models.analysis import Analysis, format_frame, plot_rounding_staircase
from models.answers import BOOL, EXT, domain_by_name
from models.capacity import InputModel, capacity_classify, choquet
from models.errors import FileFormatError, WorkbenchError
from models.numerics import format_rational, parse_real, proj
from models.prevision import SamplePlan, check_laws, wp_prevision
from models.run_config import RunConfig
from models.semantics import Env, Semantics
from models.syntax import input_sites, pretty_print
from models.wp import raise_recursion_limit
from services.build_universe import load_env, load_universe, parse_continuation
from services.capacity_files import load_capacity
from services.export_report import export_frame, format_table, frame_key_values, key_values
from services.parse_program import load_program, parse_expr, parse_test

logger = logging.getLogger("workbench")

FLAG_NAMES = ("monotone", "convex", "concave", "normalized", "continuous")


def emit(config: RunConfig, human: str, pairs):
    """Print the report in the configured output format."""
    print(key_values(pairs) if config.machine_readable else human)


# ---------------------------------------------------------------------------
# Shared loading
# ---------------------------------------------------------------------------

def read_program(path):
    return load_program(RunConfig.require_file(path))


def read_envs(args, semantics: Semantics, variables):
    """Environments from --universe or --env, else the empty environment."""
    if args.universe:
        return load_universe(RunConfig.require_file(args.universe), semantics, variables)
    if args.env:
        return [load_env(RunConfig.require_file(args.env), semantics, variables)]
    # closed programs assign before they read; others fail with UnboundVariable
    return [semantics.env({})]


def read_input_model(specs, semantics: Semantics, program=None):
    """Build an InputModel from `LABEL=PATH` specs; None when there are none."""
    if not specs:
        if program is not None and input_sites(program.root):
            logger.info("program has input sites but no --input was given")
        return None
    model = InputModel()
    for spec in specs:
        label, sep, path = spec.partition("=")
        label = label.strip().lstrip("^")
        if not sep or not label.isdigit():
            raise FileFormatError("<command line>", 0, f"--input expects LABEL=PATH, got {spec!r}")
        model.add(int(label), load_capacity(RunConfig.require_file(path), semantics))
    return model


def write_figure(fig, path):
    fig.write_html(str(path))
    logger.info("wrote figure to %s", path)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def run_parse(args, config: RunConfig) -> int:
    program = read_program(args.program)
    text = pretty_print(program)
    declared = ", ".join(program.declared_vars)
    human = f"{text}\n# variables: {declared or '-'}\n# exit label: ^{program.exit_label}"
    emit(config, human, [
        ("program", text.replace("\n", " ")),
        ("variables", declared),
        ("exit_label", program.exit_label),
    ])
    return 0


def run_eval(args, config: RunConfig) -> int:
    semantics = config.semantics
    node = parse_expr(args.expr) if args.expr else parse_test(args.test)
    env = load_env(RunConfig.require_file(args.env), semantics) if args.env else semantics.env({})

    if args.expr:
        evaluate = lambda sem, rho: sem.format_value(sem.eval_expr(node, rho))
    else:
        evaluate = lambda sem, rho: str(sem.eval_test(node, rho))

    results = []
    if semantics.mode == "float":
        results.append(("float", evaluate(semantics, env)))
        real_env = Env.of({name: semantics.to_real(value) for name, value in env.bindings}, "real")
        results.append(("real", evaluate(Semantics(), real_env)))
    else:
        results.append(("real", evaluate(semantics, env)))

    emit(config, " | ".join(f"{mode}: {value}" for mode, value in results), results)
    return 0


def run_wp(args, config: RunConfig) -> int:
    semantics = config.semantics
    domain = domain_by_name(args.ans)
    program = read_program(args.program)
    envs = read_envs(args, semantics, program.declared_vars)
    model = read_input_model(args.input, semantics, program)
    kappa = parse_continuation(args.cont, semantics, domain, expr_default=config.expr_default)

    cfg = config.wp_config(domain, universe=envs, input_model=model)
    analysis = Analysis(program, cfg)
    frame = analysis.wp_frame(kappa, envs)
    status = analysis.overall_status(frame)
    summary = analysis.get_summary_table(frame, kappa).set_index("Metric")["Value"]

    if args.csv:
        export_frame(frame[["env", "answer", "status"]], args.csv)
    if args.plot:
        write_figure(analysis.plot_answers(frame), args.plot)
        if analysis.loops():
            chain = analysis.kleene_frame(kappa, envs[:args.chain_envs], args.chain_length)
            write_figure(analysis.plot_kleene_chain(chain), Path(args.plot).with_suffix(".kleene.html"))

    human = "\n".join([
        f"wp for {kappa.description} ({domain.name} answers, {semantics} semantics)",
        format_table(frame[["env", "answer", "status"]]),
        f"exact answers: {summary['Exact answers']} of {summary['Environments']}, "
        f"largest answer: {summary['Largest answer']}",
        f"status: {status}",
    ])
    pairs = frame_key_values(frame, "env", ["answer", "status"]) + [("status", status)]
    emit(config, human, pairs)
    return 0


def run_oracle(args, config: RunConfig) -> int:
    semantics = config.semantics
    program = read_program(args.program)
    envs = read_envs(args, semantics, program.declared_vars)
    model = read_input_model(args.input, semantics, program)
    test = parse_test(args.test)

    analysis = Analysis(program, config.wp_config(BOOL, universe=envs, input_model=model))
    frame = analysis.oracle_frame(test, envs)
    agree = bool(frame["agree"].all())

    human = "\n".join([
        f"may-reachability of {pretty_print(test)}: enumeration oracle against Boolean wp",
        format_table(frame),
        "agreement: " + ("all environments" if agree else "DISAGREEMENT"),
    ])
    pairs = frame_key_values(frame, "env", ["oracle", "wp", "exhausted"]) + [("agree", str(agree).lower())]
    emit(config, human, pairs)
    return 0 if agree else 1


def run_check_prevision(args, config: RunConfig) -> int:
    semantics = config.semantics
    program = read_program(args.program)
    model = read_input_model(args.input, semantics, program)
    cfg = config.wp_config(EXT, input_model=model)

    prevision = wp_prevision(program.root, cfg, args.program)
    plan = SamplePlan.generate(config.rng(), semantics, program.declared_vars,
                               n_envs=config.data["samples"], n_kappas=args.kappas, n_pairs=args.pairs)
    report = check_laws(prevision, plan)
    if args.csv:
        export_frame(report.to_frame(), args.csv)

    frame = report.to_frame()
    human = "\n".join([
        f"prevision laws of wp({args.program}), seed {config.data['seed']}",
        format_table(frame[["law", "samples", "violations", "verdict"]]),
        *[f"{row['law']} counterexample: {row['counterexample']}"
          for row in frame.to_dict("records") if row["counterexample"]],
        f"note: {report.note}",
    ])
    emit(config, human, [("seed", config.data["seed"])] + report.to_key_values())
    return 0 if report.guaranteed_laws_hold else 1


def parse_integrand(text: str, nu):
    """`o1:2 o2:1` into one value per outcome index."""
    values = {}
    for item in text.split():
        name, sep, value = item.partition(":")
        if not sep:
            raise FileFormatError("--f", 0, f"expected 'oN:value', got {item!r}")
        try:
            index = nu.space.index_of(name)
            values[index] = EXT.parse(value)
        except (ValueError, ZeroDivisionError) as e:
            raise FileFormatError("--f", 0, str(e)) from None
    missing = [nu.space.name(i) for i in range(nu.space.size) if i not in values]
    if missing:
        raise FileFormatError("--f", 0, f"no value for {', '.join(missing)}")
    return values


def parse_expected_flags(text: str):
    """`convex,monotone,no-concave` into (required, excluded)."""
    required, excluded = set(), set()
    for item in (part.strip() for part in text.split(",") if part.strip()):
        negated = item.startswith("no-")
        name = item[3:] if negated else item
        if name not in FLAG_NAMES:
            raise FileFormatError("--expect-flags", 0, f"unknown flag {name!r}; use {', '.join(FLAG_NAMES)}")
        (excluded if negated else required).add(name)
    return required, excluded


def run_choquet(args, config: RunConfig) -> int:
    semantics = config.semantics
    nu = load_capacity(RunConfig.require_file(args.capacity), semantics)
    flags = capacity_classify(nu, pairwise=args.pairwise)

    pairs = [("flags", str(flags))]
    lines = []
    if args.f:
        value = EXT.format(choquet(parse_integrand(args.f, nu), nu))
        pairs.insert(0, ("choquet", value))
        lines.append(value)
    lines.append(f"flags: {flags}")
    if args.table:
        lines.append(format_table(nu.to_frame()))

    status = 0
    if args.expect_flags:
        required, excluded = parse_expected_flags(args.expect_flags)
        present = set(flags.names())
        matched = required <= present and not (excluded & present)
        pairs.append(("expected_flags", str(matched).lower()))
        if not matched:
            lines.append(f"expected flags {args.expect_flags} do not match")
            status = 1
    emit(config, "\n".join(lines), pairs)
    return status


def run_format(args, config: RunConfig) -> int:
    semantics = Semantics.from_string(args.format) if args.format else config.semantics
    if semantics.fmt is None:
        raise FileFormatError("<command line>", 0, "format needs a float format, e.g. tiny:p=3,emin=-1,emax=1")
    fmt = semantics.fmt

    pairs = []
    lines = []
    if args.round:
        rounded = proj(fmt, parse_real(args.round))
        shown = semantics.format_value(rounded)
        pairs.append((f"proj[{args.round}]", shown))
        lines.append(f"proj({format_rational(parse_real(args.round))}) = {shown}")

    if not args.round or args.plot or args.csv:
        frame = format_frame(fmt)
        pairs.append(("format", str(fmt)))
        pairs.append(("count", len(frame)))
        pairs += frame_key_values(frame, "value", ["preimage"])
        lines = [f"{fmt}: {len(frame)} representable values",
                 format_table(frame[["value", "preimage"]])] + lines
        if args.csv:
            export_frame(frame[["value", "preimage"]], args.csv)
        if args.plot:
            write_figure(plot_rounding_staircase(fmt, frame), args.plot)

    emit(config, "\n".join(lines), pairs)
    return 0


# ---------------------------------------------------------------------------
# Command line
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with run settings")
    common.add_argument("--mode", "--format-string", dest="mode",
                        help="'real', 'binary64' or 'tiny:p=..,emin=..,emax=..'")
    common.add_argument("--output", choices=["human", "kv"], help="report format (default human)")
    common.add_argument("--seed", type=int, help="seed for every random draw (fallback: WPWB_SEED)")
    common.add_argument("--max-iter", type=int, help="loop iteration budget (default 64)")
    common.add_argument("--fuel", type=int, help="enumeration oracle step bound (default 10000)")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")

    parser = argparse.ArgumentParser(
        prog="wpwb", description="Semantics workbench: floats, reals and err, weakest preconditions, "
                                 "previsions and Choquet integrals.")
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("parse", parents=[common], help="parse and pretty-print a program")
    sub.add_argument("program")
    sub.set_defaults(handler=run_parse)

    sub = commands.add_parser("eval", parents=[common], help="evaluate an expression or test")
    what = sub.add_mutually_exclusive_group(required=True)
    what.add_argument("--expr")
    what.add_argument("--test")
    sub.add_argument("--env", help="env file binding the variables")
    sub.set_defaults(handler=run_eval)

    def add_states(sub):
        states = sub.add_mutually_exclusive_group()
        states.add_argument("--universe", help="universe file of environments")
        states.add_argument("--env", help="env file with a single environment")
        sub.add_argument("--input", action="append", metavar="LABEL=PATH",
                         help="capacity file for an input site (repeatable)")

    sub = commands.add_parser("wp", parents=[common], help="weakest precondition per environment")
    sub.add_argument("--program", required=True)
    sub.add_argument("--cont", required=True,
                     help="'indicator: <test>', 'expr: <expr> [default <value>]' or 'table: <file>'")
    sub.add_argument("--expr-default", help="answer of expr: continuations at err or negative values")
    sub.add_argument("--ans", default="extnonneg", help="answer domain: bool or extnonneg")
    add_states(sub)
    sub.add_argument("--csv", help="write the per-environment table to CSV")
    sub.add_argument("--plot", help="write answer bars (and the Kleene chain of the first loop) as HTML")
    sub.add_argument("--chain-length", type=int, default=8)
    sub.add_argument("--chain-envs", type=int, default=5)
    sub.set_defaults(handler=run_wp)

    sub = commands.add_parser("oracle", parents=[common], help="compare Boolean wp with enumeration")
    sub.add_argument("--program", required=True)
    sub.add_argument("--test", required=True, help="target test on final states")
    add_states(sub)
    sub.set_defaults(handler=run_oracle)

    sub = commands.add_parser("check-prevision", parents=[common], help="check prevision laws of wp(P)")
    sub.add_argument("--program", required=True)
    sub.add_argument("--samples", type=int, help="environments per plan (default 12)")
    sub.add_argument("--kappas", type=int, default=10)
    sub.add_argument("--pairs", type=int, default=20)
    sub.add_argument("--input", action="append", metavar="LABEL=PATH")
    sub.add_argument("--csv", help="write the law table to CSV")
    sub.set_defaults(handler=run_check_prevision)

    sub = commands.add_parser("choquet", parents=[common], help="classify a capacity and integrate")
    sub.add_argument("--capacity", required=True)
    sub.add_argument("--f", help="integrand, e.g. 'o1:2 o2:1'")
    sub.add_argument("--expect-flags", help="e.g. 'convex,monotone,no-concave'")
    sub.add_argument("--pairwise", action="store_true", help="literal all-pairs classification")
    sub.add_argument("--table", action="store_true", help="print the capacity table")
    sub.set_defaults(handler=run_choquet)

    sub = commands.add_parser("format", parents=[common], help="enumerate a tiny float format")
    sub.add_argument("format", nargs="?", help="format string (default: --mode or config)")
    sub.add_argument("--round", help="round a rational with proj")
    sub.add_argument("--csv")
    sub.add_argument("--plot", help="write the rounding staircase as HTML")
    sub.set_defaults(handler=run_format)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s", force=True)
    raise_recursion_limit()
    try:
        config = RunConfig.load({
            "format": args.mode,
            "max_iter": args.max_iter,
            "fuel": args.fuel,
            "seed": args.seed,
            "output": args.output,
            "samples": getattr(args, "samples", None),
            "expr_default": getattr(args, "expr_default", None),
        }, config_path=RunConfig.require_file(args.config) if args.config else None)
        return args.handler(args, config)
    except (WorkbenchError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
