"""Command-line interface: ``mechkit run | audit | experiment``.

Exit codes: 0 ok, 1 bad input, 2 negative cycle, 3 capacity exceeded,
4 a dominance or audit guarantee failed during an experiment.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import audit as audit_mod
from .core import check_profile, ensure_valid, format_value
from .documents import load_document
from .errors import AuditError, CapacityError, DominanceError, InputError, NegativeCycleError, UnsupportedError
from .experiments import ExperimentConfig, rows_to_csv, run_demo, run_experiment, write_atomic
from .rules import AGGREGATORS, AffineWeights, TieBreak, affine_rule, optimize_option_rule, quadratic_rule, se_rule, table_rule
from .spm import MODES, PAYMENT_RULES, agent_graph, graph_to_dot, payment_function, run_mechanism

EXIT_INPUT, EXIT_NEGATIVE_CYCLE, EXIT_CAPACITY, EXIT_GUARANTEE = 1, 2, 3, 4


def _read_json(path):
    try:
        with open(path) as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def parse_rule(env, spec, doc_rule=None):
    """Build a rule from ``se:lowest``, ``se:highest``, ``affine:<file>``, ``table:<file>``,
    ``optimal:expected``, ``optimal:max``, ``quadratic`` or ``doc``."""
    if spec is None:
        return doc_rule if doc_rule is not None else se_rule(env)
    kind, _, arg = spec.partition(":")
    if kind == "doc":
        if doc_rule is None:
            raise InputError("--rule doc: the environment document has no 'rule' entry")
        return doc_rule
    if kind == "se":
        return se_rule(env, TieBreak(arg or "lowest"))
    if kind == "optimal":
        if arg not in AGGREGATORS:
            raise InputError(f"optimal:<aggregator> expects one of {sorted(AGGREGATORS)}")
        return optimize_option_rule(env, arg)[0]
    if kind == "quadratic":
        return quadratic_rule(env)
    if kind == "affine":
        doc = _read_json(arg)
        return affine_rule(env, AffineWeights(doc["agent_weights"], doc["option_weights"]),
                           TieBreak(doc.get("tie_break", "lowest")))
    if kind == "table":
        doc = _read_json(arg)
        return table_rule(env, {tuple(k): v for k, v in doc["table"]})
    raise InputError(f"unknown rule spec {spec!r}")


def _parse_range(text):
    lo, sep, hi = text.partition(":")
    try:
        return (int(lo), int(hi)) if sep else (int(lo), int(lo))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from None


def _parse_size(text):
    lo, hi = _parse_range(text)
    return lo if lo == hi and ":" not in text else (lo, hi)


def _load(args):
    env, doc_rule = load_document(args.env)
    ensure_valid(env)
    return env, parse_rule(env, args.rule, doc_rule)


def cmd_run(args) -> int:
    env, rule = _load(args)
    profile = check_profile(env, [int(x) for x in args.profile.split(",")])
    out = run_mechanism(env, rule, profile, args.payment, args.mode)
    doc = out.to_json()
    if args.dump_graphs:
        os.makedirs(args.dump_graphs, exist_ok=True)
        for i in range(env.agent_count):
            g = agent_graph(env, rule, i, profile, args.mode)
            write_atomic(os.path.join(args.dump_graphs, f"agent{i}.dot"), graph_to_dot(g, f"G{i}"))
    if args.audit:
        found = audit_mod.audit_mechanism(env, rule, payment_function(env, rule, args.payment, args.mode))
        doc["audit"] = audit_mod.report_json(found)
        for kind, items in found.items():
            if items:
                print(f"warning: {len(items)} {kind} violation(s), e.g. {items[0].to_json()}", file=sys.stderr)
    print(json.dumps(doc, indent=2))
    return 0


def cmd_audit(args) -> int:
    env, rule = _load(args)
    pay = payment_function(env, rule, args.payment, args.mode)
    found = audit_mod.audit_mechanism(env, rule, pay, se=rule.family in ("se", "table"))
    dominance = None
    if args.dominance:
        dominance = audit_mod.check_dominance(env, rule)
    oracle = None
    if args.oracle:
        if max(env.domain_sizes) > audit_mod.ORACLE_MAX_TYPES:
            oracle = {"skipped": f"type domains larger than {audit_mod.ORACLE_MAX_TYPES}"}
        else:
            mismatches = []
            for v in env.profiles():
                tau = pay(v)
                for i in range(env.agent_count):
                    bound = audit_mod.oracle_min_payment(env, rule, i, v)
                    if tau[i] != -bound:
                        mismatches.append({"profile": list(v), "agent": i, "payment": format_value(tau[i]),
                                           "oracle": format_value(-bound)})
            oracle = {"mismatches": mismatches, "checked": env.profile_count * env.agent_count}
    text = json.dumps(audit_mod.report_json(found, dominance, oracle), indent=2)
    if args.output:
        write_atomic(args.output, text + "\n")
    else:
        print(text)
    return 0


def _config_from_args(args) -> ExperimentConfig:
    seed = args.seed
    if seed is None:
        seed = int(os.environ.get("MECHKIT_SEED", "0"))
    sweep_values = None
    if args.sweep:
        lo = args.sweep_from if args.sweep_from is not None else 1
        hi = args.to if args.to is not None else {"n": 32, "m": 256, "d": 16}[args.sweep]
        sweep_values = tuple(range(lo, hi + 1, args.step))
    kwargs = {}
    if args.config:
        kwargs.update(_read_json(args.config))
        for key in ("agents", "options", "domain_size", "value_range"):
            if isinstance(kwargs.get(key), list):
                kwargs[key] = tuple(kwargs[key])
    for name, attr in (("n", "agents"), ("m", "options"), ("d", "domain_size")):
        if getattr(args, name) is not None:
            kwargs[attr] = getattr(args, name)
    if args.value_range is not None:
        kwargs["value_range"] = args.value_range
    if args.instances is not None:
        kwargs["instances"] = args.instances
    return ExperimentConfig(seed=seed, sweep=args.sweep, sweep_values=sweep_values, **kwargs)


def cmd_experiment(args) -> int:
    if args.demo:
        print(json.dumps(run_demo(args.demo, args.payment or "proposed"), indent=2))
        return 0
    config = _config_from_args(args)
    result = run_experiment(config, jobs=args.jobs or os.cpu_count() or 1)
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, f"{args.stem}.csv")
    json_path = os.path.join(args.out, f"{args.stem}_summary.json")
    write_atomic(csv_path, rows_to_csv(result.rows))
    write_atomic(json_path, json.dumps(result.summary(), indent=2) + "\n")
    written = [csv_path, json_path]
    if args.figures:
        from .plotting import render_report
        written += render_report(result, args.figures, args.stem)
    for x, stats in result.points:
        label = "" if x is None else f"{config.sweep}={x} "
        print(f"{label}count={stats.count} fraction_strict={float(stats.fraction_strict):.3f} "
              f"mean_diff={float(stats.mean_diff):.3f} stddev_diff={stats.stddev_diff:.3f}")
    for path in written:
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mechkit", description="Budget-minimal efficient mechanisms via shortest paths.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--env", required=True, help="JSON environment document")
        p.add_argument("--rule", default=None,
                       help="option rule: se:lowest, se:highest, affine:FILE, table:FILE, optimal:expected, optimal:max, quadratic, doc "
                            "(default: the document's rule, else se:lowest)")
        p.add_argument("--payment", default="proposed", choices=PAYMENT_RULES, help="payment rule")
        p.add_argument("--mode", default="auto", choices=MODES, help="type-graph mode for proposed payments")

    p = sub.add_parser("run", help="run a mechanism at one profile and print the outcome as JSON")
    common(p)
    p.add_argument("--profile", required=True, help="comma-separated type indices, one per agent (0-based)")
    p.add_argument("--audit", action="store_true", help="also audit SE/DSIC/IR exhaustively and warn on violations")
    p.add_argument("--dump-graphs", metavar="DIR", help="write each agent's type graph as Graphviz DOT")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("audit", help="exhaustive SE/DSIC/IR audit report as JSON")
    common(p)
    p.add_argument("--oracle", action="store_true", help="compare payments with the brute-force path oracle")
    p.add_argument("--dominance", action="store_true", help="add the proposed vs VCG-budget dominance report")
    p.add_argument("--output", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("experiment", help="random budget comparison against VCG-budget, or a demo")
    p.add_argument("--config", help="JSON file with ExperimentConfig fields")
    p.add_argument("--n", type=_parse_size, help="agents: N or LO:HI (default 16)")
    p.add_argument("--m", type=_parse_size, help="options: N or LO:HI (default 1:256)")
    p.add_argument("--d", type=_parse_size, help="types per agent: N or LO:HI (default 1:16)")
    p.add_argument("--range", dest="value_range", type=_parse_range, help="valuation range LO:HI (default -100:100)")
    p.add_argument("--instances", type=int, help="instances per point (default 1000)")
    p.add_argument("--seed", type=int, help="seed (default: $MECHKIT_SEED, else 0)")
    p.add_argument("--sweep", choices=("n", "m", "d"), help="sweep this size")
    p.add_argument("--from", dest="sweep_from", type=int, help="first sweep value (default 1)")
    p.add_argument("--to", type=int, help="last sweep value (default 32, 256 or 16)")
    p.add_argument("--step", type=int, default=1, help="sweep step (default 1)")
    p.add_argument("--jobs", type=int, help="worker processes (default: all cores)")
    p.add_argument("--out", default=".", help="directory for the CSV and summary JSON")
    p.add_argument("--stem", default="experiment", help="output file name stem")
    p.add_argument("--figures", metavar="DIR", help="also render histogram/sweep figures here")
    p.add_argument("--demo", choices=("vickrey", "venue"), help="run a demo environment end to end instead")
    p.add_argument("--payment", choices=PAYMENT_RULES, help="payment rule for --demo")
    p.set_defaults(func=cmd_experiment)
    return parser


def _join_negative_values(argv):
    # argparse reads "-100:100" as a flag; glue it to its option.
    out = []
    it = iter(argv)
    for a in it:
        if a in ("--range", "--n", "--m", "--d"):
            nxt = next(it, None)
            out.append(a if nxt is None else f"{a}={nxt}")
        else:
            out.append(a)
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_negative_values(argv))
    try:
        return args.func(args)
    except NegativeCycleError as exc:
        print(f"error: {exc}; the option rule is not socially efficient", file=sys.stderr)
        return EXIT_NEGATIVE_CYCLE
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (DominanceError, AuditError) as exc:
        print(f"error: guarantee violated: {exc}", file=sys.stderr)
        return EXIT_GUARANTEE
    except (InputError, UnsupportedError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
