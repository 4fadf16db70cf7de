"""Batch command-line interface: ``gcm <subcommand>`` over files, JSON results.

Exit codes: 0 success, 1 usage error, 2 input error (graph/data/model files),
3 numeric failure.  All randomness flows through ``--seed`` (default 0), so a
command run twice with the same seed prints byte-identical output.
"""

import argparse
import json
import math
import sys

import numpy as np

from .attribution import arrow_strength, attribute_anomaly, distribution_change, intrinsic_influence
from .data import read_csv
from .discovery import discover_cpdag
from .exceptions import GcmError, NumericError, QueryError
from .graph import parse_graph
from .model import auto_assign, dumps_model, fit, loads_model
from .sampling import (
    atomic,
    average_causal_effect,
    counterfactual,
    draw_samples,
    interventional_samples,
    shift,
)
from .stats import fisher_z_test, pairwise_independence_test
from .validation import evaluate_mechanisms, refute_graph

SCHEMA_VERSION = 1


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; this tool reserves 2 for input errors.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _read_text(path):
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _load_graph(path):
    text = _read_text(path)
    fmt = "dot" if text.lstrip().startswith("digraph") else "json"
    return parse_graph(text, fmt)


def _load_data(path):
    return read_csv(_read_text(path))


def _load_model(path):
    return loads_model(_read_text(path))


def _load_row(path):
    data = _load_data(path)
    if data.n_rows != 1:
        raise QueryError(f"expected a single-row CSV, got {data.n_rows} rows in {path}")
    return data.row(0)


def _parse_value(text):
    try:
        value = float(text)
    except ValueError:
        return text
    return value if math.isfinite(value) else text


def _parse_assignment(text, flag):
    node, sep, value = text.partition("=")
    if not sep or not node:
        raise _UsageError(f"{flag} expects NODE=VALUE, got {text!r}")
    return node, value


def _interventions_from_args(args):
    interventions = []
    for item in getattr(args, "set", None) or []:
        node, value = _parse_assignment(item, "--set")
        interventions.append(atomic(node, _parse_value(value)))
    for item in getattr(args, "shift", None) or []:
        node, value = _parse_assignment(item, "--shift")
        try:
            delta = float(value)
        except ValueError as exc:
            raise _UsageError(f"--shift delta must be numeric, got {value!r}") from exc
        interventions.append(shift(node, delta))
    return interventions


def _dataset_payload(dataset):
    columns = list(dataset.column_names)
    arrays = [dataset.column(name) for name in columns]
    kinds = [dataset.kind(name) for name in columns]
    rows = [
        [float(a[i]) if k == "continuous" else str(a[i]) for a, k in zip(arrays, kinds)]
        for i in range(dataset.n_rows)
    ]
    return {"columns": columns, "rows": rows}


def _cmd_fit(args):
    graph = _load_graph(args.graph)
    dataset = _load_data(args.data)
    model = fit(auto_assign(graph, dataset), dataset)
    text = dumps_model(model)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)
        return {"nodes": len(graph.nodes), "model_file": args.out}
    sys.stdout.write(text + "\n")
    return None


def _cmd_sample(args):
    model = _load_model(args.model)
    return _dataset_payload(draw_samples(model, args.n, args.seed))


def _cmd_intervene(args):
    model = _load_model(args.model)
    interventions = _interventions_from_args(args)
    samples = interventional_samples(model, interventions, args.n, args.seed)
    if args.target:
        column = samples.column(args.target)
        if samples.kind(args.target) != "continuous":
            raise QueryError(f"--target {args.target!r} is categorical; no mean to report")
        return {
            "target": args.target,
            "mean": float(column.mean()),
            "std": float(column.std(ddof=1)) if args.n > 1 else 0.0,
            "n": args.n,
        }
    return _dataset_payload(samples)


def _cmd_counterfactual(args):
    model = _load_model(args.model)
    row = _load_row(args.data)
    result = counterfactual(model, row, _interventions_from_args(args))
    return {"values": result}


def _cmd_ace(args):
    model = _load_model(args.model)
    effect = average_causal_effect(
        model,
        args.treatment,
        _parse_value(args.value_a),
        _parse_value(args.value_b),
        args.target,
        n=args.n,
        seed=args.seed,
    )
    return {
        "treatment": args.treatment,
        "target": args.target,
        "value_a": _parse_value(args.value_a),
        "value_b": _parse_value(args.value_b),
        "ace": effect,
        "n": args.n,
    }


def _cmd_attribute_outlier(args):
    model = _load_model(args.model)
    row = _load_row(args.data)
    result = attribute_anomaly(
        model, args.target, row, num_samples=args.num_samples, seed=args.seed
    )
    return result.to_json()


def _cmd_attribute_change(args):
    graph = _load_graph(args.graph)
    result = distribution_change(
        graph,
        _load_data(args.old),
        _load_data(args.new),
        args.target,
        measure=args.measure,
        num_samples=args.num_samples,
        seed=args.seed,
    )
    return result.to_json()


def _cmd_icc(args):
    model = _load_model(args.model)
    result = intrinsic_influence(
        model,
        args.target,
        outer_samples=args.outer_samples,
        inner_samples=args.inner_samples,
        seed=args.seed,
    )
    return result.to_json()


def _cmd_arrow_strength(args):
    model = _load_model(args.model)
    parent, sep, child = args.edge.partition("->")
    if not sep:
        raise _UsageError(f"--edge expects PARENT->CHILD, got {args.edge!r}")
    edge = (parent.strip(), child.strip())
    strength = arrow_strength(model, edge, measure=args.measure, n=args.n, seed=args.seed)
    return {"edge": list(edge), "measure": args.measure, "strength": strength}


def _cmd_discover(args):
    cpdag = discover_cpdag(_load_data(args.data), args.alpha, args.max_cond_set)
    return cpdag.to_json()


def _cmd_refute(args):
    report = refute_graph(_load_graph(args.graph), _load_data(args.data), args.alpha)
    return report.to_json()


def _cmd_evaluate(args):
    model = _load_model(args.model)
    report = evaluate_mechanisms(model, _load_data(args.data), seed=args.seed)
    return report.to_json()


def _cmd_test(args):
    data = _load_data(args.data)
    given = [name for name in (args.given.split(",") if args.given else []) if name]
    method = args.method
    if method == "auto":
        method = "fisherz" if given else "dcor"
    if method == "fisherz":
        result = fisher_z_test(data, args.x, args.y, given)
    elif method == "dcor":
        if given:
            raise _UsageError("--given requires --method fisherz (or auto)")
        result = pairwise_independence_test(
            data.column(args.x), data.column(args.y), args.permutations, args.seed
        )
    else:
        raise _UsageError(f"unknown method {method!r}")
    return result.to_json()


def build_parser() -> _Parser:
    parser = _Parser(prog="gcm", description="Causal queries over a fitted graphical causal model.")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, handler, help_text):
        sub = commands.add_parser(name, help=help_text)
        sub.set_defaults(handler=handler)
        sub.add_argument("--seed", type=int, default=0, help="master random seed (default 0)")
        sub.add_argument("--out", help="write the JSON result to this file instead of stdout")
        return sub

    sub = command("fit", _cmd_fit, "fit mechanisms for a graph from CSV data")
    sub.add_argument("--graph", required=True)
    sub.add_argument("--data", required=True)

    sub = command("sample", _cmd_sample, "draw joint samples from a fitted model")
    sub.add_argument("--model", required=True)
    sub.add_argument("-n", type=int, default=100)

    sub = command("intervene", _cmd_intervene, "sample under interventions")
    sub.add_argument("--model", required=True)
    sub.add_argument("--set", action="append", metavar="NODE=VALUE")
    sub.add_argument("--shift", action="append", metavar="NODE=DELTA")
    sub.add_argument("--target")
    sub.add_argument("-n", type=int, default=10000)

    sub = command("counterfactual", _cmd_counterfactual, "counterfactual for one observed row")
    sub.add_argument("--model", required=True)
    sub.add_argument("--data", required=True, help="single-row CSV with all node columns")
    sub.add_argument("--set", action="append", metavar="NODE=VALUE")
    sub.add_argument("--shift", action="append", metavar="NODE=DELTA")

    sub = command("ace", _cmd_ace, "average causal effect of a treatment on a target")
    sub.add_argument("--model", required=True)
    sub.add_argument("--treatment", required=True)
    sub.add_argument("--value-a", required=True)
    sub.add_argument("--value-b", required=True)
    sub.add_argument("--target", required=True)
    sub.add_argument("-n", type=int, default=100000)

    sub = command("attribute-outlier", _cmd_attribute_outlier, "attribute one outlying row to upstream nodes")
    sub.add_argument("--model", required=True)
    sub.add_argument("--data", required=True, help="single-row CSV with the anomalous observation")
    sub.add_argument("--target", required=True)
    sub.add_argument("--num-samples", type=int, default=5000)

    sub = command("attribute-change", _cmd_attribute_change, "attribute a distribution change to nodes")
    sub.add_argument("--graph", required=True)
    sub.add_argument("--old", required=True)
    sub.add_argument("--new", required=True)
    sub.add_argument("--target", required=True)
    sub.add_argument("--measure", default="auto", choices=["auto", "mean_diff", "kl"])
    sub.add_argument("--num-samples", type=int, default=10000)

    sub = command("icc", _cmd_icc, "intrinsic causal influence on a target's variance")
    sub.add_argument("--model", required=True)
    sub.add_argument("--target", required=True)
    sub.add_argument("--outer-samples", type=int, default=100)
    sub.add_argument("--inner-samples", type=int, default=500)

    sub = command("arrow-strength", _cmd_arrow_strength, "direct strength of one edge")
    sub.add_argument("--model", required=True)
    sub.add_argument("--edge", required=True, metavar="PARENT->CHILD")
    sub.add_argument("--measure", default="auto", choices=["auto", "coupled_msd", "kl"])
    sub.add_argument("-n", type=int, default=50000)

    sub = command("discover", _cmd_discover, "learn a CPDAG from data with the PC algorithm")
    sub.add_argument("--data", required=True)
    sub.add_argument("--alpha", type=float, default=0.05)
    sub.add_argument("--max-cond-set", type=int, default=3)

    sub = command("refute", _cmd_refute, "test a graph's implied independences against data")
    sub.add_argument("--graph", required=True)
    sub.add_argument("--data", required=True)
    sub.add_argument("--alpha", type=float, default=0.05)

    sub = command("evaluate", _cmd_evaluate, "evaluate fitted mechanisms on held-out data")
    sub.add_argument("--model", required=True)
    sub.add_argument("--data", required=True)

    sub = command("test", _cmd_test, "independence tests on CSV columns")
    sub.add_argument("--data", required=True)
    sub.add_argument("--x", required=True)
    sub.add_argument("--y", required=True)
    sub.add_argument("--given", help="comma-separated conditioning columns (fisher-z)")
    sub.add_argument("--method", default="auto", choices=["auto", "dcor", "fisherz"])
    sub.add_argument("--permutations", type=int, default=199)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        payload = args.handler(args)
        if payload is not None:
            envelope = {
                "schema_version": SCHEMA_VERSION,
                "command": args.command,
                "seed": args.seed,
                **payload,
            }
            text = json.dumps(envelope, separators=(",", ":"))
            if args.out and args.command != "fit":
                with open(args.out, "w", encoding="utf-8") as handle:
                    handle.write(text + "\n")
            else:
                sys.stdout.write(text + "\n")
    except _UsageError as exc:
        print(f"gcm {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"gcm {args.command}: numeric failure: {exc}", file=sys.stderr)
        return 3
    except np.linalg.LinAlgError as exc:
        print(f"gcm {args.command}: numeric failure: {exc}", file=sys.stderr)
        return 3
    except (GcmError, OSError, json.JSONDecodeError) as exc:
        print(f"gcm {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


def main():
    sys.exit(run())
