"""``profilegm`` command line.

Exit status: 0 on success, 1 on input or usage errors, 2 on numerical or
generation failures.
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import io
from .em import FitConfig, Hyperparameters, fit
from .errors import GenerationError, InputError, NumericalError
from .evaluation import auc, confusion, metrics, robustness_harness
from .gaussian import extract_profile_graph
from .graph import MultipleGraphs, induced_multiple_graphs, to_dot
from .markov import (
    check_gmp_csmp_equivalence,
    induced_chain_class,
    is_markov_compatible,
    statements_for,
    verify_thm1,
)
from .simulation import ScenarioSpec, generate

log = logging.getLogger("profilegm")


class UsageError(InputError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def _emit(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)


def _existing(path) -> Path:
    p = Path(path)
    if not p.exists():
        raise InputError(f"{p}: no such file or directory")
    return p


# ------------------------------------------------------------------ commands

def cmd_simulate(a):
    spec = ScenarioSpec(a.scenario, a.p, a.q, a.s, a.n, a.seed)
    data, truth = generate(spec)
    out = Path(a.out)
    io.save_dataset(data, out)
    io.save_params(truth.params, out / "truth_params.json", data.columns)
    io.save_graph(truth.graph, out / "truth_graph.json")
    log.info("wrote %d levels of %d rows to %s", data.q, spec.n, out)


def _hyper(a) -> Hyperparameters:
    d = {}
    if a.hyper:
        d = io._read_json(_existing(a.hyper))
        if not isinstance(d, dict):
            raise InputError(f"{a.hyper}: expected a JSON object")
    for f in fields(Hyperparameters):
        v = getattr(a, f.name)
        if v is not None:
            d[f.name] = v
    return Hyperparameters.from_dict(d)


def _config(a) -> FitConfig:
    return FitConfig(max_iter=a.max_iter, tol=a.tol, glasso_tol=a.glasso_tol,
                     glasso_max_sweeps=a.glasso_max_sweeps, q_max=a.q_max, standardize=a.standardize)


def cmd_fit(a):
    data = io.load_dataset(_existing(a.data))
    hyper, config = _hyper(a), _config(a)
    state = fit(data, hyper, config)
    if not state.converged:
        log.warning("EM stopped after %d iterations without converging", state.iterations)
    _emit(io.dumps(io.model_to_dict(state, hyper, config)), a.out)
    if a.trace:
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "Q", "max_abs_delta_omega", "max_abs_delta_beta"])
        w.writerow([0, repr(state.objective[0]), "", ""])
        for t in range(state.iterations):
            w.writerow([t + 1, repr(state.objective[t + 1]), repr(state.delta_omega[t]), repr(state.delta_beta[t])])
        _emit(buf.getvalue(), a.trace)


def cmd_extract_graph(a):
    _, post, _ = io.load_model(_existing(a.model))
    demoted = []
    g = extract_profile_graph(post, a.edge_cut, a.vertex_cut, demoted)
    for v in demoted:
        log.info("vertex %s demoted to circle", v)
    _emit(io.save_graph(g), a.out)


def cmd_enumerate(a):
    g = io.load_graph(_existing(a.graph))
    stmts = statements_for(g, a.property, a.max_vertices)
    if a.format == "json":
        text = io.dumps([s.to_dict() for s in stmts])
    else:
        text = "".join(f"{s}\n" for s in stmts)
    _emit(text, a.out)


def cmd_chain_class(a):
    g = io.load_graph(_existing(a.graph))
    cc = induced_chain_class(g)
    _emit(io.dumps({"min": cc.min.to_dict(), "max": cc.max.to_dict(), "unique": cc.unique.to_dict()}), a.out)


def cmd_check_compat(a):
    g = io.load_graph(_existing(a.graph))
    c = io.load_chain(_existing(a.chain))
    ok, reason = is_markov_compatible(c, g)
    _emit(io.dumps({"compatible": ok, "reason": reason}), a.out)


def cmd_verify_thm1(a):
    res = verify_thm1(a.p, a.q, a.max_graphs)
    _emit(io.dumps(res), a.out)


def _graph_file(path, names):
    p = _existing(path)
    if p.is_dir():
        for n in names:
            if (p / n).exists():
                return p / n
        raise InputError(f"{p}: none of {', '.join(names)} found")
    return p


def _estimate(path, truth: MultipleGraphs, edge_cut, vertex_cut):
    """Return ``(graphs, scores or None)`` from a model, graph JSON or edge-list CSV."""
    p = _graph_file(path, ("model.json", "graph.json"))
    if p.suffix == ".csv":
        scores = io.load_edge_scores(p, truth.vertices, truth.levels)
        return MultipleGraphs.from_adjacency(truth.vertices, truth.levels, scores != 0), None
    d = io._read_json(p)
    if isinstance(d, dict) and "summaries" in d:
        post = io.summaries_from_dict(d["summaries"], str(p))
        return induced_multiple_graphs(extract_profile_graph(post, edge_cut, vertex_cut)), post.r
    return induced_multiple_graphs(io.graph_from_dict(d, str(p))), None


def cmd_evaluate(a):
    truth = induced_multiple_graphs(io.load_graph(_graph_file(a.truth, ("truth_graph.json", "graph.json"))))
    est, scores = _estimate(a.estimate, truth, a.edge_cut, a.vertex_cut)
    if a.scores:
        scores = io.load_edge_scores(_existing(a.scores), truth.vertices, truth.levels)
    conf = confusion(truth, est)
    rows = {"pooled": metrics(conf)}
    if a.per_level:
        for x in truth.levels:
            rows[x] = metrics(conf.per_level[x])
    a_all = auc(scores, truth) if scores is not None else float("nan")
    for key, m in rows.items():
        if key == "pooled":
            m["auc"] = a_all
        elif scores is not None:
            k = truth.levels.index(key)
            m["auc"] = auc(scores[k:k + 1], MultipleGraphs(truth.vertices, (key,), {key: truth.edges[key]}))
        else:
            m["auc"] = float("nan")
    if a.format == "json":
        _emit(io.dumps({k: {c: io._nan_to_none(v) for c, v in m.items()} for k, m in rows.items()}), a.out)
        return
    cols = ("accuracy", "sensitivity", "specificity", "auc")
    lines = [f"{'':<10}" + "".join(f"{c.capitalize() if c != 'auc' else 'AUC':>13}" for c in cols)]
    for key, m in rows.items():
        name = "Pooled" if key == "pooled" else f"Level {key}"
        lines.append(f"{name:<10}" + "".join(f"{m[c]:>13.4f}" if m[c] == m[c] else f"{'NA':>13}" for c in cols))
    _emit("\n".join(lines) + "\n", a.out)


def cmd_robustness(a):
    data = io.load_dataset(_existing(a.data))
    hyper, config = _hyper(a), _config(a)
    summary = robustness_harness(data, lambda d: fit(d, hyper, config), a.fraction, a.reps, a.seed,
                                 a.edge_cut, a.vertex_cut)
    _emit(io.dumps(summary.to_dict()) if a.format == "json" else summary.format(), a.out)


def cmd_export_dot(a):
    _emit(to_dot(io.load_graph(_existing(a.graph))), a.out)


def cmd_check_equivalence(a):
    ok, cert = check_gmp_csmp_equivalence(io.load_graph(_existing(a.graph)))
    _emit(io.dumps({"equivalent": ok, "certificate": None if cert is None else str(cert)}), a.out)


# -------------------------------------------------------------------- parser

def _add_fit_flags(sp):
    sp.add_argument("--hyper", help="JSON object of hyperparameters; flags below override it")
    for f in fields(Hyperparameters):
        sp.add_argument(f"--{f.name}", type=float, default=None,
                        help=f"hyperparameter {f.name} (default {f.default})")
    d = FitConfig()
    sp.add_argument("--max-iter", type=int, default=d.max_iter)
    sp.add_argument("--tol", type=float, default=d.tol, help="relative change in Q that stops EM")
    sp.add_argument("--glasso-tol", type=float, default=d.glasso_tol)
    sp.add_argument("--glasso-max-sweeps", type=int, default=d.glasso_max_sweeps)
    sp.add_argument("--q-max", type=int, default=d.q_max, help="largest q for the exact 2^q enumeration")
    sp.add_argument("--standardize", action="store_true", help="fit on per-variable unit-variance data")


def _add_cuts(sp):
    sp.add_argument("--edge-cut", type=float, default=0.5)
    sp.add_argument("--vertex-cut", type=float, default=0.5)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="profilegm", description="Profile undirected graphical models.")
    ap.add_argument("-v", "--verbose", action="count", default=0, help="log to stderr (-vv for debug)")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")
    sub.required = True

    sp = sub.add_parser("simulate", help="generate a synthetic dataset with its true structure")
    sp.add_argument("--scenario", type=int, required=True, choices=(1, 2, 3, 4))
    sp.add_argument("--p", type=int, default=20)
    sp.add_argument("--q", type=int, default=4)
    sp.add_argument("--s", type=float, default=0.0, help="probability of switching on an absent edge")
    sp.add_argument("--n", type=int, default=50, help="rows per level")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True, help="output directory")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("fit", help="run spike-and-slab EM")
    sp.add_argument("--data", required=True, help="dataset directory or single CSV with a level column")
    sp.add_argument("--out", help="model JSON (stdout when omitted)")
    sp.add_argument("--trace", help="CSV of the objective trace")
    _add_fit_flags(sp)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("extract-graph", help="threshold a fitted model into a profile graph")
    sp.add_argument("--model", required=True)
    sp.add_argument("--out")
    _add_cuts(sp)
    sp.set_defaults(func=cmd_extract_graph)

    sp = sub.add_parser("enumerate-independencies", help="list the statements of a Markov property")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--property", required=True, choices=("pmp", "lmp", "csmp", "gmp"))
    sp.add_argument("--format", choices=("json", "text"), default="text")
    sp.add_argument("--max-vertices", type=int, default=12)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("chain-class", help="minimum, maximum and kind-determined LWF chain graphs")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_chain_class)

    sp = sub.add_parser("check-compat", help="Markov compatibility of a chain graph")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--chain", required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_check_compat)

    sp = sub.add_parser("check-equivalence", help="global vs connected-set property on one graph")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_check_equivalence)

    sp = sub.add_parser("verify-thm1", help="exhaustive global vs connected-set equivalence check")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--max-graphs", type=int, default=10 ** 6)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_verify_thm1)

    sp = sub.add_parser("evaluate", help="edge recovery against a true graph")
    sp.add_argument("--truth", required=True, help="graph JSON or a directory holding truth_graph.json")
    sp.add_argument("--estimate", required=True, help="model JSON, graph JSON, edge-list CSV or a directory")
    sp.add_argument("--scores", help="CSV level,a,b,score used for the AUC")
    sp.add_argument("--format", choices=("table", "json"), default="table")
    sp.add_argument("--per-level", action="store_true")
    sp.add_argument("--out")
    _add_cuts(sp)
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("robustness", help="balanced accuracy of refits on subsamples")
    sp.add_argument("--data", required=True)
    sp.add_argument("--fraction", type=float, default=0.1)
    sp.add_argument("--reps", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--format", choices=("table", "json"), default="table")
    sp.add_argument("--out")
    _add_cuts(sp)
    _add_fit_flags(sp)
    sp.set_defaults(func=cmd_robustness)

    sp = sub.add_parser("export-dot", help="Graphviz rendering of a profile graph")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_export_dot)
    return ap


def run(argv=None) -> int:
    try:
        a = build_parser().parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return 1
    except SystemExit as e:  # --help
        return int(e.code or 0)
    level = logging.WARNING - 10 * min(a.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", force=True)
    try:
        a.func(a)
    except (NumericalError, GenerationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
