"""File formats: graphs, chain graphs, parameters, summaries, datasets, edge scores.

Floats are written with Python's shortest round-trip representation, so
``load(save(v)) == v`` holds bit for bit.
"""
from __future__ import annotations

import csv
import json
import re
from pathlib import Path

import numpy as np

from .errors import InputError
from .gaussian import GaussianProfileParams, PosteriorSummaries, ProfileDataset
from .graph import CIRCLE, SQUARE, MultipleGraphs, ProfileGraph, validate
from .markov import ChainGraph

_LEVEL_FILE = re.compile(r"^level_(.+)\.csv$")


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: malformed JSON at line {e.lineno}: {e.msg}") from None


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _write(path, text):
    if path is None:
        return text
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text)
    return text


def _field(d, key, path):
    if not isinstance(d, dict) or key not in d:
        raise InputError(f"{path}: missing field {key!r}")
    return d[key]


def _nan_to_none(v):
    if isinstance(v, float) and v != v:
        return None
    return v


# -------------------------------------------------------------------- graphs

def graph_to_dict(g: ProfileGraph) -> dict:
    edges = []
    for a, b in g.pairs():
        if not g.is_missing(a, b):
            z = g.label(a, b)
            edges.append({"a": a, "b": b, "label": [x for x in g.levels if x in z]})
    return {
        "levels": list(g.levels),
        "vertices": list(g.vertices),
        "kinds": {v: g.kind(v) for v in g.vertices},
        "edges": edges,
    }


def graph_from_dict(d: dict, source="graph") -> ProfileGraph:
    levels = _field(d, "levels", source)
    vertices = _field(d, "vertices", source)
    kinds = d.get("kinds", {})
    if not isinstance(levels, list) or not isinstance(vertices, list) or not isinstance(kinds, dict):
        raise InputError(f"{source}: levels and vertices must be lists, kinds an object")
    edges = {}
    for k, e in enumerate(d.get("edges", [])):
        a, b, label = (_field(e, f, f"{source}: edges[{k}]") for f in ("a", "b", "label"))
        if not isinstance(label, list):
            raise InputError(f"{source}: edges[{k}].label must be a list")
        key = frozenset((str(a), str(b)))
        if key in edges:
            raise InputError(f"{source}: edges[{k}] repeats the pair ({a}, {b})")
        edges[key] = (str(a), str(b), [str(x) for x in label])
    for v, kind in kinds.items():
        if kind not in (CIRCLE, SQUARE):
            raise InputError(f"{source}: kinds[{v!r}] must be 'circle' or 'square'")
    g = ProfileGraph(levels, vertices, {(a, b): z for a, b, z in edges.values()}, kinds)
    problems = validate(g)
    if problems:
        raise InputError(f"{source}: " + "; ".join(problems))
    return g


def save_graph(g: ProfileGraph, path=None) -> str:
    return _write(path, dumps(graph_to_dict(g)))


def load_graph(path) -> ProfileGraph:
    return graph_from_dict(_read_json(path), str(path))


def chain_from_dict(d: dict, source="chain") -> ChainGraph:
    vertices = _field(d, "vertices", source)
    edges = d.get("edges", [])
    arrows = d.get("arrows", [])
    for k, e in enumerate(edges):
        if not isinstance(e, list) or len(e) != 2:
            raise InputError(f"{source}: edges[{k}] must be a pair")
    return ChainGraph(tuple(str(v) for v in vertices), frozenset(frozenset(map(str, e)) for e in edges),
                      frozenset(str(a) for a in arrows))


def save_chain(c: ChainGraph, path=None) -> str:
    return _write(path, dumps(c.to_dict()))


def load_chain(path) -> ChainGraph:
    return chain_from_dict(_read_json(path), str(path))


def multiple_to_dict(mg: MultipleGraphs) -> dict:
    return {"vertices": list(mg.vertices), "levels": list(mg.levels),
            "edges": {x: sorted(sorted(e) for e in mg.edges[x]) for x in mg.levels}}


# ---------------------------------------------------------------- parameters

def params_to_dict(p: GaussianProfileParams, vertices=None) -> dict:
    d = {
        "alpha": p.alpha.tolist(),
        "levels": list(p.levels),
        "beta": {x: p.beta[k].tolist() for k, x in enumerate(p.levels)},
        "omega": {x: p.omega[k].tolist() for k, x in enumerate(p.levels)},
    }
    if p._zeta is not None:
        d["zeta"] = {x: p._zeta[k].tolist() for k, x in enumerate(p.levels)}
    if vertices is not None:
        d["vertices"] = list(vertices)
    return d


def params_from_dict(d: dict, source="params") -> GaussianProfileParams:
    levels = [str(x) for x in _field(d, "levels", source)]
    try:
        alpha = np.asarray(_field(d, "alpha", source), dtype=float)
        beta = np.asarray([_field(d["beta"], x, f"{source}: beta") for x in levels], dtype=float)
        omega = np.asarray([_field(d["omega"], x, f"{source}: omega") for x in levels], dtype=float)
        zeta = None
        if "zeta" in d:
            zeta = np.asarray([_field(d["zeta"], x, f"{source}: zeta") for x in levels], dtype=float)
    except (TypeError, ValueError) as e:
        raise InputError(f"{source}: {e}") from None
    return GaussianProfileParams(levels, alpha, beta, omega, zeta)


def summaries_to_dict(s: PosteriorSummaries) -> dict:
    return {
        "vertices": list(s.vertices),
        "levels": list(s.levels),
        "theta": s.theta.tolist(),
        "gamma": s.gamma.tolist(),
        "r": {x: s.r[k].tolist() for k, x in enumerate(s.levels)},
    }


def summaries_from_dict(d: dict, source="summaries") -> PosteriorSummaries:
    levels = [str(x) for x in _field(d, "levels", source)]
    try:
        r = np.asarray([_field(d["r"], x, f"{source}: r") for x in levels], dtype=float)
        return PosteriorSummaries(_field(d, "vertices", source), levels,
                                  np.asarray(_field(d, "theta", source), dtype=float),
                                  np.asarray(_field(d, "gamma", source), dtype=float), r)
    except (TypeError, ValueError) as e:
        raise InputError(f"{source}: {e}") from None


def save_params(p: GaussianProfileParams, path=None, vertices=None) -> str:
    return _write(path, dumps(params_to_dict(p, vertices)))


def load_params(path) -> GaussianProfileParams:
    return params_from_dict(_read_json(path), str(path))


def save_summaries(s: PosteriorSummaries, path=None) -> str:
    return _write(path, dumps(summaries_to_dict(s)))


def load_summaries(path) -> PosteriorSummaries:
    return summaries_from_dict(_read_json(path), str(path))


def model_to_dict(state, hyper, config) -> dict:
    from dataclasses import asdict

    return {
        "hyper": hyper.to_dict(),
        "config": asdict(config),
        "iterations": state.iterations,
        "converged": state.converged,
        "params": params_to_dict(state.params, state.summaries.vertices),
        "summaries": summaries_to_dict(state.summaries),
    }


def load_model(path):
    """Return ``(params, summaries, raw_dict)`` from a fitted-model file."""
    d = _read_json(path)
    return (params_from_dict(_field(d, "params", str(path)), str(path)),
            summaries_from_dict(_field(d, "summaries", str(path)), str(path)), d)


# ------------------------------------------------------------------ datasets

def _fmt(v: float) -> str:
    return repr(float(v))


def _parse_rows(path, rows, start_line, width, lines=None):
    out = []
    for k, row in enumerate(rows):
        line = lines[k] if lines is not None else start_line + k
        if not row:
            continue
        if len(row) != width:
            raise InputError(f"{path}: line {line} has {len(row)} fields, expected {width}")
        try:
            out.append([float(v) for v in row])
        except ValueError:
            raise InputError(f"{path}: line {line} has a non-numeric value") from None
    return out


def _read_csv(path):
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    if not rows or not rows[0]:
        raise InputError(f"{path}: empty file or blank header")
    return rows


def _level_order(names):
    if all(re.fullmatch(r"-?\d+", x) for x in names):
        return sorted(names, key=int)
    return sorted(names)


def load_dataset(path) -> ProfileDataset:
    """Read ``level_<x>.csv`` files from a directory, or one CSV with a ``level`` column."""
    path = Path(path)
    if path.is_dir():
        files = {}
        for f in path.iterdir():
            m = _LEVEL_FILE.match(f.name)
            if m:
                files[m.group(1)] = f
        if not files:
            raise InputError(f"{path}: no level_<x>.csv files")
        levels = _level_order(list(files))
        data, columns = {}, None
        for x in levels:
            rows = _read_csv(files[x])
            header = rows[0]
            if columns is None:
                columns = header
            elif header != columns:
                raise InputError(f"{files[x]}: header differs from the other levels")
            data[x] = np.asarray(_parse_rows(files[x], rows[1:], 2, len(header)), dtype=float).reshape(-1, len(header))
        return ProfileDataset(levels, data, columns)
    if not path.exists():
        raise InputError(f"{path}: no such file or directory")
    rows = _read_csv(path)
    header = rows[0]
    if not header or header[0] != "level":
        raise InputError(f"{path}: the first column must be 'level'")
    width = len(header)
    by_level, lines = {}, {}
    for k, row in enumerate(rows[1:]):
        if not row:
            continue
        if len(row) != width:
            raise InputError(f"{path}: line {k + 2} has {len(row)} fields, expected {width}")
        by_level.setdefault(row[0], []).append(row[1:])
        lines.setdefault(row[0], []).append(k + 2)
    order = list(by_level)
    data = {x: np.asarray(_parse_rows(path, by_level[x], 0, width - 1, lines[x]), dtype=float) for x in order}
    return ProfileDataset(order, data, header[1:])


def save_dataset(ds: ProfileDataset, directory) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for x in ds.levels:
        with open(d / f"level_{x}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(ds.columns)
            for row in ds.data[x]:
                w.writerow([_fmt(v) for v in row])


# ------------------------------------------------------------ edge lists

def load_edge_scores(path, vertices, levels):
    """``level,a,b,score`` rows into a ``(q, p, p)`` score array (absent pairs score 0)."""
    idx = {v: i for i, v in enumerate(vertices)}
    lix = {x: k for k, x in enumerate(levels)}
    rows = _read_csv(path)
    if rows[0][:3] != ["level", "a", "b"]:
        raise InputError(f"{path}: header must start with level,a,b")
    has_score = len(rows[0]) > 3
    out = np.zeros((len(levels), len(vertices), len(vertices)))
    for k, row in enumerate(rows[1:]):
        line = k + 2
        if not row:
            continue
        if len(row) != len(rows[0]):
            raise InputError(f"{path}: line {line} has {len(row)} fields, expected {len(rows[0])}")
        x, a, b = row[:3]
        if x not in lix or a not in idx or b not in idx or a == b:
            raise InputError(f"{path}: line {line} names an unknown level or vertex")
        try:
            s = float(row[3]) if has_score else 1.0
        except ValueError:
            raise InputError(f"{path}: line {line} has a non-numeric score") from None
        out[lix[x], idx[a], idx[b]] = out[lix[x], idx[b], idx[a]] = s
    return out


def load_edge_list(path, vertices, levels) -> MultipleGraphs:
    """``level,a,b[,score]`` rows; a listed pair is an edge unless its score is 0."""
    scores = load_edge_scores(path, vertices, levels)
    return MultipleGraphs.from_adjacency(vertices, levels, scores != 0)
