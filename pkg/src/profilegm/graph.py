"""Profile undirected graphs: Z-labelled edges and label-indexed connectivity.

Every unordered pair of distinct vertices carries a label ``Z``, a subset of
the level set.  ``Z`` equal to all levels is a missing edge, the empty set is
a full edge, anything in between is a dotted edge.  A level ``x`` "uses" the
edge ``{a, b}`` when ``x`` is not in its label.

Internally the connectivity queries run on integer bitmasks (bit ``i`` is
the ``i``-th vertex), which keeps the exhaustive enumerations in
:mod:`profilegm.markov` cheap.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from types import MappingProxyType
from typing import Iterable, Mapping

from .errors import InputError

CIRCLE = "circle"
SQUARE = "square"


@dataclass(frozen=True)
class StateSpace:
    """Ordered, distinct levels of the external factor."""

    levels: tuple[str, ...]

    def __post_init__(self):
        if len(self.levels) < 1:
            raise InputError("state space needs at least one level")
        if len(set(self.levels)) != len(self.levels):
            raise InputError("levels must be distinct")

    @property
    def q(self) -> int:
        return len(self.levels)


def _pair(a, b) -> frozenset:
    return frozenset((a, b))


class ProfileGraph:
    """A profile undirected graph.

    Parameters
    ----------
    levels : iterable of str
        The state space of the external factor.
    vertices : iterable of str
        Vertex identifiers; insertion order is the canonical order.
    edges : mapping ``(a, b) -> iterable of levels``, optional
        Labels of the listed pairs.  Unlisted pairs get the full level set,
        i.e. a missing edge.
    kinds : mapping vertex -> ``"circle"`` | ``"square"``, optional
        Vertices not listed are circles.

    The constructor stores what it is given without judging it, so that
    :func:`validate` can report problems such as a label that is not a
    subset of the levels.  Queries raise :class:`InputError` on unknown
    vertices or levels.
    """

    __slots__ = ("_levels", "_vertices", "_labels", "_kinds", "_index", "_hash")

    def __init__(self, levels: Iterable, vertices: Iterable, edges: Mapping | None = None,
                 kinds: Mapping | None = None):
        self._levels = tuple(str(x) for x in levels)
        self._vertices = tuple(str(v) for v in vertices)
        labels = {}
        for key, label in (edges or {}).items():
            a, b = (str(k) for k in key)
            labels[_pair(a, b)] = frozenset(str(x) for x in label)
        self._labels = MappingProxyType(labels)
        self._kinds = MappingProxyType({str(v): str(k) for v, k in (kinds or {}).items()})
        self._index = {v: i for i, v in enumerate(self._vertices)}
        self._hash = None

    # ------------------------------------------------------------------ basics

    @property
    def levels(self) -> tuple[str, ...]:
        return self._levels

    @property
    def vertices(self) -> tuple[str, ...]:
        return self._vertices

    @property
    def p(self) -> int:
        return len(self._vertices)

    @property
    def q(self) -> int:
        return len(self._levels)

    @property
    def state_space(self) -> StateSpace:
        return StateSpace(self._levels)

    @property
    def explicit_labels(self) -> Mapping[frozenset, frozenset]:
        """The labels exactly as supplied (pairs absent here are missing edges)."""
        return self._labels

    def kind(self, v) -> str:
        self._check_vertex(v)
        return self._kinds.get(v, CIRCLE)

    @property
    def squares(self) -> frozenset:
        return frozenset(v for v in self._vertices if self._kinds.get(v, CIRCLE) == SQUARE)

    def label(self, a, b) -> frozenset:
        """Label ``Z`` of the pair ``{a, b}``; the full level set if unlisted."""
        self._check_vertex(a)
        self._check_vertex(b)
        if a == b:
            raise InputError(f"no label for the degenerate pair ({a!r}, {a!r})")
        return self._labels.get(_pair(a, b), frozenset(self._levels))

    def pairs(self):
        """All unordered vertex pairs in canonical order."""
        return list(combinations(self._vertices, 2))

    def is_missing(self, a, b) -> bool:
        return self.label(a, b) == frozenset(self._levels)

    def is_full(self, a, b) -> bool:
        return not self.label(a, b)

    def is_dotted(self, a, b) -> bool:
        z = self.label(a, b)
        return bool(z) and z != frozenset(self._levels)

    def dotted_vertices(self) -> frozenset:
        """Vertices that are an endpoint of at least one dotted edge."""
        out = set()
        for a, b in self.pairs():
            if self.is_dotted(a, b):
                out.update((a, b))
        return frozenset(out)

    def with_kinds(self, kinds: Mapping) -> "ProfileGraph":
        return ProfileGraph(self._levels, self._vertices,
                            {tuple(sorted(k)): z for k, z in self._labels.items()}, kinds)

    # ---------------------------------------------------------- equality/hash

    def _key(self):
        full = frozenset(self._levels)
        labels = frozenset((k, z) for k, z in self._labels.items() if z != full)
        kinds = frozenset((v, k) for v, k in self._kinds.items() if k != CIRCLE)
        return (self._levels, self._vertices, labels, kinds)

    def __eq__(self, other):
        if not isinstance(other, ProfileGraph):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._key())
        return self._hash

    def __repr__(self):
        edges = []
        full = frozenset(self._levels)
        for a, b in self.pairs():
            z = self._labels.get(_pair(a, b), full)
            if z != full:
                edges.append(f"{a}-{b}:{{{','.join(x for x in self._levels if x in z)}}}")
        return f"ProfileGraph(levels={list(self._levels)}, edges=[{', '.join(edges)}], squares={sorted(self.squares)})"

    # --------------------------------------------------------------- checking

    def _check_vertex(self, v):
        if v not in self._index:
            raise InputError(f"unknown vertex {v!r}")

    def _check_level(self, x):
        if x not in self._levels:
            raise InputError(f"unknown level {x!r}")

    def _mask(self, vs: Iterable) -> int:
        m = 0
        for v in vs:
            self._check_vertex(v)
            m |= 1 << self._index[v]
        return m

    def _unmask(self, m: int) -> frozenset:
        return frozenset(v for i, v in enumerate(self._vertices) if m >> i & 1)

    def level_adjacency(self, x) -> list[int]:
        """Bitmask adjacency of the graph used at level ``x``."""
        self._check_level(x)
        adj = [0] * self.p
        for key, z in self._labels.items():
            if x in z:
                continue
            a, b = tuple(key)
            i, j = self._index[a], self._index[b]
            adj[i] |= 1 << j
            adj[j] |= 1 << i
        return adj

    def skeleton_adjacency(self) -> list[int]:
        """Bitmask adjacency of the skeleton (every non-missing edge)."""
        full = frozenset(self._levels)
        adj = [0] * self.p
        for key, z in self._labels.items():
            if z == full:
                continue
            a, b = tuple(key)
            i, j = self._index[a], self._index[b]
            adj[i] |= 1 << j
            adj[j] |= 1 << i
        return adj


# ------------------------------------------------------------------ bitmasks

def iter_bits(m: int):
    while m:
        low = m & -m
        yield low.bit_length() - 1
        m ^= low


def reach(adj: list[int], start: int, allowed: int) -> int:
    """Vertices reachable from ``start`` moving only through ``allowed``."""
    seen = start & allowed
    frontier = seen
    while frontier:
        nxt = 0
        for i in iter_bits(frontier):
            nxt |= adj[i]
        nxt &= allowed & ~seen
        seen |= nxt
        frontier = nxt
    return seen


def components(adj: list[int], within: int) -> list[int]:
    """Connected components of the subgraph induced on ``within``."""
    out = []
    rest = within
    while rest:
        low = rest & -rest
        comp = reach(adj, low, within)
        out.append(comp)
        rest &= ~comp
    return out


def separated(adj: list[int], a: int, b: int, c: int, universe: int) -> bool:
    """True iff every path from ``a`` to ``b`` meets ``c``."""
    return reach(adj, a, universe & ~c) & b == 0


# --------------------------------------------------------------- operations

def validate(graph: ProfileGraph) -> list[str]:
    """List the violated invariants of ``graph``; an empty list means valid."""
    problems = []
    if len(set(graph.vertices)) != len(graph.vertices):
        dup = sorted({v for v in graph.vertices if graph.vertices.count(v) > 1})
        problems.append(f"duplicate vertices: {dup}")
    if len(graph.levels) == 0:
        problems.append("empty state space")
    if len(set(graph.levels)) != len(graph.levels):
        problems.append("duplicate levels")
    levels = set(graph.levels)
    known = set(graph.vertices)
    for key, z in graph.explicit_labels.items():
        ends = sorted(key)
        if len(ends) != 2:
            problems.append(f"self-loop label on {ends[0]!r}")
            continue
        if not set(ends) <= known:
            problems.append(f"label on unknown pair {tuple(ends)}")
            continue
        if not z <= levels:
            problems.append(f"label not subset of state space on {tuple(ends)}: {sorted(z - levels)}")
    for v, k in graph._kinds.items():
        if v not in known:
            problems.append(f"kind given for unknown vertex {v!r}")
        elif k not in (CIRCLE, SQUARE):
            problems.append(f"unknown vertex kind {k!r} for {v!r}")
    if not problems:
        dotted = graph.dotted_vertices()
        for v in graph.vertices:
            if graph.kind(v) == SQUARE and v in dotted:
                problems.append(f"square vertex incident to dotted edge: {v!r}")
    return problems


def require_valid(graph: ProfileGraph) -> None:
    problems = validate(graph)
    if problems:
        raise InputError("invalid profile graph: " + "; ".join(problems))


def neighbours_x(graph: ProfileGraph, a, x) -> frozenset:
    """Vertices joined to ``a`` by an edge whose label excludes ``x``."""
    graph._check_vertex(a)
    adj = graph.level_adjacency(x)
    return graph._unmask(adj[graph._index[a]])


def x_path_exists(graph: ProfileGraph, a, b, x) -> bool:
    if a == b:
        raise InputError("x_path_exists needs two distinct vertices")
    ma, mb = graph._mask([a]), graph._mask([b])
    adj = graph.level_adjacency(x)
    return bool(reach(adj, ma, (1 << graph.p) - 1) & mb)


def x_connected_components(graph: ProfileGraph, D: Iterable, x) -> list[frozenset]:
    """Maximal ``x``-connected classes of ``D`` (paths stay inside ``D``).

    Components are ordered by their first vertex in canonical order.
    """
    md = graph._mask(D)
    if md == 0:
        raise InputError("D must be nonempty")
    adj = graph.level_adjacency(x)
    return [graph._unmask(c) for c in components(adj, md)]


def x_separates(graph: ProfileGraph, A: Iterable, B: Iterable, C: Iterable, x) -> bool:
    """Does ``C`` x-separate ``A`` from ``B``?  An empty ``C`` is allowed."""
    ma, mb, mc = graph._mask(A), graph._mask(B), graph._mask(C)
    if not ma or not mb:
        raise InputError("A and B must be nonempty")
    if ma & mb or ma & mc or mb & mc:
        raise InputError("A, B and C must be pairwise disjoint")
    adj = graph.level_adjacency(x)
    return separated(adj, ma, mb, mc, (1 << graph.p) - 1)


@dataclass(frozen=True)
class MultipleGraphs:
    """One undirected graph per level over a shared vertex set.

    ``edges[x]`` is a frozenset of 2-element frozensets.
    """

    vertices: tuple[str, ...]
    levels: tuple[str, ...]
    edges: Mapping[str, frozenset]

    def __post_init__(self):
        vs = set(self.vertices)
        for x in self.levels:
            for e in self.edges.get(x, frozenset()):
                if len(e) != 2 or not e <= vs:
                    raise InputError(f"bad edge {sorted(e)} at level {x!r}")

    def has_edge(self, a, b, x) -> bool:
        return _pair(a, b) in self.edges[x]

    def adjacency(self, x):
        """Boolean ``p x p`` adjacency matrix of level ``x``."""
        import numpy as np

        idx = {v: i for i, v in enumerate(self.vertices)}
        m = np.zeros((len(self.vertices),) * 2, dtype=bool)
        for e in self.edges[x]:
            a, b = tuple(e)
            m[idx[a], idx[b]] = m[idx[b], idx[a]] = True
        return m

    def stacked(self):
        """``q x p x p`` boolean array in level order."""
        import numpy as np

        return np.stack([self.adjacency(x) for x in self.levels])

    @classmethod
    def from_adjacency(cls, vertices, levels, adj) -> "MultipleGraphs":
        vertices, levels = tuple(vertices), tuple(levels)
        edges = {}
        for k, x in enumerate(levels):
            edges[x] = frozenset(
                _pair(vertices[i], vertices[j])
                for i, j in combinations(range(len(vertices)), 2)
                if adj[k][i][j]
            )
        return cls(vertices, levels, edges)


def induced_multiple_graphs(graph: ProfileGraph) -> MultipleGraphs:
    """Resolve each label at every level: ``{a,b}`` is an edge of ``U(x)`` iff ``x`` is not in its label."""
    require_valid(graph)
    edges = {}
    for x in graph.levels:
        edges[x] = frozenset(_pair(a, b) for a, b in graph.pairs() if x not in graph.label(a, b))
    return MultipleGraphs(graph.vertices, graph.levels, edges)


def graph_from_multiple(mg: MultipleGraphs, kinds: Mapping | None = None) -> ProfileGraph:
    """Inverse of :func:`induced_multiple_graphs`."""
    edges = {}
    for a, b in combinations(mg.vertices, 2):
        z = frozenset(x for x in mg.levels if not mg.has_edge(a, b, x))
        if z != frozenset(mg.levels):
            edges[(a, b)] = z
    return ProfileGraph(mg.levels, mg.vertices, edges, kinds)


# --------------------------------------------------------------- rendering

def to_dot(graph: ProfileGraph, name: str = "G") -> str:
    """Graphviz rendering: solid full edges, dashed labelled dotted edges, boxed squares."""
    lines = [f"graph {name} {{"]
    for v in graph.vertices:
        shape = "box" if graph.kind(v) == SQUARE else "circle"
        lines.append(f'  "{v}" [shape={shape}];')
    for a, b in graph.pairs():
        if graph.is_missing(a, b):
            continue
        if graph.is_full(a, b):
            lines.append(f'  "{a}" -- "{b}";')
        else:
            z = graph.label(a, b)
            text = ",".join(x for x in graph.levels if x in z)
            lines.append(f'  "{a}" -- "{b}" [style=dashed, label="{text}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
