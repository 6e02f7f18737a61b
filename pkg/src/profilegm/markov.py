"""Independence models of profile graphs and their two-block LWF chain graphs.

Statements are enumerated per level.  A statement with several blocks is a
mutual independence ``K1 _||_ K2 _||_ ... | C``; :meth:`IndependenceStatement.pairwise`
expands it into its two-block consequences for set comparisons.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Iterable

from .errors import CapacityError, InputError
from .graph import (
    ProfileGraph,
    components,
    iter_bits,
    reach,
    require_valid,
    separated,
)

DEFAULT_MAX_VERTICES = 12


def _names_key(block) -> tuple:
    return tuple(sorted(block))


@dataclass(frozen=True)
class IndependenceStatement:
    """``Y_K1(x) _||_ ... _||_ Y_Kr(x) | Y_C(x)`` for ``x`` in ``profiles``.

    ``profiles=None`` marks a statement about the joint law of ``(Y_V, X)``
    as read off a chain graph; ``given_factor`` adds ``X`` to the
    conditioning set and ``versus_factor`` turns a single block ``A`` into
    ``Y_A _||_ X | Y_C``.
    """

    blocks: tuple
    given: frozenset = frozenset()
    profiles: frozenset | None = None
    given_factor: bool = False
    versus_factor: bool = False

    def __post_init__(self):
        blocks = tuple(sorted((frozenset(b) for b in self.blocks), key=_names_key))
        given = frozenset(self.given)
        need = 1 if self.versus_factor else 2
        if len(blocks) < need or any(not b for b in blocks):
            raise InputError("statement blocks must be nonempty")
        seen = set(given)
        for b in blocks:
            if seen & b:
                raise InputError("statement sets must be pairwise disjoint")
            seen |= b
        if self.profiles is not None and not self.profiles:
            raise InputError("statement needs at least one profile")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "given", given)
        if self.profiles is not None:
            object.__setattr__(self, "profiles", frozenset(self.profiles))

    @classmethod
    def make(cls, A, B, C=(), profiles=None, given_factor=False):
        return cls((frozenset(A), frozenset(B)), frozenset(C), profiles, given_factor)

    @property
    def A(self) -> frozenset:
        return self.blocks[0]

    @property
    def B(self) -> frozenset:
        if self.versus_factor:
            raise AttributeError("a statement against X has a single block")
        return self.blocks[1]

    @property
    def C(self) -> frozenset:
        return self.given

    def pairwise(self) -> list["IndependenceStatement"]:
        """Two-block consequences (decomposition) of a mutual statement."""
        if self.versus_factor or len(self.blocks) == 2:
            return [self]
        return [
            IndependenceStatement((a, b), self.given, self.profiles, self.given_factor)
            for a, b in combinations(self.blocks, 2)
        ]

    def per_level(self) -> list["IndependenceStatement"]:
        if self.profiles is None or len(self.profiles) == 1:
            return [self]
        return [
            IndependenceStatement(self.blocks, self.given, frozenset([x]), self.given_factor)
            for x in sorted(self.profiles)
        ]

    def sort_key(self):
        prof = tuple(sorted(self.profiles)) if self.profiles is not None else ()
        return (prof, self.versus_factor, tuple(_names_key(b) for b in self.blocks),
                _names_key(self.given), self.given_factor)

    def to_dict(self) -> dict:
        d = {
            "blocks": [sorted(b) for b in self.blocks],
            "given": sorted(self.given),
        }
        if self.profiles is not None:
            d["profiles"] = sorted(self.profiles)
        if self.given_factor:
            d["given_factor"] = True
        if self.versus_factor:
            d["versus_factor"] = True
        return d

    def __str__(self):
        def fmt(s):
            return "{" + ",".join(sorted(s)) + "}"

        prof = ""
        if self.profiles is not None:
            prof = "(" + ",".join(sorted(self.profiles)) + ")"
        left = " _||_ ".join(f"Y_{fmt(b)}{prof}" for b in self.blocks)
        if self.versus_factor:
            left += " _||_ X"
        cond = [f"Y_{fmt(self.given)}{prof}"] if self.given else []
        if self.given_factor:
            cond.append("X")
        return left + (" | " + ", ".join(cond) if cond else "")


def _sorted(stmts: Iterable[IndependenceStatement]) -> list[IndependenceStatement]:
    return sorted(set(stmts), key=IndependenceStatement.sort_key)


def _check_cap(p: int, max_vertices: int):
    if p > max_vertices:
        raise CapacityError(
            f"{p} vertices exceeds the enumeration cap of {max_vertices}; pass a larger max_vertices to override"
        )


def _subsets(mask: int):
    """Nonempty submasks of ``mask``."""
    s = mask
    while s:
        yield s
        s = (s - 1) & mask


# -------------------------------------------------------------- statements

def pairwise_statements(graph: ProfileGraph) -> list[IndependenceStatement]:
    """One statement per pair with a nonempty label, holding at the label's levels."""
    require_valid(graph)
    V = frozenset(graph.vertices)
    out = []
    for a, b in graph.pairs():
        z = graph.label(a, b)
        if z:
            out.append(IndependenceStatement.make({a}, {b}, V - {a, b}, z))
    return _sorted(out)


def local_statements(graph: ProfileGraph) -> list[IndependenceStatement]:
    require_valid(graph)
    V = frozenset(graph.vertices)
    out = []
    for x in graph.levels:
        adj = graph.level_adjacency(x)
        for i, a in enumerate(graph.vertices):
            nb = graph._unmask(adj[i])
            rest = V - nb - {a}
            if rest:
                out.append(IndependenceStatement.make({a}, rest, nb, {x}))
    return _sorted(out)


def csmp_statements(graph: ProfileGraph, max_vertices: int = DEFAULT_MAX_VERTICES):
    """Mutual statements ``K1 _||_ ... _||_ Kr | V \\ D`` for every x-disconnected ``D``."""
    require_valid(graph)
    _check_cap(graph.p, max_vertices)
    full = (1 << graph.p) - 1
    out = []
    for x in graph.levels:
        adj = graph.level_adjacency(x)
        for D in _subsets(full):
            comps = components(adj, D)
            if len(comps) > 1:
                out.append(IndependenceStatement(
                    tuple(graph._unmask(c) for c in comps), graph._unmask(full & ~D), {x}))
    return _sorted(out)


def gmp_statements(graph: ProfileGraph, max_vertices: int = DEFAULT_MAX_VERTICES):
    """Every ``(A, B, C, x)`` with ``C`` x-separating ``A`` from ``B``."""
    require_valid(graph)
    _check_cap(graph.p, max_vertices)
    full = (1 << graph.p) - 1
    out = set()
    for x in graph.levels:
        adj = graph.level_adjacency(x)
        for C in _gmp_conditioning_sets(full):
            D = full & ~C
            for A in _subsets(D):
                free = D & ~reach(adj, A, D)
                for B in _subsets(free):
                    a, b = graph._unmask(A), graph._unmask(B)
                    if _names_key(a) < _names_key(b):
                        out.add(IndependenceStatement.make(a, b, graph._unmask(C), {x}))
    return _sorted(out)


def _gmp_conditioning_sets(full: int):
    yield 0
    yield from _subsets(full)


# ------------------------------------------- global vs connected-set check

@dataclass
class EquivalenceCertificate:
    """Counterexample found by :func:`check_gmp_csmp_equivalence`."""

    direction: str
    level: str
    A: frozenset
    B: frozenset
    C: frozenset
    detail: str = ""


def _equivalence_on_masks(p: int, level_adj: dict) -> tuple | None:
    """Graph-level check of GMP <=> CSMP on bitmask adjacencies.

    Returns ``None`` when every direction holds, else a tuple
    ``(direction, level, A, B, C, detail)`` of masks.
    """
    full = (1 << p) - 1
    for x, adj in level_adj.items():
        for C in _gmp_conditioning_sets(full):
            D = full & ~C
            comps = components(adj, D)
            owner = {}
            for k, comp in enumerate(comps):
                for i in iter_bits(comp):
                    owner[i] = k
            # GMP -> CSMP: each separation statement follows from the
            # mutual statement of D = V \ C by decomposition.
            for A in _subsets(D):
                a_comps = {owner[i] for i in iter_bits(A)}
                for B in _subsets(D & ~A):
                    sep = separated(adj, A, B, C, full)
                    b_comps = {owner[i] for i in iter_bits(B)}
                    via_components = not (a_comps & b_comps)
                    if sep != via_components:
                        kind = "gmp-not-in-csmp" if sep else "csmp-not-in-gmp"
                        return (kind, x, A, B, C, "separation and component split disagree")
            # CSMP -> GMP: every pair of components is separated both by
            # V \ D and by V \ (Ki u Kj).
            for ki, kj in combinations(comps, 2):
                if not separated(adj, ki, kj, C, full):
                    return ("csmp-not-in-gmp", x, ki, kj, C, "V\\D does not separate two components")
                if not separated(adj, ki, kj, full & ~(ki | kj), full):
                    return ("csmp-not-in-gmp", x, ki, kj, full & ~(ki | kj),
                            "V\\(Ki u Kj) does not separate two components")
    return None


def check_gmp_csmp_equivalence(graph: ProfileGraph, max_vertices: int = DEFAULT_MAX_VERTICES):
    """Verify at graph level that the global and connected-set properties coincide.

    Returns ``(True, None)`` or ``(False, EquivalenceCertificate)``.
    """
    require_valid(graph)
    _check_cap(graph.p, max_vertices)
    level_adj = {x: graph.level_adjacency(x) for x in graph.levels}
    bad = _equivalence_on_masks(graph.p, level_adj)
    if bad is None:
        return True, None
    kind, x, A, B, C, detail = bad
    return False, EquivalenceCertificate(kind, x, graph._unmask(A), graph._unmask(B), graph._unmask(C), detail)


def enumerate_label_assignments(p: int, q: int):
    """Yield every profile graph on ``p`` vertices and ``q`` levels as per-level bitmask adjacencies.

    Each of the ``p(p-1)/2`` pairs takes one of ``2**q`` labels, so there are
    ``(2**q) ** (p(p-1)/2)`` graphs.  Yields ``(labels, level_adj)`` with
    ``labels`` a tuple of level bitmasks (bit set = level in ``Z``).
    """
    pairs = list(combinations(range(p), 2))
    for labels in product(range(1 << q), repeat=len(pairs)):
        level_adj = {}
        for x in range(q):
            adj = [0] * p
            for (i, j), z in zip(pairs, labels):
                if not z >> x & 1:
                    adj[i] |= 1 << j
                    adj[j] |= 1 << i
            level_adj[x] = adj
        yield labels, level_adj


def verify_thm1(p: int, q: int, max_graphs: int = 10 ** 6) -> dict:
    """Exhaustive GMP/CSMP equivalence check over all profile graphs of a size."""
    if p < 1 or q < 1:
        raise InputError("p and q must be positive")
    n_graphs = (1 << q) ** (p * (p - 1) // 2)
    if n_graphs > max_graphs:
        raise CapacityError(f"{n_graphs} graphs exceeds the cap of {max_graphs}")
    failures = []
    checked = 0
    for labels, level_adj in enumerate_label_assignments(p, q):
        checked += 1
        bad = _equivalence_on_masks(p, level_adj)
        if bad is not None:
            failures.append({"labels": list(labels), "certificate": list(map(str, bad))})
    return {"p": p, "q": q, "graphs": checked, "failures": failures, "equivalent": not failures}


# ------------------------------------------------------------- chain graphs

@dataclass(frozen=True)
class ChainGraph:
    """Two-block LWF chain graph: undirected edges within ``V`` plus arrows ``X -> a``."""

    vertices: tuple
    undirected: frozenset = field(default_factory=frozenset)
    arrows: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        vertices = tuple(self.vertices)
        vs = set(vertices)
        und = frozenset(frozenset(e) for e in self.undirected)
        for e in und:
            if len(e) != 2:
                raise InputError(f"self-loop or malformed edge {sorted(e)}")
            if not e <= vs:
                raise InputError(f"edge {sorted(e)} has an unknown endpoint")
        arrows = frozenset(self.arrows)
        if not arrows <= vs:
            raise InputError(f"arrows to unknown vertices: {sorted(arrows - vs)}")
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "undirected", und)
        object.__setattr__(self, "arrows", arrows)

    def adjacency(self) -> list[int]:
        idx = {v: i for i, v in enumerate(self.vertices)}
        adj = [0] * len(self.vertices)
        for e in self.undirected:
            a, b = tuple(e)
            adj[idx[a]] |= 1 << idx[b]
            adj[idx[b]] |= 1 << idx[a]
        return adj

    def _unmask(self, m: int) -> frozenset:
        return frozenset(v for i, v in enumerate(self.vertices) if m >> i & 1)

    def to_dict(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": sorted(sorted(e) for e in self.undirected),
            "arrows": [v for v in self.vertices if v in self.arrows],
        }


@dataclass(frozen=True)
class ChainClass:
    """Minimum, maximum and kind-determined element of the induced chain class."""

    min: ChainGraph
    max: ChainGraph
    unique: ChainGraph


def _skeleton_edges(graph: ProfileGraph) -> frozenset:
    return frozenset(frozenset((a, b)) for a, b in graph.pairs() if not graph.is_missing(a, b))


def induced_chain_class(graph: ProfileGraph) -> ChainClass:
    require_valid(graph)
    skel = _skeleton_edges(graph)
    V = graph.vertices
    lo = ChainGraph(V, skel, graph.dotted_vertices())
    hi = ChainGraph(V, skel, frozenset(V))
    unique = ChainGraph(V, skel, frozenset(V) - graph.squares)
    return ChainClass(lo, hi, unique)


def is_markov_compatible(chain: ChainGraph, graph: ProfileGraph) -> tuple[bool, str]:
    """Check skeleton agreement and arrows on both ends of every dotted edge."""
    require_valid(graph)
    if set(chain.vertices) != set(graph.vertices):
        raise InputError("chain graph and profile graph have different vertex sets")
    skel = _skeleton_edges(graph)
    extra = chain.undirected - skel
    if extra:
        e = sorted(sorted(x) for x in extra)[0]
        return False, f"undirected edge {e[0]}-{e[1]} is missing in the profile graph"
    lacking = skel - chain.undirected
    if lacking:
        e = sorted(sorted(x) for x in lacking)[0]
        return False, f"edge {e[0]}-{e[1]} of the profile graph is missing in the chain graph"
    for a, b in graph.pairs():
        if graph.is_dotted(a, b):
            for v in (a, b):
                if v not in chain.arrows:
                    return False, f"vertex {v} is an endpoint of dotted edge {a}-{b} but receives no arrow"
    return True, "conditions (i) and (ii) hold"


def lwf_gmp_statements(chain: ChainGraph, max_vertices: int = DEFAULT_MAX_VERTICES):
    """LWF global Markov statements of a two-block chain graph.

    Disconnected sets of the undirected part give mutual statements given
    ``X``; every nonempty set of unarrowed vertices ``A`` gives
    ``Y_A _||_ X | Y_{V \\ A}``.
    """
    p = len(chain.vertices)
    _check_cap(p, max_vertices)
    full = (1 << p) - 1
    adj = chain.adjacency()
    out = []
    for D in _subsets(full):
        comps = components(adj, D)
        if len(comps) > 1:
            out.append(IndependenceStatement(
                tuple(chain._unmask(c) for c in comps), chain._unmask(full & ~D), None, True))
    idx = {v: i for i, v in enumerate(chain.vertices)}
    free = 0
    for v in chain.vertices:
        if v not in chain.arrows:
            free |= 1 << idx[v]
    for A in _subsets(free):
        out.append(IndependenceStatement((chain._unmask(A),), chain._unmask(full & ~A), None,
                                         versus_factor=True))
    return _sorted(out)


def statements_for(graph: ProfileGraph, prop: str, max_vertices: int = DEFAULT_MAX_VERTICES):
    prop = prop.lower()
    if prop == "pmp":
        return pairwise_statements(graph)
    if prop == "lmp":
        return local_statements(graph)
    if prop == "csmp":
        return csmp_statements(graph, max_vertices)
    if prop == "gmp":
        return gmp_statements(graph, max_vertices)
    raise InputError(f"unknown Markov property {prop!r}")


def implied_by_separation(stmt: IndependenceStatement, graph: ProfileGraph) -> bool:
    """Re-check a profile statement by x-separation at each of its levels."""
    if stmt.profiles is None or stmt.versus_factor:
        raise InputError("only profile statements can be checked against a profile graph")
    full = (1 << graph.p) - 1
    C = graph._mask(stmt.given)
    for x in stmt.profiles:
        adj = graph.level_adjacency(x)
        for part in stmt.pairwise():
            if not separated(adj, graph._mask(part.A), graph._mask(part.B), C, full):
                return False
    return True
