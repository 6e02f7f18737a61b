import time
from itertools import combinations

import networkx as nx
import pytest
from hypothesis import given, settings

from profilegm import CapacityError, InputError, ProfileGraph, induced_multiple_graphs
from profilegm.markov import (
    ChainGraph,
    IndependenceStatement,
    check_gmp_csmp_equivalence,
    csmp_statements,
    gmp_statements,
    implied_by_separation,
    induced_chain_class,
    is_markov_compatible,
    local_statements,
    lwf_gmp_statements,
    pairwise_statements,
    statements_for,
    verify_thm1,
)

from test_graph import small_graphs

S = IndependenceStatement.make


def chain(vs, edges, arrows):
    return ChainGraph(tuple(vs), frozenset(frozenset(e) for e in edges), frozenset(arrows))


def test_statement_canonical_form():
    assert S({"b"}, {"a"}, {"c"}, {"0"}) == S({"a"}, {"b"}, {"c"}, {"0"})
    with pytest.raises(InputError):
        S({"a"}, {"a", "b"}, set(), {"0"})
    with pytest.raises(InputError):
        S({"a"}, set(), set(), {"0"})
    with pytest.raises(InputError):
        S({"a"}, {"b"}, set(), set())


def test_pairwise_examples(g1):
    st = pairwise_statements(g1)
    assert S({"b"}, {"c"}, {"a", "d"}, {"1", "2"}) in st
    assert S({"a"}, {"d"}, {"b", "c"}, {"0", "1", "2"}) in st
    # the full edge b-d gives nothing
    assert not any({"b", "d"} <= (s.A | s.B) for s in st)
    assert len(st) == 5


def test_local_examples(g1):
    st = local_statements(g1)
    assert S({"a"}, {"b", "d"}, {"c"}, {"2"}) in st
    assert S({"d"}, {"a", "c"}, {"b"}, {"0"}) in st
    # b is a 0-neighbour of every other vertex
    assert not any(s.A == {"b"} and s.profiles == {"0"} for s in st)


def test_csmp_examples(g1):
    st = csmp_statements(g1)
    assert S({"a", "c"}, {"b"}, {"d"}, {"2"}) in st
    assert S({"a", "c"}, {"b", "d"}, set(), {"2"}) in st
    # V is 1-connected so no statement with empty conditioning set at level 1
    assert not any(s.profiles == {"1"} and not s.given for s in st)


def test_gmp_examples(g1):
    st = gmp_statements(g1)
    assert S({"c"}, {"b", "d"}, {"a"}, {"1"}) in st
    assert S({"a"}, {"b"}, set(), {"2"}) in st
    complete = ProfileGraph(("0",), "abc", {(a, b): set() for a, b in combinations("abc", 2)})
    assert gmp_statements(complete) == []


def test_statements_for_dispatch(g1):
    assert statements_for(g1, "PMP") == pairwise_statements(g1)
    with pytest.raises(InputError):
        statements_for(g1, "amp")


def test_enumeration_cap():
    g = ProfileGraph(("0",), [f"v{i}" for i in range(13)], {})
    with pytest.raises(CapacityError):
        csmp_statements(g)
    with pytest.raises(CapacityError):
        gmp_statements(g)


# ------------------------------------------------- independent oracles (networkx)

def _nx_gmp(g):
    """All (A, B, C, x) by brute force over disjoint triples and graph search."""
    out = set()
    V = g.vertices
    for x in g.levels:
        h = nx.Graph()
        h.add_nodes_from(V)
        h.add_edges_from((a, b) for a, b in g.pairs() if x not in g.label(a, b))
        for mask in range(3 ** len(V)):
            role, m = [], mask
            for _ in V:
                role.append(m % 3)
                m //= 3
            C = {v for v, r in zip(V, role) if r == 2}
            rest = [v for v, r in zip(V, role) if r != 2]
            sub = h.subgraph(rest)
            comp_of = {}
            for k, comp in enumerate(nx.connected_components(sub)):
                for v in comp:
                    comp_of[v] = k
            A = {v for v, r in zip(V, role) if r == 0}
            # B ranges over subsets of the vertices outside A and C
            others = [v for v in rest if v not in A]
            for r in range(1, len(others) + 1):
                for B in combinations(others, r):
                    if not A or not B:
                        continue
                    if {comp_of[a] for a in A} & {comp_of[b] for b in B}:
                        continue
                    out.add(S(A, set(B), C, {x}))
    return out


def _nx_csmp(g):
    out = set()
    V = g.vertices
    for x in g.levels:
        h = nx.Graph()
        h.add_nodes_from(V)
        h.add_edges_from((a, b) for a, b in g.pairs() if x not in g.label(a, b))
        for r in range(2, len(V) + 1):
            for D in combinations(V, r):
                comps = [frozenset(c) for c in nx.connected_components(h.subgraph(D))]
                if len(comps) > 1:
                    out.add(IndependenceStatement(tuple(comps), frozenset(V) - set(D), {x}))
    return out


@settings(max_examples=40, deadline=None)
@given(small_graphs(max_p=4, max_q=2))
def test_gmp_matches_bruteforce(g):
    assert set(gmp_statements(g)) == _nx_gmp(g)


@settings(max_examples=40, deadline=None)
@given(small_graphs(max_p=4, max_q=3))
def test_csmp_matches_bruteforce(g):
    assert set(csmp_statements(g)) == _nx_csmp(g)


@settings(max_examples=60, deadline=None)
@given(small_graphs(max_p=4, max_q=3))
def test_pairwise_and_local_implied_by_gmp(g):
    for s in pairwise_statements(g) + local_statements(g):
        assert implied_by_separation(s, g)
        gmp = set(gmp_statements(g))
        for t in s.per_level():
            assert t in gmp


@settings(max_examples=60, deadline=None)
@given(small_graphs(max_p=4, max_q=3))
def test_gmp_per_level_is_ordinary_separation(g):
    mg = induced_multiple_graphs(g)
    for x in g.levels:
        h = nx.Graph()
        h.add_nodes_from(g.vertices)
        h.add_edges_from(tuple(e) for e in mg.edges[x])
        for s in gmp_statements(g):
            if s.profiles == {x}:
                sub = h.subgraph(set(g.vertices) - s.C)
                assert not any(nx.has_path(sub, a, b) for a in s.A for b in s.B)


@settings(max_examples=60, deadline=None)
@given(small_graphs(max_p=5, max_q=3))
def test_equivalence_on_random_graphs(g):
    ok, cert = check_gmp_csmp_equivalence(g)
    assert ok, cert


def test_equivalence_trivial_cases(g1):
    assert check_gmp_csmp_equivalence(g1) == (True, None)
    assert check_gmp_csmp_equivalence(ProfileGraph(("0",), "a", {}))[0]


def test_verify_thm1_exhaustive_p4_q2():
    t = time.perf_counter()
    res = verify_thm1(4, 2)
    assert res["graphs"] == 4 ** 6
    assert res["equivalent"] and res["failures"] == []
    assert time.perf_counter() - t < 60


def test_verify_thm1_small_and_capped():
    for p, q in [(1, 1), (2, 2), (3, 1), (3, 3)]:
        res = verify_thm1(p, q)
        assert res["equivalent"]
        assert res["graphs"] == (2 ** q) ** (p * (p - 1) // 2)
    with pytest.raises(CapacityError):
        verify_thm1(6, 3)


# ------------------------------------------------------------- chain graphs

def test_three_vertex_chain_class(gex):
    cc = induced_chain_class(gex)
    assert cc.min.arrows == {"a", "b"}
    assert cc.max.arrows == {"a", "b", "c"}
    assert cc.min.undirected == {frozenset("ab"), frozenset("ac")}


def test_three_vertex_compatibility(gex):
    skel = ["ab", "ac"]
    C = chain("abc", skel, "c")
    C1 = chain("abc", skel, "bc")
    C2 = chain("abc", skel, "abc")
    C3 = chain("abc", skel, "ab")
    assert [is_markov_compatible(c, gex)[0] for c in (C, C1, C2, C3)] == [False, False, True, True]
    assert not is_markov_compatible(chain("abc", skel, "b"), gex)[0]
    ok, why = is_markov_compatible(C, gex)
    assert "a" in why and "no arrow" in why


def test_compatibility_skeleton_mismatch(gex):
    ok, why = is_markov_compatible(chain("abc", ["ab", "bc"], "abc"), gex)
    assert not ok and "b-c" in why
    with pytest.raises(InputError):
        is_markov_compatible(chain("abcd", ["ab", "ac"], "abc"), gex)


def test_square_vertex_unique_chain(g3):
    cc = induced_chain_class(g3)
    assert cc.unique.arrows == {"a", "b", "c"}
    st = lwf_gmp_statements(cc.unique)
    assert IndependenceStatement(({"d"},), {"a", "b", "c"}, versus_factor=True) in st
    assert IndependenceStatement(({"a", "c"}, {"d"}), {"b"}, None, True) in st


def test_no_dotted_edges_min_has_no_arrows():
    g = ProfileGraph(("0", "1"), "abc", {("a", "b"): set(), ("b", "c"): set()})
    assert induced_chain_class(g).min.arrows == frozenset()


def test_complete_chain_has_no_statements():
    c = chain("abc", ["ab", "ac", "bc"], "abc")
    assert lwf_gmp_statements(c) == []


def test_chain_graph_validation():
    with pytest.raises(InputError):
        chain("ab", ["ac"], "")
    with pytest.raises(InputError):
        chain("ab", ["ab"], "z")


@settings(max_examples=60, deadline=None)
@given(small_graphs(max_p=5, max_q=3))
def test_chain_class_properties(g):
    cc = induced_chain_class(g)
    assert is_markov_compatible(cc.max, g)[0]
    assert is_markov_compatible(cc.min, g)[0]
    for v in cc.min.arrows:
        dropped = ChainGraph(cc.min.vertices, cc.min.undirected, cc.min.arrows - {v})
        assert not is_markov_compatible(dropped, g)[0]


@settings(max_examples=40, deadline=None)
@given(small_graphs(max_p=4, max_q=3))
def test_max_chain_statements_hold_at_every_level(g):
    # every statement of the max element holds in each induced graph
    levels = frozenset(g.levels)
    for s in lwf_gmp_statements(induced_chain_class(g).max):
        assert not s.versus_factor
        t = IndependenceStatement(s.blocks, s.given, levels)
        assert implied_by_separation(t, g)
