from itertools import combinations, product

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from profilegm import (
    InputError,
    MultipleGraphs,
    ProfileGraph,
    graph_from_multiple,
    induced_multiple_graphs,
    neighbours_x,
    to_dot,
    validate,
    x_connected_components,
    x_path_exists,
    x_separates,
)

from conftest import labelled_graph


def fs(*xs):
    return frozenset(xs)


def test_labelled_graph_is_valid(g1):
    assert validate(g1) == []
    assert g1.is_missing("a", "d") and g1.is_missing("c", "d")
    assert g1.is_full("b", "d")
    assert g1.is_dotted("a", "b") and g1.label("c", "b") == fs("1", "2")


def test_label_outside_levels_is_reported():
    g = ProfileGraph(("0", "1", "2"), "abcd", {("a", "b"): {"5"}})
    assert any("label not subset of state space" in m for m in validate(g))


def test_square_on_dotted_edge_is_reported(g1):
    g = g1.with_kinds({"a": "square"})
    assert any("square vertex incident to dotted edge" in m for m in validate(g))


def test_square_away_from_dotted_edges_is_fine(g3):
    assert validate(g3) == []


def test_duplicate_vertices_reported():
    assert validate(ProfileGraph(("0",), ["a", "a"], {}))


def test_neighbours(g1):
    assert neighbours_x(g1, "b", "0") == fs("a", "c", "d")
    assert neighbours_x(g1, "a", "2") == fs("c")
    assert neighbours_x(g1, "d", "1") == fs("b")
    g = ProfileGraph(("0", "1"), "ab", {("a", "b"): {"0", "1"}})
    assert neighbours_x(g, "a", "0") == frozenset()


def test_neighbours_bad_input(g1):
    with pytest.raises(InputError):
        neighbours_x(g1, "z", "0")
    with pytest.raises(InputError):
        neighbours_x(g1, "a", "7")


def test_paths(g1):
    assert x_path_exists(g1, "a", "b", "1")
    assert not x_path_exists(g1, "a", "b", "2")
    assert x_path_exists(g1, "b", "d", "2")
    assert len(x_connected_components(g1, g1.vertices, "1")) == 1


def test_components(g1):
    assert set(x_connected_components(g1, g1.vertices, "2")) == {fs("a", "c"), fs("b", "d")}
    assert set(x_connected_components(g1, "abc", "2")) == {fs("a", "c"), fs("b")}
    assert x_connected_components(g1, "a", "0") == [fs("a")]
    with pytest.raises(InputError):
        x_connected_components(g1, [], "0")


def test_components_stay_inside_subset(g1):
    # a and d are linked only through b at level 0
    assert set(x_connected_components(g1, "acd", "0")) == {fs("a"), fs("c"), fs("d")}


def test_separation(g1):
    assert x_separates(g1, {"c"}, {"d"}, {"a"}, "1")
    assert not x_separates(g1, {"c"}, {"d"}, {"a"}, "0")
    assert x_separates(g1, {"a"}, {"b"}, set(), "2")
    with pytest.raises(InputError):
        x_separates(g1, {"a"}, {"a", "b"}, set(), "0")


def test_induced_graphs(g1):
    mg = induced_multiple_graphs(g1)
    e = lambda *ps: frozenset(frozenset(p) for p in ps)
    assert mg.edges["0"] == e("ab", "bc", "bd")
    assert mg.edges["1"] == e("ab", "ac", "bd")
    assert mg.edges["2"] == e("ac", "bd")
    assert graph_from_multiple(mg) == g1


def test_extreme_labels():
    levels = ("0", "1")
    empty = ProfileGraph(levels, "abc", {})
    full = ProfileGraph(levels, "abc", {(a, b): set() for a, b in combinations("abc", 2)})
    assert all(not induced_multiple_graphs(empty).edges[x] for x in levels)
    assert all(len(induced_multiple_graphs(full).edges[x]) == 3 for x in levels)


def test_dot_inventory(g1):
    dot = to_dot(g1)
    assert dot.count("style=dashed") == 3
    assert dot.count(" -- ") == 4
    assert 'label="1,2"' in dot
    assert "shape=box" not in dot
    assert "shape=box" in to_dot(g1.with_kinds({"d": "square"}))


# --------------------------------------------------- property checks vs networkx

@st.composite
def small_graphs(draw, max_p=5, max_q=3):
    p = draw(st.integers(1, max_p))
    q = draw(st.integers(1, max_q))
    levels = tuple(str(k) for k in range(q))
    verts = tuple("abcdefgh"[:p])
    edges = {}
    for a, b in combinations(verts, 2):
        mask = draw(st.integers(0, (1 << q) - 1))
        z = {levels[k] for k in range(q) if mask >> k & 1}
        if len(z) < q:
            edges[(a, b)] = z
    return ProfileGraph(levels, verts, edges)


def _nx_level(g, x):
    h = nx.Graph()
    h.add_nodes_from(g.vertices)
    h.add_edges_from((a, b) for a, b in g.pairs() if x not in g.label(a, b))
    return h


def _subsets(vs):
    for r in range(len(vs) + 1):
        yield from combinations(vs, r)


@settings(max_examples=60, deadline=None)
@given(small_graphs())
def test_separation_matches_networkx(g):
    for x in g.levels:
        h = _nx_level(g, x)
        for a, b in combinations(g.vertices, 2):
            assert x_path_exists(g, a, b, x) == nx.has_path(h, a, b)
            for C in _subsets([v for v in g.vertices if v not in (a, b)]):
                sub = h.subgraph(set(g.vertices) - set(C))
                assert x_separates(g, {a}, {b}, set(C), x) == (not nx.has_path(sub, a, b))


@settings(max_examples=60, deadline=None)
@given(small_graphs())
def test_components_match_networkx(g):
    for x in g.levels:
        h = _nx_level(g, x)
        for D in _subsets(g.vertices):
            if not D:
                continue
            ours = set(x_connected_components(g, D, x))
            theirs = {frozenset(c) for c in nx.connected_components(h.subgraph(D))}
            assert ours == theirs


@settings(max_examples=60, deadline=None)
@given(small_graphs())
def test_label_trichotomy_and_induced_rules(g):
    mg = induced_multiple_graphs(g)
    for a, b in g.pairs():
        assert [g.is_missing(a, b), g.is_dotted(a, b), g.is_full(a, b)].count(True) == 1
        present = [mg.has_edge(a, b, x) for x in g.levels]
        if g.is_missing(a, b):
            assert not any(present)
        if g.is_full(a, b):
            assert all(present)
    assert graph_from_multiple(mg) == g


@settings(max_examples=40, deadline=None)
@given(small_graphs(max_p=4))
def test_separation_via_components(g):
    # C separates A from B iff no component of V \ C meets both
    V = g.vertices
    for x in g.levels:
        for C in _subsets(V):
            rest = [v for v in V if v not in C]
            if len(rest) < 2:
                continue
            comps = x_connected_components(g, rest, x)
            for a, b in combinations(rest, 2):
                joint = any(a in k and b in k for k in comps)
                assert x_separates(g, {a}, {b}, set(C), x) == (not joint)


@settings(max_examples=40, deadline=None)
@given(small_graphs(max_p=4))
def test_separation_monotone_in_c(g):
    V = g.vertices
    for x in g.levels:
        for a, b in combinations(V, 2):
            others = [v for v in V if v not in (a, b)]
            for C in _subsets(others):
                if x_separates(g, {a}, {b}, set(C), x):
                    for v in others:
                        assert x_separates(g, {a}, {b}, set(C) | {v}, x)


def test_multiple_graphs_rejects_bad_edge():
    with pytest.raises(InputError):
        MultipleGraphs(("a", "b"), ("0",), {"0": frozenset({frozenset({"a", "z"})})})
