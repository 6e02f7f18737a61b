import pytest

from profilegm import ProfileGraph

LEVELS3 = ("0", "1", "2")


def labelled_graph():
    return ProfileGraph(LEVELS3, "abcd", {
        ("a", "b"): {"2"}, ("b", "c"): {"1", "2"}, ("a", "c"): {"0"}, ("b", "d"): set(),
    })


def labelled_graph_with_square():
    return labelled_graph().with_kinds({"d": "square"})


def three_vertex():
    """a-b dotted at level 0, a-c full, b-c missing."""
    return ProfileGraph(("0", "1"), "abc", {("a", "b"): {"0"}, ("a", "c"): set()})


@pytest.fixture
def g1():
    return labelled_graph()


@pytest.fixture
def g3():
    return labelled_graph_with_square()


@pytest.fixture
def gex():
    return three_vertex()


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: s[5:]):
            terminalreporter.write_line(line)
