"""Gaussian profile model: parameters, datasets, posterior summaries, graph extraction."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import InputError
from .graph import CIRCLE, SQUARE, ProfileGraph

log = logging.getLogger(__name__)


def _check_pd(m, what="matrix"):
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InputError(f"{what} must be square, got shape {m.shape}")
    if not np.allclose(m, m.T, rtol=0, atol=1e-10 * max(1.0, np.abs(m).max())):
        raise InputError(f"{what} is not symmetric")
    try:
        np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        raise InputError(f"{what} is not positive definite") from None
    return m


def zeta_from(beta_x, omega_x):
    """``zeta_x = Omega_x beta_x``."""
    omega_x = _check_pd(omega_x, "omega")
    beta_x = np.asarray(beta_x, dtype=float)
    if beta_x.shape != (omega_x.shape[0],):
        raise InputError("beta and omega dimensions differ")
    return omega_x @ beta_x


class GaussianProfileParams:
    """alpha (p,), beta (q, p), omega (q, p, p); sigma and zeta are derived.

    ``zeta`` may be given explicitly when the parameters were built from it,
    so that structural zeros in zeta survive exactly (see :meth:`from_zeta`).
    """

    def __init__(self, levels, alpha, beta, omega, zeta=None):
        self.levels = tuple(str(x) for x in levels)
        self.alpha = np.asarray(alpha, dtype=float)
        self.beta = np.asarray(beta, dtype=float)
        self.omega = np.asarray(omega, dtype=float)
        q, p = len(self.levels), self.alpha.shape[0] if self.alpha.ndim == 1 else -1
        if self.alpha.ndim != 1:
            raise InputError("alpha must be a vector")
        if self.beta.shape != (q, p):
            raise InputError(f"beta must have shape {(q, p)}, got {self.beta.shape}")
        if self.omega.shape != (q, p, p):
            raise InputError(f"omega must have shape {(q, p, p)}, got {self.omega.shape}")
        for k, x in enumerate(self.levels):
            _check_pd(self.omega[k], f"omega at level {x!r}")
        self._zeta = None
        if zeta is not None:
            zeta = np.asarray(zeta, dtype=float)
            if zeta.shape != (q, p):
                raise InputError(f"zeta must have shape {(q, p)}")
            self._zeta = zeta

    @classmethod
    def from_zeta(cls, levels, alpha, zeta, omega):
        omega = np.asarray(omega, dtype=float)
        zeta = np.asarray(zeta, dtype=float)
        beta = np.stack([np.linalg.solve(o, z) for o, z in zip(omega, zeta)])
        return cls(levels, alpha, beta, omega, zeta=zeta)

    @property
    def p(self) -> int:
        return self.alpha.shape[0]

    @property
    def q(self) -> int:
        return len(self.levels)

    @property
    def sigma(self):
        return np.linalg.inv(self.omega)

    @property
    def zeta(self):
        if self._zeta is not None:
            return self._zeta
        return np.einsum("xab,xb->xa", self.omega, self.beta)

    def level_index(self, x) -> int:
        try:
            return self.levels.index(str(x))
        except ValueError:
            raise InputError(f"unknown level {x!r}") from None

    def __eq__(self, other):
        if not isinstance(other, GaussianProfileParams):
            return NotImplemented
        return (self.levels == other.levels and np.array_equal(self.alpha, other.alpha)
                and np.array_equal(self.beta, other.beta) and np.array_equal(self.omega, other.omega)
                and (self._zeta is None) == (other._zeta is None)
                and (self._zeta is None or np.array_equal(self._zeta, other._zeta)))


@dataclass(frozen=True)
class Violation:
    kind: str  # "square" (zeta nonzero) or "edge" (omega nonzero)
    where: tuple
    level: str
    value: float


def conforms_to_graph(params: GaussianProfileParams, graph: ProfileGraph, tol: float = 1e-8):
    """Check zeta zeros at square vertices and omega zeros at every level in a label.

    Parameters are matched to the graph by position (vertex order) and by
    level name.  Returns ``(ok, violations)``.
    """
    if tol < 0:
        raise InputError("tol must be nonnegative")
    if params.p != graph.p:
        raise InputError(f"params have {params.p} vertices, graph has {graph.p}")
    if set(params.levels) != set(graph.levels):
        raise InputError("params and graph have different levels")
    idx = {v: i for i, v in enumerate(graph.vertices)}
    zeta = params.zeta
    out = []
    for v in graph.vertices:
        if graph.kind(v) == SQUARE:
            for x in graph.levels:
                val = zeta[params.level_index(x), idx[v]]
                if abs(val) > tol:
                    out.append(Violation("square", (v,), x, float(val)))
    for a, b in graph.pairs():
        for x in graph.levels:
            if x in graph.label(a, b):
                val = params.omega[params.level_index(x), idx[a], idx[b]]
                if abs(val) > tol:
                    out.append(Violation("edge", (a, b), x, float(val)))
    return not out, out


class ProfileDataset:
    """Observations of ``Y_V(x)``: one ``(n_x, p)`` array per level."""

    def __init__(self, levels, data, columns=None):
        self.levels = tuple(str(x) for x in levels)
        if not self.levels:
            raise InputError("dataset needs at least one level")
        arrays = {}
        p = None
        for x in self.levels:
            if x not in data:
                raise InputError(f"no data for level {x!r}")
            a = np.asarray(data[x], dtype=float)
            if a.ndim != 2 or a.shape[0] < 1:
                raise InputError(f"level {x!r} needs a nonempty 2-d array")
            if p is None:
                p = a.shape[1]
            elif a.shape[1] != p:
                raise InputError(f"level {x!r} has {a.shape[1]} columns, expected {p}")
            if not np.all(np.isfinite(a)):
                raise InputError(f"level {x!r} contains non-finite values")
            arrays[x] = a
        self.data = arrays
        self.columns = tuple(columns) if columns is not None else tuple(f"y{i + 1}" for i in range(p))
        if len(self.columns) != p:
            raise InputError("column names do not match the data width")

    @property
    def p(self) -> int:
        return len(self.columns)

    @property
    def q(self) -> int:
        return len(self.levels)

    def n(self, x) -> int:
        return self.data[str(x)].shape[0]

    def pooled_mean(self):
        return np.concatenate([self.data[x] for x in self.levels]).mean(axis=0)

    def shifted(self, shift) -> "ProfileDataset":
        return ProfileDataset(self.levels, {x: self.data[x] - shift for x in self.levels}, self.columns)

    def take(self, rows: dict) -> "ProfileDataset":
        """Row subset per level; ``rows[x]`` is an index array."""
        return ProfileDataset(self.levels, {x: self.data[x][rows[x]] for x in self.levels}, self.columns)

    def __eq__(self, other):
        if not isinstance(other, ProfileDataset):
            return NotImplemented
        return (self.levels == other.levels and self.columns == other.columns
                and all(np.array_equal(self.data[x], other.data[x]) for x in self.levels))


@dataclass
class PosteriorSummaries:
    """E-step output.  ``gamma`` is a symmetric (p, p) array and ``r`` a (q, p, p) array; diagonals are unused."""

    vertices: tuple
    levels: tuple
    theta: np.ndarray
    gamma: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        self.vertices = tuple(self.vertices)
        self.levels = tuple(self.levels)
        p, q = len(self.vertices), len(self.levels)
        self.theta = np.asarray(self.theta, dtype=float)
        self.gamma = np.asarray(self.gamma, dtype=float)
        self.r = np.asarray(self.r, dtype=float)
        if self.theta.shape != (p,) or self.gamma.shape != (p, p) or self.r.shape != (q, p, p):
            raise InputError("posterior summary shapes do not match vertices and levels")
        for name in ("theta", "gamma", "r"):
            a = getattr(self, name)
            if np.any(~np.isfinite(a)) or a.min(initial=0) < 0 or a.max(initial=0) > 1:
                raise InputError(f"{name} entries must lie in [0, 1]")

    def __eq__(self, other):
        if not isinstance(other, PosteriorSummaries):
            return NotImplemented
        return (self.vertices == other.vertices and self.levels == other.levels
                and np.array_equal(self.theta, other.theta) and np.array_equal(self.gamma, other.gamma)
                and np.array_equal(self.r, other.r))


def extract_profile_graph(post: PosteriorSummaries, edge_cut: float = 0.5, vertex_cut: float = 0.5,
                          report: list | None = None) -> ProfileGraph:
    """Threshold posterior summaries into a profile graph.

    Pair ``{i, j}`` gets ``Z = {x : r*_ij,x <= edge_cut}``.  A vertex is a
    square when ``theta*_i <= vertex_cut`` and it has no dotted edge;
    otherwise it is a circle.  Demoted vertices are appended to ``report``.
    """
    for c in (edge_cut, vertex_cut):
        if not 0 < c < 1:
            raise InputError("cuts must lie in (0, 1)")
    V, X = post.vertices, post.levels
    full = frozenset(X)
    edges = {}
    dotted = set()
    for i, j in combinations(range(len(V)), 2):
        z = frozenset(x for k, x in enumerate(X) if post.r[k, i, j] <= edge_cut)
        if z != full:
            edges[(V[i], V[j])] = z
        if z and z != full:
            dotted.update((V[i], V[j]))
    kinds = {}
    for i, v in enumerate(V):
        if post.theta[i] <= vertex_cut:
            if v in dotted:
                log.info("vertex %s demoted to circle: it has a dotted edge", v)
                if report is not None:
                    report.append(v)
                kinds[v] = CIRCLE
            else:
                kinds[v] = SQUARE
        else:
            kinds[v] = CIRCLE
    return ProfileGraph(X, V, edges, kinds)
