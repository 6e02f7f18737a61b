"""Synthetic profile datasets with known structure.

Randomness comes from numpy's PCG64 (``numpy.random.default_rng``).  The
structure is drawn from the stream seeded with ``[seed, 0]`` and the rows of
level ``k`` from ``[seed, 1, k]``, so every level can be produced
independently of the others.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GenerationError, InputError
from .gaussian import GaussianProfileParams, ProfileDataset
from .graph import SQUARE, ProfileGraph

PD_FLOOR = 0.05
PD_SHIFT = 0.1
MAX_REPAIRS = 20
EXTRA_VALUE = 0.4
N_AFFECTED = 4


@dataclass(frozen=True)
class ScenarioSpec:
    scenario: int = 1
    p: int = 20
    q: int = 4
    s: float = 0.0
    n: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.scenario not in (1, 2, 3, 4):
            raise InputError("scenario must be 1, 2, 3 or 4")
        if self.p < 3 or self.q < 2 or self.n < 1 or self.s < 0 or self.s > 1:
            raise InputError("need p >= 3, q >= 2, n >= 1 and 0 <= s <= 1")
        if self.seed < 0:
            raise InputError("seed must be nonnegative")


@dataclass
class GroundTruth:
    params: GaussianProfileParams
    graph: ProfileGraph


def baseline_precision(p: int):
    """Diagonal ``1..p``, first off-diagonal 0.5, second off-diagonal 0.4."""
    if p < 3:
        raise InputError("p must be at least 3")
    om = np.diag(np.arange(1, p + 1, dtype=float))
    i = np.arange(p - 1)
    om[i, i + 1] = om[i + 1, i] = 0.5
    i = np.arange(p - 2)
    om[i, i + 2] = om[i + 2, i] = 0.4
    if np.linalg.eigvalsh(om)[0] <= 0:
        raise GenerationError("baseline precision is not positive definite")
    return om


def scenario_groups(scenario: int, q: int) -> list[list[int]]:
    """Levels sharing one structure; the group holding level 0 keeps the baseline."""
    if scenario == 1:
        return [[k] for k in range(q)]
    if scenario == 2:
        h = (q + 1) // 2
        return [list(range(h)), list(range(h, q))]
    if scenario == 3:
        return [list(range(q - 1)), [q - 1]]
    return [list(range(q))]


def repair_pd(om):
    om = om.copy()
    for _ in range(MAX_REPAIRS):
        lmin = np.linalg.eigvalsh(om)[0]
        if lmin > PD_FLOOR:
            return om
        om[np.diag_indices_from(om)] += abs(lmin) + PD_SHIFT
    raise GenerationError(f"could not restore positive definiteness (min eigenvalue {lmin:.3g})")


def derive_level_precisions(omega0, spec: ScenarioSpec, rng=None):
    """``(q, p, p)`` precisions following the scenario's sharing pattern.

    Non-baseline groups zero each nonzero off-diagonal entry of ``omega0``
    with probability 0.5.  Every group then switches on each zero pair with
    probability ``s`` (value 0.4 with a random sign) before it is copied to
    its levels, and the diagonal is loaded until positive definite.
    """
    omega0 = np.asarray(omega0, dtype=float)
    p = omega0.shape[0]
    if rng is None:
        rng = np.random.default_rng([spec.seed, 0])
    iu, ju = np.triu_indices(p, 1)
    out = np.empty((spec.q, p, p))
    for group in scenario_groups(spec.scenario, spec.q):
        om = omega0.copy()
        vals = om[iu, ju]
        if 0 not in group:
            drop = (vals != 0) & (rng.random(vals.size) < 0.5)
            vals = np.where(drop, 0.0, vals)
        if spec.s > 0:
            add = (vals == 0) & (rng.random(vals.size) < spec.s)
            signs = np.where(rng.random(vals.size) < 0.5, -1.0, 1.0)
            vals = np.where(add, EXTRA_VALUE * signs, vals)
        om[iu, ju] = vals
        om[ju, iu] = vals
        om = repair_pd(om)
        for k in group:
            out[k] = om
    return out


def truth_zeta(p: int, q: int):
    """Level 0 all zero; other levels one on the first four vertices."""
    if p < N_AFFECTED:
        raise InputError(f"p must be at least {N_AFFECTED}")
    z = np.zeros((q, p))
    z[1:, :N_AFFECTED] = 1.0
    return z


def level_names(q: int):
    return tuple(str(k) for k in range(q))


def vertex_names(p: int):
    return tuple(f"y{i + 1}" for i in range(p))


def truth_graph(omegas, zeta, vertices=None, levels=None) -> ProfileGraph:
    """Labels from the zero patterns; squares where zeta vanishes and no dotted edge meets the vertex."""
    q, p, _ = omegas.shape
    vertices = vertices or vertex_names(p)
    levels = levels or level_names(q)
    full = frozenset(levels)
    edges, dotted = {}, set()
    for i, j in zip(*np.triu_indices(p, 1)):
        z = frozenset(levels[k] for k in range(q) if omegas[k, i, j] == 0)
        if z != full:
            edges[(vertices[i], vertices[j])] = z
            if z:
                dotted.update((vertices[i], vertices[j]))
    kinds = {v: SQUARE for a, v in enumerate(vertices) if np.all(zeta[:, a] == 0) and v not in dotted}
    return ProfileGraph(levels, vertices, edges, kinds)


def sample_level(params: GaussianProfileParams, k: int, n: int, rng):
    sigma = np.linalg.inv(params.omega[k])
    sigma = 0.5 * (sigma + sigma.T)
    L = np.linalg.cholesky(sigma)
    z = rng.standard_normal((n, params.p))
    return params.alpha + params.beta[k] + z @ L.T


def generate(spec: ScenarioSpec):
    """Draw ``(dataset, truth)`` for one scenario."""
    omegas = derive_level_precisions(baseline_precision(spec.p), spec)
    zeta = truth_zeta(spec.p, spec.q)
    levels = level_names(spec.q)
    params = GaussianProfileParams.from_zeta(levels, np.zeros(spec.p), zeta, omegas)
    graph = truth_graph(omegas, zeta, vertex_names(spec.p), levels)
    data = {x: sample_level(params, k, spec.n, np.random.default_rng([spec.seed, 1, k]))
            for k, x in enumerate(levels)}
    return ProfileDataset(levels, data, vertex_names(spec.p)), GroundTruth(params, graph)
