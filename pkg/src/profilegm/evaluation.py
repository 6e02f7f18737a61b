"""Edge-recovery metrics, AUC and the subsampling robustness harness."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import mannwhitneyu

from .errors import InputError
from .gaussian import ProfileDataset, extract_profile_graph
from .graph import MultipleGraphs, induced_multiple_graphs

UNDEFINED = float("nan")


@dataclass(frozen=True)
class Counts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def __add__(self, other: "Counts") -> "Counts":
        return Counts(self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn)


@dataclass(frozen=True)
class EdgeConfusion:
    per_level: dict
    pooled: Counts


def _aligned(truth: MultipleGraphs, estimate: MultipleGraphs):
    if tuple(truth.vertices) != tuple(estimate.vertices) or tuple(truth.levels) != tuple(estimate.levels):
        raise InputError("truth and estimate differ in vertices or levels")
    return truth.stacked(), estimate.stacked()


def confusion(truth: MultipleGraphs, estimate: MultipleGraphs) -> EdgeConfusion:
    t, e = _aligned(truth, estimate)
    iu = np.triu_indices(len(truth.vertices), 1)
    per = {}
    for k, x in enumerate(truth.levels):
        a, b = t[k][iu], e[k][iu]
        per[x] = Counts(int(np.sum(a & b)), int(np.sum(~a & b)), int(np.sum(~a & ~b)), int(np.sum(a & ~b)))
    pooled = Counts()
    for x in truth.levels:
        pooled = pooled + per[x]
    return EdgeConfusion(per, pooled)


def _ratio(a, b):
    return a / b if b else UNDEFINED


def metrics(conf) -> dict:
    """Accuracy, sensitivity, specificity and balanced accuracy; ``nan`` marks 0/0."""
    c = conf.pooled if isinstance(conf, EdgeConfusion) else conf
    if c.total == 0:
        raise InputError("no pairs to score")
    sens = _ratio(c.tp, c.tp + c.fn)
    spec = _ratio(c.tn, c.tn + c.fp)
    bal = (sens + spec) / 2 if not (np.isnan(sens) or np.isnan(spec)) else UNDEFINED
    return {"accuracy": (c.tp + c.tn) / c.total, "sensitivity": sens, "specificity": spec,
            "balanced_accuracy": bal}


def cross_tab(first: MultipleGraphs, second: MultipleGraphs) -> dict:
    """Per-level 2x2 agreement table ``[[both, first only], [second only, neither]]``."""
    a, b = _aligned(first, second)
    iu = np.triu_indices(len(first.vertices), 1)
    out = {}
    for k, x in enumerate(first.levels):
        u, v = a[k][iu], b[k][iu]
        out[x] = [[int(np.sum(u & v)), int(np.sum(u & ~v))], [int(np.sum(~u & v)), int(np.sum(~u & ~v))]]
    return out


def auc(scores, truth: MultipleGraphs) -> float:
    """Mann-Whitney AUC of per-pair, per-level scores, pooled over levels.

    ``scores`` is a ``(q, p, p)`` array aligned with ``truth``; only the upper
    triangle is read.  Ties count one half.
    """
    s = np.asarray(scores, dtype=float)
    t = truth.stacked()
    if s.shape != t.shape:
        raise InputError(f"scores have shape {s.shape}, truth {t.shape}")
    iu = np.triu_indices(t.shape[1], 1)
    lab = t[:, iu[0], iu[1]].ravel()
    sc = s[:, iu[0], iu[1]].ravel()
    pos, neg = sc[lab], sc[~lab]
    if pos.size == 0 or neg.size == 0:
        return UNDEFINED
    u = mannwhitneyu(pos, neg, alternative="two-sided", method="asymptotic").statistic
    return float(u / (pos.size * neg.size))


def estimated_graphs(state, edge_cut: float = 0.5, vertex_cut: float = 0.5) -> MultipleGraphs:
    return induced_multiple_graphs(extract_profile_graph(state.summaries, edge_cut, vertex_cut))


# --------------------------------------------------------------- robustness

@dataclass
class RobustnessSummary:
    levels: tuple
    per_rep: np.ndarray  # (reps, q) balanced accuracy per level
    overall: np.ndarray  # (reps,) pooled balanced accuracy
    table: dict = field(default_factory=dict)

    def __post_init__(self):
        def mean_se(v):
            v = np.asarray(v, dtype=float)
            se = float(np.std(v, ddof=1) / np.sqrt(v.size)) if v.size > 1 else 0.0
            return float(np.mean(v)), se

        self.table = {x: mean_se(self.per_rep[:, k]) for k, x in enumerate(self.levels)}
        self.table["overall"] = mean_se(self.overall)

    def format(self) -> str:
        lines = [f"{'Level':<10}{'Mean':>10}{'SE':>10}"]
        for key, (m, se) in self.table.items():
            name = "Overall" if key == "overall" else str(key)
            lines.append(f"{name:<10}{m:>10.4f}{se:>10.4f}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {str(k): {"mean": m, "se": se} for k, (m, se) in self.table.items()}


def robustness_harness(data: ProfileDataset, fit_fn, fraction: float, reps: int, seed: int,
                       edge_cut: float = 0.5, vertex_cut: float = 0.5) -> RobustnessSummary:
    """Refit on random subsamples and score each refit against the full-data graphs.

    ``fit_fn(dataset)`` returns an EM state.  Each repetition drops
    ``floor(fraction * n_x)`` rows per level using the stream ``[seed, rep]``.
    """
    if not 0 <= fraction < 1:
        raise InputError("fraction must lie in [0, 1)")
    if reps < 1:
        raise InputError("reps must be positive")
    ref = estimated_graphs(fit_fn(data), edge_cut, vertex_cut)
    per_rep = np.empty((reps, data.q))
    overall = np.empty(reps)
    for rep in range(reps):
        rng = np.random.default_rng([seed, rep])
        rows = {}
        for x in data.levels:
            n = data.n(x)
            keep = n - int(np.floor(fraction * n))
            if keep < 1:
                raise InputError(f"no rows left at level {x!r}")
            rows[x] = np.sort(rng.choice(n, size=keep, replace=False))
        est = estimated_graphs(fit_fn(data.take(rows)), edge_cut, vertex_cut)
        conf = confusion(ref, est)
        per_rep[rep] = [_balanced_or_agreement(conf.per_level[x]) for x in data.levels]
        overall[rep] = _balanced_or_agreement(conf.pooled)
    return RobustnessSummary(tuple(data.levels), per_rep, overall)


def _balanced_or_agreement(c: Counts) -> float:
    """Balanced accuracy; when the reference has one class only, the rate for that class."""
    m = metrics(c)
    if not np.isnan(m["balanced_accuracy"]):
        return m["balanced_accuracy"]
    return m["specificity"] if np.isnan(m["sensitivity"]) else m["sensitivity"]
