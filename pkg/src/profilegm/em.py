"""Spike-and-slab EM for the Gaussian profile model.

Priors: ``omega_ij,x | r ~ Laplace(nu_r)``, ``beta_ix | theta ~ N(0, lambda_theta)``,
``omega_ii,x ~ Exp(tau)``, ``gamma_ij ~ Bern(p1)``, ``theta_i ~ Bern(p2)``.  Given
``gamma_ij = 1`` the profile indicators ``r_ij,.`` are independent
``Bern(p3)`` when ``theta_i = theta_j = 1`` and a single shared ``Bern(p4)``
draw otherwise; ``gamma_ij = 0`` forces them all to zero.

Each E-step summary is the exact posterior given its local evidence:
``theta*_i`` uses ``(beta_i, omega_i.)``, while ``gamma*_ij`` and
``r*_ij,x`` use ``(beta_i, beta_j, omega_ij.)``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np
from scipy.special import expit, logsumexp
from scipy.stats import norm

from ._glasso import weighted_glasso
from .errors import CapacityError, InputError, NumericalError
from .gaussian import GaussianProfileParams, PosteriorSummaries, ProfileDataset

log = logging.getLogger(__name__)

Q_MAX = 12


@dataclass(frozen=True)
class Hyperparameters:
    p1: float = 0.5
    p2: float = 0.5
    p3: float = 0.5
    p4: float = 0.5
    nu0: float = 0.05
    nu1: float = 1.0
    lambda0: float = 0.05
    lambda1: float = 10.0
    tau: float = 0.1
    B: float = 1e6

    def __post_init__(self):
        for name in ("p1", "p2", "p3", "p4"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise InputError(f"{name} must lie in (0, 1), got {v}")
        if not self.nu1 > self.nu0 > 0:
            raise InputError("need nu1 > nu0 > 0")
        if not self.lambda1 > self.lambda0 > 0:
            raise InputError("need lambda1 > lambda0 > 0")
        if not self.tau > 0 or not self.B > 0:
            raise InputError("tau and B must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "Hyperparameters":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise InputError(f"unknown hyperparameters: {sorted(extra)}")
        return cls(**{k: float(v) for k, v in d.items()})


@dataclass(frozen=True)
class FitConfig:
    max_iter: int = 1000
    tol: float = 1e-6
    glasso_tol: float = 1e-10
    glasso_max_sweeps: int = 5000
    q_max: int = Q_MAX
    standardize: bool = False

    def __post_init__(self):
        if self.max_iter < 1 or self.tol <= 0 or self.glasso_tol <= 0:
            raise InputError("max_iter must be >= 1 and tolerances positive")


@dataclass
class EmState:
    params: GaussianProfileParams
    summaries: PosteriorSummaries
    iterations: int = 0
    objective: list = field(default_factory=list)
    delta_omega: list = field(default_factory=list)
    delta_beta: list = field(default_factory=list)
    m_step_gain: list = field(default_factory=list)
    converged: bool = False
    scale: np.ndarray | None = None

    def working_params(self) -> GaussianProfileParams:
        """Parameters on the scale the EM ran on (per-variable unit variance when standardised)."""
        return _rescale(self.params, self.scale, inverse=True)


# ---------------------------------------------------------------- densities

def spike_slab_density_omega(w, nu, log: bool = False):
    """Laplace density ``exp(-|w|/nu) / (2 nu)``."""
    if nu <= 0:
        raise InputError("nu must be positive")
    # closed form: scipy's logpdf underflows to -inf for tiny scales
    with np.errstate(over="ignore"):  # overflow surfaces as -inf and is reported by the caller
        lp = -np.abs(w) / nu - math.log(2 * nu)
    return lp if log else np.exp(lp)


def spike_slab_density_beta(b, lam, log: bool = False):
    """Zero-mean Normal density with variance ``lam``."""
    if lam <= 0:
        raise InputError("lambda must be positive")
    s = math.sqrt(lam)
    return norm.logpdf(b, scale=s) if log else norm.pdf(b, scale=s)


def h1(w, hyper: Hyperparameters):
    """``P(r = 1 | gamma = 1, theta_i = theta_j = 1, w)``."""
    l1 = spike_slab_density_omega(w, hyper.nu1, log=True)
    l0 = spike_slab_density_omega(w, hyper.nu0, log=True)
    return expit(math.log(hyper.p3) - math.log1p(-hyper.p3) + l1 - l0)


def h0(w, hyper: Hyperparameters):
    """``P(r = 1 | gamma = 1, theta_i theta_j = 0, w)`` for a single profile."""
    l1 = spike_slab_density_omega(w, hyper.nu1, log=True)
    l0 = spike_slab_density_omega(w, hyper.nu0, log=True)
    return expit(math.log(hyper.p4) - math.log1p(-hyper.p4) + l1 - l0)


# ------------------------------------------------------------------ E-step

def binary_patterns(q: int):
    """All ``2**q`` 0/1 sequences of length ``q`` as rows."""
    return (np.arange(1 << q)[:, None] >> np.arange(q)) & 1


def _pair_evidence(omega, hyper, q_max):
    """Log evidence of ``omega_ij.`` under the independent, tied and zero branches."""
    q, p, _ = omega.shape
    if q > q_max:
        raise CapacityError(f"q = {q} exceeds q_max = {q_max} for the exact 2^q enumeration")
    iu, ju = np.triu_indices(p, 1)
    om = omega[:, iu, ju]
    l1 = spike_slab_density_omega(om, hyper.nu1, log=True)
    l0 = spike_slab_density_omega(om, hyper.nu0, log=True)
    bad = ~(np.isfinite(l1) & np.isfinite(l0))
    if bad.any():
        x, k = np.argwhere(bad)[0]
        raise NumericalError(f"non-finite omega density at pair ({iu[k]}, {ju[k]}), level index {x}")
    pat = binary_patterns(q)
    a1 = math.log(hyper.p3) + l1
    a0 = math.log1p(-hyper.p3) + l0
    L_ind = logsumexp(pat @ a1 + (1 - pat) @ a0, axis=0)
    s1, s0 = l1.sum(axis=0), l0.sum(axis=0)
    L_tied = np.logaddexp(math.log(hyper.p4) + s1, math.log1p(-hyper.p4) + s0)
    return iu, ju, l1, l0, s1, s0, L_ind, L_tied, s0


def e_step(params: GaussianProfileParams, hyper: Hyperparameters, vertices=None,
           q_max: int = Q_MAX) -> PosteriorSummaries:
    p, q = params.p, params.q
    vertices = tuple(vertices) if vertices is not None else tuple(f"y{i + 1}" for i in range(p))
    iu, ju, l1, l0, s1, s0, L_ind, L_tied, L_zero = _pair_evidence(params.omega, hyper, q_max)

    b1 = spike_slab_density_beta(params.beta, hyper.lambda1, log=True).sum(axis=0)
    b0 = spike_slab_density_beta(params.beta, hyper.lambda0, log=True).sum(axis=0)
    if not (np.all(np.isfinite(b1)) and np.all(np.isfinite(b0))):
        raise NumericalError("non-finite beta density")

    lp1, lq1 = math.log(hyper.p1), math.log1p(-hyper.p1)
    lp2, lq2 = math.log(hyper.p2), math.log1p(-hyper.p2)

    # joint (gamma, theta_i, theta_j) given beta_i, beta_j, omega_ij.
    t11 = 2 * lp2 + b1[iu] + b1[ju]
    t10 = lp2 + lq2 + b1[iu] + b0[ju]
    t01 = lq2 + lp2 + b0[iu] + b1[ju]
    t00 = 2 * lq2 + b0[iu] + b0[ju]
    g1_11 = lp1 + t11 + L_ind
    g1_rest = lp1 + logsumexp(np.stack([t10, t01, t00]), axis=0) + L_tied
    g0 = lq1 + logsumexp(np.stack([t11, t10, t01, t00]), axis=0) + L_zero
    lz = logsumexp(np.stack([g1_11, g1_rest, g0]), axis=0)
    gam = np.exp(np.logaddexp(g1_11, g1_rest) - lz)
    w11 = np.exp(g1_11 - lz)
    wrest = np.exp(g1_rest - lz)

    hx = expit(math.log(hyper.p3) - math.log1p(-hyper.p3) + l1 - l0)
    tied = expit(math.log(hyper.p4) - math.log1p(-hyper.p4) + s1 - s0)
    rv = np.clip(w11 * hx + wrest * tied, 0.0, 1.0)

    # theta_i given beta_i, omega_i.; the partner theta_j sits at its prior
    m1 = np.logaddexp(lp2 + np.logaddexp(lp1 + L_ind, lq1 + L_zero),
                      lq2 + np.logaddexp(lp1 + L_tied, lq1 + L_zero))
    m0 = np.logaddexp(lp1 + L_tied, lq1 + L_zero)
    d = m1 - m0
    acc = np.zeros(p)
    np.add.at(acc, iu, d)
    np.add.at(acc, ju, d)
    theta = expit(lp2 - lq2 + b1 - b0 + acc)

    G = np.zeros((p, p))
    G[iu, ju] = G[ju, iu] = gam
    R = np.zeros((q, p, p))
    R[:, iu, ju] = rv
    R[:, ju, iu] = rv
    return PosteriorSummaries(vertices, params.levels, theta, G, R)


# ------------------------------------------------------------------ M-step

def beta_penalty(theta_star, hyper: Hyperparameters):
    t = np.asarray(theta_star, dtype=float)
    return t / hyper.lambda1 + (1 - t) / hyper.lambda0


def omega_penalty(r_star_x, hyper: Hyperparameters):
    """Per-pair Laplace weights ``r/nu1 + (1-r)/nu0`` with a zero diagonal."""
    r = np.asarray(r_star_x, dtype=float)
    w = r / hyper.nu1 + (1 - r) / hyper.nu0
    np.fill_diagonal(w, 0.0)
    return w


def m_step_beta(Y, omega_x, theta_star, hyper: Hyperparameters):
    """``(n Omega + D)^-1 Omega Y'1`` for centred rows ``Y`` of one level."""
    Y = np.asarray(Y, dtype=float)
    n = Y.shape[0]
    D = np.diag(beta_penalty(theta_star, hyper))
    try:
        return np.linalg.solve(n * omega_x + D, omega_x @ Y.sum(axis=0))
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"singular beta system: {e}") from None


def scatter(Y, beta_x):
    R = np.asarray(Y, dtype=float) - beta_x
    return R.T @ R / R.shape[0]


def omega_objective(omega, S, n, weights, tau):
    """``n/2 logdet - n/2 tr(S O) - tau sum o_ii - sum_{i<j} w_ij |o_ij|``."""
    try:
        c = np.linalg.cholesky(omega)
    except np.linalg.LinAlgError:
        raise NumericalError("omega is not positive definite") from None
    logdet = 2 * np.log(np.diag(c)).sum()
    off = np.triu(np.abs(omega) * weights, 1).sum()
    return 0.5 * n * logdet - 0.5 * n * np.sum(S * omega) - tau * np.trace(omega) - off


def m_step_omega(S, n, r_star_x, hyper: Hyperparameters, init=None, tol: float = 1e-10,
                 max_sweeps: int = 5000, weights=None, tau=None):
    """Maximise the weighted-lasso log-det objective of one level.

    Equivalent to a graphical lasso on ``S + (2 tau / n) I`` with penalties
    ``w_ij / n``.  ``weights`` overrides the weights derived from ``r_star_x``
    and ``tau`` the diagonal rate (zero gives the unpenalised diagonal).
    """
    S = np.asarray(S, dtype=float)
    p = S.shape[0]
    if weights is None:
        weights = omega_penalty(r_star_x, hyper)
    weights = np.asarray(weights, dtype=float)
    tau = hyper.tau if tau is None else float(tau)
    if tau < 0:
        raise InputError("tau must be nonnegative")
    S2 = S + (2 * tau / n) * np.eye(p)
    if np.any(np.diag(S2) <= 0):
        raise NumericalError("scatter has a nonpositive diagonal and tau = 0")
    if init is None:
        init = np.diag(1.0 / np.diag(S2))
    omega, _, sweeps, ok = weighted_glasso(S2, np.ascontiguousarray(weights / n),
                                           np.ascontiguousarray(init, dtype=float),
                                           tol, max_sweeps, tol * 1e-2, 100000)
    if not ok:
        log.warning("omega solver stopped after %d sweeps without meeting tol %.1e", sweeps, tol)
    omega = 0.5 * (omega + omega.T)
    evals, evecs = np.linalg.eigh(omega)
    if evals[-1] > hyper.B or evals[0] <= 0:
        if evals[0] <= 0:
            log.warning("omega lost definiteness (min eigenvalue %.3e); repairing", evals[0])
        evals = np.clip(evals, 1e-10 * max(1.0, evals[-1]), hyper.B)
        omega = (evecs * evals) @ evecs.T
        omega = 0.5 * (omega + omega.T)
    try:
        np.linalg.cholesky(omega)
    except np.linalg.LinAlgError:
        raise NumericalError(f"omega not positive definite after repair; eigenvalues {evals[:3]}") from None
    return omega


# --------------------------------------------------------------- objective

def q_terms(params: GaussianProfileParams, centred: ProfileDataset, post: PosteriorSummaries,
            hyper: Hyperparameters) -> dict:
    """Pieces of the expected complete-data log posterior (constants dropped)."""
    data = beta_pen = diag_pen = omega_pen = 0.0
    d = beta_penalty(post.theta, hyper)
    for k, x in enumerate(params.levels):
        om = params.omega[k]
        try:
            c = np.linalg.cholesky(om)
        except np.linalg.LinAlgError:
            raise NumericalError(f"omega at level {x!r} is not positive definite") from None
        Y = centred.data[x]
        R = Y - params.beta[k]
        data += Y.shape[0] * np.log(np.diag(c)).sum() - 0.5 * np.sum((R @ om) * R)
        beta_pen -= 0.5 * np.sum(params.beta[k] ** 2 * d)
        diag_pen -= hyper.tau * np.trace(om)
        omega_pen -= np.triu(np.abs(om) * omega_penalty(post.r[k], hyper), 1).sum()
    return {"data": data, "beta": beta_pen, "diag": diag_pen, "omega": omega_pen}


def log_q_objective(state: EmState, data: ProfileDataset, hyper: Hyperparameters) -> float:
    """Q at the state's parameters and summaries, on the scale the fit ran on."""
    centred = data.shifted(state.params.alpha)
    if state.scale is not None:
        centred = ProfileDataset(centred.levels, {x: centred.data[x] / state.scale for x in centred.levels},
                                 centred.columns)
    return float(sum(q_terms(state.working_params(), centred, state.summaries, hyper).values()))


def _rescale(params: GaussianProfileParams, scale, inverse: bool = False) -> GaussianProfileParams:
    """Map working-scale parameters to the data scale (or back with ``inverse``)."""
    if scale is None:
        return params
    f = 1.0 / scale if inverse else scale
    omega = params.omega / np.outer(f, f)
    return GaussianProfileParams(params.levels, params.alpha, params.beta * f, 0.5 * (omega + omega.transpose(0, 2, 1)))


# --------------------------------------------------------------------- fit

def initial_params(centred: ProfileDataset, alpha):
    betas, omegas = [], []
    p = centred.p
    for x in centred.levels:
        Y = centred.data[x]
        b = Y.mean(axis=0)
        betas.append(b)
        omegas.append(np.linalg.inv(scatter(Y, b) + 0.1 * np.eye(p)))
    omegas = [0.5 * (o + o.T) for o in omegas]
    return GaussianProfileParams(centred.levels, alpha, np.stack(betas), np.stack(omegas))


def fit(data: ProfileDataset, hyper: Hyperparameters | None = None, config: FitConfig | None = None,
        init: GaussianProfileParams | None = None) -> EmState:
    """Run EM to convergence of the relative change in Q."""
    hyper = hyper or Hyperparameters()
    config = config or FitConfig()
    if data.q > config.q_max:
        raise CapacityError(f"q = {data.q} exceeds q_max = {config.q_max}")
    alpha = data.pooled_mean()
    centred = data.shifted(alpha)
    scale = None
    if config.standardize:
        scale = np.concatenate([centred.data[x] for x in data.levels]).std(axis=0)
        scale[scale <= 0] = 1.0
        centred = ProfileDataset(data.levels, {x: centred.data[x] / scale for x in data.levels}, data.columns)
    if init is None:
        params = initial_params(centred, alpha)
    else:
        if init.levels != data.levels or init.p != data.p:
            raise InputError("initial parameters do not match the dataset")
        params = _rescale(GaussianProfileParams(init.levels, alpha, init.beta, init.omega), scale, inverse=True)
    post = e_step(params, hyper, data.columns, config.q_max)
    state = EmState(params, post, scale=scale)
    prev = float(sum(q_terms(params, centred, post, hyper).values()))
    state.objective.append(prev)
    for it in range(1, config.max_iter + 1):
        betas, omegas = [], []
        for k, x in enumerate(data.levels):
            Y = centred.data[x]
            try:
                b = m_step_beta(Y, params.omega[k], post.theta, hyper)
                o = m_step_omega(scatter(Y, b), Y.shape[0], post.r[k], hyper, init=params.omega[k],
                                 tol=config.glasso_tol, max_sweeps=config.glasso_max_sweeps)
            except NumericalError as e:
                raise NumericalError(f"iteration {it}, level {x!r}: {e}") from None
            betas.append(b)
            omegas.append(o)
        new = GaussianProfileParams(data.levels, alpha, np.stack(betas), np.stack(omegas))
        state.delta_omega.append(float(np.abs(new.omega - params.omega).max()))
        state.delta_beta.append(float(np.abs(new.beta - params.beta).max()))
        # gain of the M-step at fixed summaries; EM guarantees it is >= 0
        state.m_step_gain.append(float(sum(q_terms(new, centred, post, hyper).values())) - prev)
        params = new
        post = e_step(params, hyper, data.columns, config.q_max)
        cur = float(sum(q_terms(params, centred, post, hyper).values()))
        state.objective.append(cur)
        state.params, state.summaries, state.iterations = _rescale(params, scale), post, it
        if abs(cur - prev) <= config.tol * max(1.0, abs(prev)):
            state.converged = True
            break
        prev = cur
    state.params = _rescale(params, scale)
    return state
