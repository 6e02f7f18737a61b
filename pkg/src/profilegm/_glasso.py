"""Weighted graphical lasso by primal block coordinate descent.

Solves ``max logdet(O) - tr(S O) - sum_{i != j} rho_ij |o_ij|`` over positive
definite ``O``, one column at a time.  For column ``j`` with ``A = O11^-1``
the off-diagonal block solves the lasso

    min_b  s22 b'Ab + 2 s12'b + 2 sum_k rho_k |b_k|

and the diagonal entry is ``1/s22 + b'Ab``.  Each block update is exact, so
the objective never decreases and the iterate stays positive definite.
``W = O^-1`` is carried along with rank-one updates and refreshed every sweep.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def _soft(z, t):
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


@njit(cache=True)
def weighted_glasso(S, rho, omega0, tol, max_sweeps, inner_tol, max_inner):
    p = S.shape[0]
    omega = omega0.copy()
    W = np.linalg.inv(omega)
    m = p - 1
    others = np.empty(m, dtype=np.int64)
    A = np.empty((m, m))
    beta = np.empty(m)
    Ab = np.empty(m)
    sweeps = 0
    converged = False
    scale = 1.0
    for i in range(p):
        scale = max(scale, abs(omega[i, i]))
    for sweep in range(max_sweeps):
        sweeps = sweep + 1
        delta = 0.0
        for j in range(p):
            k = 0
            for i in range(p):
                if i != j:
                    others[k] = i
                    k += 1
            s22 = S[j, j]
            w22 = W[j, j]
            for a in range(m):
                ia = others[a]
                beta[a] = omega[ia, j]
                for b in range(m):
                    ib = others[b]
                    A[a, b] = W[ia, ib] - W[ia, j] * W[ib, j] / w22
            for a in range(m):
                acc = 0.0
                for b in range(m):
                    acc += A[a, b] * beta[b]
                Ab[a] = acc
            for it in range(max_inner):
                dmax = 0.0
                for a in range(m):
                    akk = A[a, a]
                    old = beta[a]
                    z = s22 * (Ab[a] - akk * old) + S[others[a], j]
                    new = -_soft(z, rho[others[a], j]) / (s22 * akk)
                    d = new - old
                    if d != 0.0:
                        for b in range(m):
                            Ab[b] += d * A[b, a]
                        beta[a] = new
                        if abs(d) > dmax:
                            dmax = abs(d)
                if dmax <= inner_tol:
                    break
            quad = 0.0
            for a in range(m):
                quad += beta[a] * Ab[a]
            o22 = 1.0 / s22 + quad
            delta = max(delta, abs(o22 - omega[j, j]))
            omega[j, j] = o22
            for a in range(m):
                ia = others[a]
                delta = max(delta, abs(beta[a] - omega[ia, j]))
                omega[ia, j] = beta[a]
                omega[j, ia] = beta[a]
            W[j, j] = s22
            for a in range(m):
                ia = others[a]
                W[ia, j] = -s22 * Ab[a]
                W[j, ia] = W[ia, j]
                for b in range(m):
                    ib = others[b]
                    W[ia, ib] = A[a, b] + s22 * Ab[a] * Ab[b]
        W = np.linalg.inv(omega)
        W = 0.5 * (W + W.T)
        if delta <= tol * scale:
            converged = True
            break
    return omega, W, sweeps, converged
