"""Epsilon-insensitive support vector regression with an RBF kernel.

The dual is solved by SMO over the 2n-variable form

    min_b  1/2 b' Qb + p'b   s.t.  y'b = 0,  0 <= b <= C

with ``b = [alpha; alpha*]``, ``y = [+1; -1]``, ``p = [eps - z; eps + z]`` and
``Q_st = y_s y_t K(x_s, x_t)``. Working pairs are chosen by maximal violation
for the first index and second-order gain for the second.
"""
from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

TAU = 1e-12


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T
    return np.exp(-gamma * np.maximum(sq, 0.0))


class _KernelRows:
    """LRU cache of kernel rows ``K(X, X[u])``."""

    def __init__(self, X: np.ndarray, gamma: float, max_bytes: int = 256 * 2**20):
        self.X = X
        self.gamma = gamma
        self.sq = (X * X).sum(1)
        self.cap = max(2, max_bytes // (8 * X.shape[0]))
        self.rows: OrderedDict[int, np.ndarray] = OrderedDict()

    def __call__(self, u: int) -> np.ndarray:
        row = self.rows.get(u)
        if row is not None:
            self.rows.move_to_end(u)
            return row
        d = self.sq + self.sq[u] - 2.0 * (self.X @ self.X[u])
        row = np.exp(-self.gamma * np.maximum(d, 0.0))
        self.rows[u] = row
        if len(self.rows) > self.cap:
            self.rows.popitem(last=False)
        return row


@dataclass(frozen=True, eq=False)
class SvrSolution:
    support: np.ndarray  # support vectors, standardized feature space
    coef: np.ndarray  # alpha - alpha*
    bias: float  # f(x) = sum coef K(sv, x) + bias
    gamma: float
    iterations: int
    converged: bool

    def decision(self, X: np.ndarray, chunk: int = 2048) -> np.ndarray:
        out = np.empty(X.shape[0])
        for s in range(0, X.shape[0], chunk):
            out[s:s + chunk] = rbf_kernel(X[s:s + chunk], self.support, self.gamma) @ self.coef + self.bias
        return out


def _violation(G: np.ndarray, beta: np.ndarray, y: np.ndarray, C: float):
    yG = -y * G
    up = ((y > 0) & (beta < C)) | ((y < 0) & (beta > 0))
    low = ((y > 0) & (beta > 0)) | ((y < 0) & (beta < C))
    return yG, up, low


def _bias(G, beta, y, C, up, low) -> float:
    yG = y * G
    free = (beta > 0) & (beta < C)
    if free.any():
        rho = float(yG[free].mean())
    else:
        ub = np.min(yG[up]) if up.any() else np.inf
        lb = np.max(yG[low]) if low.any() else -np.inf
        rho = 0.5 * (ub + lb)
    return -rho


def solve_svr(X: np.ndarray, z: np.ndarray, C: float = 1.0, epsilon: float = 0.1, gamma: float = 1.0,
              tol: float = 1e-3, max_iter: int = 1_000_000) -> tuple[SvrSolution, np.ndarray]:
    """Return the solution and the full dual vector ``[alpha; alpha*]``."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    n = X.shape[0]
    y = np.concatenate([np.ones(n), -np.ones(n)])
    G = np.concatenate([epsilon - z, epsilon + z])
    beta = np.zeros(2 * n)
    rows = _KernelRows(X, gamma)
    converged = False
    it = 0
    while it < max_iter:
        yG, up, low = _violation(G, beta, y, C)
        if not up.any() or not low.any():
            converged = True
            break
        cand = np.where(up, yG, -np.inf)
        i = int(np.argmax(cand))
        g_max = cand[i]
        g_min = np.min(np.where(low, yG, np.inf))
        if g_max - g_min < tol:
            converged = True
            break
        ki = rows(i % n)
        k2 = np.concatenate([ki, ki])  # K(x_i, x_t) for every dual index t
        # second-order choice of j among violating lower-set indices
        b = g_max - yG
        a = 2.0 - 2.0 * k2  # K_ii + K_tt - 2 K_it with K(x, x) = 1
        a = np.where(a > 0, a, TAU)
        score = np.where(low & (yG < g_max), -(b * b) / a, np.inf)
        j = int(np.argmin(score))
        it += 1

        yi, yj = y[i], y[j]
        kij = k2[j]
        quad = max(2.0 - 2.0 * kij, TAU)
        old_i, old_j = beta[i], beta[j]
        if yi != yj:
            delta = (-G[i] - G[j]) / quad
            diff = old_i - old_j
            bi, bj = old_i + delta, old_j + delta
            if diff > 0:
                if bj < 0:
                    bj, bi = 0.0, diff
            elif bi < 0:
                bi, bj = 0.0, -diff
            if diff > 0:
                if bi > C:
                    bi, bj = C, C - diff
            elif bj > C:
                bj, bi = C, C + diff
        else:
            delta = (G[i] - G[j]) / quad
            total = old_i + old_j
            bi, bj = old_i - delta, old_j + delta
            if total > C:
                if bi > C:
                    bi, bj = C, total - C
            elif bj < 0:
                bj, bi = 0.0, total
            if total > C:
                if bj > C:
                    bj, bi = C, total - C
            elif bi < 0:
                bi, bj = 0.0, total
        beta[i], beta[j] = bi, bj
        di, dj = bi - old_i, bj - old_j
        kj = rows(j % n)
        kj2 = np.concatenate([kj, kj])
        # G_t += Q_ti di + Q_tj dj, Q_ts = y_t y_s K_ts
        G += y * (yi * di * k2 + yj * dj * kj2)

    yG, up, low = _violation(G, beta, y, C)
    bias = _bias(G, beta, y, C, up, low)
    coef = beta[:n] - beta[n:]
    sv = coef != 0
    sol = SvrSolution(X[sv].copy(), coef[sv].copy(), bias, gamma, it, converged)
    return sol, beta


def kkt_violation(X: np.ndarray, z: np.ndarray, beta: np.ndarray, C: float, epsilon: float, gamma: float) -> float:
    """Maximal KKT violation ``m(b) - M(b)`` recomputed from scratch."""
    n = X.shape[0]
    K = rbf_kernel(X, X, gamma)
    y = np.concatenate([np.ones(n), -np.ones(n)])
    coef = beta[:n] - beta[n:]
    Kc = K @ coef
    G = np.concatenate([epsilon - z + Kc, epsilon + z - Kc])
    yG, up, low = _violation(G, beta, y, C)
    if not up.any() or not low.any():
        return 0.0
    return float(np.max(yG[up]) - np.min(yG[low]))
