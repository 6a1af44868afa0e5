"""Numba-compiled variants of the hot evaluation kernels.

Signatures mirror accel._numpy exactly; selection happens in accel.__init__.
"""

import math

import numpy as np
from numba import njit

LN2 = math.log(2.0)


@njit(cache=True)
def sr_mmse_from_F(F, p, sigma2):
    K, N_R = F.shape
    total = 0.0
    for k in range(K):
        M = sigma2 * np.eye(N_R).astype(np.complex128)
        for m in range(K):
            if m != k:
                M += p[m] * np.outer(F[m], np.conj(F[m]))
        x = np.linalg.solve(M, np.ascontiguousarray(F[k]))
        q = np.real(np.vdot(F[k], x))
        total += math.log(1.0 + p[k] * q) / LN2
    return total


@njit(cache=True)
def score_candidates(A, cands, p, sigma2):
    n_cand = cands.shape[0]
    K, N_R, N = A.shape
    vals = np.empty(n_cand)
    F = np.empty((K, N_R), dtype=np.complex128)
    for i in range(n_cand):
        for k in range(K):
            F[k] = A[k] @ cands[i]
        vals[i] = sr_mmse_from_F(F, p, sigma2)
    return vals


@njit(cache=True)
def pair_gains(F, C):
    K = C.shape[0]
    Km = F.shape[0]
    out = np.empty((K, Km))
    for k in range(K):
        for m in range(Km):
            out[k, m] = abs(np.vdot(C[k], F[m])) ** 2
    return out
