"""Pure-numpy implementations of the hot evaluation kernels."""

import math

import numpy as np

LN2 = math.log(2.0)


def sr_mmse_from_F(F: np.ndarray, p: np.ndarray, sigma2: float) -> float:
    """MMSE-embedded sum rate (bits) from effective channels F[k] = A_k @ gamma."""
    K, N_R = F.shape
    total = 0.0
    eye = np.eye(N_R)
    for k in range(K):
        M = sigma2 * eye + 0j
        for m in range(K):
            if m != k:
                M = M + p[m] * np.outer(F[m], F[m].conj())
        q = np.real(F[k].conj() @ np.linalg.solve(M, F[k]))
        total += math.log1p(p[k] * q) / LN2
    return total


def score_candidates(A: np.ndarray, cands: np.ndarray, p: np.ndarray, sigma2: float) -> np.ndarray:
    """sr_mmse value of each candidate reflection vector; A is (K, N_R, N)."""
    vals = np.empty(cands.shape[0])
    for i in range(cands.shape[0]):
        F = A @ cands[i]
        vals[i] = sr_mmse_from_F(F, p, sigma2)
    return vals


def pair_gains(F: np.ndarray, C: np.ndarray) -> np.ndarray:
    """gains[k, m] = |c_k^H A_m gamma|^2 from effective channels F and filters C."""
    return np.abs(C.conj() @ F.T) ** 2
