"""Generic convex building blocks called once per sequential iteration.

Ball-constrained concave quadratic maximization (solved exactly through an
eigendecomposition and multiplier bisection), Dinkelbach fractional
programming, projected gradient ascent with Armijo backtracking (box and
PSD-cone feasible sets), Euclidean projection onto the PSD trace ball, and
Gaussian randomization for rank-one recovery.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import accel
from .scenario import ChannelSet


@dataclass
class SolverOptions:
    outer_tol: float = 1e-6
    outer_max_iter: int = 100
    inner_tol: float = 1e-9
    inner_max_iter: int = 400
    dinkelbach_tol: float = 1e-10
    dinkelbach_max_iter: int = 50
    randomization_count: int = 100
    armijo_c: float = 1e-4
    armijo_shrink: float = 0.5
    step_init: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if min(self.outer_tol, self.inner_tol, self.dinkelbach_tol) <= 0:
            raise ValueError("tolerances must be positive")
        if min(self.outer_max_iter, self.inner_max_iter, self.dinkelbach_max_iter) < 1:
            raise ValueError("iteration caps must be >= 1")
        if not (0 < self.armijo_c < 1 and 0 < self.armijo_shrink < 1):
            raise ValueError("Armijo constants must lie in (0, 1)")


@dataclass
class ConvergenceTrace:
    objective_per_iteration: list = field(default_factory=list)
    converged: bool = False

    @property
    def iterations_used(self) -> int:
        return max(len(self.objective_per_iteration) - 1, 0)

    def append(self, value: float):
        self.objective_per_iteration.append(float(value))


def max_linear_minus_quadratic_ball(b: np.ndarray, Q: np.ndarray, radius_sq: float,
                                    psd_tol: float = 1e-9) -> np.ndarray:
    """Global maximizer of Re(b^H g) - g^H Q g over ||g||^2 <= radius_sq.

    Trust-region-type structure: g(lam) = (Q + lam I)^-1 b / 2 with the KKT
    multiplier lam found by bisection; ||g(lam)|| is decreasing in lam.
    """
    if radius_sq <= 0:
        raise ValueError("radius_sq must be positive")
    b = np.asarray(b, dtype=complex)
    Q = np.asarray(Q, dtype=complex)
    Qh = 0.5 * (Q + Q.conj().T)
    w, V = np.linalg.eigh(Qh)
    scale = max(1.0, abs(w[-1]))
    if w[0] < -psd_tol * scale:
        raise ValueError(f"Q is not PSD (min eigenvalue {w[0]:.3e})")
    w = np.clip(w, 0.0, None)
    beta = V.conj().T @ b / 2.0
    bb = np.abs(beta) ** 2
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros_like(b)

    def norm_sq(lam):
        return float(np.sum(bb / (w + lam) ** 2))

    # interior solution if Q is PD and the unconstrained optimum fits the ball
    if w[0] > 0 and norm_sq(0.0) <= radius_sq:
        return V @ (beta / w)

    lo, hi = 0.0, bnorm / (2.0 * np.sqrt(radius_sq))
    for _ in range(200):
        lam = 0.5 * (lo + hi)
        if norm_sq(lam) > radius_sq:
            lo = lam
        else:
            hi = lam
        if hi - lo <= 1e-16 * max(1.0, hi):
            break
    lam = hi
    return V @ (beta / (w + lam))


def projected_ascent(f_and_grad, project, x0, options: SolverOptions):
    """Monotone projected gradient ascent with Armijo backtracking.

    Works on real vectors, complex vectors, or Hermitian matrices: gradients
    are real-packed so the ascent inner product is Re<g, dx>.
    """
    x = project(np.asarray(x0))
    f, g = f_and_grad(x)
    if not np.isfinite(f):
        raise ValueError("objective not finite at the start point")
    trace = ConvergenceTrace()
    trace.append(f)
    step = options.step_init
    for _ in range(options.inner_max_iter):
        moved = False
        while step > 1e-18:
            x_new = project(x + step * g)
            d = x_new - x
            slope = float(np.real(np.vdot(g, d)))
            if slope <= 0.0:
                break
            f_new, g_new = f_and_grad(x_new)
            if not np.isfinite(f_new):
                raise ValueError("objective became non-finite")
            if f_new >= f + options.armijo_c * slope:
                moved = True
                break
            step *= options.armijo_shrink
        if not moved:
            trace.converged = True
            break
        improvement = f_new - f
        x, f, g = x_new, f_new, g_new
        trace.append(f)
        step = min(step / options.armijo_shrink, 1e12)
        # projected-gradient stationarity at unit step
        if np.linalg.norm(project(x + g) - x) < options.inner_tol * (1.0 + np.linalg.norm(x)):
            trace.converged = True
            break
        if improvement <= options.inner_tol * max(1.0, abs(f)):
            trace.converged = True
            break
    return x, trace


def box_projected_ascent(f_and_grad, lower, upper, x0, options: SolverOptions):
    """Projected ascent over the box [lower, upper]."""
    lower = np.asarray(lower, float)
    upper = np.asarray(upper, float)

    def project(x):
        return np.clip(np.real(x), lower, upper)

    return projected_ascent(f_and_grad, project, np.asarray(x0, float), options)


def dinkelbach(numerator, denominator, concave_max_solver, x0,
               tol: float = 1e-10, max_iter: int = 50):
    """Maximize N(x)/D(x) (N concave, D affine positive) by Dinkelbach iterations.

    concave_max_solver(lam, x_warm) must return an (approximate, warm-started,
    monotone) maximizer of N(x) - lam D(x); warm starting makes the lambda
    sequence non-decreasing even with inexact inner solves.
    """
    x = np.asarray(x0, float)
    d = denominator(x)
    if d <= 0:
        raise ValueError("denominator must be positive on the feasible set")
    lam = numerator(x) / d
    trace = ConvergenceTrace()
    trace.append(lam)
    for _ in range(max_iter):
        x = concave_max_solver(lam, x)
        n, d = numerator(x), denominator(x)
        if d <= 0:
            raise ValueError("denominator must be positive on the feasible set")
        gap = n - lam * d
        lam = n / d
        trace.append(lam)
        if gap < tol * max(1.0, abs(n)):
            trace.converged = True
            break
    return x, lam, trace


def project_psd_trace_ball(X: np.ndarray, budget: float, herm_tol: float = 1e-9) -> np.ndarray:
    """Frobenius projection of a Hermitian matrix onto {X PSD, tr X <= budget}."""
    X = np.asarray(X)
    asym = np.linalg.norm(X - X.conj().T)
    if asym > herm_tol * max(1.0, np.linalg.norm(X)):
        raise ValueError(f"input is not Hermitian (asymmetry {asym:.3e})")
    w, V = np.linalg.eigh(0.5 * (X + X.conj().T))
    w = np.clip(w, 0.0, None)
    total = w.sum()
    if total > budget:
        # shift the positive part: w_i -> max(w_i - mu, 0) with sum = budget
        ws = np.sort(w)[::-1]
        css = np.cumsum(ws)
        mu = 0.0
        for j in range(len(ws)):
            mu = (css[j] - budget) / (j + 1)
            if j + 1 == len(ws) or ws[j + 1] <= mu:
                break
        w = np.clip(w - mu, 0.0, None)
    return (V * w) @ V.conj().T


def psd_projected_ascent(f_and_grad, budget, X0, options: SolverOptions,
                         project=None):
    """Projected ascent over {X PSD, tr X <= budget} (or a custom projection)."""
    if project is None:
        def project(X):
            return project_psd_trace_ball(X, budget)
    return projected_ascent(f_and_grad, project, X0, options)


def extract_rank_one(X: np.ndarray, channels: ChannelSet, p, budget: float,
                     randomization_count: int, seed: int,
                     rescale=None, project=None) -> np.ndarray:
    """Recover a feasible reflection vector from a relaxed PSD optimum.

    Exactly rank-one lifts are peeled directly; otherwise Gaussian
    randomization with covariance X is used and the candidate with the best
    MMSE-embedded sum rate wins (the scaled principal eigenvector is always
    candidate 0; ties break on the first index).
    """
    X = np.asarray(X)
    p = np.asarray(p, float)
    w, V = np.linalg.eigh(0.5 * (X + X.conj().T))
    w = np.clip(w, 0.0, None)
    principal = V[:, -1]
    if w[-1] == 0.0:
        return np.zeros(X.shape[0], dtype=complex)

    if rescale is None:
        def rescale(g):
            nrm = np.linalg.norm(g)
            return g * np.sqrt(budget) / nrm if nrm > 0 else g

    if project is None:
        def project(g):
            nrm2 = float(np.real(np.vdot(g, g)))
            return g * np.sqrt(budget / nrm2) if nrm2 > budget else g

    if len(w) == 1 or w[-2] < 1e-8 * w[-1]:
        # exact rank-one lift: peel it, restoring feasibility only if needed
        return project(principal * np.sqrt(w.sum()))

    rng = np.random.default_rng(seed)
    L = V * np.sqrt(w)
    cands = np.empty((randomization_count + 1, X.shape[0]), dtype=complex)
    cands[0] = rescale(principal * np.sqrt(w.sum()))
    for i in range(randomization_count):
        z = (rng.standard_normal(X.shape[0]) + 1j * rng.standard_normal(X.shape[0])) / np.sqrt(2)
        cands[i + 1] = rescale(L @ z)
    scores = accel.score_candidates(np.ascontiguousarray(channels.A),
                                    np.ascontiguousarray(cands), p,
                                    channels.noise_power_w)
    return cands[int(np.argmax(scores))]
