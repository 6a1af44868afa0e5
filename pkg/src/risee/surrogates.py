"""Concave / pseudo-concave lower bounds driving the sequential methods.

Every surrogate is tight at its expansion point and minorizes its true
objective; each returns a value together with an analytic gradient. Complex
gradients g are "real-packed": for a real objective f of a complex vector or
Hermitian matrix, f(z + dz) ~ f(z) + Re<g, dz>, so finite differences on
stacked real/imaginary coordinates reproduce Re(g) and Im(g) directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import accel
from .metrics import effective_channels
from .scenario import ChannelSet, PowerModel

LN2 = math.log(2.0)


def ratio_log_bound(x: float, y: float, x_bar: float, y_bar: float) -> float:
    """Concave-side lower bound on log2(1 + x/y), exact at (x, y) = (x_bar, y_bar).

    The correction coefficient carries a 1/ln2: the bound holds for the
    natural log and is rescaled to bits (without the rescaling it is not a
    lower bound).
    """
    if min(x, y, x_bar, y_bar) <= 0:
        raise ValueError("ratio_log_bound requires positive arguments")
    r = x_bar / y_bar
    corr = r * (2.0 * math.sqrt(x / x_bar) - (x + y) / (x_bar + y_bar) - 1.0)
    return math.log1p(r) / LN2 + corr / LN2


# ---------------------------------------------------------------------------
# Reflection-vector surrogate (sequential lower bound of the sum rate in gamma)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GammaSurrogateCoeffs:
    """Expansion-point constants of the per-user rate bound.

    With effective signal s_k(g) = c_k^H A_k g:
      A_[k]  log2(1 + SINR_k) at the expansion point
      B_[k]  SINR_k / ln2 (slope of the ratio bound, in bits)
      D_[k]  2 / |s_k(g_bar)|
      E_[k]  1 / (I_k + signal power) -- the tight constant; the looser 1/I_k
             variant is selectable for comparison
      F_[k]  E_[k] sigma^2 ||c_k||^2 + 1
      u[k]   linearization vector of |s_k| around g_bar
    """

    gamma_bar: np.ndarray
    A_: np.ndarray
    B_: np.ndarray
    D_: np.ndarray
    E_: np.ndarray
    F_: np.ndarray
    I_: np.ndarray
    s_bar_abs: np.ndarray
    u: np.ndarray          # (K, N)
    t: np.ndarray          # (K, K, N), t[k, m] = A_m^H c_k


def gamma_surrogate_coeffs(gamma_bar, p, C, channels: ChannelSet,
                           tight: bool = True) -> GammaSurrogateCoeffs:
    """Build the expansion-point constants at gamma_bar for fixed (p, C)."""
    gamma_bar = np.asarray(gamma_bar)
    p = np.asarray(p, float)
    K = channels.K
    s2 = channels.noise_power_w
    # t[k, m] = A_m^H c_k
    t = np.einsum("min,ki->kmn", np.conj(channels.A), C)
    s = np.einsum("kmn,n->km", np.conj(t), gamma_bar)   # s[k, m] = c_k^H A_m g_bar
    gains = np.abs(s) ** 2
    norms = np.sum(np.abs(C) ** 2, axis=1)

    s_kk = np.array([s[k, k] for k in range(K)])
    s_abs = np.abs(s_kk)
    if np.any(s_abs == 0.0):
        raise ValueError("degenerate expansion point: |c_k^H A_k gamma_bar| = 0")

    I = s2 * norms + np.array([gains[k] @ p - p[k] * gains[k, k] for k in range(K)])
    x_bar = p * np.diagonal(gains)
    A_ = np.log1p(x_bar / I) / LN2
    B_ = (x_bar / I) / LN2
    D_ = 2.0 / s_abs
    E_ = 1.0 / (I + x_bar) if tight else 1.0 / I
    F_ = E_ * s2 * norms + 1.0
    u = (s_kk / s_abs)[:, None] * np.array([t[k, k] for k in range(K)])
    return GammaSurrogateCoeffs(gamma_bar=gamma_bar, A_=A_, B_=B_, D_=D_, E_=E_, F_=F_,
                                I_=I, s_bar_abs=s_abs, u=u, t=t)


def gamma_quadratic_model(coeffs: GammaSurrogateCoeffs, p):
    """Rewrite the surrogate as const + Re(b^H g) - g^H Q g with Q PSD."""
    p = np.asarray(p, float)
    K, _, N = coeffs.t.shape
    b = np.einsum("k,ki->i", coeffs.B_ * coeffs.D_, coeffs.u)
    w = coeffs.B_[:, None] * coeffs.E_[:, None] * p[None, :]       # (K, K)
    Q = np.einsum("km,kmi,kmj->ij", w, coeffs.t, np.conj(coeffs.t))
    lin_at_bar = np.real(np.einsum("ki,i->k", np.conj(coeffs.u), coeffs.gamma_bar))
    const = float(np.sum(coeffs.A_ + coeffs.B_ * (coeffs.D_ * (coeffs.s_bar_abs - lin_at_bar)
                                                  - coeffs.F_)))
    return const, b, Q


def gamma_surrogate(gamma, coeffs: GammaSurrogateCoeffs, p):
    """Surrogate sum rate at gamma (bits/s/Hz) and its real-packed gradient."""
    const, b, Q = gamma_quadratic_model(coeffs, p)
    gamma = np.asarray(gamma)
    value = const + float(np.real(np.vdot(b, gamma))) - float(np.real(np.vdot(gamma, Q @ gamma)))
    grad = b - 2.0 * (Q @ gamma)
    return value, grad


# ---------------------------------------------------------------------------
# Power surrogate for the filter-based method (concave-over-affine GEE bound)
# ---------------------------------------------------------------------------

def _power_gee_tables(gamma, C, channels: ChannelSet):
    F = effective_channels(channels, gamma)
    gains = accel.pair_gains(np.ascontiguousarray(F), np.ascontiguousarray(C))
    d = channels.noise_power_w * np.sum(np.abs(C) ** 2, axis=1)
    return gains, d


class PowerSurrogateGEE:
    """GEE lower bound in p: concave numerator over the affine consumed power.

    Built at expansion point p_bar for fixed (gamma, C); the interference
    log-term is linearized there.
    """

    def __init__(self, p_bar, gamma, C, channels: ChannelSet, power_model: PowerModel,
                 bandwidth_hz: float):
        self.gains, self.d = _power_gee_tables(gamma, C, channels)
        self.p_bar = np.asarray(p_bar, float)
        self.mu = power_model.mu
        self.P_c = power_model.P_c_w
        self.B = bandwidth_hz
        K = len(self.d)
        self.off = self.gains.copy()
        np.fill_diagonal(self.off, 0.0)
        interf_bar = self.d + self.off @ self.p_bar
        self.f2_bar = float(np.sum(np.log(interf_bar)) / LN2)
        self.grad_f2_bar = (self.off / interf_bar[:, None]).sum(axis=0) / LN2
        self._K = K

    def numerator(self, p):
        """Concave numerator N(p) (bits/s) of the surrogate ratio."""
        v, _ = self.numerator_and_grad(p)
        return v

    def numerator_and_grad(self, p):
        p = np.asarray(p, float)
        tot = self.d + self.gains @ p
        f1 = float(np.sum(np.log(tot)) / LN2)
        grad_f1 = (self.gains / tot[:, None]).sum(axis=0) / LN2
        n = self.B * (f1 - self.f2_bar - float(self.grad_f2_bar @ (p - self.p_bar)))
        return n, self.B * (grad_f1 - self.grad_f2_bar)

    def denominator_and_grad(self, p):
        return self.P_c + float(self.mu @ np.asarray(p, float)), self.mu

    def value_and_grad(self, p):
        n, gn = self.numerator_and_grad(p)
        d, gd = self.denominator_and_grad(p)
        return n / d, (gn * d - n * gd) / d ** 2

    def true_gee(self, p):
        """Exact GEE(p) for the same fixed (gamma, C)."""
        p = np.asarray(p, float)
        s = p * np.diagonal(self.gains) / (self.d + self.off @ p)
        num = self.B * float(np.sum(np.log1p(s)) / LN2)
        return num / (self.P_c + float(self.mu @ p))


def power_surrogate_gee(p, p_bar, gamma, C, channels, power_model, bandwidth_hz):
    """Functional facade over PowerSurrogateGEE: (value, gradient) at p."""
    return PowerSurrogateGEE(p_bar, gamma, C, channels, power_model,
                             bandwidth_hz).value_and_grad(p)


# ---------------------------------------------------------------------------
# Lifted reflection surrogate (concave bound of SR_MMSE in X = gamma gamma^H)
# ---------------------------------------------------------------------------

def sr_mmse_of_X(X, p, channels: ChannelSet) -> float:
    """SR_MMSE evaluated on a PSD lift X (rank-one or not), bits/s/Hz."""
    p = np.asarray(p, float)
    K, N_R = channels.K, channels.N_R
    s2 = channels.noise_power_w
    Bm = np.einsum("m,mij,jl,mnl->min", p, channels.A, X, np.conj(channels.A))
    B = Bm.sum(axis=0)
    _, full = np.linalg.slogdet(s2 * np.eye(N_R) + B)
    total = K * full / LN2
    for k in range(K):
        _, ld = np.linalg.slogdet(s2 * np.eye(N_R) + B - Bm[k])
        total -= ld / LN2
    return float(total)


class SrSurrogateX:
    """Concave minorant of SR_MMSE(X) built by linearizing the concave
    negative part at the expansion lift X_bar."""

    def __init__(self, X_bar, p, channels: ChannelSet):
        self.channels = channels
        self.p = np.asarray(p, float)
        K, N_R = channels.K, channels.N_R
        s2 = channels.noise_power_w
        A = channels.A
        Bm = np.einsum("m,mij,jl,mnl->min", self.p, A, X_bar, np.conj(A))
        B = Bm.sum(axis=0)
        self.g2_bar = 0.0
        grad = np.zeros((channels.N, channels.N), dtype=complex)
        eye = np.eye(N_R)
        for k in range(K):
            S = s2 * eye + B - Bm[k]
            _, ld = np.linalg.slogdet(S)
            self.g2_bar += ld / LN2
            Sinv = np.linalg.inv(S)
            for m in range(K):
                if m != k:
                    grad += self.p[m] * (A[m].conj().T @ Sinv @ A[m])
        self.grad_g2 = grad / LN2
        self.X_bar = np.asarray(X_bar)

    def g1_and_grad(self, X):
        K, N_R = self.channels.K, self.channels.N_R
        s2 = self.channels.noise_power_w
        A = self.channels.A
        B = np.einsum("m,mij,jl,mnl->in", self.p, A, X, np.conj(A))
        T = s2 * np.eye(N_R) + B
        _, ld = np.linalg.slogdet(T)
        Tinv = np.linalg.inv(T)
        grad = np.einsum("m,mji,jl,mln->in", self.p, np.conj(A), Tinv, A)
        return K * ld / LN2, K * grad / LN2

    def value_and_grad(self, X):
        g1, grad_g1 = self.g1_and_grad(X)
        lin = float(np.real(np.vdot(self.grad_g2, X - self.X_bar)))
        return g1 - self.g2_bar - lin, grad_g1 - self.grad_g2


def sr_surrogate_X(X, X_bar, p, channels):
    """Functional facade over SrSurrogateX: (value, matrix gradient) at X."""
    return SrSurrogateX(X_bar, p, channels).value_and_grad(X)


# ---------------------------------------------------------------------------
# Power surrogate for the MMSE-embedded method
# ---------------------------------------------------------------------------

class PowerSurrogateGEEMMSE:
    """GEE_MMSE lower bound in p for fixed gamma.

    The log-det interference term F(p) is linearized at p_bar; the whole
    bound is kept as a single concave-over-affine ratio so that it both
    minorizes GEE_MMSE and is maximized exactly by fractional programming.
    """

    def __init__(self, p_bar, gamma, channels: ChannelSet, power_model: PowerModel,
                 bandwidth_hz: float):
        self.F = effective_channels(channels, gamma)     # (K, N_R)
        self.p_bar = np.asarray(p_bar, float)
        self.mu = power_model.mu
        self.P_c = power_model.P_c_w
        self.Bw = bandwidth_hz
        self.s2 = channels.noise_power_w
        self.K, self.N_R = self.F.shape
        self.f_bar, self.grad_f_bar = self._interference_logdet_and_grad(self.p_bar)

    def _interference_logdet_and_grad(self, p):
        """F(p) = sum_k log2|s2 I + sum_{m != k} p_m f_m f_m^H| and its gradient."""
        outer = np.einsum("mi,mj->mij", self.F, np.conj(self.F))
        B = np.einsum("m,mij->ij", p, outer)
        val = 0.0
        grad = np.zeros(self.K)
        eye = np.eye(self.N_R)
        for k in range(self.K):
            S = self.s2 * eye + B - p[k] * outer[k]
            _, ld = np.linalg.slogdet(S)
            val += ld / LN2
            Sinv = np.linalg.inv(S)
            for j in range(self.K):
                if j != k:
                    grad[j] += float(np.real(self.F[j].conj() @ Sinv @ self.F[j])) / LN2
        return float(val), grad

    def numerator_and_grad(self, p):
        p = np.asarray(p, float)
        B = np.einsum("m,mi,mj->ij", p, self.F, np.conj(self.F))
        T = self.s2 * np.eye(self.N_R) + B
        _, ld = np.linalg.slogdet(T)
        Tinv = np.linalg.inv(T)
        grad_ld = np.real(np.einsum("mi,ij,mj->m", np.conj(self.F), Tinv, self.F))
        n = self.Bw * (self.K * ld / LN2 - self.f_bar - float(self.grad_f_bar @ (p - self.p_bar)))
        gn = self.Bw * (self.K * grad_ld / LN2 - self.grad_f_bar)
        return n, gn

    def denominator_and_grad(self, p):
        return self.P_c + float(self.mu @ np.asarray(p, float)), self.mu

    def value_and_grad(self, p):
        n, gn = self.numerator_and_grad(p)
        d, gd = self.denominator_and_grad(p)
        return n / d, (gn * d - n * gd) / d ** 2

    def true_gee_mmse(self, p):
        p = np.asarray(p, float)
        fp, _ = self._interference_logdet_and_grad(p)
        B = np.einsum("m,mi,mj->ij", p, self.F, np.conj(self.F))
        _, ld = np.linalg.slogdet(self.s2 * np.eye(self.N_R) + B)
        num = self.Bw * (self.K * ld / LN2 - fp)
        return num / (self.P_c + float(self.mu @ p))


def power_surrogate_gee_mmse(p, p_bar, gamma, channels, power_model, bandwidth_hz):
    """Functional facade over PowerSurrogateGEEMMSE: (value, gradient) at p."""
    return PowerSurrogateGEEMMSE(p_bar, gamma, channels, power_model,
                                 bandwidth_hz).value_and_grad(p)
