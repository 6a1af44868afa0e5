"""Exact SINR / rate / GEE evaluation and the closed-form MMSE receiver.

These are the ground-truth quantities every solver is audited against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import accel
from .scenario import ChannelSet, PowerModel

LN2 = math.log(2.0)


def effective_channels(channels: ChannelSet, gamma: np.ndarray) -> np.ndarray:
    """F[k] = A_k @ gamma, shape (K, N_R)."""
    return channels.A @ gamma


def sinr_all(gamma: np.ndarray, p: np.ndarray, C: np.ndarray, channels: ChannelSet) -> np.ndarray:
    """SINR of every user under filters C (rows are c_k^H conjugated storage: C[k] = c_k)."""
    F = np.ascontiguousarray(effective_channels(channels, gamma))
    gains = accel.pair_gains(F, np.ascontiguousarray(C))   # |c_k^H A_m gamma|^2
    norms = np.sum(np.abs(C) ** 2, axis=1)
    K = channels.K
    out = np.empty(K)
    for k in range(K):
        if norms[k] == 0.0:
            raise ValueError(f"filter {k} is identically zero")
        interf = channels.noise_power_w * norms[k]
        for m in range(K):
            if m != k:
                interf += p[m] * gains[k, m]
        out[k] = p[k] * gains[k, k] / interf
    return out


def sinr(k: int, gamma: np.ndarray, p: np.ndarray, C: np.ndarray, channels: ChannelSet) -> float:
    return float(sinr_all(gamma, p, C, channels)[k])


def rates_and_gee(gamma, p, C, channels: ChannelSet, power_model: PowerModel,
                  bandwidth_hz: float):
    """Per-user rates R_k = B log2(1+SINR_k) and GEE = sum R / (P_c + sum mu p)."""
    s = sinr_all(gamma, p, C, channels)
    rates = bandwidth_hz * np.log1p(s) / LN2
    gee = float(np.sum(rates) / (power_model.P_c_w + float(power_model.mu @ p)))
    return rates, gee


def mmse_filter(k: int, gamma, p, channels: ChannelSet) -> np.ndarray:
    return mmse_filters(gamma, p, channels)[k]


def mmse_filters(gamma, p, channels: ChannelSet, substitute_zero: bool = False) -> np.ndarray:
    """Closed-form MMSE receivers c_k = sqrt(p_k) M_k^{-1} A_k gamma, stacked (K, N_R).

    With substitute_zero, users at p_k = 0 (or with a vanished effective
    channel) get a nonzero direction instead of the literal zero vector so
    that downstream SINR evaluation stays defined; their SINR is 0 either way.
    """
    F = effective_channels(channels, gamma)
    K, N_R = F.shape
    C = np.empty((K, N_R), dtype=complex)
    for k in range(K):
        M = channels.noise_power_w * np.eye(N_R, dtype=complex)
        for m in range(K):
            if m != k:
                M += p[m] * np.outer(F[m], F[m].conj())
        cho = scipy.linalg.cho_factor(M, lower=True)
        direction = scipy.linalg.cho_solve(cho, F[k])
        C[k] = math.sqrt(p[k]) * direction
        if substitute_zero and np.linalg.norm(C[k]) == 0.0:
            C[k] = direction if np.linalg.norm(direction) > 0 else np.eye(N_R)[0]
    return C


def sr_mmse(gamma, p, channels: ChannelSet) -> float:
    """Sum rate with MMSE filters embedded, in bits/s/Hz: sum_k log2(1 + p_k g^H A_k^H M_k^-1 A_k g)."""
    F = effective_channels(channels, gamma)
    return float(accel.sr_mmse_from_F(np.ascontiguousarray(F), np.asarray(p, float),
                                      channels.noise_power_w))


def sr_mmse_determinant(gamma, p, channels: ChannelSet) -> float:
    """Same quantity via the log-det identity: K log2|s2 I + sum B_m| - sum_k log2|M_k|."""
    F = effective_channels(channels, gamma)
    K, N_R = F.shape
    s2 = channels.noise_power_w
    B = np.zeros((N_R, N_R), dtype=complex)
    for m in range(K):
        B += p[m] * np.outer(F[m], F[m].conj())
    _, full = np.linalg.slogdet(s2 * np.eye(N_R) + B)
    total = K * full / LN2
    for k in range(K):
        Mk = s2 * np.eye(N_R) + B - p[k] * np.outer(F[k], F[k].conj())
        _, ld = np.linalg.slogdet(Mk)
        total -= ld / LN2
    return float(total)


def gee_mmse(gamma, p, channels: ChannelSet, power_model: PowerModel,
             bandwidth_hz: float) -> float:
    """GEE with MMSE filters embedded, bits per Joule."""
    num = bandwidth_hz * sr_mmse(gamma, p, channels)
    return float(num / (power_model.P_c_w + float(power_model.mu @ np.asarray(p))))


@dataclass
class Allocation:
    """Decision variables plus their exactly re-evaluated metrics."""

    gamma: np.ndarray
    p: np.ndarray
    C: np.ndarray
    sinr: np.ndarray
    rates_bps: np.ndarray
    gee_bits_per_joule: float


def make_allocation(gamma, p, C, channels: ChannelSet, power_model: PowerModel,
                    bandwidth_hz: float) -> Allocation:
    s = sinr_all(gamma, p, C, channels)
    rates = bandwidth_hz * np.log1p(s) / LN2
    gee = float(np.sum(rates) / (power_model.P_c_w + float(power_model.mu @ p)))
    return Allocation(gamma=np.asarray(gamma), p=np.asarray(p, float), C=np.asarray(C),
                      sinr=s, rates_bps=rates, gee_bits_per_joule=gee)
