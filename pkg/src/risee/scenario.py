"""Network scenarios, random channel drops, and the static power model."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict

import numpy as np

LN2 = math.log(2.0)


def dbm_to_watt(x_dbm: float) -> float:
    """Convert dBm to Watts: 30 dBm -> 1 W."""
    return 10.0 ** ((x_dbm - 30.0) / 10.0)


def noise_power(bandwidth_hz: float, psd_dbm_hz: float, nf_db: float) -> float:
    """Thermal noise power sigma^2 in Watts over the given bandwidth."""
    if bandwidth_hz <= 0:
        raise ValueError("bandwidth must be positive")
    return dbm_to_watt(psd_dbm_hz + nf_db) * bandwidth_hz


def path_loss_gain(distance_m: float, exponent: float, ref_gain_db_at_1m: float) -> float:
    """Linear power gain of a link: G_ref * d^-exponent, valid for d >= 1 m."""
    if distance_m < 1.0:
        raise ValueError(f"distance {distance_m} m below 1 m reference")
    return 10.0 ** (ref_gain_db_at_1m / 10.0) * distance_m ** (-exponent)


@dataclass
class SystemScenario:
    """All physical and deployment parameters of one network instance.

    Powers are stored in dBm, distances in meters, Rician factors linear.
    """

    K: int = 4
    N_R: int = 4
    N: int = 100
    bandwidth_hz: float = 20e6
    noise_psd_dbm_hz: float = -174.0
    noise_figure_db: float = 10.0
    pathloss_exponent: float = 4.0
    ref_gain_db_at_1m: float = -30.0
    user_radius_m: float = 100.0
    bs_ris_distance_m: float = 50.0
    ris_height_m: float = 15.0
    bs_height_m: float = 10.0
    user_height_range_m: tuple = (0.0, 5.0)
    rice_K_tx: float = 4.0   # RIS -> BS
    rice_K_rx: float = 2.0   # user -> RIS
    P0_dbm: float = 40.0
    P0_ris_dbm: float = 20.0
    Pcn_dbm: float = 0.0
    mu: tuple | None = None  # amplifier inefficiency per user, default all ones
    P_R: float = 1.0
    Pmax_dbm: float = 30.0

    def __post_init__(self):
        if min(self.K, self.N_R, self.N) < 1:
            raise ValueError("K, N_R, N must all be >= 1")
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth must be positive")
        if self.pathloss_exponent <= 0:
            raise ValueError("path-loss exponent must be positive")
        if self.rice_K_tx < 0 or self.rice_K_rx < 0:
            raise ValueError("Rician factors must be nonnegative")
        if not 0 < self.P_R <= 1:
            raise ValueError("per-element reflection budget must be in (0, 1]")
        if self.mu is None:
            self.mu = tuple(1.0 for _ in range(self.K))
        else:
            self.mu = tuple(float(m) for m in self.mu)
            if len(self.mu) != self.K or any(m <= 0 for m in self.mu):
                raise ValueError("mu must hold K positive entries")
        lo, hi = self.user_height_range_m
        if lo > hi:
            raise ValueError("user height range must satisfy lo <= hi")
        self.user_height_range_m = (float(lo), float(hi))

    @property
    def noise_power_w(self) -> float:
        return noise_power(self.bandwidth_hz, self.noise_psd_dbm_hz, self.noise_figure_db)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["user_height_range_m"] = list(d["user_height_range_m"])
        d["mu"] = list(d["mu"])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SystemScenario":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown scenario fields: {sorted(extra)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path: str) -> "SystemScenario":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class PowerModel:
    """Static power P_c plus per-user amplifier coefficients and power caps (Watts)."""

    P_c_w: float
    mu: np.ndarray
    Pmax_w: np.ndarray

    def __post_init__(self):
        if self.P_c_w <= 0:
            raise ValueError("static power must be positive")
        if np.any(np.asarray(self.Pmax_w) <= 0):
            raise ValueError("power caps must be positive")


def total_static_power(scenario: SystemScenario) -> PowerModel:
    """Assemble the Watt-domain power model: P_c = P_0 + N*P_cn + P_0,RIS."""
    p_c = (dbm_to_watt(scenario.P0_dbm)
           + scenario.N * dbm_to_watt(scenario.Pcn_dbm)
           + dbm_to_watt(scenario.P0_ris_dbm))
    return PowerModel(
        P_c_w=p_c,
        mu=np.asarray(scenario.mu, dtype=float),
        Pmax_w=np.full(scenario.K, dbm_to_watt(scenario.Pmax_dbm)),
    )


@dataclass(frozen=True)
class ChannelSet:
    """One random drop: RIS->BS matrix G, user->RIS vectors h_k, cascades A_k."""

    G: np.ndarray        # (N_R, N)
    h: np.ndarray        # (K, N)
    A: np.ndarray        # (K, N_R, N), A[k] = G @ diag(h[k])
    noise_power_w: float

    def __post_init__(self):
        if not (np.all(np.isfinite(self.G)) and np.all(np.isfinite(self.h))):
            raise ValueError("non-finite channel entries")
        if self.noise_power_w <= 0:
            raise ValueError("noise power must be positive")

    @property
    def K(self) -> int:
        return self.h.shape[0]

    @property
    def N_R(self) -> int:
        return self.G.shape[0]

    @property
    def N(self) -> int:
        return self.G.shape[1]


def build_cascades(G: np.ndarray, h_list: np.ndarray) -> np.ndarray:
    """Cascaded matrices A_k = G diag(h_k), stacked as (K, N_R, N)."""
    G = np.asarray(G)
    h = np.atleast_2d(np.asarray(h_list))
    if G.shape[1] != h.shape[1]:
        raise ValueError(f"G has {G.shape[1]} columns but h has length {h.shape[1]}")
    # column n of A_k is h_k[n] * G[:, n]
    return G[None, :, :] * h[:, None, :]


def rician_channel(rows: int, cols: int, K_factor: float, amplitude: float,
                   rng: np.random.Generator) -> np.ndarray:
    """Rician fading matrix with per-entry power amplitude^2.

    LOS part is the rank-one outer product of unit-modulus steering vectors
    with phases linear in the element index; the departure/arrival angles are
    drawn once per call.
    """
    if K_factor < 0 or amplitude < 0:
        raise ValueError("K_factor and amplitude must be nonnegative")
    th_r, th_c = rng.uniform(0.0, 2.0 * np.pi, size=2)
    u = np.exp(1j * np.pi * np.arange(rows) * np.sin(th_r))
    v = np.exp(1j * np.pi * np.arange(cols) * np.sin(th_c))
    los = np.outer(u, v.conj())
    nlos = (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2.0)
    w_los = np.sqrt(K_factor / (K_factor + 1.0))
    w_nlos = np.sqrt(1.0 / (K_factor + 1.0))
    return amplitude * (w_los * los + w_nlos * nlos)


def generate_drop(scenario: SystemScenario, seed: int) -> ChannelSet:
    """Draw one random network drop, deterministic given (scenario, seed).

    Users fall uniformly in a disc of user_radius_m around the RIS; path loss
    is applied per segment (user->RIS on h_k, RIS->BS on G); there is no
    direct user-BS link.
    """
    rng = np.random.default_rng(seed)
    sc = scenario

    # RIS->BS link
    d_bs = math.hypot(sc.bs_ris_distance_m, sc.ris_height_m - sc.bs_height_m)
    amp_g = math.sqrt(path_loss_gain(d_bs, sc.pathloss_exponent, sc.ref_gain_db_at_1m))
    G = rician_channel(sc.N_R, sc.N, sc.rice_K_tx, amp_g, rng)

    h = np.empty((sc.K, sc.N), dtype=complex)
    lo, hi = sc.user_height_range_m
    for k in range(sc.K):
        while True:
            r = sc.user_radius_m * math.sqrt(rng.uniform())
            phi = rng.uniform(0.0, 2.0 * np.pi)
            z = rng.uniform(lo, hi)
            d_user = math.sqrt(r * r + (sc.ris_height_m - z) ** 2)
            if d_user >= 1.0:     # keep the power-law model valid
                break
            _ = phi
        amp_h = math.sqrt(path_loss_gain(d_user, sc.pathloss_exponent, sc.ref_gain_db_at_1m))
        h[k] = rician_channel(1, sc.N, sc.rice_K_rx, amp_h, rng)[0]

    return ChannelSet(G=G, h=h, A=build_cascades(G, h), noise_power_w=sc.noise_power_w)


def default_scenario() -> SystemScenario:
    """Full-size default deployment (K=4, N_R=4, N=100)."""
    return SystemScenario()


def desk_scenario(**overrides) -> SystemScenario:
    """Small, well-conditioned deployment used by the self-test gate.

    Shrinks the array and the cell so link SNRs land in a regime where the
    optimizers have visible structure and runs take milliseconds.
    """
    params = dict(
        K=2, N_R=2, N=16,
        user_radius_m=10.0, bs_ris_distance_m=10.0,
        ris_height_m=2.0, bs_height_m=2.0, user_height_range_m=(0.0, 1.0),
        ref_gain_db_at_1m=-30.0,
        Pmax_dbm=30.0,
    )
    params.update(overrides)
    return SystemScenario(**params)
