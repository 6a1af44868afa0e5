import numpy as np

from risee.scenario import ChannelSet, PowerModel, build_cascades


def make_channels(G, h, noise=1.0):
    G = np.asarray(G, complex)
    h = np.asarray(h, complex)
    return ChannelSet(G=G, h=h, A=build_cascades(G, h), noise_power_w=noise)


def random_channels(K, N_R, N, seed, noise=1.0):
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((N_R, N)) + 1j * rng.standard_normal((N_R, N))
    h = rng.standard_normal((K, N)) + 1j * rng.standard_normal((K, N))
    return make_channels(G, h, noise)


def random_gamma(N, seed, scale=1.0):
    rng = np.random.default_rng(seed)
    return scale * (rng.standard_normal(N) + 1j * rng.standard_normal(N)) / np.sqrt(2)


def simple_power_model(K, P_c=2.0, mu=1.0, Pmax=1.0):
    return PowerModel(P_c_w=P_c, mu=np.full(K, float(mu)),
                      Pmax_w=np.full(K, float(Pmax)))
