"""Counter-based random streams for numba kernels.

Draw ``k`` of path ``i`` is ``mix64(key_i + (k + 1) * GOLDEN)`` with
``key_i = mix64(mix64(seed) ^ (i * ODD))``, i.e. a SplitMix64 stream whose
state is a pure function of ``(seed, path index, draw counter)``. Paths can be
evaluated in any order or partition with identical results.
"""

import math

import numpy as np
from numba import njit

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_ODD = np.uint64(0xD1B54A32D192ED03)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_INV53 = 1.0 / 9007199254740992.0
TWO_PI = 2.0 * math.pi


@njit(cache=True)
def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True)
def path_key(seed, index):
    return mix64(mix64(np.uint64(seed)) ^ (np.uint64(index) * _ODD))


@njit(cache=True)
def uniform(key, ctr):
    """Uniform on the open interval (0, 1); returns ``(value, next counter)``."""
    ctr = ctr + _ONE
    z = mix64(key + ctr * GOLDEN)
    return (np.float64(z >> _S11) + 0.5) * _INV53, ctr


@njit(cache=True)
def std_normal(key, ctr):
    u1, ctr = uniform(key, ctr)
    u2, ctr = uniform(key, ctr)
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(TWO_PI * u2), ctr


@njit(cache=True)
def gamma_variate(key, ctr, shape, rate):
    """Marsaglia-Tsang sampler; shapes below 1 use the ``U ** (1 / shape)`` boost."""
    boost = 1.0
    k = shape
    if k < 1.0:
        u, ctr = uniform(key, ctr)
        boost = u ** (1.0 / k)
        k += 1.0
    d = k - 1.0 / 3.0
    cc = 1.0 / math.sqrt(9.0 * d)
    while True:
        z, ctr = std_normal(key, ctr)
        v = 1.0 + cc * z
        if v <= 0.0:
            continue
        v = v * v * v
        u, ctr = uniform(key, ctr)
        if math.log(u) < 0.5 * z * z + d - d * v + d * math.log(v):
            return d * v * boost / rate, ctr


# jump-law codes shared with montecarlo._encode_law
EXPONENTIAL, GAMMA, PARETO, EMPIRICAL = 0, 1, 2, 3


@njit(cache=True)
def jump_variate(key, ctr, kind, p1, p2, sample):
    if kind == EXPONENTIAL:
        u, ctr = uniform(key, ctr)
        return -math.log(u) / p1, ctr
    if kind == GAMMA:
        return gamma_variate(key, ctr, p1, p2)
    if kind == PARETO:
        u, ctr = uniform(key, ctr)
        return p1 * u ** (-1.0 / p2), ctr
    u, ctr = uniform(key, ctr)
    i = int(u * sample.shape[0])
    if i >= sample.shape[0]:
        i = sample.shape[0] - 1
    return sample[i], ctr
