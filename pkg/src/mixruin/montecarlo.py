"""Monte Carlo simulation of the mixed surplus process.

Each path is one realized world: the intensities ``(gamma, delta)`` are
drawn from the mixing law, then the merged event process of rate
``gamma + delta`` is run, marking each event as a premium with probability
``delta / (gamma + delta)`` and as a claim otherwise. Ruin can only happen
immediately after a claim.

All randomness comes from a counter-based stream keyed by
``(seed, path index)``, so results do not depend on how paths are split
across workers.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Optional, Tuple

import numba
import numpy as np
from numba import njit, prange
from scipy import stats

from . import _streams as rs
from .adjustment import adjustment_general
from .errors import MixRuinError
from .kernels import conditional_model
from .model import Degenerate, Discrete, Empirical, Exponential, Gamma, IndependentGamma, JumpLaw, ModelSpec, Pareto

__all__ = [
    "Stream",
    "PathState",
    "RuinEstimate",
    "wilson_interval",
    "simulate_path",
    "estimate_ruin",
    "simulate_terminal_samples",
    "simulate_terminal_value",
    "default_horizon",
    "SAFE_LEVEL_DECAYS",
]

if "NUMBA_THREADING_LAYER" not in os.environ and "NUMBA_THREADING_LAYER_PRIORITY" not in os.environ:
    # the bundled TBB is often too old and numba warns on every process start
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "tbb", "workqueue"]

SAFE_LEVEL_DECAYS = 30.0
Z_95 = float(stats.norm.ppf(0.975))

_MIX_ATOMS, _MIX_GAMMA = 0, 1
_R_NONE, _R_ATOMS, _R_EXPONENTIAL = 0, 1, 2


@dataclass(frozen=True)
class Stream:
    """Handle of the random stream of one path."""

    seed: int
    index: int = 0


@dataclass(frozen=True)
class PathState:
    surplus: float
    t: float
    premium_count: int
    claim_count: int
    ruined: bool
    ruin_time: Optional[float]
    premium_total: float = 0.0
    claim_total: float = 0.0


@dataclass(frozen=True)
class RuinEstimate:
    estimate: float
    ci_low: float
    ci_high: float
    n_paths: int
    n_ruined: int
    horizon: float
    seed: int

    @property
    def half_width(self) -> float:
        return 0.5 * (self.ci_high - self.ci_low)


def wilson_interval(successes: int, total: int, z: float = Z_95) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if total <= 0:
        raise ValueError("total must be positive")
    p = successes / total
    denom = 1.0 + z * z / total
    centre = (p + z * z / (2.0 * total)) / denom
    spread = z * math.sqrt(p * (1.0 - p) / total + z * z / (4.0 * total * total)) / denom
    # at k = 0 or k = n one endpoint is exactly 0 or 1; avoid rounding residue
    low = 0.0 if successes == 0 else max(0.0, centre - spread)
    high = 1.0 if successes == total else min(1.0, centre + spread)
    return low, high


# ---------------------------------------------------------------------------
# numba kernels
# ---------------------------------------------------------------------------


@njit(cache=True)
def _run_path(key, ctr, u, c, gamma, delta, horizon, safe_level, check_ruin,
              pk, pp1, pp2, psample, ck, cp1, cp2, csample):
    lam = gamma + delta
    p_prem = delta / lam
    t = 0.0
    x = u
    n_prem = 0
    n_claim = 0
    prem_sum = 0.0
    claim_sum = 0.0
    ruined = False
    ruin_time = -1.0
    while True:
        e, ctr = rs.uniform(key, ctr)
        w = -math.log(e) / lam
        if t + w > horizon:
            x += c * (horizon - t)
            t = horizon
            break
        t += w
        x += c * w
        m, ctr = rs.uniform(key, ctr)
        if m < p_prem:
            y, ctr = rs.jump_variate(key, ctr, pk, pp1, pp2, psample)
            x += y
            n_prem += 1
            prem_sum += y
        else:
            z, ctr = rs.jump_variate(key, ctr, ck, cp1, cp2, csample)
            x -= z
            n_claim += 1
            claim_sum += z
            if check_ruin and x < 0.0:
                ruined = True
                ruin_time = t
                break
        if x > safe_level:
            break
    return x, t, n_prem, n_claim, ruined, ruin_time, prem_sum, claim_sum, ctr


@njit(cache=True)
def _draw_intensities(key, ctr, mix_kind, atom_g, atom_d, atom_cum, gparams):
    if mix_kind == _MIX_ATOMS:
        if atom_g.shape[0] == 1:
            return atom_g[0], atom_d[0], 0, ctr
        v, ctr = rs.uniform(key, ctr)
        idx = atom_g.shape[0] - 1
        for i in range(atom_g.shape[0]):
            if v < atom_cum[i]:
                idx = i
                break
        return atom_g[idx], atom_d[idx], idx, ctr
    g, ctr = rs.gamma_variate(key, ctr, gparams[0], gparams[1])
    d, ctr = rs.gamma_variate(key, ctr, gparams[2], gparams[3])
    return g, d, -1, ctr


@njit(cache=True)
def _exp_adjustment(c, a, b, g, d):
    """Closed-form adjustment coefficient, or 0 when net profit fails."""
    if c + d / a <= g / b:
        return 0.0
    if c == 0.0:
        return (b * d - a * g) / (d + g)
    B = c * (b - a) - d - g
    C0 = c * a * b + b * d - a * g
    disc = ((a + b) * c + d) ** 2 - 2.0 * ((a + b) * c - d) * g + g * g
    root = math.sqrt(max(disc, 0.0))
    if B > 0.0:
        return (B + root) / (2.0 * c)
    return 2.0 * C0 / (root - B)


@njit(cache=True, parallel=True)
def _ruin_flags(seed, start, count, u, c, horizon, use_safe, safe_decays,
                mix_kind, atom_g, atom_d, atom_cum, gparams, r_mode, atom_r, a_rate, b_rate,
                pk, pp1, pp2, psample, ck, cp1, cp2, csample):
    out = np.zeros(count, dtype=np.uint8)
    for j in prange(count):
        key = rs.path_key(seed, start + j)
        ctr = np.uint64(0)
        g, d, idx, ctr = _draw_intensities(key, ctr, mix_kind, atom_g, atom_d, atom_cum, gparams)
        r = 0.0
        if r_mode == _R_ATOMS:
            r = atom_r[idx]
        elif r_mode == _R_EXPONENTIAL:
            r = _exp_adjustment(c, a_rate, b_rate, g, d)
        level = np.inf
        if use_safe and r > 0.0:
            level = u + safe_decays / r
        res = _run_path(key, ctr, u, c, g, d, horizon, level, True,
                        pk, pp1, pp2, psample, ck, cp1, cp2, csample)
        if res[4]:
            out[j] = 1
    return out


@njit(cache=True, parallel=True)
def _terminal_values(seed, count, u, c, t_end, mix_kind, atom_g, atom_d, atom_cum, gparams,
                     pk, pp1, pp2, psample, ck, cp1, cp2, csample):
    out = np.empty(count)
    for j in prange(count):
        key = rs.path_key(seed, j)
        ctr = np.uint64(0)
        g, d, idx, ctr = _draw_intensities(key, ctr, mix_kind, atom_g, atom_d, atom_cum, gparams)
        res = _run_path(key, ctr, u, c, g, d, t_end, np.inf, False,
                        pk, pp1, pp2, psample, ck, cp1, cp2, csample)
        out[j] = res[0]
    return out


# ---------------------------------------------------------------------------
# encoding of model objects for the kernels
# ---------------------------------------------------------------------------

_EMPTY = np.empty(0, dtype=np.float64)


def _encode_law(law: JumpLaw):
    if isinstance(law, Exponential):
        return rs.EXPONENTIAL, law.rate, 0.0, _EMPTY
    if isinstance(law, Gamma):
        return rs.GAMMA, law.shape, law.rate, _EMPTY
    if isinstance(law, Pareto):
        return rs.PARETO, law.scale, law.tail_index, _EMPTY
    if isinstance(law, Empirical):
        return rs.EMPIRICAL, 0.0, 0.0, np.ascontiguousarray(law.values, dtype=np.float64)
    raise TypeError(f"unsupported jump law {type(law).__name__}")


def _encode_mixing(model: ModelSpec):
    mix = model.mixing
    both_exp = isinstance(model.premium_law, Exponential) and isinstance(model.claim_law, Exponential)
    a = model.premium_law.rate if both_exp else 1.0
    b = model.claim_law.rate if both_exp else 1.0
    if isinstance(mix, (Degenerate, Discrete)):
        atoms = mix.atoms
        g = np.array([x[0] for x in atoms], dtype=np.float64)
        d = np.array([x[1] for x in atoms], dtype=np.float64)
        cum = np.cumsum([x[2] for x in atoms]).astype(np.float64)
        cum[-1] = 1.0
        atom_r = np.array([_atom_adjustment(model, gi, di) for gi, di in zip(g, d)], dtype=np.float64)
        return dict(mix_kind=_MIX_ATOMS, atom_g=g, atom_d=d, atom_cum=cum, gparams=np.zeros(4),
                    r_mode=_R_ATOMS, atom_r=atom_r, a_rate=a, b_rate=b)
    if isinstance(mix, IndependentGamma):
        gparams = np.array([mix.gamma_shape, mix.gamma_rate, mix.delta_shape, mix.delta_rate], dtype=np.float64)
        one = np.ones(1)
        return dict(mix_kind=_MIX_GAMMA, atom_g=one, atom_d=one, atom_cum=one, gparams=gparams,
                    r_mode=_R_EXPONENTIAL if both_exp else _R_NONE, atom_r=np.zeros(1), a_rate=a, b_rate=b)
    raise TypeError(f"unsupported mixing law {type(mix).__name__}")


def _atom_adjustment(model: ModelSpec, gamma: float, delta: float) -> float:
    if isinstance(model.premium_law, Exponential) and isinstance(model.claim_law, Exponential):
        return _exp_adjustment(model.c, model.premium_law.rate, model.claim_law.rate, gamma, delta)
    try:
        return adjustment_general(conditional_model(model, gamma, delta)).r
    except MixRuinError:
        return 0.0


def _law_args(model: ModelSpec):
    return (*_encode_law(model.premium_law), *_encode_law(model.claim_law))


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be an integer in [0, 2**64)")
    return seed


# ---------------------------------------------------------------------------
# public API
# ---------------------------------------------------------------------------


def simulate_path(
    model: ModelSpec,
    gamma: float,
    delta: float,
    horizon: float,
    stream: Stream,
    safe_level: Optional[float] = None,
) -> PathState:
    """Run one path at fixed intensities until ruin, ``horizon`` or ``safe_level``.

    ``gamma`` or ``delta`` may be 0 (one-sided test doubles) but not both.
    """
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    if gamma < 0 or delta < 0 or gamma + delta <= 0:
        raise ValueError("intensities must be nonnegative with a positive sum")
    key = np.uint64(rs.path_key(np.uint64(_check_seed(stream.seed)), np.uint64(stream.index)))
    level = np.inf if safe_level is None else float(safe_level)
    x, t, n_p, n_c, ruined, tau, psum, csum, _ = _run_path(
        key, np.uint64(0), model.u, model.c, float(gamma), float(delta), float(horizon), level, True,
        *_law_args(model),
    )
    return PathState(
        surplus=x,
        t=t,
        premium_count=int(n_p),
        claim_count=int(n_c),
        ruined=bool(ruined),
        ruin_time=float(tau) if ruined else None,
        premium_total=psum,
        claim_total=csum,
    )


def default_horizon(model: ModelSpec) -> float:
    """4000 expected inter-event times of the slowest intensity atom."""
    mix = model.mixing
    if isinstance(mix, (Degenerate, Discrete)):
        lam_min = min(g + d for g, d, _ in mix.atoms)
    else:
        lam_min = mix.mean_gamma() + mix.mean_delta()
    return 4000.0 / lam_min


def _with_threads(workers, fn, *args):
    if workers is None:
        return fn(*args)
    previous = numba.get_num_threads()
    numba.set_num_threads(max(1, min(int(workers), numba.config.NUMBA_NUM_THREADS)))
    try:
        return fn(*args)
    finally:
        numba.set_num_threads(previous)


def ruin_flags(
    model: ModelSpec,
    *,
    horizon: float,
    seed: int,
    start: int,
    count: int,
    safe_exit: bool = True,
    workers: Optional[int] = None,
) -> np.ndarray:
    """Ruin indicators of paths ``start .. start + count - 1``."""
    mix = _encode_mixing(model)
    return _with_threads(
        workers, _ruin_flags,
        np.uint64(_check_seed(seed)), np.int64(start), np.int64(count), model.u, model.c, float(horizon),
        bool(safe_exit), SAFE_LEVEL_DECAYS,
        mix["mix_kind"], mix["atom_g"], mix["atom_d"], mix["atom_cum"], mix["gparams"],
        mix["r_mode"], mix["atom_r"], float(mix["a_rate"]), float(mix["b_rate"]),
        *_law_args(model),
    )


def estimate_ruin(
    model: ModelSpec,
    u: Optional[float] = None,
    *,
    horizon: float,
    n_paths: int,
    seed: int,
    safe_exit: bool = True,
    workers: Optional[int] = None,
    chunks: int = 1,
) -> RuinEstimate:
    """Finite-horizon Monte Carlo estimate of the ruin probability.

    With ``safe_exit`` a path whose surplus exceeds ``u + 30 / r`` (``r`` the
    adjustment coefficient of its intensity draw) is stopped as non-ruined;
    paths without an adjustment coefficient always run to ``horizon``.
    ``chunks`` and ``workers`` only change how paths are scheduled.
    """
    if n_paths < 100:
        raise ValueError("n_paths must be at least 100")
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    if u is not None:
        model = model.with_u(u)
    bounds = np.linspace(0, n_paths, max(1, int(chunks)) + 1).astype(np.int64)
    n_ruined = 0
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        if hi > lo:
            flags = ruin_flags(model, horizon=horizon, seed=seed, start=int(lo), count=int(hi - lo),
                               safe_exit=safe_exit, workers=workers)
            n_ruined += int(flags.sum(dtype=np.int64))
    low, high = wilson_interval(n_ruined, n_paths)
    return RuinEstimate(
        estimate=n_ruined / n_paths,
        ci_low=low,
        ci_high=high,
        n_paths=int(n_paths),
        n_ruined=n_ruined,
        horizon=float(horizon),
        seed=int(seed),
    )


def simulate_terminal_samples(model: ModelSpec, t: float, n_paths: int, seed: int,
                              workers: Optional[int] = None) -> np.ndarray:
    """Samples of ``K_t`` without any ruin logic."""
    if not t > 0:
        raise ValueError("t must be positive")
    if n_paths < 1000:
        raise ValueError("n_paths must be at least 1000")
    mix = _encode_mixing(model)
    return _with_threads(
        workers, _terminal_values,
        np.uint64(_check_seed(seed)), np.int64(n_paths), model.u, model.c, float(t),
        mix["mix_kind"], mix["atom_g"], mix["atom_d"], mix["atom_cum"], mix["gparams"],
        *_law_args(model),
    )


def simulate_terminal_value(model: ModelSpec, t: float, n_paths: int, seed: int,
                            workers: Optional[int] = None) -> Tuple[float, float]:
    """Sample mean and unbiased sample variance of ``K_t``."""
    x = simulate_terminal_samples(model, t, n_paths, seed, workers)
    return float(x.mean()), float(x.var(ddof=1))
