"""Explicit ruin probabilities for exponential premium and claim sizes."""

from __future__ import annotations

import math

import numpy as np
from scipy import stats
from scipy.stats import qmc

from .adjustment import adjustment_exponential
from .errors import UnsupportedJumpLaw
from .model import Degenerate, Discrete, Exponential, IndependentGamma, ModelSpec

__all__ = ["ruin_prob_conditional", "ruin_prob_conditional_array", "ruin_prob_mixed", "DEFAULT_MIX_SAMPLES"]

DEFAULT_MIX_SAMPLES = 65536
QMC_SEED = 20240611


def ruin_prob_conditional(u: float, c: float, a: float, b: float, gamma: float, delta: float) -> float:
    """Ruin probability at fixed intensities with ``Y ~ Exp(a)``, ``Z ~ Exp(b)``.

    Returns exactly 1.0 when ``gamma / b - delta / a >= c``; otherwise
    ``(1 - r / b) exp(-r u)`` with ``r`` the adjustment coefficient.
    """
    if u < 0:
        return 1.0
    if gamma / b - delta / a >= c:
        return 1.0
    r = adjustment_exponential(c, a, b, gamma, delta).r
    if c == 0.0:
        prefactor = (1.0 + a / b) / (1.0 + delta / gamma)
    else:
        prefactor = 1.0 - r / b
    return prefactor * math.exp(-r * u)


def ruin_prob_conditional_array(u, c, a, b, gamma, delta):
    """Vectorized :func:`ruin_prob_conditional` over arrays of ``(gamma, delta)``."""
    gamma = np.asarray(gamma, dtype=float)
    delta = np.asarray(delta, dtype=float)
    certain = gamma / b - delta / a >= c
    g = np.where(certain, 1.0, gamma)
    d = np.where(certain, 1.0, delta)
    if c == 0.0:
        r = (b * d - a * g) / (d + g)
        prefactor = (1.0 + a / b) / (1.0 + d / g)
    else:
        B = c * (b - a) - d - g
        C0 = c * a * b + b * d - a * g
        disc = ((a + b) * c + d) ** 2 - 2.0 * ((a + b) * c - d) * g + g**2
        root = np.sqrt(np.maximum(disc, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(B > 0, (B + root) / (2.0 * c), 2.0 * C0 / (root - B))
        prefactor = 1.0 - r / b
    value = prefactor * np.exp(-r * u)
    return np.where(certain, 1.0, value)


def _exponential_rates(model: ModelSpec):
    if not (isinstance(model.premium_law, Exponential) and isinstance(model.claim_law, Exponential)):
        raise UnsupportedJumpLaw("closed-form ruin probabilities need exponential premium and claim sizes")
    return model.premium_law.rate, model.claim_law.rate


def ruin_prob_mixed(model: ModelSpec, u: float | None = None, mix_samples: int = DEFAULT_MIX_SAMPLES) -> float:
    """Ruin probability of the mixed model, averaging over the intensity law.

    Atom-based mixing laws are summed exactly. ``IndependentGamma`` is
    integrated with a scrambled Sobol rule of ``mix_samples`` points mapped
    through the Gamma quantile functions; the certain-ruin region contributes
    its probability mass through the integrand value 1.

    Raises:
        UnsupportedJumpLaw: for non-exponential size laws.
    """
    a, b = _exponential_rates(model)
    u = model.u if u is None else float(u)
    mix = model.mixing
    if isinstance(mix, (Degenerate, Discrete)):
        terms = [p * ruin_prob_conditional(u, model.c, a, b, g, d) for g, d, p in mix.atoms]
        return math.fsum(terms)
    if isinstance(mix, IndependentGamma):
        if mix_samples < 1:
            raise ValueError("mix_samples must be >= 1")
        sobol = qmc.Sobol(d=2, scramble=True, seed=QMC_SEED)
        pts = sobol.random(mix_samples)
        gam = stats.gamma.ppf(pts[:, 0], mix.gamma_shape, scale=1.0 / mix.gamma_rate)
        dlt = stats.gamma.ppf(pts[:, 1], mix.delta_shape, scale=1.0 / mix.delta_rate)
        # quantiles can underflow to 0 at the extreme low end
        tiny = np.finfo(float).tiny
        vals = ruin_prob_conditional_array(u, model.c, a, b, np.maximum(gam, tiny), np.maximum(dlt, tiny))
        return math.fsum(vals.tolist()) / mix_samples
    raise TypeError(f"unknown mixing law {type(mix).__name__}")
