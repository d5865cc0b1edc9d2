"""Conditional two-sided-jump model and its (tilted) integral-equation kernels.

Fixing the intensities at ``(gamma, delta)`` turns the surplus into a
classical compound Poisson process with drift ``c``, rate
``lam = gamma + delta`` and signed jumps: a claim ``Z`` with probability
``gamma / lam``, a premium ``-Y`` with probability ``delta / lam``.

The non-ruin equation of that model is driven by the signed measure ``dG``
with density ``gamma * P(Z > z)`` on ``z > 0`` and ``-delta * P(Y > -z)`` on
``z < 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoMGF, NotApplicable, OutsideConvergenceStrip
from .model import JumpLaw, ModelSpec, Pareto

__all__ = [
    "ConditionalModel",
    "SignedKernel",
    "TiltedKernel",
    "conditional_model",
    "build_signed_kernel",
    "build_tilted_kernel",
    "mgf_balance",
]


@dataclass(frozen=True)
class ConditionalModel:
    u: float
    c: float
    gamma: float
    delta: float
    premium_law: JumpLaw
    claim_law: JumpLaw

    def __post_init__(self):
        if not (self.gamma > 0 and self.delta > 0):
            raise ValueError("gamma and delta must be positive")
        if self.u < 0 or self.c < 0:
            raise ValueError("u and c must be nonnegative")

    @property
    def lam(self) -> float:
        return self.gamma + self.delta

    @property
    def claim_weight(self) -> float:
        return self.gamma / self.lam

    @property
    def premium_weight(self) -> float:
        return self.delta / self.lam

    def jump_mean(self) -> float:
        """Mean of the signed jump ``X`` (claims positive, premiums negative)."""
        return self.claim_weight * self.claim_law.mean() - self.premium_weight * self.premium_law.mean()

    def net_profit_margin(self) -> float:
        return self.c - self.lam * self.jump_mean()


def conditional_model(model: ModelSpec, gamma: float, delta: float) -> ConditionalModel:
    return ConditionalModel(
        u=model.u,
        c=model.c,
        gamma=float(gamma),
        delta=float(delta),
        premium_law=model.premium_law,
        claim_law=model.claim_law,
    )


@dataclass(frozen=True)
class SignedKernel:
    """The measure ``dG``.

    ``gamma`` and ``delta`` are stored as plain weights, so ``delta = 0`` (via
    :func:`dataclasses.replace`) gives the classical one-sided kernel.
    """

    gamma: float
    delta: float
    claim_law: JumpLaw
    premium_law: JumpLaw

    def positive_density(self, z):
        return self.gamma * self.claim_law.tail(z)

    def negative_density(self, z):
        """Magnitude of the density at ``-z``; enters ``dG`` with a minus sign."""
        return self.delta * self.premium_law.tail(z)

    @property
    def positive_mass(self) -> float:
        return self.gamma * self.claim_law.mean()

    @property
    def negative_mass(self) -> float:
        return self.delta * self.premium_law.mean()

    @property
    def signed_mass(self) -> float:
        return self.positive_mass - self.negative_mass

    def G(self, z):
        """Distribution-type function ``G`` with ``G(0) = 0``."""
        z = np.asarray(z, dtype=float)
        pos = self.gamma * (self.claim_law.mean() - self.claim_law.integrated_tail(np.maximum(z, 0.0)))
        neg = self.delta * (self.premium_law.mean() - self.premium_law.integrated_tail(np.maximum(-z, 0.0)))
        out = np.where(z > 0, pos, np.where(z < 0, neg, 0.0))
        return out if out.ndim else float(out)

    def transform(self, r: float) -> float:
        """``int exp(r z) dG(z)``."""
        if r > 0 and isinstance(self.claim_law, Pareto) and self.gamma > 0:
            raise NoMGF("Pareto claims have no exponential moments")
        if r < 0 and isinstance(self.premium_law, Pareto) and self.delta > 0:
            raise NoMGF("Pareto premiums have no exponential moments")
        if not (-self.premium_law.mgf_abscissa < r < self.claim_law.mgf_abscissa):
            raise OutsideConvergenceStrip(
                f"r={r!r} outside ({-self.premium_law.mgf_abscissa!r}, {self.claim_law.mgf_abscissa!r})"
            )
        pos = self.gamma * self.claim_law.laplace_tail(r) if self.gamma else 0.0
        neg = self.delta * self.premium_law.laplace_tail(-r) if self.delta else 0.0
        return pos - neg


def build_signed_kernel(cm: ConditionalModel) -> SignedKernel:
    return SignedKernel(gamma=cm.gamma, delta=cm.delta, claim_law=cm.claim_law, premium_law=cm.premium_law)


def mgf_balance(cm: ConditionalModel, r: float) -> float:
    """``int exp(r z) dG(z) - c``; vanishes exactly at an adjustment coefficient."""
    return build_signed_kernel(cm).transform(r) - cm.c


@dataclass(frozen=True)
class TiltedKernel:
    """Exponential tilt of ``dG / c`` by the adjustment coefficient ``r``."""

    r: float
    c: float
    gamma: float
    delta: float
    claim_law: JumpLaw
    premium_law: JumpLaw

    def positive_density(self, z):
        z = np.asarray(z, dtype=float)
        return np.exp(self.r * z) * self.gamma * self.claim_law.tail(z) / self.c

    def negative_density(self, z):
        z = np.asarray(z, dtype=float)
        return np.exp(-self.r * z) * self.delta * self.premium_law.tail(z) / self.c

    @property
    def positive_mass(self) -> float:
        return self.gamma * self.claim_law.laplace_tail(self.r) / self.c

    @property
    def negative_mass(self) -> float:
        return self.delta * self.premium_law.laplace_tail(-self.r) / self.c

    @property
    def signed_total_mass(self) -> float:
        return self.positive_mass - self.negative_mass


def build_tilted_kernel(cm: ConditionalModel, r: float) -> TiltedKernel:
    """Tilted kernel ``dH``; has unit signed mass when ``r`` balances the MGF.

    Raises:
        NotApplicable: zero drift, where the tilt divides by ``c``.
        ValueError: ``r`` not positive or not an adjustment coefficient.
    """
    if cm.c <= 0:
        raise NotApplicable("the tilted kernel requires a positive premium drift")
    if not (r > 0 and math.isfinite(r)):
        raise ValueError(f"adjustment coefficient must be positive, got {r!r}")
    from .adjustment import check_adjustment

    check_adjustment(cm, r)
    return TiltedKernel(
        r=float(r), c=cm.c, gamma=cm.gamma, delta=cm.delta, claim_law=cm.claim_law, premium_law=cm.premium_law
    )
