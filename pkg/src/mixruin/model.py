"""Domain types for the mixed-Poisson surplus model.

The surplus of the insurer is

    K_t = u + c t + sum_{i <= M_t} Y_i - sum_{i <= L_t} Z_i

where ``Y`` are premium sizes arriving at the jumps of ``M`` and ``Z`` are
claim sizes arriving at the jumps of ``L``. Conditionally on the random
intensities ``(Delta, Gamma)``, ``M`` and ``L`` are independent Poisson
processes with rates ``Delta`` and ``Gamma``.

Size laws (:class:`JumpLaw` subclasses) and intensity laws
(:class:`MixingLaw` subclasses) are immutable value objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from scipy import integrate, special

from .errors import InfiniteSecondMoment, NoMGF, OutsideConvergenceStrip

__all__ = [
    "JumpLaw",
    "Exponential",
    "Gamma",
    "Pareto",
    "Empirical",
    "MixingLaw",
    "Degenerate",
    "Discrete",
    "IndependentGamma",
    "ModelSpec",
    "mean_surplus",
    "var_surplus",
    "net_profit_margin",
]


# ---------------------------------------------------------------------------
# Jump (size) laws
# ---------------------------------------------------------------------------


class JumpLaw:
    """Law of a strictly positive jump size with finite mean.

    Subclasses implement the tail ``P(J > x)`` and a handful of integrals of
    it. All ``x`` arguments accept scalars or numpy arrays.
    """

    def mean(self) -> float:
        raise NotImplementedError

    def second_moment(self) -> float:
        raise NotImplementedError

    def tail(self, x):
        """Survival function ``P(J > x)``; equals 1 for ``x < 0``."""
        raise NotImplementedError

    def cdf(self, x):
        return 1.0 - self.tail(x)

    def integrated_tail(self, x):
        """``int_x^inf P(J > z) dz``, i.e. ``E[(J - x)^+]`` for ``x >= 0``."""
        raise NotImplementedError

    @property
    def mgf_abscissa(self) -> float:
        """Supremum of ``s`` with ``E[exp(s J)] < inf``."""
        raise NotImplementedError

    def laplace_tail(self, s: float) -> float:
        """``int_0^inf exp(s z) P(J > z) dz``.

        Equals ``(E[exp(s J)] - 1) / s`` for ``s != 0`` and the mean at 0.

        Raises:
            NoMGF: ``s > 0`` for a law without exponential moments.
            OutsideConvergenceStrip: ``s`` at or beyond the abscissa.
        """
        raise NotImplementedError

    def tail_cutoff(self, eps: float) -> float:
        """Smallest convenient ``x`` with ``P(J > x) <= eps``."""
        raise NotImplementedError

    def _check_strip(self, s: float) -> None:
        if s >= self.mgf_abscissa:
            raise OutsideConvergenceStrip(
                f"s={s!r} outside convergence strip of {self!r} (abscissa {self.mgf_abscissa!r})"
            )


def _positive(name, value):
    value = float(value)
    if not (value > 0.0 and math.isfinite(value)):
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")
    return value


@dataclass(frozen=True)
class Exponential(JumpLaw):
    rate: float

    def __post_init__(self):
        object.__setattr__(self, "rate", _positive("rate", self.rate))

    def mean(self):
        return 1.0 / self.rate

    def second_moment(self):
        return 2.0 / self.rate**2

    def tail(self, x):
        x = np.asarray(x, dtype=float)
        out = np.exp(-self.rate * np.maximum(x, 0.0))
        return out if out.ndim else float(out)

    def integrated_tail(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x >= 0.0, np.exp(-self.rate * np.maximum(x, 0.0)) / self.rate, 1.0 / self.rate - x)
        return out if out.ndim else float(out)

    @property
    def mgf_abscissa(self):
        return self.rate

    def laplace_tail(self, s):
        self._check_strip(s)
        return 1.0 / (self.rate - s)

    def tail_cutoff(self, eps):
        return -math.log(eps) / self.rate


@dataclass(frozen=True)
class Gamma(JumpLaw):
    """Gamma law in shape/rate parametrization (mean ``shape / rate``)."""

    shape: float
    rate: float

    def __post_init__(self):
        object.__setattr__(self, "shape", _positive("shape", self.shape))
        object.__setattr__(self, "rate", _positive("rate", self.rate))

    def mean(self):
        return self.shape / self.rate

    def second_moment(self):
        return self.shape * (self.shape + 1.0) / self.rate**2

    def tail(self, x):
        x = np.asarray(x, dtype=float)
        out = special.gammaincc(self.shape, self.rate * np.maximum(x, 0.0))
        return out if out.ndim else float(out)

    def integrated_tail(self, x):
        x = np.asarray(x, dtype=float)
        y = self.rate * np.maximum(x, 0.0)
        pos = self.mean() * special.gammaincc(self.shape + 1.0, y) - x * special.gammaincc(self.shape, y)
        out = np.where(x >= 0.0, pos, self.mean() - x)
        return out if out.ndim else float(out)

    @property
    def mgf_abscissa(self):
        return self.rate

    def laplace_tail(self, s):
        self._check_strip(s)
        if s == 0.0:
            return self.mean()
        return math.expm1(-self.shape * math.log1p(-s / self.rate)) / s

    def tail_cutoff(self, eps):
        return float(special.gammainccinv(self.shape, eps)) / self.rate


@dataclass(frozen=True)
class Pareto(JumpLaw):
    """Pareto type I law: ``P(J > x) = (scale / x) ** tail_index`` for ``x >= scale``."""

    scale: float
    tail_index: float

    def __post_init__(self):
        object.__setattr__(self, "scale", _positive("scale", self.scale))
        alpha = _positive("tail_index", self.tail_index)
        if alpha <= 1.0:
            raise ValueError(f"Pareto tail_index must exceed 1 for a finite mean, got {alpha!r}")
        object.__setattr__(self, "tail_index", alpha)

    def mean(self):
        return self.tail_index * self.scale / (self.tail_index - 1.0)

    def second_moment(self):
        if self.tail_index <= 2.0:
            return math.inf
        return self.tail_index * self.scale**2 / (self.tail_index - 2.0)

    def tail(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.where(x < self.scale, 1.0, (self.scale / np.maximum(x, self.scale)) ** self.tail_index)
        return out if out.ndim else float(out)

    def integrated_tail(self, x):
        x = np.asarray(x, dtype=float)
        a, xm = self.tail_index, self.scale
        far = xm**a * np.maximum(x, xm) ** (1.0 - a) / (a - 1.0)
        out = np.where(x < xm, (xm - x) + xm / (a - 1.0), far)
        return out if out.ndim else float(out)

    @property
    def mgf_abscissa(self):
        return 0.0

    def laplace_tail(self, s):
        if s > 0.0:
            raise NoMGF(f"{self!r} has no exponential moments")
        if s == 0.0:
            return self.mean()
        xm, a = self.scale, self.tail_index
        head = math.expm1(s * xm) / s
        far, _ = integrate.quad(lambda z: math.exp(s * z) * (xm / z) ** a, xm, math.inf, epsabs=1e-13, epsrel=1e-12)
        return head + far

    def tail_cutoff(self, eps):
        return self.scale * eps ** (-1.0 / self.tail_index)


@dataclass(frozen=True)
class Empirical(JumpLaw):
    """Empirical law of a positive sample; ties allowed."""

    sample: Tuple[float, ...]
    _sorted: np.ndarray = field(init=False, repr=False, compare=False)
    _suffix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        arr = np.sort(np.asarray(self.sample, dtype=float).ravel())
        if arr.size == 0:
            raise ValueError("Empirical law needs a non-empty sample")
        if not np.all(np.isfinite(arr)) or arr[0] <= 0.0:
            raise ValueError("Empirical sample values must be positive and finite")
        arr.setflags(write=False)
        object.__setattr__(self, "sample", tuple(arr.tolist()))
        object.__setattr__(self, "_sorted", arr)
        # _suffix[i] = sum of arr[i:]
        suffix = np.concatenate([np.cumsum(arr[::-1])[::-1], [0.0]])
        suffix.setflags(write=False)
        object.__setattr__(self, "_suffix", suffix)

    @property
    def values(self) -> np.ndarray:
        return self._sorted

    def mean(self):
        return float(self._sorted.mean())

    def second_moment(self):
        return float(np.mean(self._sorted**2))

    def tail(self, x):
        x = np.asarray(x, dtype=float)
        n = self._sorted.size
        out = 1.0 - np.searchsorted(self._sorted, x, side="right") / n
        return out if out.ndim else float(out)

    def integrated_tail(self, x):
        x = np.asarray(x, dtype=float)
        n = self._sorted.size
        idx = np.searchsorted(self._sorted, np.maximum(x, 0.0), side="right")
        pos = (self._suffix[idx] - (n - idx) * x) / n
        out = np.where(x >= 0.0, pos, self.mean() - x)
        return out if out.ndim else float(out)

    @property
    def mgf_abscissa(self):
        return math.inf

    def laplace_tail(self, s):
        if s == 0.0:
            return self.mean()
        return float(np.mean(np.expm1(s * self._sorted)) / s)

    def tail_cutoff(self, eps):
        return float(self._sorted[-1])


# ---------------------------------------------------------------------------
# Mixing laws for the intensity pair (Gamma, Delta)
# ---------------------------------------------------------------------------


class MixingLaw:
    """Joint law of the claim intensity Gamma and the premium intensity Delta."""

    def mean_gamma(self) -> float:
        raise NotImplementedError

    def mean_delta(self) -> float:
        raise NotImplementedError

    def var_gamma(self) -> float:
        raise NotImplementedError

    def var_delta(self) -> float:
        raise NotImplementedError

    def cov(self) -> float:
        """``Cov(Delta, Gamma)``."""
        raise NotImplementedError


@dataclass(frozen=True)
class Degenerate(MixingLaw):
    gamma0: float
    delta0: float

    def __post_init__(self):
        object.__setattr__(self, "gamma0", _positive("gamma0", self.gamma0))
        object.__setattr__(self, "delta0", _positive("delta0", self.delta0))

    def mean_gamma(self):
        return self.gamma0

    def mean_delta(self):
        return self.delta0

    def var_gamma(self):
        return 0.0

    def var_delta(self):
        return 0.0

    def cov(self):
        return 0.0

    @property
    def atoms(self):
        return ((self.gamma0, self.delta0, 1.0),)


@dataclass(frozen=True)
class Discrete(MixingLaw):
    """Finitely many ``(gamma, delta, prob)`` atoms."""

    atoms: Tuple[Tuple[float, float, float], ...]

    def __post_init__(self):
        atoms = tuple(
            (_positive("atom gamma", g), _positive("atom delta", d), float(p)) for g, d, p in self.atoms
        )
        if not atoms:
            raise ValueError("Discrete mixing needs at least one atom")
        for _, _, p in atoms:
            if not 0.0 < p <= 1.0:
                raise ValueError(f"atom probability must lie in (0, 1], got {p!r}")
        if abs(math.fsum(p for _, _, p in atoms) - 1.0) > 1e-12:
            raise ValueError("atom probabilities must sum to 1 within 1e-12")
        object.__setattr__(self, "atoms", atoms)

    def _expect(self, f):
        return math.fsum(p * f(g, d) for g, d, p in self.atoms)

    def mean_gamma(self):
        return self._expect(lambda g, d: g)

    def mean_delta(self):
        return self._expect(lambda g, d: d)

    def var_gamma(self):
        m = self.mean_gamma()
        return self._expect(lambda g, d: (g - m) ** 2)

    def var_delta(self):
        m = self.mean_delta()
        return self._expect(lambda g, d: (d - m) ** 2)

    def cov(self):
        mg, md = self.mean_gamma(), self.mean_delta()
        return self._expect(lambda g, d: (g - mg) * (d - md))


@dataclass(frozen=True)
class IndependentGamma(MixingLaw):
    """Gamma and Delta independent, each Gamma-distributed (shape/rate)."""

    gamma_shape: float
    gamma_rate: float
    delta_shape: float
    delta_rate: float

    def __post_init__(self):
        for name in ("gamma_shape", "gamma_rate", "delta_shape", "delta_rate"):
            object.__setattr__(self, name, _positive(name, getattr(self, name)))

    def mean_gamma(self):
        return self.gamma_shape / self.gamma_rate

    def mean_delta(self):
        return self.delta_shape / self.delta_rate

    def var_gamma(self):
        return self.gamma_shape / self.gamma_rate**2

    def var_delta(self):
        return self.delta_shape / self.delta_rate**2

    def cov(self):
        return 0.0


# ---------------------------------------------------------------------------
# Full model and moment formulas
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelSpec:
    """Initial capital ``u``, drift ``c``, premium/claim size laws and mixing law."""

    u: float
    c: float
    premium_law: JumpLaw
    claim_law: JumpLaw
    mixing: MixingLaw

    def __post_init__(self):
        u, c = float(self.u), float(self.c)
        if not (u >= 0.0 and math.isfinite(u)):
            raise ValueError(f"initial capital must be >= 0, got {u!r}")
        if not (c >= 0.0 and math.isfinite(c)):
            raise ValueError(f"premium drift must be >= 0, got {c!r}")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "c", c)

    def with_u(self, u: float) -> "ModelSpec":
        return ModelSpec(u, self.c, self.premium_law, self.claim_law, self.mixing)


def mean_surplus(model: ModelSpec, t: float) -> float:
    """``E[K_t] = u + t (c + E[Y] E[Delta] - E[Z] E[Gamma])``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    mix = model.mixing
    slope = model.c + model.premium_law.mean() * mix.mean_delta() - model.claim_law.mean() * mix.mean_gamma()
    return model.u + t * slope


def var_surplus(model: ModelSpec, t: float) -> float:
    """Variance of ``K_t`` via the law of total variance.

    ``E[Var(K_t | Gamma, Delta)] = t (E[Y^2] E[Delta] + E[Z^2] E[Gamma])`` and
    ``Var(E[K_t | Gamma, Delta]) = t^2 Var(E[Y] Delta - E[Z] Gamma)``; the
    overdispersion term therefore carries squared means, not second moments.

    Raises:
        InfiniteSecondMoment: if a size law has no finite second moment.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    ey2 = model.premium_law.second_moment()
    ez2 = model.claim_law.second_moment()
    if not (math.isfinite(ey2) and math.isfinite(ez2)):
        raise InfiniteSecondMoment("premium and claim sizes must be square-integrable")
    mix = model.mixing
    ey = model.premium_law.mean()
    ez = model.claim_law.mean()
    within = t * (ey2 * mix.mean_delta() + ez2 * mix.mean_gamma())
    between = t * t * (ey * ey * mix.var_delta() + ez * ez * mix.var_gamma() - 2.0 * ey * ez * mix.cov())
    return within + between


def net_profit_margin(gamma: float, delta: float, model: ModelSpec) -> float:
    """``c + delta E[Y] - gamma E[Z]``; a value ``<= 0`` means certain ruin."""
    return model.c + delta * model.premium_law.mean() - gamma * model.claim_law.mean()
