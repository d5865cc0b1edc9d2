"""Adjustment coefficients and Lundberg bounds."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import NetProfitViolated, NoAdjustmentCoefficient, NoMGF
from .kernels import ConditionalModel, SignedKernel, build_signed_kernel
from .model import Pareto

__all__ = [
    "Method",
    "AdjustmentResult",
    "adjustment_exponential",
    "adjustment_general",
    "adjustment_kernel",
    "check_adjustment",
    "lundberg_bound",
]

MAX_BISECTION_ITERATIONS = 200


class Method(enum.Enum):
    CLOSED_FORM = "closed_form"
    BISECTION = "bisection"


@dataclass(frozen=True)
class AdjustmentResult:
    r: float
    method: Method
    residual: float


def _exponential_root(c, a, b, gamma, delta):
    # c r^2 - B r - C0 = 0 with the discriminant written as in the closed form.
    B = c * (b - a) - delta - gamma
    C0 = c * a * b + b * delta - a * gamma
    disc = ((a + b) * c + delta) ** 2 - 2.0 * ((a + b) * c - delta) * gamma + gamma**2
    root = math.sqrt(max(disc, 0.0))
    if B > 0.0:
        return (B + root) / (2.0 * c)
    # rationalized form of the same root; exact at c = 0 and free of cancellation as c -> 0
    return 2.0 * C0 / (root - B)


def adjustment_exponential(c: float, a: float, b: float, gamma: float, delta: float) -> AdjustmentResult:
    """Positive root of ``c + delta / (a + r) = gamma / (b - r)``.

    ``a`` is the rate of the exponential premium sizes, ``b`` that of the
    claims. ``c = 0`` gives ``r = (b delta - a gamma) / (delta + gamma)``;
    ``delta = 0`` is accepted and recovers the classical ``b - gamma / c``.

    Raises:
        NetProfitViolated: when ``c + delta / a <= gamma / b``.
    """
    if c < 0 or delta < 0 or not (a > 0 and b > 0 and gamma > 0):
        raise ValueError("need c, delta >= 0 and a, b, gamma > 0")
    if c + delta / a <= gamma / b:
        raise NetProfitViolated(f"c + delta/a = {c + delta / a!r} <= gamma/b = {gamma / b!r}")
    if c == 0.0:
        r = (b * delta - a * gamma) / (delta + gamma)
    else:
        r = _exponential_root(c, a, b, gamma, delta)
    residual = abs(c + delta / (a + r) - gamma / (b - r))
    return AdjustmentResult(r=r, method=Method.CLOSED_FORM, residual=residual)


def adjustment_general(cm: ConditionalModel) -> AdjustmentResult:
    """Adjustment coefficient of ``cm`` by bisection; see :func:`adjustment_kernel`."""
    return adjustment_kernel(build_signed_kernel(cm), cm.c)


def adjustment_kernel(kernel: SignedKernel, c: float) -> AdjustmentResult:
    """Root of ``int exp(r z) dG(z) = c`` by bisection over ``(0, r_max)``.

    ``r_max`` is the MGF abscissa of the claim law. For laws with an
    unbounded strip the bracket is grown by doubling.

    Raises:
        NoMGF: Pareto claims.
        NetProfitViolated: nonpositive net profit margin.
        NoAdjustmentCoefficient: no sign change could be bracketed.
    """
    if isinstance(kernel.claim_law, Pareto):
        raise NoMGF("Pareto claims have no exponential moments, so no adjustment coefficient exists")
    margin = c - kernel.signed_mass
    if margin <= 0:
        raise NetProfitViolated(f"net profit margin {margin!r} is not positive")

    def f(r):
        return kernel.transform(r) - c

    r_max = kernel.claim_law.mgf_abscissa
    if math.isfinite(r_max):
        eps = 1e-12 * r_max
        lo, hi = eps, r_max - eps
        try:
            f_hi = f(hi)
        except OverflowError:
            f_hi = math.inf
        if not f_hi > 0:
            raise NoAdjustmentCoefficient("MGF balance has no sign change inside the convergence strip")
    else:
        lo, hi = 1e-12, 1.0
        for _ in range(64):
            try:
                f_hi = f(hi)
            except OverflowError:
                f_hi = math.inf
            if f_hi > 0:
                break
            lo, hi = hi, 2.0 * hi
        else:
            raise NoAdjustmentCoefficient("could not bracket a root of the MGF balance")
    if f(lo) >= 0:
        raise NoAdjustmentCoefficient("MGF balance is already nonnegative at the left end of the bracket")

    for _ in range(MAX_BISECTION_ITERATIONS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        try:
            f_mid = f(mid)
        except OverflowError:
            f_mid = math.inf
        if f_mid > 0:
            hi = mid
        else:
            lo = mid
    # keep whichever bracket end has the smaller defect
    r = min((lo, hi), key=lambda x: abs(f(x)))
    return AdjustmentResult(r=r, method=Method.BISECTION, residual=abs(f(r)))


def check_adjustment(cm: ConditionalModel, r: float, tol: float = 1e-8) -> None:
    """Raise ``ValueError`` unless ``r`` balances the MGF within ``tol`` (relative to ``c``)."""
    defect = build_signed_kernel(cm).transform(r) - cm.c
    if abs(defect) > tol * max(1.0, cm.c):
        raise ValueError(f"r={r!r} is not an adjustment coefficient (balance defect {defect:.3e})")


def lundberg_bound(r: float, u: float) -> float:
    """Upper bound ``exp(-r u)`` on the ruin probability."""
    if not r > 0:
        raise ValueError("r must be positive")
    if u < 0:
        raise ValueError("u must be nonnegative")
    return math.exp(-r * u)
