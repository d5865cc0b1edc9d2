"""Numerical solution of the two-sided ruin integral equation.

For a positive drift ``c`` the ruin probability ``nu`` of the conditional
model satisfies, for ``u >= 0``,

    c nu(u) = gamma [ int_0^u Zbar(z) nu(u - z) dz + int_u^inf Zbar(z) dz ]
              - delta int_0^inf Ybar(z) nu(u + z) dz

with ``nu = 1`` on the negative half-line. The equation couples every node to
nodes on both sides, so it is discretized by trapezoidal collocation on a
uniform grid and solved by damped fixed-point iteration. Both convolution
sums are evaluated by FFT.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy import signal
from scipy.sparse.linalg import LinearOperator, gmres

from .adjustment import adjustment_kernel
from .errors import MixRuinError, NoConvergence, NotApplicable
from .kernels import ConditionalModel, SignedKernel, TiltedKernel

logger = logging.getLogger(__name__)

__all__ = [
    "LundbergClosure",
    "ZeroClosure",
    "SolverGrid",
    "SolverSolution",
    "default_grid",
    "find_adjustment",
    "solve_renewal",
    "solve_conditional",
    "verify_tilt_identity",
]

ROUNDOFF_FLOOR = 64 * np.finfo(float).eps
DAMPING = 0.5
KERNEL_TAIL_EPS = 1e-12
# log(1e12): beyond this many decay lengths the Lundberg closure is negligible
_CLOSURE_DECAY = 27.631021115928547


@dataclass(frozen=True)
class LundbergClosure:
    """Extend beyond ``u_max`` by ``nu(u_max) exp(-r (u - u_max))``."""

    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("LundbergClosure needs r > 0")


@dataclass(frozen=True)
class ZeroClosure:
    """Extend beyond ``u_max`` by 0."""


TailMode = Union[LundbergClosure, ZeroClosure]


@dataclass(frozen=True)
class SolverGrid:
    h: float
    n: int
    tail_mode: TailMode = field(default_factory=ZeroClosure)
    tolerance: float = 1e-10
    max_iterations: int = 100_000

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("grid step h must be positive")
        if self.n < 2:
            raise ValueError("grid needs at least 3 nodes (n >= 2)")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")

    @classmethod
    def from_range(cls, h: float, u_max: float, **kwargs) -> "SolverGrid":
        return cls(h=h, n=int(round(u_max / h)), **kwargs)

    @property
    def u_max(self) -> float:
        return self.n * self.h

    @property
    def nodes(self) -> np.ndarray:
        return self.h * np.arange(self.n + 1)


def _closure_values(tail_mode, last, h, count):
    """Values at ``u_max + h, ..., u_max + count h``."""
    if isinstance(tail_mode, LundbergClosure):
        return last * np.exp(-tail_mode.r * h * np.arange(1, count + 1))
    return np.zeros(count)


@dataclass(frozen=True)
class SolverSolution:
    u: np.ndarray
    values: np.ndarray
    residual: float
    iterations_used: int
    tail_mode: TailMode
    certain_ruin: bool = False
    method: str = "fixed_point"

    def __call__(self, u):
        """Ruin probability at arbitrary ``u``: 1 below zero, linear between nodes, closure beyond."""
        u = np.asarray(u, dtype=float)
        u_max = float(self.u[-1])
        inside = np.interp(np.clip(u, 0.0, u_max), self.u, self.values)
        if isinstance(self.tail_mode, LundbergClosure) and not self.certain_ruin:
            beyond = self.values[-1] * np.exp(-self.tail_mode.r * np.maximum(u - u_max, 0.0))
        elif self.certain_ruin:
            beyond = np.ones_like(u)
        else:
            beyond = np.zeros_like(u)
        out = np.where(u < 0, 1.0, np.where(u > u_max, beyond, inside))
        return out if out.ndim else float(out)


def default_grid(kernel: SignedKernel, c: float, h: float = 0.01, u_max: Optional[float] = None, **kwargs) -> SolverGrid:
    """Step ``h``, ``u_max = max(40, 12 / r)`` and a Lundberg closure when ``r`` exists."""
    r = find_adjustment(kernel, c)
    if u_max is None:
        u_max = max(40.0, 12.0 / r) if r else 40.0
    tail = LundbergClosure(r) if r else ZeroClosure()
    return SolverGrid.from_range(h, u_max, tail_mode=tail, **kwargs)


def find_adjustment(kernel: SignedKernel, c: float) -> Optional[float]:
    if c <= 0 or kernel.gamma <= 0:
        return None
    try:
        return adjustment_kernel(kernel, c).r
    except MixRuinError:
        return None


class _Operator:
    """Affine map ``nu -> T(nu)`` of the collocated equation."""

    def __init__(self, kernel: SignedKernel, c: float, grid: SolverGrid):
        h, n = grid.h, grid.n
        self.h, self.n, self.c = h, n, c
        self.tail_mode = grid.tail_mode
        u = grid.nodes
        self.fz = kernel.gamma * np.asarray(kernel.claim_law.tail(u), dtype=float)
        self.tail_term = kernel.gamma * np.asarray(kernel.claim_law.integrated_tail(u), dtype=float)

        self.k_up = 0
        if kernel.delta > 0:
            z_cut = kernel.premium_law.tail_cutoff(KERNEL_TAIL_EPS)
            k_up = int(math.ceil(z_cut / h))
            if isinstance(grid.tail_mode, LundbergClosure):
                k_up = min(k_up, n + int(math.ceil(_CLOSURE_DECAY / (grid.tail_mode.r * h))))
            else:
                k_up = min(k_up, n)
            self.k_up = max(k_up, 1)
            self.fy = kernel.delta * np.asarray(kernel.premium_law.tail(h * np.arange(self.k_up + 1)), dtype=float)

    def _extend(self, nu):
        if self.k_up == 0:
            return nu
        return np.concatenate([nu, _closure_values(self.tail_mode, nu[-1], self.h, self.k_up)])

    def linear(self, nu):
        """Linear part ``L nu`` (the affine constant is :attr:`tail_term` / c)."""
        h, n = self.h, self.n
        conv = signal.fftconvolve(nu, self.fz)[: n + 1] * h
        conv -= 0.5 * h * (self.fz[0] * nu + self.fz * nu[0])
        out = conv
        if self.k_up:
            ext = self._extend(nu)
            K = self.k_up
            corr = signal.fftconvolve(ext, self.fy[::-1])[K : K + n + 1] * h
            corr -= 0.5 * h * (self.fy[0] * ext[: n + 1] + self.fy[K] * ext[K : K + n + 1])
            out = out - corr
        return out / self.c

    def apply(self, nu):
        return self.linear(nu) + self.tail_term / self.c


def solve_renewal(kernel: SignedKernel, c: float, grid: SolverGrid) -> SolverSolution:
    """Solve the ruin integral equation on ``grid``.

    When the net profit condition fails the result is ``nu = 1`` with
    ``certain_ruin=True`` and no iteration.

    Raises:
        NotApplicable: ``c <= 0`` (the zero-drift equation has no diagonal term).
        NoConvergence: residual still above ``grid.tolerance``.
    """
    if not c > 0:
        raise NotApplicable("the renewal solver needs a positive premium drift; use the closed form for c = 0")
    nodes = grid.nodes
    if c - kernel.signed_mass <= 0:
        return SolverSolution(
            u=nodes,
            values=np.ones_like(nodes),
            residual=0.0,
            iterations_used=0,
            tail_mode=grid.tail_mode,
            certain_ruin=True,
            method="short_circuit",
        )

    op = _Operator(kernel, c, grid)
    if isinstance(grid.tail_mode, LundbergClosure):
        nu = np.minimum(1.0, np.exp(-grid.tail_mode.r * nodes))
    else:
        nu = np.ones_like(nodes)

    best = math.inf
    residual = math.inf
    it = 0
    diverging = False
    for it in range(1, grid.max_iterations + 1):
        t_nu = op.apply(nu)
        residual = float(np.max(np.abs(t_nu - nu)))
        if residual <= grid.tolerance:
            break
        if not math.isfinite(residual) or residual > 1e3 * max(best, grid.tolerance):
            diverging = True
            break
        best = min(best, residual)
        nu = (1.0 - DAMPING) * nu + DAMPING * t_nu
    else:
        t_nu = op.apply(nu)
        residual = float(np.max(np.abs(t_nu - nu)))

    method = "fixed_point"
    # at the rounding floor a Krylov restart cannot do better
    if residual > grid.tolerance and residual <= ROUNDOFF_FLOOR:
        raise NoConvergence(
            f"renewal solver residual {residual:.3e} at rounding level, above tolerance {grid.tolerance:.1e}",
            residual=residual,
            iterations=it,
        )
    if residual > grid.tolerance:
        logger.info("fixed-point iteration stalled (residual %.3e); switching to GMRES", residual)
        nu, residual = _krylov_solve(op, grid, nu if not diverging else np.ones_like(nodes))
        method = "gmres"
        if residual > grid.tolerance:
            raise NoConvergence(
                f"renewal solver residual {residual:.3e} above tolerance {grid.tolerance:.1e}",
                residual=residual,
                iterations=it,
            )
    return SolverSolution(
        u=nodes, values=nu, residual=residual, iterations_used=it, tail_mode=grid.tail_mode, method=method
    )


def _krylov_solve(op: _Operator, grid: SolverGrid, guess):
    size = grid.n + 1
    A = LinearOperator((size, size), matvec=lambda v: v - op.linear(np.asarray(v).ravel()), dtype=float)
    rhs = op.tail_term / op.c
    nu, _ = gmres(A, rhs, x0=guess, rtol=0.0, atol=0.1 * max(grid.tolerance, ROUNDOFF_FLOOR), restart=200, maxiter=50)
    residual = float(np.max(np.abs(op.apply(nu) - nu)))
    return nu, residual


def solve_conditional(cm: ConditionalModel, grid: Optional[SolverGrid] = None, **grid_kwargs) -> SolverSolution:
    """Convenience wrapper: build the kernel and a default grid for ``cm``."""
    from .kernels import build_signed_kernel

    kernel = build_signed_kernel(cm)
    if grid is None:
        grid = default_grid(kernel, cm.c, **grid_kwargs)
    return solve_renewal(kernel, cm.c, grid)


def verify_tilt_identity(solution: SolverSolution, tilted: TiltedKernel, grid: SolverGrid) -> float:
    """Sup defect of ``xi = xi * H`` on nodes in ``[0, u_max / 2]``.

    ``xi(v) = exp(r v) nu(v)`` with ``nu = 1`` below zero and the solution's
    closure beyond ``u_max``. The convolution is evaluated with the tilted
    densities on the grid; the part of the claim integral reaching below zero
    is closed analytically.
    """
    h, n, r = grid.h, grid.n, tilted.r
    m = n // 2
    if m + 1 < 10:
        raise ValueError("tilt identity check needs at least 10 nodes in [0, u_max/2]")
    nodes = grid.nodes
    xi = np.exp(r * nodes) * np.asarray(solution.values, dtype=float)

    # claim side: trapezoid over [0, u_j] plus exact tail with xi(v) = exp(r v) for v < 0
    pos = tilted.positive_density(nodes[: m + 1])
    conv = signal.fftconvolve(xi[: m + 1], pos)[: m + 1] * h
    conv -= 0.5 * h * (pos[0] * xi[: m + 1] + pos * xi[0])
    below = np.exp(r * nodes[: m + 1]) * tilted.gamma * np.asarray(
        tilted.claim_law.integrated_tail(nodes[: m + 1])
    ) / tilted.c

    # premium side: trapezoid over [0, Z] with Z where the tilted density is negligible
    z_cut = tilted.premium_law.tail_cutoff(1e-14)
    z_cut = min(z_cut, _CLOSURE_DECAY / r + 10.0 * tilted.premium_law.mean())
    K = max(int(math.ceil(z_cut / h)), 1)
    span = m + K + 1
    ext = np.empty(span)
    take = min(span, n + 1)
    ext[:take] = xi[:take]
    if span > take:
        extra_u = h * np.arange(take, span)
        ext[take:] = np.exp(r * extra_u) * np.asarray(solution(extra_u))
    neg = tilted.negative_density(h * np.arange(K + 1))
    corr = signal.fftconvolve(ext, neg[::-1])[K : K + m + 1] * h
    corr -= 0.5 * h * (neg[0] * ext[: m + 1] + neg[K] * ext[K : K + m + 1])

    rhs = conv + below - corr
    return float(np.max(np.abs(xi[: m + 1] - rhs)))
