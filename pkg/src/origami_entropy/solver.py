"""Certified entropy enclosures from the monotone equation f_t = 1/k.

The decay sum is strictly decreasing in t, blows up as t -> 0+ and vanishes
as t -> infinity, so the equation f_t = 1/k has a unique root: the entropy.
Solving with the truncated sum gives a lower bound for the root; adding the
truncation tail gives an upper bound.  The pair is a certified enclosure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import mpmath as mp

from .lattice import (
    UnimodularMap,
    f_truncated,
    f_truncated_mp,
    f_truncated_mp_deriv,
    tail_bound_mp,
)
from .surface import StratumInfo

DEFAULT_ROOT_TOL = 1e-13
_BISECTION_CAP = 200
_N_SCHEDULE_START = 25
_N_CAP = 3200


class SolverError(RuntimeError):
    pass


class EnclosureWidthError(SolverError):
    """Raised when the N cap is hit; carries the best enclosure found."""

    def __init__(self, message: str, best: "EntropyEnclosure"):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class EntropyEnclosure:
    """Certified interval [h_lo, h_hi] containing the true entropy."""

    h_lo: float
    h_hi: float
    N: int
    root_tol: float
    evaluations: int

    def __post_init__(self) -> None:
        if self.h_lo > self.h_hi + 2 * self.root_tol:
            raise SolverError(f"inverted enclosure [{self.h_lo}, {self.h_hi}]")

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.h_lo + self.h_hi)

    @property
    def width(self) -> float:
        return self.h_hi - self.h_lo


def solve_monotone_decreasing(
    g: Callable[[float], float],
    target: float,
    t_seed: float,
    root_tol: float = DEFAULT_ROOT_TOL,
) -> tuple[float, int]:
    """Root of g(t) = target for strictly decreasing g on (0, inf).

    Brackets by doubling/halving from t_seed, then bisects.  Returns the
    final bracket midpoint and the number of g evaluations.
    """
    if target <= 0:
        raise SolverError("target must be positive")
    if t_seed <= 0:
        raise SolverError("t_seed must be positive")
    evals = 0

    def geval(t: float) -> float:
        nonlocal evals
        evals += 1
        return g(t)

    lo = hi = t_seed
    glo = ghi = geval(t_seed)
    steps = 0
    while ghi >= target:  # g too large: move right
        lo, glo = hi, ghi
        hi *= 2.0
        ghi = geval(hi)
        steps += 1
        if steps > _BISECTION_CAP:
            raise SolverError("no bracket found while doubling: g does not decay to 0")
    steps = 0
    while glo < target:  # g too small: move left
        hi, ghi = lo, glo
        lo /= 2.0
        glo = geval(lo)
        steps += 1
        if steps > _BISECTION_CAP:
            raise SolverError("no bracket found while halving: g does not blow up at 0")
    # Invariant: g(lo) >= target > g(hi).
    iterations = 0
    while hi - lo > root_tol and iterations < _BISECTION_CAP:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break  # bracket at floating-point resolution
        if geval(mid) >= target:
            lo = mid
        else:
            hi = mid
        iterations += 1
    return 0.5 * (lo + hi), evals


def entropy_enclosure(
    stratum: StratumInfo,
    A: UnimodularMap,
    N: int,
    root_tol: float = DEFAULT_ROOT_TOL,
) -> EntropyEnclosure:
    """Enclose the entropy of the deformed surface by solving at cutoff N."""
    sigma = stratum.sigma
    target = 1.0 / stratum.k
    t_seed = 4.0 * sigma

    def g_lo(t: float) -> float:
        return f_truncated(A, sigma, t, N).value

    def g_hi(t: float) -> float:
        s = f_truncated(A, sigma, t, N)
        return s.value + s.tail_bound

    h_lo, e1 = solve_monotone_decreasing(g_lo, target, t_seed, root_tol)
    h_hi, e2 = solve_monotone_decreasing(g_hi, target, t_seed, root_tol)
    # Root tolerance slack: each root is only located to root_tol.
    if h_hi < h_lo:
        h_lo, h_hi = h_hi, h_lo
    return EntropyEnclosure(h_lo=h_lo, h_hi=h_hi, N=N, root_tol=root_tol, evaluations=e1 + e2)


def entropy(
    stratum: StratumInfo,
    A: UnimodularMap,
    width_goal: float,
    root_tol: float = DEFAULT_ROOT_TOL,
) -> EntropyEnclosure:
    """Grow the cutoff geometrically until the enclosure is narrow enough."""
    if width_goal <= 0:
        raise SolverError("width_goal must be positive")
    best: EntropyEnclosure | None = None
    N = _N_SCHEDULE_START
    while N <= _N_CAP:
        try:
            enc = entropy_enclosure(stratum, A, N, root_tol)
        except EnclosureWidthError:
            raise
        except SolverError:
            # At small N the tail term exp(t*D) can dominate and the upper
            # equation never brackets; a larger cutoff restores decay.
            N *= 2
            continue
        if best is None or enc.width < best.width:
            best = enc
        if enc.width <= width_goal:
            return enc
        N *= 2
    if best is None:
        raise SolverError(
            f"no cutoff up to {_N_CAP} produced a solvable upper bound for {A!r}")
    raise EnclosureWidthError(
        f"cutoff cap {_N_CAP} reached with enclosure width {best.width:.3e} "
        f"(goal {width_goal:.3e})",
        best,
    )


def entropy_enclosure_extended(
    stratum: StratumInfo,
    A: UnimodularMap,
    N: int,
    dps: int = 40,
) -> tuple:
    """Extended-precision enclosure (pair of mpmath floats).

    Runs the double-precision solve for a seed, then polishes both roots by
    Newton iteration at the requested number of significant digits.
    """
    if dps < 30:
        raise SolverError("extended mode needs at least 30 significant digits")
    seed = entropy_enclosure(stratum, A, N)
    nk1 = stratum.n_squares
    target = mp.mpf(1) / stratum.k
    with mp.workdps(dps):
        def newton(t0, with_tail: bool):
            t = mp.mpf(t0)
            for _ in range(12):
                val = f_truncated_mp(A, nk1, t, N) - target
                dv = f_truncated_mp_deriv(A, nk1, t, N)
                if with_tail:
                    eps = mp.mpf(10) ** (-dps)
                    tb = tail_bound_mp(A, nk1, t, N)
                    val += tb
                    dv += (tail_bound_mp(A, nk1, t + eps, N) - tb) / eps
                step = val / dv
                t -= step
                if abs(step) < mp.mpf(10) ** (-(dps - 2)) * abs(t):
                    break
            return t

        h_lo = newton(seed.h_lo, with_tail=False)
        h_hi = newton(seed.h_hi, with_tail=True)
        return h_lo, h_hi
