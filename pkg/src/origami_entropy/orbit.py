"""Orbit parameterization, grid scans, finite differences and minimization.

Surfaces in the orbit are parameterized by a shear s and a diagonal
stretch u applied on top of a base map:  diag(e^u, e^-u) * (1 s; 0 1) * base.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import UnimodularMap, diagonal, f_truncated, shear
from .solver import EntropyEnclosure, SolverError, entropy
from .surface import StratumInfo

DEFAULT_FD_STEP = 1e-3
_MINIMIZE_EVAL_CAP = 10_000


@dataclass(frozen=True)
class OrbitPoint:
    s: float
    u: float
    base: UnimodularMap


def orbit_matrix(point: OrbitPoint) -> UnimodularMap:
    """diag(e^u, e^-u) * shear(s) * base."""
    return diagonal(point.u) @ shear(point.s) @ point.base


@dataclass(frozen=True)
class GridScan:
    s_values: tuple[float, ...]
    u_values: tuple[float, ...]
    entropies: np.ndarray  # shape (len(u_values), len(s_values)), midpoints
    widths: np.ndarray
    width_goal: float
    complete: bool

    def argmin_cell(self) -> tuple[float, float]:
        iu, js = np.unravel_index(np.nanargmin(self.entropies), self.entropies.shape)
        return self.s_values[js], self.u_values[iu]

    def to_csv(self) -> str:
        """Rows in u-major order, header ``s,u,h_mid,h_width``."""
        lines = ["s,u,h_mid,h_width"]
        for iu, u in enumerate(self.u_values):
            for js, s in enumerate(self.s_values):
                lines.append("%.17g,%.17g,%.17g,%.17g"
                             % (s, u, self.entropies[iu, js], self.widths[iu, js]))
        return "\n".join(lines) + "\n"


def scan(
    stratum: StratumInfo,
    base: UnimodularMap,
    s_grid,
    u_grid,
    width_goal: float = 1e-10,
) -> GridScan:
    """Entropy enclosure at every point of the (s, u) grid.

    Cells where the solver fails are recorded as NaN and mark the scan
    incomplete; the remaining cells are still computed.
    """
    s_values = tuple(float(s) for s in s_grid)
    u_values = tuple(float(u) for u in u_grid)
    if not s_values or not u_values:
        raise ValueError("grids must be nonempty")
    if list(s_values) != sorted(s_values) or list(u_values) != sorted(u_values):
        raise ValueError("grids must be ascending")
    mids = np.full((len(u_values), len(s_values)), np.nan)
    widths = np.full_like(mids, np.nan)
    complete = True
    for iu, u in enumerate(u_values):
        for js, s in enumerate(s_values):
            A = orbit_matrix(OrbitPoint(s, u, base))
            try:
                enc = entropy(stratum, A, width_goal)
            except SolverError:
                complete = False
                continue
            mids[iu, js] = enc.midpoint
            widths[iu, js] = enc.width
    mids.setflags(write=False)
    widths.setflags(write=False)
    return GridScan(s_values, u_values, mids, widths, width_goal, complete)


def _orbit_value(
    stratum: StratumInfo,
    base: UnimodularMap,
    s: float,
    u: float,
    target: str,
    t_fixed: float | None,
    width_goal: float,
) -> float:
    A = orbit_matrix(OrbitPoint(s, u, base))
    if target == "f":
        if t_fixed is None:
            raise ValueError("t_fixed is required when target='f'")
        return f_truncated(A, stratum.sigma, t_fixed, 100).value
    if target == "entropy":
        return entropy(stratum, A, width_goal).midpoint
    raise ValueError(f"unknown target {target!r}")


def fd_gradient(
    stratum: StratumInfo,
    base: UnimodularMap,
    target: str = "entropy",
    t_fixed: float | None = None,
    step: float = DEFAULT_FD_STEP,
    width_goal: float = 1e-11,
) -> np.ndarray:
    """Central first differences of the target in (s, u) at (0, 0)."""
    if step <= 0:
        raise ValueError("step must be positive")

    def val(s, u):
        return _orbit_value(stratum, base, s, u, target, t_fixed, width_goal)

    gs = (val(step, 0.0) - val(-step, 0.0)) / (2 * step)
    gu = (val(0.0, step) - val(0.0, -step)) / (2 * step)
    return np.array([gs, gu])


def fd_hessian(
    stratum: StratumInfo,
    base: UnimodularMap,
    target: str = "entropy",
    t_fixed: float | None = None,
    step: float = DEFAULT_FD_STEP,
    width_goal: float = 1e-11,
) -> tuple[np.ndarray, float]:
    """Central second differences in (s, u) at (0, 0); returns (H, det H)."""
    if step <= 0:
        raise ValueError("step must be positive")

    def val(s, u):
        return _orbit_value(stratum, base, s, u, target, t_fixed, width_goal)

    f00 = val(0.0, 0.0)
    h2 = step * step
    hss = (val(step, 0) - 2 * f00 + val(-step, 0)) / h2
    huu = (val(0, step) - 2 * f00 + val(0, -step)) / h2
    hsu = (val(step, step) - val(step, -step) - val(-step, step) + val(-step, -step)) / (4 * h2)
    H = np.array([[hss, hsu], [hsu, huu]])
    return H, float(np.linalg.det(H))


def minimize(
    stratum: StratumInfo,
    base: UnimodularMap,
    start: OrbitPoint,
    stop_tol: float = 1e-5,
    width_goal: float = 1e-11,
) -> OrbitPoint:
    """Compass (pattern) search on the enclosure midpoint, halving steps.

    Polls the four axis directions, moves to any strict improvement, halves
    the step on failure, and stops once the step falls below stop_tol.
    """
    if abs(start.s) > 3 or abs(start.u) > 1.5:
        raise ValueError("start outside the supported region |s|<=3, |u|<=1.5")
    s, u = start.s, start.u
    evals = 0

    def val(ss, uu):
        nonlocal evals
        evals += 1
        if evals > _MINIMIZE_EVAL_CAP:
            raise SolverError("minimize: evaluation cap reached")
        return entropy(stratum, orbit_matrix(OrbitPoint(ss, uu, base)), width_goal).midpoint

    current = val(s, u)
    step = 0.1
    while step >= stop_tol:
        moved = False
        for ds, du in ((step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)):
            cand = val(s + ds, u + du)
            if cand < current:
                s, u, current = s + ds, u + du, cand
                moved = True
                break
        if not moved:
            step *= 0.5
    return OrbitPoint(s, u, base)
