"""Named verification suites driven by the ``verify`` CLI subcommand.

Each check pits an independent computation against the formula it is meant
to confirm: ray-traced connection counts against the lattice sum, partial
geometric series against their closed form, finite differences of the
Gaussian lattice sum against the known monotonicity regions, random
lattices against the triangular minimizer, and brute-force truncation gaps
against the closed-form tail bound.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from . import oracle
from .lattice import (
    UnimodularMap,
    diagonal,
    equilateral_matrix,
    f_truncated,
    identity_map,
    modular_lattice,
    shear,
    tail_bound,
    theta_sum,
)
from .surface import builtin_surface, check_hypothesis


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def random_unimodular(rng: np.random.Generator) -> UnimodularMap:
    # shear(s) * diag(e^u, e^-u) with s in [-3,3], u in [-1,1]
    s = rng.uniform(-3.0, 3.0)
    u = rng.uniform(-1.0, 1.0)
    return shear(s) @ diagonal(u)


def check_multiplicities(max_coeff: int = 3, expected_k: int | None = None) -> CheckResult:
    """Every (vertex class, holonomy) pair carries exactly k+1 connections."""
    failures = []
    for name in ("L", "EW"):
        surf = builtin_surface(name)
        stratum = check_hypothesis(surf)
        k = stratum.k if expected_k is None else expected_k
        records = oracle.enumerate_singular_connections(surf, max_coeff)
        counts = Counter((r.start_vertex, r.holonomy) for r in records)
        bad = {key: c for key, c in counts.items() if c != k + 1}
        n_dirs = (2 * max_coeff + 1) ** 2 - 1
        if len(counts) != stratum.n * n_dirs or bad:
            failures.append(f"{name}: {len(bad)} pairs off target {k + 1}")
    detail = "; ".join(failures) if failures else f"L and EW, window {max_coeff}: all pairs at k+1"
    return CheckResult("connection multiplicities", not failures, detail)


def check_oracle_agreement(max_coeff: int = 3, ts=(3.0, 5.0), tol: float = 1e-12) -> CheckResult:
    """Traced weighted sums reproduce n*(k+1) times the truncated lattice sum."""
    worst = 0.0
    for name in ("L", "EW"):
        surf = builtin_surface(name)
        stratum = check_hypothesis(surf)
        for A in (identity_map(), equilateral_matrix()):
            records = oracle.enumerate_singular_connections(surf, max_coeff, A)
            for t in ts:
                traced = math.fsum(math.exp(-t * r.length) for r in records)
                formula = stratum.n_squares * f_truncated(A, stratum.sigma, t, max_coeff).value
                worst = max(worst, abs(traced - formula))
    return CheckResult("oracle vs lattice sum", worst <= tol, f"max |traced - formula| = {worst:.3e}")


def check_series_identity() -> CheckResult:
    """Partial chain sums match the closed form above the entropy, and the
    below-entropy regime is rejected."""
    stratum = check_hypothesis(builtin_surface("L"))
    A = equilateral_matrix()
    t, m_max, N = 5.0, 50, 60
    residual = oracle.series_identity_check(stratum, A, t=t, m_max=m_max, N=N)
    # The residual is exactly the geometric remainder n(k+1)f(kf)^m/(1-kf).
    k = stratum.k
    f = f_truncated(A, stratum.sigma, t, N).value
    remainder = stratum.n_squares * f * (k * f) ** m_max / (1.0 - k * f)
    ok = residual <= remainder * (1.0 + 1e-9)
    try:
        oracle.series_identity_check(stratum, A, t=4.0, m_max=50, N=60)
        rejected = False
    except oracle.OracleError:
        rejected = True
    ok = ok and rejected
    return CheckResult("series identity", ok,
                       f"residual {residual:.3e} vs remainder {remainder:.3e}; "
                       f"below-entropy rejected: {rejected}")


def check_theta_monotonicity(ts=(1.0, 2.0, 4.0), step: float = 1e-4,
                             margin: float = 1e-8, N: int = 32) -> CheckResult:
    """Finite-difference monotonicity of the Gaussian sum over lattice shapes:
    decreasing toward x=1/2, increasing in y above the unit circle.  The
    margin absorbs finite-difference noise where the true derivative is
    exponentially small."""
    bad = 0
    xs = np.linspace(0.05, 0.45, 20)
    ys = np.linspace(0.55, 2.0, 20)
    for t in ts:
        for x in xs:
            for y in ys:
                diff = (theta_sum(modular_lattice(x + step, y), t, N)
                        - theta_sum(modular_lattice(x - step, y), t, N)) / (2 * step)
                if not diff <= margin:
                    bad += 1
    xs2 = np.linspace(0.0, 0.5, 20)
    ys2 = np.linspace(1.05, 2.0, 20)
    for t in ts:
        for x in xs2:
            for y in ys2:
                diff = (theta_sum(modular_lattice(x, y + step), t, N)
                        - theta_sum(modular_lattice(x, y - step), t, N)) / (2 * step)
                if not diff >= -margin:
                    bad += 1
    return CheckResult("gaussian-sum monotonicity grid", bad == 0,
                       f"{bad} sign violations on 2x(20x20)x{len(ts)} grid")


def _decay_sum(A: UnimodularMap, t: float, N: int) -> float:
    # One-shot windowed sum over the unimodular lattice A(Z^2); not cached
    # because badly conditioned lattices need windows too large to keep.
    r = np.arange(-N, N + 1)
    aa, bb = np.meshgrid(r, r, indexing="ij")
    norms = np.hypot(A.a * aa + A.b * bb, A.c * aa + A.d * bb).ravel()
    norms = norms[norms > 0]
    return float(np.sum(np.exp(-t * norms)))


def _decay_window(A: UnimodularMap, exponent: float = 45.0) -> int:
    # |A(a,b)| >= d(A)*max(|a|,|b|): window large enough that dropped terms
    # are below e^-exponent even at t = 1.
    from .lattice import smallest_singular_value

    return min(int(math.ceil(exponent / smallest_singular_value(A))), 800)


def check_triangular_minimum(seed: int = 0, count: int = 200,
                             ts=(1.0, 2.0, 4.0, 8.0)) -> CheckResult:
    """f_t(L) >= f_t(L_triangular) for random unimodular lattices.

    The random lattice's sum is truncated (a strict undercount), so a
    positive slack against the near-exact triangular value is conclusive.
    """
    rng = np.random.default_rng(seed)
    eq = equilateral_matrix()
    eq_values = {t: _decay_sum(eq, t, _decay_window(eq)) for t in ts}
    min_slack = math.inf
    for _ in range(count):
        A = random_unimodular(rng)
        N = _decay_window(A)
        for t in ts:
            slack = _decay_sum(A, t, N) - eq_values[t]
            min_slack = min(min_slack, slack)
    return CheckResult("triangular lattice minimizes decay sum", min_slack > 0,
                       f"min slack over {count} lattices = {min_slack:.3e}")


def check_tail_bound_soundness(seed: int = 0, count: int = 20) -> CheckResult:
    """The quadrupled-cutoff sum never exceeds the N-cutoff sum plus its tail."""
    rng = np.random.default_rng(seed)
    sigma = math.sqrt(3.0)
    worst = -math.inf
    for i in range(count):
        A = random_unimodular(rng)
        t = float(rng.choice([2.0, 4.0, 8.0]))
        N = int(rng.choice([10, 15, 20]))
        gap = (f_truncated(A, sigma, t, 4 * N).value
               - f_truncated(A, sigma, t, N).value)
        bound = tail_bound(A, sigma, t, N, n=1, k=2)
        worst = max(worst, gap - bound)
    return CheckResult("tail bound soundness", worst <= 0,
                       f"max (gap - bound) over {count} draws = {worst:.3e}")


def run_all(seed: int = 0) -> list[CheckResult]:
    return [
        check_multiplicities(),
        check_oracle_agreement(),
        check_series_identity(),
        check_theta_monotonicity(),
        check_triangular_minimum(seed=seed),
        check_tail_bound_soundness(seed=seed),
    ]
