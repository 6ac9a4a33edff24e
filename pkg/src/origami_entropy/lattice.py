"""Lattice exponential sums and the geometric constants controlling truncation.

The central object is the sum ``sum exp(-t * |A(a,b)| / sigma)`` over integer
pairs (a,b) in the square window of radius N with the origin removed, where A
is an area-preserving linear map and ``sigma = sqrt(n*(k+1))`` rescales the
tiling to unit area.  The truncation error is bounded by a closed-form tail
involving the smallest singular value of A and the diameter of the image of a
grid cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import mpmath as mp
import numpy as np

DET_TOL = 1e-12


class LatticeError(ValueError):
    pass


@dataclass(frozen=True)
class UnimodularMap:
    """A 2x2 real matrix (a b; c d) with determinant 1.

    ``exact`` optionally supplies the entries at arbitrary precision (as
    mpmath numbers) for the extended-precision mode; it never participates
    in equality or hashing.
    """

    a: float
    b: float
    c: float
    d: float
    exact: Callable[[], tuple] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        det = self.a * self.d - self.b * self.c
        if abs(det - 1.0) > DET_TOL:
            raise LatticeError(f"matrix is not unimodular: det = {det!r}")

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def apply(self, x: float, y: float) -> tuple[float, float]:
        return (self.a * x + self.b * y, self.c * x + self.d * y)

    def __matmul__(self, other: "UnimodularMap") -> "UnimodularMap":
        m = self.matrix @ other.matrix

        def exact():
            aa, ab, ac, ad = self.entries_mp()
            ba, bb, bc, bd = other.entries_mp()
            return (aa * ba + ab * bc, aa * bb + ab * bd,
                    ac * ba + ad * bc, ac * bb + ad * bd)

        return UnimodularMap(m[0, 0], m[0, 1], m[1, 0], m[1, 1], exact=exact)

    def entries_mp(self) -> tuple:
        if self.exact is not None:
            return self.exact()
        return (mp.mpf(self.a), mp.mpf(self.b), mp.mpf(self.c), mp.mpf(self.d))


def identity_map() -> UnimodularMap:
    return UnimodularMap(1.0, 0.0, 0.0, 1.0)


def rotation(theta: float) -> UnimodularMap:
    c, s = math.cos(theta), math.sin(theta)

    def exact():
        th = mp.mpf(theta)
        return (mp.cos(th), -mp.sin(th), mp.sin(th), mp.cos(th))

    return UnimodularMap(c, -s, s, c, exact=exact)


def shear(s: float) -> UnimodularMap:
    def exact():
        return (mp.mpf(1), mp.mpf(s), mp.mpf(0), mp.mpf(1))

    return UnimodularMap(1.0, s, 0.0, 1.0, exact=exact)


def diagonal(u: float) -> UnimodularMap:
    def exact():
        eu = mp.e ** mp.mpf(u)
        return (eu, mp.mpf(0), mp.mpf(0), 1 / eu)

    return UnimodularMap(math.exp(u), 0.0, 0.0, math.exp(-u), exact=exact)


def equilateral_matrix() -> UnimodularMap:
    """The map sending Z^2 onto the unimodular triangular lattice.

    Columns c*(1,0) and c*(1/2, sqrt(3)/2) with c = (2/sqrt(3))**0.5, so that
    the image lattice has covolume 1 and six shortest vectors of equal norm.
    """
    c = math.sqrt(2.0 / math.sqrt(3.0))
    r3 = math.sqrt(3.0)

    def exact():
        s3 = mp.sqrt(3)
        cc = mp.sqrt(2 / s3)
        return (cc, cc / 2, mp.mpf(0), cc * s3 / 2)

    return UnimodularMap(c, c / 2.0, 0.0, c * r3 / 2.0, exact=exact)


def modular_lattice(x: float, y: float) -> UnimodularMap:
    """Unit-covolume lattice of shape z = x + i*y: columns (1,0), (x,y), over sqrt(y)."""
    if y <= 0:
        raise LatticeError("y must be positive")
    ry = math.sqrt(y)

    def exact():
        ryy = mp.sqrt(mp.mpf(y))
        return (1 / ryy, mp.mpf(x) / ryy, mp.mpf(0), ryy)

    return UnimodularMap(1.0 / ry, x / ry, 0.0, ry, exact=exact)


def smallest_singular_value(A: UnimodularMap) -> float:
    """The smaller singular value; with det 1 the two multiply to 1."""
    f = A.a * A.a + A.b * A.b + A.c * A.c + A.d * A.d
    disc = max(f * f - 4.0, 0.0)
    return math.sqrt((f - math.sqrt(disc)) / 2.0)


def cell_diameter(A: UnimodularMap, sigma: float) -> float:
    """Diameter of the image under A of a grid cell of side 1/sigma."""
    if sigma <= 0:
        raise LatticeError("sigma must be positive")
    d1 = math.hypot(*A.apply(1.0, 1.0))
    d2 = math.hypot(*A.apply(1.0, -1.0))
    return max(d1, d2) / sigma


@dataclass(frozen=True)
class LatticeSum:
    """A truncated lattice exponential sum together with its tail bound."""

    value: float
    t: float
    N: int
    tail_bound: float


@lru_cache(maxsize=128)
def _lattice_points(N: int) -> tuple[np.ndarray, np.ndarray]:
    # (a,b) over the square window minus the origin, ordered by shells of
    # max(|a|,|b|) and lexicographically within a shell: a fixed, reproducible
    # summation order.
    r = np.arange(-N, N + 1)
    aa, bb = np.meshgrid(r, r, indexing="ij")
    a, b = aa.ravel(), bb.ravel()
    keep = (a != 0) | (b != 0)
    a, b = a[keep], b[keep]
    order = np.lexsort((b, a, np.maximum(np.abs(a), np.abs(b))))
    return a[order], b[order]


@lru_cache(maxsize=1024)
def _norms(entries: tuple[float, float, float, float], sigma: float, N: int) -> np.ndarray:
    a, b = _lattice_points(N)
    ea, eb, ec, ed = entries
    x = ea * a + eb * b
    y = ec * a + ed * b
    out = np.hypot(x, y) / sigma
    out.setflags(write=False)
    return out


def lattice_norms(A: UnimodularMap, sigma: float, N: int) -> np.ndarray:
    """Norms |A(a,b)|/sigma over the punctured window, in shell order."""
    return _norms((A.a, A.b, A.c, A.d), sigma, N)


def tail_bound(A: UnimodularMap, sigma: float, t: float, N: int, n: int, k: int) -> float:
    """Closed-form bound on the truncation error of the N-window sum.

    E = 2*pi*n*(k+1) * exp(t*D(A)) / t^2 * exp(-t*r) * (t*r + 1) with
    r = d(A)*N/sigma, d the smallest singular value and D the cell diameter.
    """
    if t <= 0 or N < 1:
        raise LatticeError("t and N must be positive")
    r = smallest_singular_value(A) * N / sigma
    big_d = cell_diameter(A, sigma)
    try:
        return (2.0 * math.pi * n * (k + 1) * math.exp(t * big_d) / (t * t)
                * math.exp(-t * r) * (t * r + 1.0))
    except OverflowError:
        return math.inf


def f_truncated(A: UnimodularMap, sigma: float, t: float, N: int) -> LatticeSum:
    """Truncated decay sum over the image lattice, with its tail bound.

    The accumulation uses exactly-rounded summation (math.fsum), so the value
    is independent of any partitioning of the shells.
    """
    if t <= 0 or N < 1:
        raise LatticeError("t and N must be positive")
    norms = lattice_norms(A, sigma, N)
    value = math.fsum(np.exp(-t * norms))
    # Tail prefactor n*(k+1) equals sigma^2 for a unit-area tiling.
    r = smallest_singular_value(A) * N / sigma
    try:
        tb = (2.0 * math.pi * sigma * sigma * math.exp(t * cell_diameter(A, sigma))
              / (t * t) * math.exp(-t * r) * (t * r + 1.0))
    except OverflowError:
        tb = math.inf
    return LatticeSum(value=value, t=t, N=N, tail_bound=tb)


def theta_sum(A: UnimodularMap, t: float, N: int) -> float:
    """Gaussian lattice sum over the full window, origin included."""
    if t <= 0 or N < 1:
        raise LatticeError("t and N must be positive")
    norms = lattice_norms(A, 1.0, N)
    return 1.0 + math.fsum(np.exp(-t * norms * norms))


# ---------------------------------------------------------------------------
# Extended precision (mpmath) versions, behind the same shapes.

_MP_NORM_CACHE: dict[tuple, list] = {}


def lattice_norms_mp(A: UnimodularMap, nk1: int, N: int) -> list:
    """Arbitrary-precision norms |A(a,b)|/sqrt(nk1) in the same shell order."""
    ea, eb, ec, ed = A.entries_mp()
    key = (mp.nstr(ea, mp.mp.dps), mp.nstr(eb, mp.mp.dps),
           mp.nstr(ec, mp.mp.dps), mp.nstr(ed, mp.mp.dps), nk1, N, mp.mp.prec)
    cached = _MP_NORM_CACHE.get(key)
    if cached is not None:
        return cached
    sigma = mp.sqrt(nk1)
    av, bv = _lattice_points(N)
    out = []
    for a, b in zip(av.tolist(), bv.tolist()):
        x = ea * a + eb * b
        y = ec * a + ed * b
        out.append(mp.sqrt(x * x + y * y) / sigma)
    _MP_NORM_CACHE[key] = out
    return out


def f_truncated_mp(A: UnimodularMap, nk1: int, t, N: int):
    """Extended-precision truncated sum; returns an mpmath float."""
    norms = lattice_norms_mp(A, nk1, N)
    t = mp.mpf(t)
    # Terms beyond ~1.5x the working precision cannot influence the result.
    cutoff = (mp.mp.dps + 15) * mp.log(10) / t
    return mp.fsum(mp.e ** (-t * ell) for ell in norms if ell <= cutoff)


def f_truncated_mp_deriv(A: UnimodularMap, nk1: int, t, N: int):
    """d/dt of :func:`f_truncated_mp` (used by the extended-precision solver)."""
    norms = lattice_norms_mp(A, nk1, N)
    t = mp.mpf(t)
    cutoff = (mp.mp.dps + 15) * mp.log(10) / t
    return -mp.fsum(ell * mp.e ** (-t * ell) for ell in norms if ell <= cutoff)


def tail_bound_mp(A: UnimodularMap, nk1: int, t, N: int):
    t = mp.mpf(t)
    ea, eb, ec, ed = A.entries_mp()
    f = ea * ea + eb * eb + ec * ec + ed * ed
    d = mp.sqrt((f - mp.sqrt(f * f - 4)) / 2)
    sigma = mp.sqrt(nk1)
    d1 = mp.sqrt((ea + eb) ** 2 + (ec + ed) ** 2)
    d2 = mp.sqrt((ea - eb) ** 2 + (ec - ed) ** 2)
    big_d = max(d1, d2) / sigma
    r = d * N / sigma
    return 2 * mp.pi * nk1 * mp.e ** (t * big_d) / t**2 * mp.e ** (-t * r) * (t * r + 1)
