"""Square-tiled surfaces encoded by permutation pairs.

A surface made of N unit squares is described by two permutations of
{1..N}: ``h`` glues the right edge of square i to the left edge of h(i),
and ``v`` glues the top edge of square i to the bottom edge of v(i).
Vertex identifications, cone angles, genus and the stratum data are all
derived from the pair.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass


class SurfaceError(ValueError):
    """Invalid permutation data or surface not satisfying a precondition."""


@dataclass(frozen=True)
class Permutation:
    """A bijection of {1..degree}; ``images[i-1]`` is the image of i."""

    degree: int
    images: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.degree < 1:
            raise SurfaceError("degree must be a positive integer")
        if sorted(self.images) != list(range(1, self.degree + 1)):
            raise SurfaceError("images do not form a bijection of {1..%d}" % self.degree)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def inverse(self) -> "Permutation":
        inv = [0] * self.degree
        for i, j in enumerate(self.images, start=1):
            inv[j - 1] = i
        return Permutation(self.degree, tuple(inv))

    def __mul__(self, other: "Permutation") -> "Permutation":
        # Composition "apply rightmost first": (p*q)(x) = p(q(x)).
        if self.degree != other.degree:
            raise SurfaceError("degree mismatch in composition")
        return Permutation(self.degree, tuple(self(other(i)) for i in range(1, self.degree + 1)))

    def cycles(self, include_fixed: bool = True) -> list[tuple[int, ...]]:
        seen = [False] * self.degree
        out = []
        for start in range(1, self.degree + 1):
            if seen[start - 1]:
                continue
            cyc = [start]
            seen[start - 1] = True
            j = self(start)
            while j != start:
                cyc.append(j)
                seen[j - 1] = True
                j = self(j)
            if include_fixed or len(cyc) > 1:
                out.append(tuple(cyc))
        return out

    @classmethod
    def identity(cls, degree: int) -> "Permutation":
        return cls(degree, tuple(range(1, degree + 1)))

    @classmethod
    def from_cycles(cls, cycles: list[tuple[int, ...]], degree: int) -> "Permutation":
        images = list(range(1, degree + 1))
        used: set[int] = set()
        for cyc in cycles:
            for x in cyc:
                if not (1 <= x <= degree):
                    raise SurfaceError(f"element {x} out of range 1..{degree}")
                if x in used:
                    raise SurfaceError(f"element {x} repeated across cycles")
                used.add(x)
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                images[a - 1] = b
        return cls(degree, tuple(images))


_CYCLE_RE = re.compile(r"\(\s*([0-9]+(?:\s*,\s*[0-9]+)*)\s*\)")


def parse_permutation(text: str, degree: int) -> Permutation:
    """Parse cycle notation like ``"(1,2)(3,4)"``; omitted elements are fixed."""
    stripped = text.strip()
    if stripped in ("", "()", "id", "identity"):
        return Permutation.identity(degree)
    cycles = []
    pos = 0
    for m in _CYCLE_RE.finditer(stripped):
        if stripped[pos:m.start()].strip():
            raise SurfaceError(f"malformed cycle notation near {stripped[pos:m.start()]!r}")
        cycles.append(tuple(int(x) for x in m.group(1).split(",")))
        pos = m.end()
    if stripped[pos:].strip():
        raise SurfaceError(f"malformed cycle notation near {stripped[pos:]!r}")
    if not cycles:
        raise SurfaceError("malformed cycle notation: no cycles found")
    return Permutation.from_cycles(cycles, degree)


def format_permutation(p: Permutation) -> str:
    """Inverse of :func:`parse_permutation`; identity renders as ``"()"``."""
    cycles = p.cycles(include_fixed=False)
    if not cycles:
        return "()"
    parts = []
    for cyc in cycles:
        m = min(cyc)
        i = cyc.index(m)
        parts.append("(" + ",".join(str(x) for x in cyc[i:] + cyc[:i]) + ")")
    return "".join(parts)


@dataclass(frozen=True)
class SquareTiledSurface:
    """A connected square-tiled surface with its derived singularity data."""

    n_squares: int
    h: Permutation
    v: Permutation
    vertex_cycles: tuple[tuple[int, ...], ...]
    cone_multipliers: tuple[int, ...]
    genus: int

    @property
    def sigma(self) -> float:
        """Scaling factor normalizing the surface to unit area (side 1/sigma)."""
        return math.sqrt(self.n_squares)


@dataclass(frozen=True)
class StratumInfo:
    """Data of a surface whose singularities share cone angle 2*pi*(k+1)."""

    k: int
    n: int
    genus: int

    @property
    def n_squares(self) -> int:
        return self.n * (self.k + 1)

    @property
    def sigma(self) -> float:
        return math.sqrt(self.n_squares)


def _is_transitive(h: Permutation, v: Permutation) -> bool:
    degree = h.degree
    seen = {1}
    stack = [1]
    hi, vi = h.inverse(), v.inverse()
    while stack:
        x = stack.pop()
        for p in (h, v, hi, vi):
            y = p(x)
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == degree


def build_surface(h: Permutation, v: Permutation) -> SquareTiledSurface:
    """Assemble a surface from its gluing permutations.

    Vertex classes are the cycles of the commutator h∘v∘h⁻¹∘v⁻¹ (applied
    right-to-left); a cycle of length m is a cone point of angle 2*pi*m.
    """
    if h.degree != v.degree:
        raise SurfaceError("h and v must have the same degree")
    if not _is_transitive(h, v):
        raise SurfaceError("surface is disconnected: <h,v> is not transitive")
    commutator = h * v * h.inverse() * v.inverse()
    vertex_cycles = tuple(commutator.cycles(include_fixed=True))
    multipliers = tuple(len(c) for c in vertex_cycles)
    total_excess = sum(m - 1 for m in multipliers)
    if total_excess % 2 != 0:
        raise SurfaceError("inconsistent vertex data")  # cannot happen for a commutator
    genus = total_excess // 2 + 1
    assert sum(multipliers) == h.degree
    return SquareTiledSurface(h.degree, h, v, vertex_cycles, multipliers, genus)


def check_hypothesis(surface: SquareTiledSurface) -> StratumInfo:
    """Require a common cone angle 2*pi*(k+1), k >= 1, at every vertex."""
    mults = set(surface.cone_multipliers)
    if len(mults) > 1:
        raise SurfaceError(f"mixed cone multipliers {sorted(mults)}: no common cone angle")
    m = mults.pop()
    if m == 1:
        raise SurfaceError("all vertices are regular points: surface has no singularities")
    k = m - 1
    n = surface.n_squares // (k + 1)
    assert n * (k + 1) == surface.n_squares
    return StratumInfo(k=k, n=n, genus=surface.genus)


def builtin_surface(family: str, k: int | None = None) -> SquareTiledSurface:
    """Construct one of the named families: O, St, G (each need k >= 2), EW, L."""
    family = family.upper()
    if family == "L":
        return build_surface(parse_permutation("(1,2)", 3), parse_permutation("(1,3)", 3))
    if family == "EW":
        h = parse_permutation("(1,2,3,4)(5,6,7,8)", 8)
        v = parse_permutation("(1,6)(2,5)(3,8)(4,7)", 8)
        return build_surface(h, v)
    if family in ("O", "ST", "G"):
        if k is None or k < 2:
            raise SurfaceError(f"family {family} requires an integer k >= 2")
        if family == "O":
            degree = 2 * k
            h = Permutation.from_cycles([tuple(range(1, 2 * k + 1))], degree)
            v = Permutation.from_cycles([(i, i + 1) for i in range(1, 2 * k, 2)], degree)
        elif family == "ST":
            degree = 2 * k - 1
            h = Permutation.from_cycles([(i, i + 1) for i in range(1, 2 * k - 2, 2)], degree)
            v = Permutation.from_cycles([(i, i + 1) for i in range(2, 2 * k - 1, 2)], degree)
        else:  # G
            degree = 2 * k
            h = Permutation.from_cycles([(i, i + 1) for i in range(1, 2 * k, 2)], degree)
            v = Permutation.from_cycles([(i, i + 1) for i in range(2, 2 * k - 1, 2)], degree)
        return build_surface(h, v)
    raise SurfaceError(f"unknown surface family {family!r}")


def load_surface_file(path: str) -> SquareTiledSurface:
    """Read the three-line description: ``squares: N`` / ``h: ...`` / ``v: ...``."""
    fields: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if ":" not in line:
                raise SurfaceError(f"{path}:{lineno}: expected 'key: value'")
            key, _, value = line.partition(":")
            fields[key.strip().lower()] = value.strip()
    for key in ("squares", "h", "v"):
        if key not in fields:
            raise SurfaceError(f"{path}: missing field {key!r}")
    try:
        n = int(fields["squares"])
    except ValueError as exc:
        raise SurfaceError(f"{path}: squares must be an integer") from exc
    h = parse_permutation(fields["h"], n)
    v = parse_permutation(fields["v"], n)
    return build_surface(h, v)
