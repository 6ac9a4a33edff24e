"""Certified geodesic-growth entropy of square-tiled translation surfaces.

The package builds surfaces from gluing permutations, encloses their
entropy under area-preserving linear deformations by solving a truncated
lattice-sum equation with a rigorous tail bound, explores the deformation
orbit (grid scans, finite differences, minimization), and cross-checks the
analytic formulas against an independent ray-tracing oracle.
"""

from .lattice import (
    LatticeError,
    UnimodularMap,
    diagonal,
    equilateral_matrix,
    f_truncated,
    identity_map,
    modular_lattice,
    rotation,
    shear,
    smallest_singular_value,
    tail_bound,
    theta_sum,
)
from .orbit import GridScan, OrbitPoint, fd_gradient, fd_hessian, minimize, orbit_matrix, scan
from .solver import (
    EnclosureWidthError,
    EntropyEnclosure,
    SolverError,
    entropy,
    entropy_enclosure,
    entropy_enclosure_extended,
)
from .surface import (
    Permutation,
    SquareTiledSurface,
    StratumInfo,
    SurfaceError,
    build_surface,
    builtin_surface,
    check_hypothesis,
    format_permutation,
    load_surface_file,
    parse_permutation,
)

__version__ = "0.1.0"

__all__ = [
    "EnclosureWidthError",
    "EntropyEnclosure",
    "GridScan",
    "LatticeError",
    "OrbitPoint",
    "Permutation",
    "SolverError",
    "SquareTiledSurface",
    "StratumInfo",
    "SurfaceError",
    "UnimodularMap",
    "build_surface",
    "builtin_surface",
    "check_hypothesis",
    "diagonal",
    "entropy",
    "entropy_enclosure",
    "entropy_enclosure_extended",
    "equilateral_matrix",
    "f_truncated",
    "fd_gradient",
    "fd_hessian",
    "format_permutation",
    "identity_map",
    "load_surface_file",
    "minimize",
    "modular_lattice",
    "orbit_matrix",
    "parse_permutation",
    "rotation",
    "scan",
    "shear",
    "smallest_singular_value",
    "tail_bound",
    "theta_sum",
]
