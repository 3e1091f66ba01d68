"""Transmission eigenvalues with a conductive boundary condition in 2D.

Boundary-integral formulation solved by a contour-integral eigensolver,
with Bessel-determinant oracles for disks, conductivity sweeps and
refractive-index estimation.
"""
from .errors import (
    ConfigError,
    DomainError,
    EstimationError,
    GeometryError,
    NearEigenvalueError,
    SingularArgumentError,
    SolverError,
    TeigError,
    TrackingError,
    UnsupportedBranchError,
)
from .geometry import BoundaryMesh, Circle, Ellipse, TrigPoly, build_mesh, curve_diameter, parse_curve
from .nep import ContourConfig, EigenResult, MediumParams, beyn, beyn_solve, build_m, scan_eigenvalues
from .oracle import DiskProblem, DoubleLayerDisk, RootList, find_roots

__version__ = "0.1.0"
