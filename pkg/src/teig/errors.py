"""Exception hierarchy shared by every module.

The CLI maps these onto its exit codes, so keep the split between
configuration problems and numerical failures intact.
"""


class TeigError(Exception):
    """Base class for all package errors."""


class ConfigError(TeigError, ValueError):
    """Invalid user-supplied parameter (bad count, negative radius, ...)."""


class GeometryError(TeigError, ValueError):
    """Curve fails the regularity or orientation checks."""


class DomainError(TeigError, ValueError):
    """Special function argument outside the validated region."""


class SingularArgumentError(DomainError):
    """Y_m or a Hankel function requested at (or extremely near) z = 0."""


class SolverError(TeigError, RuntimeError):
    """Numerical failure inside an operator assembly or eigensolver."""


class NearEigenvalueError(SolverError):
    """A single-layer matrix is too ill-conditioned to invert.

    Raised when the wavenumber is (close to) an interior Dirichlet
    eigenvalue, so the Dirichlet-to-Neumann map does not exist.
    """

    def __init__(self, message: str, wavenumber: complex | None = None, cond: float | None = None):
        super().__init__(message)
        self.wavenumber = wavenumber
        self.cond = cond


class TrackingError(SolverError):
    """Eigenvalue continuation could not decide between two candidates."""


class EstimationError(SolverError):
    """Index estimation got a measurement outside the attainable range."""


class UnsupportedBranchError(TeigError, ValueError):
    """Requested a bound whose constants are not computable here."""
