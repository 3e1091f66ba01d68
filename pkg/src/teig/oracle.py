"""Analytic references on disks: Bessel determinants and Dirichlet eigenvalues.

Separation of variables in polar coordinates reduces every disk problem to
a small determinant per Fourier order m. Roots for m >= 1 carry the
cos/sin degeneracy and are listed twice when expanded.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import specfun
from .errors import ConfigError
from .geometry import BoundaryMesh

VARIANTS = ("classical", "conductive", "zero_index")
DL_VARIANTS = ("conductive", "zero_index")

GRID_STEP = 1e-3
PROMOTE = 0.1
PROMOTE_WINDOW = 50
IMAG_TOL = 1e-9
DEFECT_TOL = 1e-10
M_MAX = 20


@dataclass(frozen=True)
class DiskProblem:
    variant: str
    n: float
    eta: float = 0.0
    radius: float = 1.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown disk variant {self.variant!r}; expected one of {VARIANTS}")
        if not self.n > 0:
            raise ConfigError(f"n must be positive, got {self.n}")
        if self.variant != "zero_index" and self.n == 1:
            raise ConfigError("n = 1 is degenerate for the classical and conductive problems")
        if self.eta < 0:
            raise ConfigError(f"eta must be non-negative, got {self.eta}")
        if self.variant == "classical" and self.eta != 0:
            raise ConfigError("classical variant has eta = 0; use 'conductive'")
        if not self.radius > 0:
            raise ConfigError(f"radius must be positive, got {self.radius}")

    def with_eta(self, eta: float) -> "DiskProblem":
        variant = "conductive" if self.variant == "classical" else self.variant
        return DiskProblem(variant, self.n, eta, self.radius)


@dataclass(frozen=True)
class DoubleLayerDisk:
    """Disk of radius R, index n1 for |x| < r and n2 for r < |x| < R."""

    R: float
    r: float
    n1: float
    n2: float
    eta: float
    variant: str = "conductive"

    def __post_init__(self):
        if self.variant not in DL_VARIANTS:
            raise ConfigError(f"unknown double-layer variant {self.variant!r}; expected one of {DL_VARIANTS}")
        if not 0 < self.r < self.R:
            raise ConfigError(f"need 0 < r < R, got r={self.r}, R={self.R}")
        if not (self.n1 > 0 and self.n2 > 0):
            raise ConfigError("n1 and n2 must be positive")
        if self.eta < 0:
            raise ConfigError(f"eta must be non-negative, got {self.eta}")

    def with_eta(self, eta: float) -> "DoubleLayerDisk":
        return DoubleLayerDisk(self.R, self.r, self.n1, self.n2, eta, self.variant)


# --- determinants ----------------------------------------------------------------


def _stack(rows) -> np.ndarray:
    """Nested entry lists (scalars or equal-shape arrays) -> array (..., n, n)."""
    entries = np.broadcast_arrays(*[np.asarray(e) for row in rows for e in row])
    n = len(rows)
    out = np.stack(entries, axis=-1).astype(complex)
    return out.reshape(out.shape[:-1] + (n, n))


def disk_matrix(problem: DiskProblem, m: int, k) -> np.ndarray:
    """2x2 matrix whose determinant vanishes at eigenvalues of order m.

    ``k`` may be an array; the result then has shape k.shape + (2, 2).
    """
    R, s = problem.radius, math.sqrt(problem.n)
    k = np.asarray(k)
    z = k * R * s
    j, dj = specfun.bessel_j(m, z), specfun.deriv("J", m, z)
    row2_0 = k * s * dj - problem.eta * j
    if problem.variant == "classical":
        return _stack([[j, -specfun.bessel_j(m, k * R)], [s * dj, -specfun.deriv("J", m, k * R)]])
    if problem.variant == "conductive":
        return _stack([[j, -specfun.bessel_j(m, k * R)], [row2_0, -k * specfun.deriv("J", m, k * R)]])
    # harmonic partner r^m: trace R^m, normal derivative m R^(m-1)
    return _stack([[j, -(R**m) + 0 * k], [row2_0, -m * R ** (m - 1) + 0 * k]])


def disk_determinant(problem: DiskProblem, m: int, k):
    a = disk_matrix(problem, m, k)
    d = a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]
    return d[()] if d.ndim == 0 else d


def _double_layer_jy(problem: DoubleLayerDisk, m: int, k) -> np.ndarray:
    """4x4 matrix with (J, Y) in place of (H1, H2) in the annulus columns."""
    R, r = problem.R, problem.r
    s1, s2 = math.sqrt(problem.n1), math.sqrt(problem.n2)
    k = np.asarray(k)
    zero = 0 * k
    if problem.variant == "conductive":
        c0 = [-specfun.bessel_j(m, k * R), -k * specfun.deriv("J", m, k * R)]
    else:
        c0 = [-(R**m) + zero, (-m * R ** (m - 1) if m else 0.0) + zero]
    cols = []
    zo, zi = k * R * s2, k * r * s2
    for kind in ("J", "Y"):
        fo = specfun.cylinder(kind, m, zo)
        cols.append(
            [
                fo,
                k * s2 * specfun.deriv(kind, m, zo) - problem.eta * fo,
                specfun.cylinder(kind, m, zi),
                k * s2 * specfun.deriv(kind, m, zi),
            ]
        )
    c3 = [zero, zero, -specfun.bessel_j(m, k * r * s1), -k * s1 * specfun.deriv("J", m, k * r * s1)]
    c0 = c0 + [zero, zero]
    return _stack([[c0[i], cols[0][i], cols[1][i], c3[i]] for i in range(4)])


def double_layer_determinant(problem: DoubleLayerDisk, m: int, k):
    """Determinant of the 4x4 system with H1/H2 annulus columns.

    Columns (H1, H2) = (J + iY, J - iY) span the same space as (J, Y), so
    the determinant equals -2i det[J, Y]; evaluating that form avoids the
    cancellation of adding and subtracting large Y values.
    """
    d = -2j * np.linalg.det(_double_layer_jy(problem, m, k))
    return d[()] if np.ndim(d) == 0 else d


def layered_dirichlet_matrix(R: float, r: float, n1: float, n2: float, m: int, k) -> np.ndarray:
    """Dirichlet problem for Delta u + k^2 n(x) u = 0 on the two-layer disk.

    Unknowns (a, b, c) in u = a J(k s2 rho) + b Y(k s2 rho) on the annulus
    and u = c J(k s1 rho) inside; rows: u(R) = 0 and continuity of u and
    u_rho at rho = r.
    """
    s1, s2 = math.sqrt(n1), math.sqrt(n2)
    k = np.asarray(k)
    zo, zi, z1 = k * R * s2, k * r * s2, k * r * s1
    return _stack(
        [
            [specfun.bessel_j(m, zo), specfun.bessel_y(m, zo), 0 * k],
            [specfun.bessel_j(m, zi), specfun.bessel_y(m, zi), -specfun.bessel_j(m, z1)],
            [s2 * specfun.deriv("J", m, zi), s2 * specfun.deriv("Y", m, zi), -s1 * specfun.deriv("J", m, z1)],
        ]
    )


def _hadamard(a: np.ndarray) -> float:
    """Larger of the row and column Hadamard bounds on |det a|.

    A single bound can collapse at a root (a whole row of the zero-index
    matrix vanishes there for m = 0); the larger one keeps the scale.
    """
    rows = np.prod(np.linalg.norm(a, axis=-1), axis=-1)
    cols = np.prod(np.linalg.norm(a, axis=-2), axis=-1)
    return float(np.max(np.maximum(rows, cols)))


@dataclass(frozen=True)
class Determinant:
    """det_fn(m, k) plus the Hadamard bound used to judge a root's defect."""

    matrix: Callable[[int, complex], np.ndarray]
    factor: complex = 1.0

    def __call__(self, m, k):
        d = self.factor * np.linalg.det(self.matrix(m, k))
        return d[()] if np.ndim(d) == 0 else d

    def scale(self, m, k) -> float:
        return abs(self.factor) * _hadamard(self.matrix(m, k))


def disk_det_fn(problem: DiskProblem) -> Determinant:
    return Determinant(lambda m, k: disk_matrix(problem, m, k))


def double_layer_det_fn(problem: DoubleLayerDisk) -> Determinant:
    return Determinant(lambda m, k: _double_layer_jy(problem, m, k), factor=-2j)


def layered_dirichlet_det_fn(R, r, n1, n2) -> Determinant:
    return Determinant(lambda m, k: layered_dirichlet_matrix(R, r, n1, n2, m, k))


# --- root finding ----------------------------------------------------------------


@dataclass
class Root:
    k: float
    m: int | None
    defect: float


@dataclass
class RootList:
    roots: list[Root] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)

    def values(self, expand: bool = True) -> np.ndarray:
        """Root values; with ``expand`` every m >= 1 root appears twice."""
        out = []
        for r in self.roots:
            out.append(r.k)
            if expand and r.m is not None and r.m >= 1:
                out.append(r.k)
        return np.array(out)

    def for_order(self, m: int) -> list[float]:
        return [r.k for r in self.roots if r.m == m]

    def __len__(self):
        return len(self.roots)

    def __iter__(self):
        return iter(self.roots)


def _newton(f, k0: complex, h: float = 1e-6, maxit: int = 60):
    k = complex(k0)
    for _ in range(maxit):
        fk = f(k)
        df = (f(k + h) - f(k - h)) / (2 * h)
        if df == 0 or not np.isfinite(df):
            return None
        step = fk / df
        k -= step
        if abs(step) <= 1e-14 * max(1.0, abs(k)):
            return k
    return k if abs(step) <= 1e-9 else None


def find_roots(det_fn, k_min: float, k_max: float, m_max: int = M_MAX, orders=None) -> RootList:
    """Real zeros of det_fn(m, k) on [k_min, k_max] for m = 0..m_max.

    Candidates are local minima of |det| on a 1e-3 grid that lie below a
    tenth of the surrounding maximum; each is polished by Newton's method
    on complex k. A root is accepted if |Im k| <= 1e-9 and |det| is below
    1e-10 times the Hadamard bound of the matrix (or of the scan maximum
    for plain callables).
    """
    if not (0 < k_min < k_max):
        raise ConfigError(f"need 0 < k_min < k_max, got [{k_min}, {k_max}]")
    if int(m_max) != m_max or m_max < 0:
        raise ConfigError(f"m_max must be a non-negative integer, got {m_max}")
    orders = range(int(m_max) + 1) if orders is None else orders
    n_grid = int(math.ceil((k_max - k_min) / GRID_STEP)) + 1
    grid = np.linspace(k_min, k_max, n_grid)
    out = RootList()
    for m in orders:
        f = lambda k, m=m: det_fn(m, k)  # noqa: E731
        try:
            vals = np.abs(np.asarray(f(grid), dtype=complex))
        except (TypeError, ValueError):
            vals = np.abs(np.array([f(k) for k in grid]))
        if vals.shape != grid.shape:
            vals = np.abs(np.array([f(k) for k in grid]))
        if not np.all(np.isfinite(vals)):
            out.diagnostics.append(f"m={m}: non-finite determinant values in scan")
            vals = np.where(np.isfinite(vals), vals, np.inf)
        found: list[float] = []
        for i in range(n_grid):
            left = vals[i - 1] if i > 0 else np.inf
            right = vals[i + 1] if i < n_grid - 1 else np.inf
            if not (vals[i] <= left and vals[i] < right):
                continue
            lo, hi = max(0, i - PROMOTE_WINDOW), min(n_grid, i + PROMOTE_WINDOW + 1)
            window = vals[lo:hi][np.isfinite(vals[lo:hi])]
            if vals[i] > PROMOTE * window.max():
                continue
            edge = i in (0, n_grid - 1)
            root = _newton(f, grid[i])
            if root is None and edge:
                # |det| merely decreasing towards the interval end
                continue
            if root is None:
                out.diagnostics.append(f"m={m}: Newton failed from k={grid[i]:.6f}")
                continue
            if not (k_min <= root.real <= k_max):
                # converged outside: a boundary minimum of a root beyond the range
                if edge:
                    continue
                out.diagnostics.append(f"m={m}: Newton from k={grid[i]:.6f} left the range (k={root:.10g})")
                continue
            kr = root.real
            scale = det_fn.scale(m, kr) if hasattr(det_fn, "scale") else window.max()
            defect = abs(f(kr))
            if abs(root.imag) > IMAG_TOL or defect > DEFECT_TOL * scale:
                out.diagnostics.append(
                    f"m={m}: candidate near k={grid[i]:.6f} rejected (Im k={root.imag:.3e}, |det|={defect:.3e})"
                )
                continue
            if any(abs(kr - r) <= 1e-8 for r in found):
                continue
            found.append(kr)
            out.roots.append(Root(kr, m, defect))
    out.roots.sort(key=lambda r: r.k)
    return out


def disk_roots(problem: DiskProblem, k_min: float, k_max: float, m_max: int = M_MAX) -> RootList:
    return find_roots(disk_det_fn(problem), k_min, k_max, m_max)


def double_layer_roots(problem: DoubleLayerDisk, k_min: float, k_max: float, m_max: int = M_MAX) -> RootList:
    return find_roots(double_layer_det_fn(problem), k_min, k_max, m_max)


# --- Dirichlet references ----------------------------------------------------------


def dirichlet_eig(radius: float, s: int, m: int) -> float:
    """Dirichlet eigenvalue (as a wavenumber) j_{m,s}/radius of the disk."""
    if not radius > 0:
        raise ConfigError(f"radius must be positive, got {radius}")
    return specfun.bessel_zero(m, s) / radius


def modified_dirichlet_eig(radius: float, n: float, s: int, m: int) -> float:
    """Wavenumber k with Delta u + k^2 n u = 0, u = 0 on the disk boundary."""
    if not n > 0:
        raise ConfigError(f"n must be positive, got {n}")
    return dirichlet_eig(radius, s, m) / math.sqrt(n)


def dirichlet_eigs_bie(mesh: BoundaryMesh, k_min: float, k_max: float, contour=None) -> RootList:
    """Dirichlet eigenvalues of a general domain: wavenumbers where S_k is singular."""
    from . import layerops, nep

    def solve(cfg):
        return nep.beyn(lambda z: layerops.assemble_single_layer(mesh, z), mesh.size, cfg)

    res = nep.scan_contours(solve, k_min, k_max, contour)
    out = RootList()
    for e in res.eigenvalues:
        if e.k.imag == 0:
            out.roots.append(Root(e.k.real, None, e.residual))
        else:
            out.diagnostics.append(f"complex value {e.k:.10g} discarded")
    return out
