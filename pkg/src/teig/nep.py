"""Nonlinear eigenvalue matrix M(k) and a contour-integral (Beyn) solver.

M(k) = D(k sqrt(n)) - D(k sqrt(n~)) - eta I, where D is the discrete
Dirichlet-to-Neumann map (I/2 + K') S^{-1}. For n~ = 0 the second block is
the Laplace DtN, which does not depend on k.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy import linalg

from . import layerops
from .errors import ConfigError, NearEigenvalueError, SolverError
from .geometry import BoundaryMesh

REAL_TOL = 1e-6
CLUSTER_TOL = 1e-8
SCAN_RADIUS = 0.5
SCAN_DEDUPE = 1e-6
MAX_DEPTH = 6


@dataclass(frozen=True)
class MediumParams:
    """(n, n~, eta): n~ = 1 classical/conductive, n~ = 0 zero-index."""

    n: float
    n_tilde: float = 1.0
    eta: float = 0.0

    def __post_init__(self):
        for name in ("n", "n_tilde", "eta"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float, np.floating, np.integer)) or not math.isfinite(v):
                raise ConfigError(f"{name} must be a finite real number, got {v!r}")
            object.__setattr__(self, name, float(v))
        if self.n <= 0:
            raise ConfigError(f"n must be positive, got {self.n}")
        if self.n_tilde < 0:
            raise ConfigError(f"n_tilde must be non-negative, got {self.n_tilde}")
        if self.eta < 0:
            raise ConfigError(f"eta must be non-negative, got {self.eta}")

    @property
    def degenerate(self) -> bool:
        return self.n == self.n_tilde


@dataclass(frozen=True)
class ContourConfig:
    center_mu: float
    radius: float = 0.5
    quad_nodes: int = 24
    probe_cols: int = 16
    rank_rel_tol: float = 1e-4
    residual_tol: float = 1e-4
    rng_seed: int = 42

    def __post_init__(self):
        if not math.isfinite(self.center_mu):
            raise ConfigError(f"contour center must be finite, got {self.center_mu}")
        if not self.radius > 0:
            raise ConfigError(f"contour radius must be positive, got {self.radius}")
        if int(self.quad_nodes) != self.quad_nodes or self.quad_nodes < 8:
            raise ConfigError(f"quad_nodes must be an integer >= 8, got {self.quad_nodes}")
        if int(self.probe_cols) != self.probe_cols or self.probe_cols < 1:
            raise ConfigError(f"probe_cols must be a positive integer, got {self.probe_cols}")
        if not (self.rank_rel_tol > 0 and self.residual_tol > 0):
            raise ConfigError("rank and residual tolerances must be positive")

    def nodes(self) -> np.ndarray:
        theta = 2.0 * np.pi * np.arange(self.quad_nodes) / self.quad_nodes
        return self.center_mu + self.radius * np.exp(1j * theta)

    def contains(self, z) -> bool:
        return abs(z - self.center_mu) <= self.radius * (1 + 1e-6)


@dataclass
class Eigenpair:
    k: complex
    residual: float
    cluster_size: int
    nullvector: np.ndarray = field(repr=False)


@dataclass
class EigenResult:
    eigenvalues: list[Eigenpair]
    contour: ContourConfig | None = None
    rank: int = 0

    def values(self) -> np.ndarray:
        return np.array([e.k for e in self.eigenvalues], dtype=complex)

    def __len__(self):
        return len(self.eigenvalues)


# --- matrix function -----------------------------------------------------------


class MatrixFunction:
    """k -> M(k) for a fixed mesh and medium, caching the Laplace block."""

    def __init__(self, mesh: BoundaryMesh, params: MediumParams):
        self.mesh = mesh
        self.params = params
        self.dim = mesh.size
        self._laplace = None

    def _second(self, k, check):
        p = self.params
        if p.n_tilde == 0:
            if self._laplace is None:
                self._laplace = layerops.dtn_matrix(self.mesh, layerops.LAPLACE, check=check)
            return self._laplace
        return layerops.dtn_matrix(self.mesh, k * math.sqrt(p.n_tilde), check=check)

    def __call__(self, k, check: bool = True) -> np.ndarray:
        k = complex(k)
        if k == 0:
            raise ConfigError("M(k) is undefined at k = 0")
        p = self.params
        d1 = layerops.dtn_matrix(self.mesh, k * math.sqrt(p.n), check=check)
        if p.degenerate:
            d2 = d1
        else:
            d2 = self._second(k, check)
        return d1 - d2 - p.eta * np.eye(self.dim)


def build_m(mesh: BoundaryMesh, params: MediumParams, k) -> np.ndarray:
    """Dense M(k; n, n~, eta)."""
    return MatrixFunction(mesh, params)(k)


# --- Beyn --------------------------------------------------------------------


def thread_count() -> int:
    env = os.environ.get("TEIG_THREADS")
    if env:
        try:
            val = int(env)
        except ValueError:
            raise ConfigError(f"TEIG_THREADS must be a positive integer, got {env!r}") from None
        if val < 1:
            raise ConfigError(f"TEIG_THREADS must be a positive integer, got {env!r}")
        return val
    return os.cpu_count() or 1


def _probe(dim: int, cols: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.standard_normal((dim, cols)) + 1j * rng.standard_normal((dim, cols))


def _cluster_sizes(values: Sequence[complex], tol: float = CLUSTER_TOL) -> list[int]:
    n = len(values)
    label = list(range(n))

    def find(i):
        while label[i] != i:
            label[i] = label[label[i]]
            i = label[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) <= tol:
                label[find(i)] = find(j)
    roots = [find(i) for i in range(n)]
    return [roots.count(r) for r in roots]


def beyn(
    matrix_fn: Callable[..., np.ndarray],
    dim: int,
    contour: ContourConfig,
    residual_fn: Callable[[complex], np.ndarray] | None = None,
) -> EigenResult:
    """Beyn's contour method for a generic holomorphic matrix function.

    ``matrix_fn(z)`` returns the dim x dim matrix at z. The moments use the
    scaled variable (z - mu)/radius for conditioning. When the rank of the
    first moment saturates the probe block (more eigenvalues than probe
    columns, e.g. scalar problems) the block-Hankel extension with higher
    moments is used instead.
    """
    residual_fn = residual_fn or matrix_fn
    zs = contour.nodes()
    mu, rad = contour.center_mu, contour.radius
    cols = min(int(contour.probe_cols), dim)
    v = _probe(dim, cols, contour.rng_seed)

    def solve(j):
        z = zs[j]
        try:
            mat = matrix_fn(z)
        except NearEigenvalueError as exc:
            raise NearEigenvalueError(
                f"contour node {j} (z = {z:.10g}): {exc}; shift the contour center slightly",
                wavenumber=exc.wavenumber,
                cond=exc.cond,
            ) from None
        try:
            x = linalg.solve(mat, v)
        except linalg.LinAlgError as exc:
            raise SolverError(f"M(z) is singular at contour node {j} (z = {z:.10g}): {exc}") from None
        return x, np.linalg.norm(mat)

    workers = min(thread_count(), len(zs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            sols = list(pool.map(solve, range(len(zs))))
    else:
        sols = [solve(j) for j in range(len(zs))]
    # ordered reduction regardless of completion order
    xs = [s[0] for s in sols]
    m_norm_floor = min(s[1] for s in sols)
    scale = max(np.linalg.norm(x, 2) for x in xs)

    w = (zs - mu) / rad  # scaled node positions on the unit circle
    n_q = len(zs)

    def moment(p):
        acc = np.zeros((dim, cols), dtype=complex)
        for j in range(n_q):
            acc += (w[j] ** (p + 1)) * xs[j]
        return acc / n_q

    depth = 1
    while True:
        moments = [moment(p) for p in range(2 * depth)]
        h0 = np.block([[moments[i + j] for j in range(depth)] for i in range(depth)])
        h1 = np.block([[moments[i + j + 1] for j in range(depth)] for i in range(depth)])
        try:
            u, s, vh = linalg.svd(h0, full_matrices=False)
        except linalg.LinAlgError as exc:
            raise SolverError(f"SVD of the contour moment failed: {exc}") from None
        floor = 1e-12 * max(scale, np.finfo(float).tiny)
        keep = (s > contour.rank_rel_tol * s[0]) & (s > floor) if s.size and s[0] > 0 else np.zeros(0, bool)
        rank = int(keep.sum())
        # residues can cancel in the first moment (scalar problems); a
        # nonzero higher moment still signals eigenvalues inside
        hidden = rank == 0 and any(np.linalg.norm(a, 2) > floor for a in moments[1:])
        if (rank < min(h0.shape) and not hidden) or depth >= MAX_DEPTH:
            break
        depth += 1

    if rank == 0:
        return EigenResult([], contour, 0)
    u0, s0, w0 = u[:, :rank], s[:rank], vh[:rank].conj().T
    b = u0.conj().T @ h1 @ w0 / s0
    lam_s, y = linalg.eig(b)
    lam = mu + rad * lam_s
    vecs = (u0 @ y)[:dim]

    found = []
    for i, k in enumerate(lam):
        if not contour.contains(k):
            continue
        if abs(k.imag) <= REAL_TOL:
            k = complex(k.real, 0.0)
        vec = vecs[:, i]
        nrm = np.linalg.norm(vec)
        if nrm == 0:
            continue
        vec = vec / nrm
        try:
            mk = residual_fn(k)
        except (NearEigenvalueError, linalg.LinAlgError):
            continue
        denom = max(np.linalg.norm(mk), m_norm_floor)
        res = np.linalg.norm(mk @ vec) / denom if denom > 0 else np.inf
        if res <= contour.residual_tol:
            found.append((k, res, vec))
    found.sort(key=lambda t: (t[0].real, t[0].imag))
    sizes = _cluster_sizes([f[0] for f in found])
    pairs = [Eigenpair(k, r, c, vec) for (k, r, vec), c in zip(found, sizes)]
    return EigenResult(pairs, contour, rank)


def beyn_solve(mesh: BoundaryMesh, params: MediumParams, contour: ContourConfig) -> EigenResult:
    """Transmission eigenvalues of the discretized problem inside ``contour``."""
    if params.degenerate:
        raise ConfigError(f"n == n_tilde == {params.n}: M(k) vanishes identically; no eigenvalue problem")
    if abs(contour.center_mu) <= contour.radius * (1 + 1e-12):
        raise ConfigError("contour must not enclose or touch k = 0")
    fn = MatrixFunction(mesh, params)
    return beyn(fn, mesh.size, contour, residual_fn=lambda k: fn(k, check=False))


def scan_contours(
    solve: Callable[[ContourConfig], EigenResult],
    k_min: float,
    k_max: float,
    base: ContourConfig | None = None,
) -> EigenResult:
    """Tile [k_min, k_max] with radius-0.5 contours stepped by 0.5.

    Each contour owns the band [c - 0.25, c + 0.25) of real parts around
    its center, well inside the contour, so eigenvalues near a contour edge
    are always taken from the neighbour that sees them centrally.
    """
    if not (0 < k_min < k_max):
        raise ConfigError(f"scan range must satisfy 0 < k_min < k_max, got [{k_min}, {k_max}]")
    base = base or ContourConfig(center_mu=k_min + 0.25)
    half = SCAN_RADIUS / 2
    # keep the first contour away from k = 0
    start = max(k_min + half, SCAN_RADIUS + 1e-3)
    centers = []
    c = start
    while c - half < k_max:
        centers.append(c)
        c += SCAN_RADIUS
    collected: list[tuple[int, Eigenpair]] = []
    for i, c in enumerate(centers):
        res = solve(replace(base, center_mu=c, radius=SCAN_RADIUS))
        lo = k_min if i == 0 else c - half
        for e in res.eigenvalues:
            if lo <= e.k.real < c + half and k_min <= e.k.real <= k_max:
                collected.append((i, e))
    collected.sort(key=lambda t: (t[1].k.real, t[1].k.imag))
    # a value seen by two contours is kept once; degenerate pairs from the
    # same contour are kept as they are
    merged: list[tuple[int, Eigenpair]] = []
    for i, e in collected:
        if not any(j != i and abs(f.k - e.k) <= SCAN_DEDUPE for j, f in merged):
            merged.append((i, e))
    out = [e for _, e in merged]
    for e, size in zip(out, _cluster_sizes([e.k for e in out])):
        e.cluster_size = size
    return EigenResult(out, base, len(out))


def scan_eigenvalues(
    mesh: BoundaryMesh,
    params: MediumParams,
    k_min: float,
    k_max: float,
    contour: ContourConfig | None = None,
) -> EigenResult:
    """All eigenvalues with real part in [k_min, k_max], sorted by real part."""
    return scan_contours(lambda cfg: beyn_solve(mesh, params, cfg), k_min, k_max, contour)
