"""Collocation matrices for the single-layer and adjoint double-layer operators.

The density is interpolated by quadratic Lagrange polynomials in the curve
parameter on each element; the geometry itself is evaluated exactly from
the parametrization. Row ``i`` of every matrix is the operator applied to
the nodal basis and evaluated at collocation node ``i``.

Quadrature per (node, element) pair:

* elements containing the node: split at the node, log part by a
  log-weighted Gauss rule, remainder by Gauss-Legendre;
* the two neighbours on each side: Gauss-Legendre on 4 sub-panels;
* everything else: plain Gauss-Legendre.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.linalg import lapack

from . import specfun
from .errors import ConfigError, NearEigenvalueError
from .geometry import BoundaryMesh, curve_diameter
from .quadrature import gauss_legendre01, gauss_log01, quadratic_shape

REGULAR_ORDER = 10
NEAR_ORDER = 10
NEAR_PANELS = 4
NEAR_RANGE = 2
SINGULAR_ORDER = 16
COND_LIMIT = 1e12

INV_2PI = 1.0 / (2.0 * math.pi)

LAPLACE = "laplace"


def _wavenumber(k) -> complex:
    if isinstance(k, str):
        raise ConfigError(f"wavenumber must be numeric, got {k!r}")
    k = complex(k)
    if k == 0:
        raise ConfigError("k = 0 must use the Laplace assembly path")
    return k


def laplace_scale(mesh: BoundaryMesh) -> float:
    """Scaling length of the log kernel: twice the curve diameter."""
    return 2.0 * curve_diameter(mesh.curve)


# --- kernels -----------------------------------------------------------------
# Each kernel gets collocation data x (P,2), nu_x (P,2), kappa_x (P,) and
# integration points y (P,Q,2), returning values of shape (P,Q).


def _diff(x, y):
    d = x[:, None, :] - y
    r = np.sqrt((d**2).sum(-1))
    return d, r


def _single_layer_kernel(k):
    def kern(x, nu, kappa, y):
        _, r = _diff(x, y)
        return 0.25j * specfun.hankel1(0, k * r)

    return kern


def _kprime_kernel(k):
    def kern(x, nu, kappa, y):
        d, r = _diff(x, y)
        proj = (d * nu[:, None, :]).sum(-1)
        return -0.25j * k * specfun.hankel1(1, k * r) * proj / r

    return kern


def _laplace_single_kernel(rho):
    def kern(x, nu, kappa, y):
        _, r = _diff(x, y)
        return -INV_2PI * np.log(r / rho)

    return kern


def _laplace_kprime_kernel(x, nu, kappa, y):
    d, r = _diff(x, y)
    proj = (d * nu[:, None, :]).sum(-1)
    return -INV_2PI * proj / r**2


# --- element integration -------------------------------------------------------


def _element_points(mesh: BoundaryMesh, elem, xi):
    """Curve points and ds/dxi at local coordinates ``xi`` (P,Q) of elements ``elem`` (P,)."""
    h = mesh.h
    t = (2 * elem + 1)[:, None] * h + h * xi
    x, dx, _ = mesh.curve.derivatives(t.ravel())
    y = x.reshape(t.shape + (2,))
    jac = np.hypot(dx[:, 0], dx[:, 1]).reshape(t.shape) * h
    return y, jac


def _integrate(mesh, kernel, nodes, elem, xi, w):
    """Sum_q w K(x_i, y(xi_q)) L_a(xi_q) |dy/dxi| for each pair; returns (P,3)."""
    y, jac = _element_points(mesh, elem, xi)
    kv = kernel(mesh.points[nodes], mesh.normals[nodes], mesh.curvature[nodes], y)
    return np.einsum("pq,pqa->pa", kv * jac * w, quadratic_shape(xi))


def _pairs(mesh: BoundaryMesh):
    """Classify (node, element) pairs: returns (self_nodes, self_elems, self_xi), near pairs."""
    n, ne = mesh.size, mesh.n_elements
    nodes = np.arange(n)
    # element owning the node as midpoint / left endpoint; endpoints also belong to e-1
    own = nodes // 2
    self_nodes = [nodes, nodes[::2]]
    self_elems = [own, (own[::2] - 1) % ne]
    self_xi = [np.where(nodes % 2, 0.0, -1.0), np.ones(n // 2)]
    sn = np.concatenate(self_nodes)
    se = np.concatenate(self_elems)
    sx = np.concatenate(self_xi)

    near_n, near_e = [], []
    for off in range(-NEAR_RANGE - 1, NEAR_RANGE + 1):
        e = (own + off) % ne
        near_n.append(nodes)
        near_e.append(e)
    nn = np.concatenate(near_n)
    ee = np.concatenate(near_e)
    key = set(zip(sn.tolist(), se.tolist()))
    mask = np.array([(a, b) not in key for a, b in zip(nn.tolist(), ee.tolist())])
    nn, ee = nn[mask], ee[mask]
    uniq = np.unique(np.stack([nn, ee], -1), axis=0)
    return sn, se, sx, uniq[:, 0], uniq[:, 1]


def _panel_rule(xi_star, q):
    """Panels splitting [-1,1] at xi_star; yields (sign, length) per panel."""
    if xi_star <= -1:
        return [(1.0, 2.0)]
    if xi_star >= 1:
        return [(-1.0, 2.0)]
    return [(-1.0, 1.0 + xi_star), (1.0, 1.0 - xi_star)]


def _singular_log(mesh, nodes, elem, xi_star, smooth_kernel, log_coeff):
    """Self-element integrals with a log singularity at the collocation node.

    ``smooth_kernel(x, y, u)`` returns K + c(r) ln(u) (bounded), and
    ``log_coeff(x, y)`` returns c(r), the coefficient of -ln|xi - xi*|
    in the kernel, so that K = [K + c ln u] - c ln u on each panel.
    """
    ug, wg = gauss_legendre01(SINGULAR_ORDER)
    ul, wl = gauss_log01(SINGULAR_ORDER)
    out = np.zeros((len(nodes), 3), dtype=complex)
    x = mesh.points[nodes]
    for xs in np.unique(xi_star):
        sel = np.nonzero(xi_star == xs)[0]
        for sign, length in _panel_rule(xs, SINGULAR_ORDER):
            xi_g = np.broadcast_to(xs + sign * length * ug, (len(sel), len(ug)))
            y, jac = _element_points(mesh, elem[sel], xi_g)
            f = smooth_kernel(x[sel], y, np.broadcast_to(ug, xi_g.shape))
            out[sel] += length * np.einsum("pq,pqa->pa", f * jac * wg, quadratic_shape(xi_g))

            xi_l = np.broadcast_to(xs + sign * length * ul, (len(sel), len(ul)))
            y, jac = _element_points(mesh, elem[sel], xi_l)
            c = log_coeff(x[sel], y)
            # int_0^1 g(u) (-ln u) du ~ sum wl g(ul); the kernel carries -c ln u
            out[sel] += length * np.einsum("pq,pqa->pa", c * jac * wl, quadratic_shape(xi_l))
    return out


def _singular_split(mesh, nodes, elem, xi_star, kernel):
    """Self-element integrals of a bounded kernel: Gauss-Legendre on split panels."""
    ug, wg = gauss_legendre01(SINGULAR_ORDER)
    out = np.zeros((len(nodes), 3), dtype=complex)
    for xs in np.unique(xi_star):
        sel = np.nonzero(xi_star == xs)[0]
        for sign, length in _panel_rule(xs, SINGULAR_ORDER):
            xi_g = np.broadcast_to(xs + sign * length * ug, (len(sel), len(ug)))
            out[sel] += length * _integrate(mesh, kernel, nodes[sel], elem[sel], xi_g, wg)
    return out


def _assemble(mesh: BoundaryMesh, kernel, singular) -> np.ndarray:
    n, ne = mesh.size, mesh.n_elements
    xr, wr = gauss_legendre01(REGULAR_ORDER)
    xi_reg = 2.0 * xr - 1.0
    w_reg = 2.0 * wr

    nodes = np.repeat(np.arange(n), ne)
    elems = np.tile(np.arange(ne), n)
    xi = np.broadcast_to(xi_reg, (len(nodes), len(xi_reg)))
    contrib = _integrate(mesh, kernel, nodes, elems, xi, w_reg).reshape(n, ne, 3).astype(complex)

    sn, se, sx, nn, ne_ = _pairs(mesh)

    xg, wg = gauss_legendre01(NEAR_ORDER)
    sub = (np.arange(NEAR_PANELS)[:, None] + xg[None, :]).ravel() / NEAR_PANELS
    xi_near = np.broadcast_to(2.0 * sub - 1.0, (len(nn), sub.size))
    w_near = np.tile(wg, NEAR_PANELS) * 2.0 / NEAR_PANELS
    contrib[nn, ne_] = _integrate(mesh, kernel, nn, ne_, xi_near, w_near)

    contrib[sn, se] = singular(mesh, sn, se, sx)

    mat = np.zeros((n, n), dtype=complex)
    for a in range(3):
        mat[:, mesh.elements[:, a]] += contrib[:, :, a]
    return mat


def assemble_single_layer(mesh: BoundaryMesh, k) -> np.ndarray:
    """S_k with kernel (i/4) H_0^(1)(k|x-y|)."""
    k = _wavenumber(k)
    kern = _single_layer_kernel(k)

    def smooth(x, y, u):
        _, r = _diff(x, y)
        return 0.25j * specfun.hankel1(0, k * r) + INV_2PI * specfun.bessel_j(0, k * r) * np.log(u)

    def logc(x, y):
        _, r = _diff(x, y)
        return INV_2PI * specfun.bessel_j(0, k * r)

    sing = lambda m, n_, e, s: _singular_log(m, n_, e, s, smooth, logc)  # noqa: E731
    return _assemble(mesh, kern, sing)


def assemble_kprime(mesh: BoundaryMesh, k) -> np.ndarray:
    """K'_k with kernel d/dnu(x) of (i/4) H_0^(1)(k|x-y|)."""
    k = _wavenumber(k)
    kern = _kprime_kernel(k)
    sing = lambda m, n_, e, s: _singular_split(m, n_, e, s, _with_limit(kern))  # noqa: E731
    return _assemble(mesh, kern, sing)


def assemble_single_layer_laplace(mesh: BoundaryMesh, rho: float | None = None) -> np.ndarray:
    """S_0 with kernel -(1/2pi) ln(|x-y|/rho), rho = 2 * diameter by default."""
    rho = laplace_scale(mesh) if rho is None else float(rho)
    kern = _laplace_single_kernel(rho)

    def smooth(x, y, u):
        _, r = _diff(x, y)
        return -INV_2PI * np.log(r / (rho * u))

    def logc(x, y):
        return np.full(y.shape[:2], INV_2PI)

    sing = lambda m, n_, e, s: _singular_log(m, n_, e, s, smooth, logc)  # noqa: E731
    return _assemble(mesh, kern, sing)


def assemble_kprime_laplace(mesh: BoundaryMesh) -> np.ndarray:
    """K'_0 with kernel -(1/2pi) (x-y).nu(x) / |x-y|^2."""
    sing = lambda m, n_, e, s: _singular_split(m, n_, e, s, _with_limit(_laplace_kprime_kernel))  # noqa: E731
    return _assemble(mesh, _laplace_kprime_kernel, sing)


def _with_limit(kern, r_min: float = 1e-9):
    """Replace the 0/0 coincident-point evaluation by the limit -kappa/(4 pi)."""

    def wrapped(x, nu, kappa, y):
        _, r = _diff(x, y)
        tiny = r < r_min
        if not tiny.any():
            return kern(x, nu, kappa, y)
        y_safe = np.where(tiny[..., None], y + 1.0, y)
        out = kern(x, nu, kappa, y_safe)
        return np.where(tiny, -kappa[:, None] / (4 * math.pi), out)

    return wrapped


# --- Dirichlet-to-Neumann ------------------------------------------------------


@dataclass(frozen=True)
class LUFactor:
    lu: np.ndarray
    piv: np.ndarray
    cond: float


def factor(mat: np.ndarray, wavenumber=None, check: bool = True) -> LUFactor:
    """LU with partial pivoting plus a LAPACK 1-norm condition estimate."""
    lu, piv = linalg.lu_factor(mat, check_finite=True)
    anorm = np.abs(mat).sum(axis=0).max()
    gecon = lapack.zgecon if np.iscomplexobj(lu) else lapack.dgecon
    rcond, info = gecon(lu, anorm, norm="1")
    cond = np.inf if rcond == 0 else 1.0 / rcond
    if check and cond > COND_LIMIT:
        where = "" if wavenumber is None else f" at wavenumber {complex(wavenumber):.10g}"
        raise NearEigenvalueError(
            f"single-layer matrix is numerically singular{where} (condition estimate {cond:.3e} > {COND_LIMIT:.0e}); "
            "the wavenumber is at or near an interior Dirichlet eigenvalue",
            wavenumber=wavenumber,
            cond=cond,
        )
    return LUFactor(lu, piv, cond)


def dtn_matrix(mesh: BoundaryMesh, k, check: bool = True) -> np.ndarray:
    """(I/2 + K'_k) S_k^{-1} as a dense matrix (k may be :data:`LAPLACE`)."""
    if isinstance(k, str) and k == LAPLACE:
        s = assemble_single_layer_laplace(mesh)
        kp = assemble_kprime_laplace(mesh)
        label = 0.0
    else:
        s = assemble_single_layer(mesh, k)
        kp = assemble_kprime(mesh, k)
        label = complex(k)
    f = factor(s, wavenumber=label, check=check)
    rhs = 0.5 * np.eye(mesh.size) + kp
    # D S = rhs  <=>  S^T D^T = rhs^T
    return linalg.lu_solve((f.lu, f.piv), rhs.T, trans=1).T


def dtn_apply(mesh: BoundaryMesh, k, trace) -> np.ndarray:
    """Normal derivative of the interior solution with boundary values ``trace``."""
    trace = np.asarray(trace, dtype=complex)
    if trace.shape != (mesh.size,):
        raise ConfigError(f"trace must have shape ({mesh.size},), got {trace.shape}")
    if isinstance(k, str) and k == LAPLACE:
        s = assemble_single_layer_laplace(mesh)
        kp = assemble_kprime_laplace(mesh)
        label = 0.0
    else:
        s = assemble_single_layer(mesh, k)
        kp = assemble_kprime(mesh, k)
        label = complex(k)
    f = factor(s, wavenumber=label)
    density = linalg.lu_solve((f.lu, f.piv), trace)
    return 0.5 * density + kp @ density
