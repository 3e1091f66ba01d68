"""Cylinder functions of integer order and complex argument.

Thin, guarded wrappers around :mod:`scipy.special`: every public function
rejects arguments outside the region the package has been validated on
(``|z| <= 50``, ``|Im z| <= 5``) instead of returning silently inaccurate
values. Inputs may be scalars or arrays; outputs follow numpy broadcasting.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import special
from scipy.optimize import brentq

from .errors import ConfigError, DomainError, SingularArgumentError

MAX_ABS_Z = 50.0
MAX_IMAG_Z = 5.0
SINGULAR_RADIUS = 1e-12
MAX_ORDER = 200

KINDS = ("J", "Y", "H1", "H2")


def _check_order(m) -> int:
    if isinstance(m, (bool, np.bool_)) or int(m) != m:
        raise ConfigError(f"order must be a non-negative integer, got {m!r}")
    m = int(m)
    if m < 0:
        raise ConfigError(f"order must be non-negative, got {m}")
    if m > MAX_ORDER:
        raise DomainError(f"order {m} exceeds supported maximum {MAX_ORDER}")
    return m


def _check_arg(z, singular_at_zero: bool = False):
    z = np.asarray(z)
    if z.size:
        if not np.all(np.isfinite(z)):
            raise DomainError("non-finite argument")
        az = np.abs(z)
        if az.max() > MAX_ABS_Z:
            raise DomainError(f"|z| = {az.max():.6g} exceeds validated bound {MAX_ABS_Z}")
        if np.iscomplexobj(z) and np.abs(z.imag).max() > MAX_IMAG_Z:
            raise DomainError(f"|Im z| = {np.abs(z.imag).max():.6g} exceeds validated bound {MAX_IMAG_Z}")
        if singular_at_zero and az.min() < SINGULAR_RADIUS:
            raise SingularArgumentError("Y_m / Hankel functions are singular at z = 0")
    return z


def _out(v):
    return v[()] if isinstance(v, np.ndarray) and v.ndim == 0 else v


def bessel_j(m, z):
    """J_m(z). Real for real input, complex otherwise."""
    m = _check_order(m)
    z = _check_arg(z)
    return _out(special.jv(m, z))


def bessel_y(m, z):
    """Y_m(z); raises for z = 0."""
    m = _check_order(m)
    z = _check_arg(z, singular_at_zero=True)
    return _out(special.yv(m, z))


def hankel1(m, z):
    m = _check_order(m)
    z = _check_arg(z, singular_at_zero=True)
    return _out(special.hankel1(m, z))


def hankel2(m, z):
    m = _check_order(m)
    z = _check_arg(z, singular_at_zero=True)
    return _out(special.hankel2(m, z))


_EVAL = {"J": bessel_j, "Y": bessel_y, "H1": hankel1, "H2": hankel2}


def cylinder(kind: str, m, z):
    """Dispatch on ``kind`` in {"J", "Y", "H1", "H2"}."""
    try:
        fn = _EVAL[kind]
    except KeyError:
        raise ConfigError(f"unknown cylinder function kind {kind!r}; expected one of {KINDS}") from None
    return fn(m, z)


def deriv(kind: str, m, z):
    """Derivative C'_m(z) from the three-term recurrence.

    C'_0 = -C_1 and C'_m = (C_{m-1} - C_{m+1}) / 2 for m >= 1.
    """
    m = _check_order(m)
    if m == 0:
        return -cylinder(kind, 1, z)
    return 0.5 * (cylinder(kind, m - 1, z) - cylinder(kind, m + 1, z))


def _mcmahon(m: int, s: int) -> float:
    beta = (s + 0.5 * m - 0.25) * math.pi
    mu = 4.0 * m * m
    return beta - (mu - 1) / (8 * beta) - 4 * (mu - 1) * (7 * mu - 31) / (3 * (8 * beta) ** 3)


def bessel_zero(m, s) -> float:
    """s-th positive zero j_{m,s} of J_m.

    All positive zeros of J_m exceed m, and consecutive zeros are more
    than pi/2 apart, so a sign-change scan with step 0.25 starting at m
    brackets each zero exactly once. The McMahon estimate only sets how
    far the scan has to run.
    """
    m = _check_order(m)
    if int(s) != s or s < 1:
        raise ConfigError(f"zero index must be a positive integer, got {s!r}")
    s = int(s)
    upper = max(_mcmahon(m, s), m + s * math.pi) + math.pi
    grid = np.arange(max(m, 1e-3), upper + 0.25, 0.25)
    vals = special.jv(m, grid)
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    # zero landing exactly on a grid point
    exact = np.nonzero(vals == 0.0)[0]
    if exact.size:
        brackets = sorted(set(idx.tolist()) | set((exact - 1).tolist()))
        idx = np.asarray(brackets)
    if idx.size < s:
        raise DomainError(f"failed to bracket j_({m},{s})")
    i = idx[s - 1]
    return brentq(lambda x: special.jv(m, x), grid[i], grid[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)
