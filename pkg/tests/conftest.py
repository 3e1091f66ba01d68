import functools

import pytest

from teig.geometry import Circle, Ellipse, build_mesh
from teig.nep import ContourConfig, MediumParams, beyn_solve, scan_eigenvalues


@functools.lru_cache(maxsize=None)
def mesh(kind, nodes, *shape):
    curve = Circle(*shape) if kind == "circle" else Ellipse(*shape)
    return build_mesh(curve, nodes)


@functools.lru_cache(maxsize=None)
def bie_run(kind, shape, nodes, n, ntilde, eta, mu, seed=42):
    """Cached Beyn solve; BIE runs are the slow part of the suite."""
    return beyn_solve(mesh(kind, nodes, *shape), MediumParams(n, ntilde, eta), ContourConfig(mu, rng_seed=seed))


@functools.lru_cache(maxsize=None)
def bie_scan(kind, shape, nodes, n, ntilde, eta, k_min, k_max):
    return scan_eigenvalues(mesh(kind, nodes, *shape), MediumParams(n, ntilde, eta), k_min, k_max)


@pytest.fixture
def circle40():
    return mesh("circle", 40, 1.0)


@pytest.fixture
def circle80():
    return mesh("circle", 80, 1.0)


@pytest.fixture
def circle160():
    return mesh("circle", 160, 1.0)
