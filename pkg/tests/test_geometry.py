import math

import numpy as np
import pytest

from teig.errors import ConfigError, GeometryError
from teig.geometry import Circle, Ellipse, TrigPoly, build_mesh, curve_diameter, parse_curve


def test_circle_mesh_counts_and_curvature():
    m = build_mesh(Circle(1.0), 40)
    assert m.size == 40 and m.n_elements == 20
    assert np.allclose(m.curvature, 1.0, atol=1e-12)


def test_ellipse_vertex_curvature():
    m = build_mesh(Ellipse(1.0, 0.8), 40)
    assert abs(m.curvature[0] - 1.0 / 0.64) < 1e-10


@pytest.mark.parametrize("n", [6, 40, 122])
def test_perimeter_from_jacobian(n):
    from teig.quadrature import gauss_legendre01

    m = build_mesh(Circle(2.0), n)
    x, w = gauss_legendre01(12)
    total = 0.0
    for e in range(m.n_elements):
        t = 2 * e * m.h + 2 * m.h * x
        _, dx, _ = m.curve.derivatives(t)
        total += 2 * m.h * np.dot(w, np.hypot(dx[:, 0], dx[:, 1]))
    assert abs(total - 4 * math.pi) < 1e-10


def test_mesh_invariants():
    m = build_mesh(Ellipse(1.0, 0.8), 40)
    assert np.allclose(np.linalg.norm(m.normals, axis=1), 1.0, atol=1e-14)
    assert abs(m.spans.sum() - 2 * math.pi) < 1e-12
    counts = np.bincount(m.elements[:, [0, 2]].ravel(), minlength=m.size)
    assert np.all(counts[::2] == 2) and np.all(counts[1::2] == 0)
    assert np.all(m.elements[:, 2] == np.roll(m.elements[:, 0], -1))


def test_mesh_is_immutable():
    m = build_mesh(Circle(1.0), 10)
    with pytest.raises(ValueError):
        m.points[0, 0] = 5.0


def test_refinement_consistency():
    a, b = build_mesh(Ellipse(1.0, 0.8), 40), build_mesh(Ellipse(1.0, 0.8), 80)
    assert np.abs(a.points - b.points[::2]).max() <= 1e-14


def test_normals_point_outward():
    for curve in (Circle(1.0), Ellipse(1.0, 0.8), TrigPoly(cx=(0, 1, 0.1), sy=(0, 1, 0.05))):
        m = build_mesh(curve, 64)
        c = m.points.mean(axis=0)
        assert np.all(np.einsum("ij,ij->i", m.normals, m.points - c) > 0)


def test_quadratic_interpolation_order():
    from teig.quadrature import quadratic_shape

    errs = []
    for n in (40, 80):
        m = build_mesh(Ellipse(1.0, 0.8), n)
        xi = np.linspace(-1, 1, 9)
        shape = quadratic_shape(xi)
        err = 0.0
        for e in range(m.n_elements):
            nodes = m.points[m.elements[e]]
            interp = shape @ nodes
            exact = m.curve.point((2 * e + 1) * m.h + m.h * xi)
            err = max(err, np.abs(interp - exact).max())
        errs.append(err)
    assert 6.5 < errs[0] / errs[1] < 9.5


@pytest.mark.parametrize("n", [7, 4, 0])
def test_bad_counts(n):
    with pytest.raises(ConfigError, match="even"):
        build_mesh(Circle(1.0), n)


def test_non_integer_count():
    with pytest.raises(ConfigError, match="integer"):
        build_mesh(Circle(1.0), 3.5)


def test_irregular_and_clockwise_curves():
    with pytest.raises(GeometryError, match="oriented"):
        build_mesh(TrigPoly(cx=(0, 1), sy=(0, -1)), 20)
    with pytest.raises(GeometryError, match="regular"):
        # cusp: x = cos^3, y = sin^3 has vanishing speed at t = 0
        build_mesh(TrigPoly(cx=(0, 0.75, 0, 0.25), sy=(0, 0.75, 0, -0.25)), 20)


@pytest.mark.parametrize("curve,d", [(Circle(1.0), 2.0), (Ellipse(1.0, 0.8), 2.0), (Circle(0.5), 1.0)])
def test_diameter(curve, d):
    assert abs(curve_diameter(curve) - d) <= 0.01 * d


def test_parse_curve():
    assert parse_curve("circle radius=2") == Circle(2.0)
    assert parse_curve("ellipse a=1 b=0.8") == Ellipse(1.0, 0.8)
    tp = parse_curve("trigpoly cx=0,1 sy=0,1.2")
    assert tp.sy == (0.0, 1.2)
    for bad in ("square", "circle radius=-1", "ellipse a=1 c=2", "circle radius=x", ""):
        with pytest.raises(ConfigError):
            parse_curve(bad)
