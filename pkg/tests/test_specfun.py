import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from teig import specfun
from teig.errors import ConfigError, DomainError, SingularArgumentError


def test_j0_at_zero():
    assert specfun.bessel_j(0, 0) == 1


@pytest.mark.parametrize("m,z", [(1, 3.831705970207512), (0, 2.404825557695773)])
def test_j_known_zeros(m, z):
    assert abs(specfun.bessel_j(m, z)) < 1e-11


def test_hankel_definitions():
    rng = np.random.default_rng(0)
    z = rng.uniform(0.2, 45, 300) + 1j * rng.uniform(-5, 5, 300)
    z = z[np.abs(z) <= 50]
    for m in (0, 1, 4, 12):
        j, y = specfun.bessel_j(m, z), specfun.bessel_y(m, z)
        for h, ref in ((specfun.hankel1(m, z), j + 1j * y), (specfun.hankel2(m, z), j - 1j * y)):
            scale = np.maximum(np.abs(j), np.abs(y))
            assert np.all(np.abs(h - ref) <= 1e-10 * scale)


@pytest.mark.parametrize("m", range(6))
def test_wronskian(m):
    x = 1.7
    w = specfun.bessel_j(m, x) * specfun.deriv("Y", m, x) - specfun.deriv("J", m, x) * specfun.bessel_y(m, x)
    assert abs(w - 2 / (np.pi * x)) < 1e-10


@pytest.mark.parametrize("m", range(6))
def test_hankel_conjugates_on_real_axis(m):
    x = 2.3
    assert abs(specfun.hankel2(m, x) - np.conj(specfun.hankel1(m, x))) < 1e-14 * abs(specfun.hankel1(m, x))


def test_derivative_values():
    assert specfun.deriv("J", 0, 0) == 0
    assert abs(specfun.deriv("J", 1, 1.841183781340659)) < 1e-10


@settings(max_examples=40, deadline=None)
@given(m=st.integers(0, 8), re=st.floats(0.3, 30), im=st.floats(-3, 3), kind=st.sampled_from(["J", "Y", "H1", "H2"]))
def test_derivative_matches_finite_difference(m, re, im, kind):
    z, h = complex(re, im), 1e-5
    fd = (specfun.cylinder(kind, m, z + h) - specfun.cylinder(kind, m, z - h)) / (2 * h)
    assert abs(specfun.deriv(kind, m, z) - fd) <= 1e-6 * max(1.0, abs(fd))


def test_cauchy_riemann():
    rng = np.random.default_rng(3)
    h = 1e-6
    for _ in range(20):
        r, t = rng.uniform(0.5, 20), rng.uniform(-0.2, 0.2) + rng.choice([0, np.pi])
        z = r * np.exp(1j * t)
        m = int(rng.integers(0, 5))
        f = lambda w: specfun.bessel_j(m, w)  # noqa: E731
        dx = (f(z + h) - f(z - h)) / (2 * h)
        dy = (f(z + 1j * h) - f(z - 1j * h)) / (2 * h)
        assert abs(dx - dy / 1j) <= 1e-6 * max(1.0, abs(dx))


def test_against_scipy_reference():
    z = np.linspace(0.1, 45, 200) + 0.7j
    for m in (0, 3, 11):
        assert np.allclose(specfun.bessel_j(m, z), special.jv(m, z), rtol=1e-12, atol=0)


def test_vectorized_shapes():
    z = np.linspace(1, 2, 7)
    assert specfun.hankel1(2, z).shape == (7,)
    assert np.isscalar(specfun.bessel_j(1, 0.5)) or np.ndim(specfun.bessel_j(1, 0.5)) == 0


@pytest.mark.parametrize(
    "m,s,expected",
    [(1, 1, 3.831705970207512), (2, 1, 2 * 2.567811150920341), (3, 1, 2 * 3.190080947961992)],
)
def test_bessel_zero_known(m, s, expected):
    assert abs(specfun.bessel_zero(m, s) - expected) < 1e-12 * max(1, expected) + 1e-14


def test_bessel_zero_matches_scipy():
    for m in range(8):
        assert np.allclose([specfun.bessel_zero(m, s) for s in range(1, 7)], special.jn_zeros(m, 6), rtol=1e-13)


def test_zeros_interlace():
    for m in range(6):
        for s in range(1, 6):
            assert specfun.bessel_zero(m, s) < specfun.bessel_zero(m + 1, s) < specfun.bessel_zero(m, s + 1)


@pytest.mark.parametrize(
    "call,exc",
    [
        (lambda: specfun.bessel_j(0, 60.0), DomainError),
        (lambda: specfun.bessel_j(0, 3 + 6j), DomainError),
        (lambda: specfun.bessel_j(-1, 1.0), ConfigError),
        (lambda: specfun.bessel_j(1.5, 1.0), ConfigError),
        (lambda: specfun.bessel_y(0, 0.0), SingularArgumentError),
        (lambda: specfun.hankel1(2, 0), SingularArgumentError),
        (lambda: specfun.hankel2(2, 1e-14), SingularArgumentError),
        (lambda: specfun.bessel_j(0, np.nan), DomainError),
        (lambda: specfun.cylinder("K", 0, 1.0), ConfigError),
        (lambda: specfun.bessel_zero(1, 0), ConfigError),
    ],
)
def test_guards(call, exc):
    with pytest.raises(exc):
        call()
