import math

import numpy as np
import pytest
from scipy import special

from teig import layerops
from teig.errors import ConfigError, NearEigenvalueError
from teig.geometry import Circle, build_mesh

from conftest import mesh


def s_mode(m, k):
    """Single-layer eigenvalue of Fourier mode m on the unit circle."""
    return 0.5j * math.pi * special.jv(m, k) * special.hankel1(m, k)


def kp_mode(m, k):
    return 0.5j * math.pi * k * special.jvp(m, k) * special.hankel1(m, k) - 0.5


def fourier_action(f, eig, t, modes=40):
    """Apply a rotation-invariant operator with mode eigenvalues eig(|m|) to f."""
    n = 256
    tt = 2 * np.pi * np.arange(n) / n
    c = np.fft.fft(f(tt)) / n
    out = np.zeros_like(t, dtype=complex)
    for m in range(-modes, modes + 1):
        out += eig(abs(m)) * c[m % n] * np.exp(1j * m * t)
    return out


@pytest.mark.parametrize("m", [0, 1, 2])
def test_single_layer_fourier_modes(circle80, m):
    k = 2.0
    S = layerops.assemble_single_layer(circle80, k)
    c = np.cos(m * circle80.t)
    v = S @ c
    lam = (c @ v) / (c @ c)
    assert np.linalg.norm(v - lam * c) <= 1e-4 * np.linalg.norm(v)
    assert abs(lam - s_mode(m, k)) <= 1e-4 * abs(s_mode(m, k))


@pytest.mark.parametrize("m", [0, 1, 2])
def test_kprime_fourier_modes(circle80, m):
    k = 2.0
    K = layerops.assemble_kprime(circle80, k)
    c = np.cos(m * circle80.t)
    v = K @ c
    lam = (c @ v) / (c @ c)
    assert abs(lam - kp_mode(m, k)) <= 1e-3 * abs(kp_mode(m, k))


def test_single_layer_block_symmetry(circle80):
    # quadratic collocation is symmetric within endpoint rows and within midpoint rows
    S = layerops.assemble_single_layer(circle80, 2.0)
    for a in (0, 1):
        B = S[a::2, a::2]
        assert np.abs(B - B.T).max() <= 1e-10 * np.abs(S).max()


@pytest.mark.parametrize(
    "assemble,eig",
    [(layerops.assemble_single_layer, s_mode), (layerops.assemble_kprime, kp_mode)],
    ids=["S", "Kprime"],
)
def test_self_convergence_order(assemble, eig):
    k = 2.0
    f = lambda t: np.exp(np.cos(t)) + 0.5 * np.sin(2 * t)  # noqa: E731
    errs = []
    for n in (40, 80):
        m = mesh("circle", n, 1.0)
        ref = fourier_action(f, lambda j: eig(j, k), m.t)
        errs.append(np.abs(assemble(m, k) @ f(m.t) - ref).max())
    assert math.log2(errs[0] / errs[1]) >= 3


def test_kprime_laplace_limit(circle80):
    K0 = layerops.assemble_kprime_laplace(circle80)
    Kk = layerops.assemble_kprime(circle80, 1e-4)
    assert np.linalg.norm(Kk - K0) <= 1e-3 * np.linalg.norm(K0)


def test_plane_wave_dtn(circle160):
    k, d = 2.0, np.array([0.6, 0.8])
    x, nu = circle160.points, circle160.normals
    u = np.exp(1j * k * x @ d)
    dudn = 1j * k * (nu @ d) * u
    out = layerops.dtn_apply(circle160, k, u)
    assert np.linalg.norm(out - dudn) <= 1e-3 * np.linalg.norm(dudn)


def test_kprime_laplace_row_sums(circle40):
    K0 = layerops.assemble_kprime_laplace(circle40)
    assert np.abs(K0.sum(axis=1) + 0.5).max() <= 1e-6


@pytest.mark.parametrize("m", [1, 2, 3])
def test_laplace_single_layer_modes(circle160, m):
    S0 = layerops.assemble_single_layer_laplace(circle160)
    c = np.cos(m * circle160.t)
    lam = (c @ (S0 @ c)) / (c @ c)
    assert abs(lam - 1 / (2 * m)) <= 1e-4


def test_laplace_scaling_keeps_constant_mode(circle40):
    S0 = layerops.assemble_single_layer_laplace(circle40)
    assert np.linalg.norm(S0 @ np.ones(circle40.size)) > 0.1
    assert abs(layerops.laplace_scale(circle40) - 4.0) < 0.04


@pytest.mark.parametrize("m", [0, 1, 2, 3])
def test_laplace_dtn(circle160, m):
    c = np.cos(m * circle160.t)
    out = layerops.dtn_apply(circle160, layerops.LAPLACE, c)
    assert np.linalg.norm(out - m * c) <= 1e-3 * max(np.linalg.norm(m * c), 1.0)


@pytest.mark.parametrize("m", [0, 1, 2])
def test_helmholtz_dtn(circle160, m):
    c = np.cos(m * circle160.t)
    out = layerops.dtn_apply(circle160, 2.0, special.jv(m, 2.0) * c)
    ref = 2.0 * special.jvp(m, 2.0) * c
    assert np.linalg.norm(out - ref) <= 1e-3 * np.linalg.norm(ref)


def test_zero_trace(circle40):
    assert np.all(layerops.dtn_apply(circle40, 2.0, np.zeros(40)) == 0)


def test_dtn_conjugate_symmetry(circle160):
    k = 2.3 + 0.3j
    f = np.exp(1j * circle160.t) + 0.3 * np.cos(3 * circle160.t)
    a = layerops.dtn_apply(circle160, k, f)
    b = layerops.dtn_apply(circle160, np.conj(k), np.conj(f))
    assert np.linalg.norm(b - np.conj(a)) <= 1e-4 * np.linalg.norm(a)


def test_bitwise_reproducible():
    m = build_mesh(Circle(1.0), 40)
    a = layerops.assemble_single_layer(m, 2.1 + 0.1j)
    b = layerops.assemble_single_layer(m, 2.1 + 0.1j)
    assert np.array_equal(a, b)
    assert np.all(np.isfinite(a))


def test_zero_wavenumber_rejected(circle40):
    with pytest.raises(ConfigError, match="Laplace"):
        layerops.assemble_single_layer(circle40, 0)
    with pytest.raises(ConfigError):
        layerops.assemble_kprime(circle40, 0.0)


def test_trace_shape_checked(circle40):
    with pytest.raises(ConfigError):
        layerops.dtn_apply(circle40, 2.0, np.zeros(3))


def test_condition_guard():
    with pytest.raises(NearEigenvalueError) as info:
        layerops.factor(np.ones((4, 4), dtype=complex), wavenumber=2.4)
    assert info.value.wavenumber == 2.4 and info.value.cond > layerops.COND_LIMIT


def test_guard_near_dirichlet_eigenvalue(circle40):
    # locate the discrete S_k singularity near j_{0,1} by minimizing the smallest singular value
    from scipy.optimize import minimize_scalar

    smin = lambda k: np.linalg.svd(layerops.assemble_single_layer(circle40, k), compute_uv=False)[-1]  # noqa: E731
    res = minimize_scalar(smin, bracket=(2.39, 2.4048, 2.42), tol=1e-14)
    f = layerops.factor(layerops.assemble_single_layer(circle40, res.x), check=False)
    assert f.cond > 1e8
    assert abs(res.x - 2.404825557695773) < 1e-3
