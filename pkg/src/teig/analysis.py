"""Conductivity sweeps, limit classification and refractive-index estimation.

Sweeps follow individual eigenvalue branches while eta is halved (towards
0) or doubled (towards infinity). The EOC column is computed from
consecutive differences, EOC_i = log2(d_{i-1} / d_i) with
d_i = |k(eta_i) - k(eta_{i-1})|, which needs no knowledge of the limit and
leaves the first two rows empty. Errors against a reference (when one is
available) are reported separately in ``eps``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from . import oracle, specfun
from .errors import ConfigError, EstimationError, TrackingError, UnsupportedBranchError
from .nep import ContourConfig, MediumParams, beyn_solve, scan_eigenvalues
from .oracle import DiskProblem, DoubleLayerDisk

DIRECTIONS = ("to_zero", "to_infinity")
REFERENCES = ("classical_oracle", "dirichlet_family", "none")
TRACK_WINDOW = 0.25
TIE_TOL = 1e-8
CLASSIFY_TOL = 1e-3
N_RANGE = (1.05, 100.0)


@dataclass
class ConvergenceRow:
    eta: float
    k_values: list[float]
    eps: list[float | None]
    eoc: list[float | None]


@dataclass(frozen=True)
class SweepSpec:
    direction: str
    eta0: float
    steps: int = 10
    reference: str | float | Sequence[float] = "none"

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ConfigError(f"direction must be one of {DIRECTIONS}, got {self.direction!r}")
        if not self.eta0 > 0:
            raise ConfigError(f"eta0 must be positive, got {self.eta0}")
        if int(self.steps) != self.steps or self.steps < 3:
            raise ConfigError(f"steps must be an integer >= 3, got {self.steps}")
        if isinstance(self.reference, str) and self.reference not in REFERENCES:
            raise ConfigError(f"reference must be one of {REFERENCES} or a number, got {self.reference!r}")

    def etas(self) -> list[float]:
        f = 0.5 if self.direction == "to_zero" else 2.0
        return [self.eta0 * f**i for i in range(int(self.steps))]


@dataclass(frozen=True)
class Branch:
    """Eigenvalue branch to follow: starting guess and (for oracles) Fourier order."""

    seed: float
    m: int | None = None


# --- EOC -------------------------------------------------------------------------


def eoc_column(values: Sequence[float], reference: float | None = None) -> list[float | None]:
    """EOC per row.

    Without a reference: from consecutive differences (first two rows empty).
    With a reference: log2(eps_prev / eps) with eps = |k - reference|
    (first row empty).
    """
    vals = np.asarray(values, dtype=float)
    out: list[float | None] = [None] * len(vals)
    if reference is None:
        d = np.abs(np.diff(vals))
        for i in range(2, len(vals)):
            a, b = d[i - 2], d[i - 1]
            out[i] = math.log2(a / b) if a > 0 and b > 0 else None
    else:
        e = np.abs(vals - reference)
        for i in range(1, len(vals)):
            out[i] = math.log2(e[i - 1] / e[i]) if e[i - 1] > 0 and e[i] > 0 else None
    return out


# --- limits ----------------------------------------------------------------------


@dataclass(frozen=True)
class LimitClass:
    kind: str  # dirichlet | modified | unresolved
    m: int | None = None
    s: int | None = None
    value: float | None = None

    def __str__(self):
        if self.kind == "unresolved":
            return "unresolved"
        return f"{self.kind}({self.m},{self.s})"


def _family(radius: float, scale: float, k_top: float, m_max: int = 20):
    """(value, m, s) for all j_{m,s}/(radius*scale) up to k_top."""
    out = []
    for m in range(m_max + 1):
        s = 1
        while True:
            v = specfun.bessel_zero(m, s) / (radius * scale)
            if v > k_top:
                break
            out.append((v, m, s))
            s += 1
    return out


def classify_limit(k_limit: float, radius: float = 1.0, n: float = 4.0, tol: float = CLASSIFY_TOL) -> LimitClass:
    """Nearest Dirichlet (j/R) or modified Dirichlet (j/(R sqrt n)) value within ``tol``."""
    if not k_limit > 0:
        raise ConfigError(f"k_limit must be positive, got {k_limit}")
    best = []
    for kind, scale in (("dirichlet", 1.0), ("modified", math.sqrt(n))):
        cands = _family(radius, scale, k_limit + tol)
        if cands:
            v, m, s = min(cands, key=lambda c: abs(c[0] - k_limit))
            if abs(v - k_limit) <= tol:
                best.append((abs(v - k_limit), kind, m, s, v))
    if not best:
        return LimitClass("unresolved")
    best.sort()
    if len(best) == 2 and abs(best[0][0] - best[1][0]) <= 1e-12:
        return LimitClass("unresolved")
    _, kind, m, s, v = best[0]
    return LimitClass(kind, m, s, v)


def _nearest_limit(problem, k: float) -> float:
    """Closest member of the eta -> infinity reference families."""
    if isinstance(problem, DoubleLayerDisk):
        lo, hi = max(0.05, k - 1.0), k + 1.0
        layered = oracle.layered_dirichlet_det_fn(problem.R, problem.r, problem.n1, problem.n2)
        cands = list(oracle.find_roots(layered, lo, hi).values(expand=False))
        if problem.variant == "conductive":
            cands += [v for v, _, _ in _family(problem.R, 1.0, hi)]
    elif isinstance(problem, DiskProblem):
        cands = [v for v, _, _ in _family(problem.radius, math.sqrt(problem.n), k + 1.0)]
        if problem.variant != "zero_index":
            cands += [v for v, _, _ in _family(problem.radius, 1.0, k + 1.0)]
    else:
        raise ConfigError("dirichlet_family reference needs a disk problem")
    if not cands:
        raise ConfigError(f"no limit reference found near k = {k}")
    return min(cands, key=lambda v: abs(v - k))


# --- sweeps ----------------------------------------------------------------------


def _oracle_det(problem):
    if isinstance(problem, DiskProblem):
        return oracle.disk_det_fn(problem)
    return oracle.double_layer_det_fn(problem)


def _track_oracle(problem, eta: float, prev: Branch, step: int, window: float = TRACK_WINDOW) -> float:
    p = problem.with_eta(eta)
    lo = max(1e-3, prev.seed - window)
    roots = oracle.find_roots(_oracle_det(p), lo, prev.seed + window, orders=[prev.m])
    cands = roots.for_order(prev.m)
    if not cands:
        raise TrackingError(f"step {step} (eta={eta:g}): lost branch m={prev.m} near k={prev.seed:.6f}")
    dist = sorted(abs(c - prev.seed) for c in cands)
    if len(dist) > 1 and dist[1] - dist[0] <= TIE_TOL:
        raise TrackingError(f"step {step} (eta={eta:g}): two candidates equidistant from k={prev.seed:.10f}")
    return min(cands, key=lambda c: abs(c - prev.seed))


def _distinct(values, tol=1e-6):
    out = []
    for v in sorted(values, key=lambda z: z.real):
        if not any(abs(v - w) <= tol for w in out):
            out.append(v)
    return out


def _track_bie(mesh, params, eta, prev: float, step: int, contour: ContourConfig) -> float:
    p = replace(params, eta=eta)
    res = beyn_solve(mesh, p, replace(contour, center_mu=prev))
    cands = _distinct([e.k for e in res.eigenvalues if abs(e.k.imag) <= 1e-3])
    if not cands:
        raise TrackingError(f"step {step} (eta={eta:g}): no eigenvalue found near k={prev:.6f}")
    dist = sorted(abs(c - prev) for c in cands)
    if len(dist) > 1 and dist[1] - dist[0] <= TIE_TOL:
        raise TrackingError(f"step {step} (eta={eta:g}): two candidates equidistant from k={prev:.10f}")
    return min(cands, key=lambda c: abs(c - prev)).real


def default_branches(problem, tracked: int, k_min: float = 0.5, k_max: float = 6.0) -> list[Branch]:
    """Lowest ``tracked`` roots among orders m >= 1 at the problem's eta."""
    roots = oracle.find_roots(_oracle_det(problem), k_min, k_max)
    picks = [Branch(r.k, r.m) for r in roots if r.m >= 1][:tracked]
    if len(picks) < tracked:
        raise ConfigError(f"only {len(picks)} branches with m >= 1 in [{k_min}, {k_max}]")
    return picks


def run_sweep(problem, spec: SweepSpec, tracked: int = 1, branches: Sequence[Branch] | None = None,
              contour: ContourConfig | None = None, force_bie: bool = False) -> list[ConvergenceRow]:
    """Follow eigenvalue branches through the eta sequence of ``spec``.

    ``problem`` is a :class:`DiskProblem` or :class:`DoubleLayerDisk`
    (oracle path) or a ``(mesh, MediumParams)`` pair (boundary-integral
    path). With ``force_bie`` a disk problem is solved by the
    boundary-integral path on a 160-node circle mesh.
    """
    etas = spec.etas()
    bie = isinstance(problem, tuple) or force_bie
    if bie:
        if isinstance(problem, tuple):
            mesh, params = problem
        else:
            from .geometry import Circle, build_mesh

            if not isinstance(problem, DiskProblem):
                raise ConfigError("force_bie needs a single-layer disk problem")
            mesh = build_mesh(Circle(problem.radius), 160)
            params = MediumParams(problem.n, 0.0 if problem.variant == "zero_index" else 1.0, problem.eta)
        contour = contour or ContourConfig(center_mu=1.0)
        if branches is None:
            if isinstance(problem, DiskProblem):
                branches = default_branches(problem.with_eta(etas[0]), tracked)
            else:
                found = scan_eigenvalues(mesh, replace(params, eta=etas[0]), 0.5, 5.0, contour)
                branches = [Branch(v.real) for v in _distinct(found.values())][:tracked]
    else:
        if branches is None:
            branches = default_branches(problem.with_eta(etas[0]), tracked)
    branches = list(branches)
    if not branches:
        raise ConfigError("no branches to track")

    tracks: list[list[float]] = []
    for b in branches:
        cur, seq = b, []
        for i, eta in enumerate(etas):
            if bie:
                k = _track_bie(mesh, params, eta, cur.seed, i, contour)
            else:
                # the first row snaps the seed onto the nearest root of its order
                k = _track_oracle(problem, eta, cur, i, window=0.05 if i == 0 else TRACK_WINDOW)
            seq.append(k)
            cur = Branch(k, cur.m)
        tracks.append(seq)

    refs: list[float | None] = []
    for b, seq in zip(branches, tracks):
        refs.append(_resolve_reference(problem, spec, b, seq, len(refs)))

    eocs = [eoc_column(seq) for seq in tracks]
    rows = []
    for i, eta in enumerate(etas):
        ks = [t[i] for t in tracks]
        eps = [abs(k - r) if r is not None else None for k, r in zip(ks, refs)]
        rows.append(ConvergenceRow(eta, ks, eps, [e[i] for e in eocs]))
    return rows


def _resolve_reference(problem, spec: SweepSpec, branch: Branch, seq, idx: int):
    ref = spec.reference
    if isinstance(ref, (int, float)):
        return float(ref)
    if not isinstance(ref, str):
        return float(ref[idx])
    if ref == "none":
        return None
    if ref == "classical_oracle":
        if not isinstance(problem, DiskProblem) or problem.variant == "zero_index":
            raise ConfigError("classical_oracle reference needs a classical/conductive disk problem")
        base = DiskProblem("classical", problem.n, 0.0, problem.radius)
        return _track_oracle(base, 0.0, Branch(seq[-1], branch.m), -1) if branch.m is not None else \
            min(oracle.disk_roots(base, max(0.05, seq[-1] - 0.5), seq[-1] + 0.5).values(), key=lambda v: abs(v - seq[-1]))
    return _nearest_limit(problem if not isinstance(problem, tuple) else None, seq[-1])


def table_rows(rows: Sequence[ConvergenceRow], digits: int | None = None) -> list[list]:
    """Flatten rows into [eta, k1, eoc1, k2, eoc2, ...]."""
    out = []
    for r in rows:
        line = [r.eta]
        for k, e in zip(r.k_values, r.eoc):
            line += [round(k, digits) if digits else k, (round(e, digits) if digits and e is not None else e)]
        out.append(line)
    return out


# --- presets -------------------------------------------------------------------


def table_preset(number: int):
    """(problem, SweepSpec, branches) for the five conductivity-limit tables."""
    if number == 1:
        return (DiskProblem("conductive", 4.0, 0.5), SweepSpec("to_zero", 0.5, 10, "classical_oracle"),
                [Branch(2.8416, 1)])
    if number == 2:
        return (DiskProblem("conductive", 4.0, 80.0), SweepSpec("to_infinity", 80.0, 10, "dirichlet_family"),
                [Branch(2.5998, 2), Branch(3.7756, 1)])
    if number == 3:
        return (DiskProblem("zero_index", 4.0, 80.0), SweepSpec("to_infinity", 80.0, 10, "dirichlet_family"),
                [Branch(1.9396, 1), Branch(2.5993, 2), Branch(3.2287, 3)])
    if number in (4, 5):
        variant = "conductive" if number == 4 else "zero_index"
        prob = DoubleLayerDisk(1.0, 0.5, 0.5, 4.0, 80.0, variant)
        roots = oracle.double_layer_roots(prob, 2.3, 6.0)
        branches = [Branch(r.k, r.m) for r in roots][:3]
        return prob, SweepSpec("to_infinity", 80.0, 10, "dirichlet_family"), branches
    raise ConfigError(f"table preset must be 1..5, got {number}")


# --- index estimation ------------------------------------------------------------


def first_root(problem: DiskProblem, m: int = 1) -> float:
    """Lowest root of order m, scanning upward in windows."""
    lo, width = 0.02, 2.0
    top = specfun.MAX_ABS_Z / (problem.radius * max(1.0, math.sqrt(problem.n)))
    while lo < top:
        hi = min(lo + width, top)
        roots = oracle.find_roots(oracle.disk_det_fn(problem), lo, hi, orders=[m]).for_order(m)
        if roots:
            return roots[0]
        lo = hi
    raise EstimationError(f"no root of order {m} below k = {top:.3g} for {problem}")


def _k1(n: float, eta: float, radius: float) -> float:
    variant = "classical" if eta == 0 else "conductive"
    return first_root(DiskProblem(variant, n, eta, radius), 1)


def estimate_n_small_eta(k1_measured: float, eta: float = 0.0, radius: float = 1.0,
                         n_range: tuple[float, float] = N_RANGE) -> float:
    """Index n_approx whose conductive disk problem (at ``eta``) has first eigenvalue k1_measured.

    "First eigenvalue" is the lowest root of the m = 1 branch. With eta = 0
    this inverts the classical problem. The branch value decreases
    monotonically in n, which bracketing verifies.
    """
    if not k1_measured > 0:
        raise EstimationError(f"measured eigenvalue must be positive, got {k1_measured}")
    lo, hi = n_range
    # the conductive branch may not exist close to n = 1, so bracket on a grid
    grid = [n for n in (lo, 1.1, 1.25, 1.5, 2.0, 3.0, 5.0, 8.0, 13.0, 20.0, 40.0, hi) if lo <= n <= hi]
    pts = []
    for n in grid:
        try:
            pts.append((n, _k1(n, eta, radius)))
        except EstimationError:
            continue
    if len(pts) < 2:
        raise EstimationError(f"first eigenvalue undefined for n in [{lo}, {hi}] at eta = {eta}")
    ks = [k for _, k in pts]
    if any(b >= a for a, b in zip(ks, ks[1:])):
        raise EstimationError("first eigenvalue is not decreasing in n over the bracket")
    if not ks[-1] <= k1_measured <= ks[0]:
        raise EstimationError(
            f"measured k1 = {k1_measured} outside attainable range [{ks[-1]:.10g}, {ks[0]:.10g}] "
            f"for n in [{pts[0][0]}, {pts[-1][0]}]"
        )
    for (n_a, k_a), (n_b, k_b) in zip(pts, pts[1:]):
        if k_b <= k1_measured <= k_a:
            if k1_measured == k_a:
                return n_a
            if k1_measured == k_b:
                return n_b
            return brentq(lambda n: _k1(n, eta, radius) - k1_measured, n_a, n_b, xtol=1e-13,
                          rtol=4 * np.finfo(float).eps)
    raise EstimationError("bracketing failed")  # pragma: no cover


def estimate_n_large_eta(k1_measured: float, radius: float = 1.0, dirichlet_k: float | None = None) -> float:
    """n_approx = (kD / k1_measured)^2, the inverse of the modified Dirichlet limit.

    kD defaults to j_{1,1}/radius, the limit of the disk's m = 1 branch; for
    other domains pass the Dirichlet wavenumber of the tracked branch
    (e.g. from :func:`oracle.dirichlet_eigs_bie`).
    """
    if not k1_measured > 0:
        raise EstimationError(f"measured eigenvalue must be positive, got {k1_measured}")
    kd = specfun.bessel_zero(1, 1) / radius if dirichlet_k is None else float(dirichlet_k)
    if not kd > 0:
        raise EstimationError(f"Dirichlet reference must be positive, got {kd}")
    return (kd / k1_measured) ** 2


def faber_krahn_bound(n_max: float, lambda1: float) -> float:
    """Lower bound sqrt(lambda1 / n_max) for real transmission eigenvalues (n_max > 1)."""
    if not n_max > 1:
        raise UnsupportedBranchError(
            "bound for n_max <= 1 needs a boundary trace constant that is not computable here"
        )
    if not lambda1 > 0:
        raise ConfigError(f"lambda1 must be positive, got {lambda1}")
    return math.sqrt(lambda1 / n_max)
