"""Closed parametrized curves and their quadratic-element meshes.

Curves are parametrized over t in [0, 2*pi) counterclockwise, so the
outward unit normal is the tangent rotated by -90 degrees. A mesh with
``N`` collocation points has ``N/2`` quadratic elements; element ``e``
spans ``[2e h, (2e+2) h]`` (``h = 2*pi/N``) with nodes ``2e``, ``2e+1``
(midpoint) and ``2e+2`` (shared with the next element).
"""
from __future__ import annotations

import math
import shlex
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, GeometryError

TWO_PI = 2.0 * math.pi


class BoundaryCurve:
    """Base class; subclasses implement :meth:`derivatives`."""

    kind: str = "curve"

    def derivatives(self, t):
        """Return (x, x', x'') at parameters ``t`` as arrays of shape (len(t), 2)."""
        raise NotImplementedError

    def point(self, t):
        return self.derivatives(np.atleast_1d(t))[0]

    def describe(self) -> str:
        raise NotImplementedError

    def validate(self, samples: int = 2048) -> None:
        t = np.linspace(0.0, TWO_PI, samples, endpoint=False)
        x, dx, ddx = self.derivatives(t)
        speed = np.hypot(dx[:, 0], dx[:, 1])
        if not np.all(np.isfinite(x)) or speed.min() <= 1e-10 * max(speed.max(), 1.0):
            raise GeometryError(f"{self.describe()}: parametrization is not regular")
        # signed area via the shoelace formula on the dense sample
        area = 0.5 * np.sum(x[:, 0] * dx[:, 1] - x[:, 1] * dx[:, 0]) * (TWO_PI / samples)
        if area <= 0:
            raise GeometryError(f"{self.describe()}: curve must be positively oriented (counterclockwise)")
        closing = np.linalg.norm(self.point(TWO_PI)[0] - x[0])
        if closing > 1e-10 * max(1.0, np.abs(x).max()):
            raise GeometryError(f"{self.describe()}: curve is not closed")


@dataclass(frozen=True)
class Circle(BoundaryCurve):
    radius: float = 1.0
    center: tuple[float, float] = (0.0, 0.0)
    kind = "circle"

    def __post_init__(self):
        if not self.radius > 0:
            raise ConfigError(f"circle radius must be positive, got {self.radius}")

    def derivatives(self, t):
        t = np.asarray(t, dtype=float)
        c, s = np.cos(t), np.sin(t)
        r = self.radius
        x = np.stack([self.center[0] + r * c, self.center[1] + r * s], axis=-1)
        dx = np.stack([-r * s, r * c], axis=-1)
        ddx = np.stack([-r * c, -r * s], axis=-1)
        return x, dx, ddx

    def describe(self) -> str:
        return f"circle radius={self.radius!r}"


@dataclass(frozen=True)
class Ellipse(BoundaryCurve):
    a: float = 1.0
    b: float = 1.0
    kind = "ellipse"

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ConfigError(f"ellipse semi-axes must be positive, got a={self.a}, b={self.b}")

    def derivatives(self, t):
        t = np.asarray(t, dtype=float)
        c, s = np.cos(t), np.sin(t)
        x = np.stack([self.a * c, self.b * s], axis=-1)
        dx = np.stack([-self.a * s, self.b * c], axis=-1)
        ddx = np.stack([-self.a * c, -self.b * s], axis=-1)
        return x, dx, ddx

    def describe(self) -> str:
        return f"ellipse a={self.a!r} b={self.b!r}"


@dataclass(frozen=True)
class TrigPoly(BoundaryCurve):
    """x(t) = sum_j cx[j] cos(jt) + sx[j] sin(jt), likewise for y.

    Coefficient lists are indexed from j = 0; ``sx[0]`` and ``sy[0]``
    multiply sin(0) and therefore have no effect.
    """

    cx: tuple[float, ...] = (0.0, 1.0)
    sx: tuple[float, ...] = (0.0, 0.0)
    cy: tuple[float, ...] = (0.0, 0.0)
    sy: tuple[float, ...] = (0.0, 1.0)
    kind = "trigpoly"

    def __post_init__(self):
        for name in ("cx", "sx", "cy", "sy"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        if not any(self.cx[1:] + self.sx[1:]) or not any(self.cy[1:] + self.sy[1:]):
            raise ConfigError("trigpoly needs at least one non-constant term per coordinate")

    @staticmethod
    def _series(t, cos_c, sin_c):
        t = np.asarray(t, dtype=float)
        f = np.zeros_like(t)
        df = np.zeros_like(t)
        ddf = np.zeros_like(t)
        for j, c in enumerate(cos_c):
            cj, sj = np.cos(j * t), np.sin(j * t)
            f += c * cj
            df -= c * j * sj
            ddf -= c * j * j * cj
        for j, s in enumerate(sin_c):
            cj, sj = np.cos(j * t), np.sin(j * t)
            f += s * sj
            df += s * j * cj
            ddf -= s * j * j * sj
        return f, df, ddf

    def derivatives(self, t):
        xs = self._series(t, self.cx, self.sx)
        ys = self._series(t, self.cy, self.sy)
        return tuple(np.stack([a, b], axis=-1) for a, b in zip(xs, ys))

    def describe(self) -> str:
        fmt = lambda v: ",".join(repr(x) for x in v)  # noqa: E731
        return f"trigpoly cx={fmt(self.cx)} sx={fmt(self.sx)} cy={fmt(self.cy)} sy={fmt(self.sy)}"


def parse_curve(text: str) -> BoundaryCurve:
    """Parse ``circle radius=1``, ``ellipse a=1 b=0.8`` or ``trigpoly cx=... sx=... cy=... sy=...``."""
    parts = shlex.split(text)
    if not parts:
        raise ConfigError("empty curve specification")
    kind, args = parts[0].lower(), {}
    for item in parts[1:]:
        if "=" not in item:
            raise ConfigError(f"curve argument {item!r} is not key=value")
        key, val = item.split("=", 1)
        args[key.strip().lower()] = val.strip()
    try:
        if kind == "circle":
            curve = Circle(radius=float(args.pop("radius", 1.0)))
        elif kind == "ellipse":
            curve = Ellipse(a=float(args.pop("a", 1.0)), b=float(args.pop("b", 1.0)))
        elif kind == "trigpoly":
            lists = {k: tuple(float(v) for v in args.pop(k, "0").split(",")) for k in ("cx", "sx", "cy", "sy")}
            curve = TrigPoly(**lists)
        else:
            raise ConfigError(f"unknown curve kind {kind!r}; expected circle, ellipse or trigpoly")
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad numeric value in curve specification {text!r}: {exc}") from None
    if args:
        raise ConfigError(f"unexpected curve arguments for {kind}: {sorted(args)}")
    curve.validate()
    return curve


def curvature_from(dx, ddx):
    speed = np.hypot(dx[:, 0], dx[:, 1])
    return (dx[:, 0] * ddx[:, 1] - dx[:, 1] * ddx[:, 0]) / speed**3


def normals_from(dx):
    speed = np.hypot(dx[:, 0], dx[:, 1])
    return np.stack([dx[:, 1], -dx[:, 0]], axis=-1) / speed[:, None]


@dataclass(frozen=True, eq=False)
class BoundaryMesh:
    """Collocation nodes and quadratic elements on a closed curve."""

    curve: BoundaryCurve
    t: np.ndarray
    points: np.ndarray
    normals: np.ndarray
    curvature: np.ndarray
    speed: np.ndarray
    elements: np.ndarray
    spans: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.t)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def h(self) -> float:
        """Parameter spacing between consecutive nodes."""
        return TWO_PI / self.size

    def __post_init__(self):
        for arr in (self.t, self.points, self.normals, self.curvature, self.speed, self.elements, self.spans):
            arr.setflags(write=False)


def build_mesh(curve: BoundaryCurve, collocation_points: int) -> BoundaryMesh:
    """Uniform-in-parameter quadratic mesh with ``collocation_points`` nodes."""
    if isinstance(collocation_points, bool) or int(collocation_points) != collocation_points:
        raise ConfigError(f"collocation point count must be an integer, got {collocation_points!r}")
    n = int(collocation_points)
    if n < 6 or n % 2:
        raise ConfigError(f"collocation point count must be even and >= 6 (two nodes per quadratic element), got {n}")
    curve.validate()
    h = TWO_PI / n
    t = np.arange(n) * h
    x, dx, ddx = curve.derivatives(t)
    speed = np.hypot(dx[:, 0], dx[:, 1])
    e = np.arange(n // 2)
    elements = np.stack([2 * e, 2 * e + 1, (2 * e + 2) % n], axis=-1)
    spans = np.full(n // 2, 2 * h)
    return BoundaryMesh(
        curve=curve,
        t=t,
        points=x,
        normals=normals_from(dx),
        curvature=curvature_from(dx, ddx),
        speed=speed,
        elements=elements,
        spans=spans,
    )


def curve_diameter(curve: BoundaryCurve, samples: int = 720) -> float:
    """Largest pairwise distance over a dense boundary sample."""
    t = np.linspace(0.0, TWO_PI, samples, endpoint=False)
    x = curve.point(t)
    diff = x[:, None, :] - x[None, :, :]
    return float(np.sqrt((diff**2).sum(-1)).max())
