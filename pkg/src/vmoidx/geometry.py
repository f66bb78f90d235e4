"""Parametric surfaces with boundary, their metric data and quadrature.

A :class:`Surface` is an atlas of rectangular :class:`Chart` objects used for
zero scanning, one quadrature chart that covers the surface once (possibly
degenerating on a null set), a list of :class:`BoundaryCurve` objects and the
topological metadata needed for the Euler characteristic.

Near the boundary the double of the surface is modelled by collar reflection:
the collar coordinate ``s`` (distance to the boundary, positive inside) is
simply allowed to become negative.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import sympy as sp

from . import expressions
from .errors import BoundaryPresent, ConfigError, EpsTooLarge

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class QuadratureSpec:
    """Tensor quadrature with ``n`` nodes per parameter direction."""

    n: int = 256

    def __post_init__(self):
        if int(self.n) < 2:
            raise ValueError("quadrature needs at least 2 nodes per direction")


def _rule(a, b, n, periodic):
    if periodic:
        h = (b - a) / n
        return a + h * (np.arange(n) + 0.5), np.full(n, h)
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


class Chart:
    """Parametrisation ``(u, v) -> R^3`` of a rectangle, with exact derivatives.

    ``orientation_sign`` is +1 when ``X_u x X_v`` points along the Gauss map of
    the surface and -1 otherwise.  ``inverse`` maps ambient points back to
    chart coordinates; when absent a damped Newton solve is used.
    """

    def __init__(self, name, exprs, bounds, periodic=(False, False),
                 orientation_sign=1, inverse=None):
        self.name = name
        self.bounds = np.asarray(bounds, dtype=float).reshape(2, 2)
        self.periodic = tuple(bool(p) for p in periodic)
        self.orientation_sign = 1 if orientation_sign >= 0 else -1
        self._inverse = inverse
        u, v = expressions.symbols(("u", "v"))
        if isinstance(exprs, str):
            exprs = expressions.parse(exprs, ("u", "v"))
        exprs = [sp.sympify(e) if not isinstance(e, str) else expressions.parse(e, ("u", "v"))
                 for e in exprs]
        if len(exprs) != 3:
            raise ConfigError(f"chart {name!r} needs three coordinate expressions")
        self.exprs = tuple(exprs)
        comp = expressions.compile_vector
        self._X = comp(exprs, ("u", "v"))
        self._Xu = comp([sp.diff(e, u) for e in exprs], ("u", "v"))
        self._Xv = comp([sp.diff(e, v) for e in exprs], ("u", "v"))
        self._Xuu = comp([sp.diff(e, u, 2) for e in exprs], ("u", "v"))
        self._Xuv = comp([sp.diff(e, u, v) for e in exprs], ("u", "v"))
        self._Xvv = comp([sp.diff(e, v, 2) for e in exprs], ("u", "v"))

    def __repr__(self):
        return f"Chart({self.name!r})"

    @staticmethod
    def _split(uv):
        uv = np.asarray(uv, dtype=float)
        return uv[..., 0], uv[..., 1]

    def embed(self, uv):
        return self._X(*self._split(uv))

    def tangents(self, uv):
        u, v = self._split(uv)
        return self._Xu(u, v), self._Xv(u, v)

    def second_derivatives(self, uv):
        u, v = self._split(uv)
        return self._Xuu(u, v), self._Xuv(u, v), self._Xvv(u, v)

    def metric(self, uv):
        Xu, Xv = self.tangents(uv)
        E = np.einsum("...i,...i->...", Xu, Xu)
        F = np.einsum("...i,...i->...", Xu, Xv)
        G = np.einsum("...i,...i->...", Xv, Xv)
        return np.stack([np.stack([E, F], -1), np.stack([F, G], -1)], -2)

    def area_element(self, uv):
        Xu, Xv = self.tangents(uv)
        return np.linalg.norm(np.cross(Xu, Xv), axis=-1)

    def normal(self, uv):
        Xu, Xv = self.tangents(uv)
        n = np.cross(Xu, Xv)
        return self.orientation_sign * n / np.linalg.norm(n, axis=-1, keepdims=True)

    def gaussian_curvature(self, uv):
        """``det II / det I`` from the exact second derivatives."""
        Xu, Xv = self.tangents(uv)
        Xuu, Xuv, Xvv = self.second_derivatives(uv)
        n = np.cross(Xu, Xv)
        n = n / np.linalg.norm(n, axis=-1, keepdims=True)
        dot = lambda a, b: np.einsum("...i,...i->...", a, b)
        L, M, N = dot(Xuu, n), dot(Xuv, n), dot(Xvv, n)
        g = self.metric(uv)
        return (L * N - M * M) / np.linalg.det(g)

    def coords(self, uv, w):
        """Chart components ``a`` of an ambient vector, ``w ~ a0 X_u + a1 X_v``."""
        Xu, Xv = self.tangents(uv)
        rhs = np.stack([np.einsum("...i,...i->...", Xu, w),
                        np.einsum("...i,...i->...", Xv, w)], -1)
        return np.linalg.solve(self.metric(uv), rhs[..., None])[..., 0]

    def vector(self, uv, a):
        Xu, Xv = self.tangents(uv)
        a = np.asarray(a, dtype=float)
        return a[..., :1] * Xu + a[..., 1:2] * Xv

    def contains(self, uv, pad=0.0):
        uv = np.asarray(uv, dtype=float)
        ok = np.ones(uv.shape[:-1], dtype=bool)
        for d in range(2):
            if not self.periodic[d]:
                lo, hi = self.bounds[d]
                ok &= (uv[..., d] >= lo - pad) & (uv[..., d] <= hi + pad)
        return ok

    def wrap(self, uv):
        uv = np.array(uv, dtype=float, copy=True)
        for d in range(2):
            if self.periodic[d]:
                lo, hi = self.bounds[d]
                uv[..., d] = lo + np.mod(uv[..., d] - lo, hi - lo)
        return uv

    def locate(self, P):
        P = np.asarray(P, dtype=float)
        if self._inverse is not None:
            return self.wrap(self._inverse(P))
        return self._newton_inverse(P)

    @cached_property
    def _lookup(self):
        n = 96
        us = np.linspace(*self.bounds[0], n)
        vs = np.linspace(*self.bounds[1], n)
        uv = np.stack(np.meshgrid(us, vs, indexing="ij"), -1).reshape(-1, 2)
        return uv, self.embed(uv)

    def _newton_inverse(self, P):
        flat = P.reshape(-1, 3)
        table_uv, table_X = self._lookup
        d2 = ((flat[:, None, :] - table_X[None, :, :]) ** 2).sum(-1)
        uv = table_uv[np.argmin(d2, axis=1)].copy()
        for _ in range(30):
            r = self.embed(uv) - flat
            # least squares step on the tangent plane
            step = self.coords(uv, r)
            uv = uv - step
            if np.max(np.abs(step)) < 1e-14:
                break
        return self.wrap(uv).reshape(P.shape[:-1] + (2,))

    def quadrature(self, n):
        """Tensor nodes and parameter-space weights on the chart rectangle."""
        (u0, u1), (v0, v1) = self.bounds
        uq, uw = _rule(u0, u1, n, self.periodic[0])
        vq, vw = _rule(v0, v1, n, self.periodic[1])
        uv = np.stack(np.meshgrid(uq, vq, indexing="ij"), -1).reshape(-1, 2)
        return uv, np.outer(uw, vw).ravel()


class BoundaryCurve:
    """A closed boundary component parametrised by ``theta in [0, 2 pi)``.

    The parametrisation keeps the surface on the left, so the outward conormal
    is ``tangent x gamma``.
    """

    def __init__(self, point, tangent, normal, speed, name="boundary"):
        self._point, self._tangent = point, tangent
        self._normal, self._speed = normal, speed
        self.name = name

    def point(self, theta):
        return self._point(np.asarray(theta, dtype=float))

    def unit_tangent(self, theta):
        return self._tangent(np.asarray(theta, dtype=float))

    def outward_conormal(self, theta):
        return self._normal(np.asarray(theta, dtype=float))

    def speed(self, theta):
        return self._speed(np.asarray(theta, dtype=float))

    def length(self, n=512):
        th = TWO_PI * (np.arange(n) + 0.5) / n
        return float(self.speed(th).sum() * TWO_PI / n)

    @classmethod
    def circle(cls, center, radius, outer=True, name="circle"):
        c = np.asarray(center, dtype=float)
        o = 1.0 if outer else -1.0

        def point(t):
            return c + radius * np.stack([np.cos(t), np.sin(t), np.zeros_like(t)], -1)

        def tangent(t):
            return o * np.stack([-np.sin(t), np.cos(t), np.zeros_like(t)], -1)

        def normal(t):
            return o * np.stack([np.cos(t), np.sin(t), np.zeros_like(t)], -1)

        return cls(point, tangent, normal, lambda t: np.full(np.shape(t), float(radius)), name)


@dataclass(frozen=True)
class CollarMap:
    """Collar ``(theta, s) -> point`` of one boundary component.

    ``s`` is the distance to the boundary; negative ``s`` reflects into the
    local double.
    """

    surface: "Surface"
    component: int
    width: float

    def __call__(self, theta, s):
        return self.surface.collar_point(self.component, theta, s)

    def reflect(self, theta, s):
        return self(theta, -np.asarray(s, dtype=float))

    def nearest(self, P):
        theta, s = self.surface.boundary_coordinates_all(P)[self.component]
        return theta, s


class Surface:
    """Base class; subclasses fill in charts, boundary curves and geometry."""

    name = "surface"
    genus = 0
    orientation = 1
    r0 = 0.5
    collar_width = 0.0

    def __init__(self):
        self.charts: list[Chart] = []
        self.quadrature_chart: Chart | None = None
        self.boundary: list[BoundaryCurve] = []

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r})"

    @property
    def boundary_count(self):
        return len(self.boundary)

    @property
    def is_closed(self):
        return self.boundary_count == 0

    def euler_characteristic(self):
        return 2 - 2 * int(self.genus) - int(self.boundary_count)

    # -- pointwise geometry ----------------------------------------------
    def locate(self, P):
        """Return ``(chart_index, uv)`` for ambient points on the surface."""
        P = np.asarray(P, dtype=float)
        uv = self.charts[0].locate(P)
        return np.zeros(P.shape[:-1], dtype=int), uv

    def normal(self, P):
        idx, uv = self.locate(P)
        out = np.empty(np.shape(P), dtype=float)
        for k, chart in enumerate(self.charts):
            m = idx == k
            if np.any(m):
                out[m] = chart.normal(uv[m])
        return out

    def project_to_surface(self, P):
        idx, uv = self.locate(P)
        out = np.empty(np.shape(P), dtype=float)
        for k, chart in enumerate(self.charts):
            m = idx == k
            if np.any(m):
                out[m] = chart.embed(uv[m])
        return out

    # -- boundary ----------------------------------------------------------
    def boundary_coordinates_all(self, P):
        """Per component ``(theta, s)`` of the nearest boundary point.

        ``s`` is signed: positive inside the surface, negative in the
        reflected collar.  The generic version samples the curve and refines
        by Newton on ``theta``.
        """
        P = np.asarray(P, dtype=float)
        flat = P.reshape(-1, 3)
        out = []
        for k, curve in enumerate(self.boundary):
            th = TWO_PI * np.arange(720) / 720
            pts = curve.point(th)
            d2 = ((flat[:, None, :] - pts[None]) ** 2).sum(-1)
            t = th[np.argmin(d2, axis=1)]
            h = 1e-6

            def f(tt):
                return np.einsum("ij,ij->i", curve.point(tt) - flat, curve.unit_tangent(tt))

            for _ in range(20):
                df = (f(t + h) - f(t - h)) / (2 * h)
                df = np.where(np.abs(df) < 1e-12, 1e-12, df)
                t = t - f(t) / df
            t = np.mod(t, TWO_PI)
            diff = flat - curve.point(t)
            dist = np.linalg.norm(diff, axis=-1)
            sign = np.where(np.einsum("ij,ij->i", diff, curve.outward_conormal(t)) > 0, -1.0, 1.0)
            out.append((t.reshape(P.shape[:-1]), (sign * dist).reshape(P.shape[:-1])))
        return out

    def boundary_coordinates(self, P):
        """Nearest component index, ``theta`` and signed distance ``s``."""
        P = np.asarray(P, dtype=float)
        if self.is_closed:
            shape = P.shape[:-1]
            return (np.full(shape, -1), np.zeros(shape), np.full(shape, np.inf))
        parts = self.boundary_coordinates_all(P)
        s_all = np.stack([p[1] for p in parts], 0)
        k = np.argmin(np.abs(s_all), axis=0)
        theta = np.take_along_axis(np.stack([p[0] for p in parts], 0), k[None], 0)[0]
        s = np.take_along_axis(s_all, k[None], 0)[0]
        return k, theta, s

    def boundary_distance(self, P):
        return self.boundary_coordinates(P)[2]

    def contains(self, P, margin=0.0):
        return self.boundary_distance(P) > margin

    def collar(self, component, width=None):
        return CollarMap(self, component, float(width or self.collar_width))

    def collar_point(self, k, theta, s):
        """Point at collar coordinates; first order in ``s`` off the boundary."""
        curve = self.boundary[k]
        theta = np.asarray(theta, dtype=float)
        s = np.asarray(s, dtype=float)
        base = curve.point(theta)
        nu = curve.outward_conormal(theta)
        return self.project_to_surface(base - s[..., None] * nu)

    def parallel_curve(self, k, r):
        """The curve ``C_r`` at collar distance ``r`` from component ``k``."""
        curve = self.boundary[k]
        h = 1e-6

        def point(t):
            return self.collar_point(k, t, np.full(np.shape(t), float(r)))

        def tangent(t):
            d = (point(t + h) - point(t - h)) / (2 * h)
            return d / np.linalg.norm(d, axis=-1, keepdims=True)

        def speed(t):
            return np.linalg.norm((point(t + h) - point(t - h)) / (2 * h), axis=-1)

        def normal(t):
            return np.cross(tangent(t), self.normal(point(t)))

        return BoundaryCurve(point, tangent, normal, speed, name=f"{curve.name}@{r:g}")

    # -- quadrature ------------------------------------------------------------
    def quadrature(self, n):
        """Nodes, ambient points and area weights covering the surface once."""
        chart = self.quadrature_chart
        uv, w = chart.quadrature(n)
        return uv, chart.embed(uv), w * chart.area_element(uv)

    def area(self, n=128):
        return float(self.quadrature(n)[2].sum())

    def scan_mask(self, P, margin=0.0):
        """Which ambient points count as interior for zero scanning."""
        if self.is_closed:
            return np.ones(np.shape(P)[:-1], dtype=bool)
        return self.contains(P, margin)

    def generating_loops(self):
        return {}


class PlanarDomain(Surface):
    """Disk or annulus in the plane ``z = 0``; the collar is exact here."""

    def __init__(self, outer=1.0, inner=None, r0=None, collar_width=None, name=None):
        super().__init__()
        self.outer = float(outer)
        self.inner = None if inner is None else float(inner)
        self.name = name or ("disk" if inner is None else "annulus")
        R = self.outer
        self.charts = [Chart("cartesian", ("u", "v", "0"), [[-R, R], [-R, R]],
                             inverse=lambda P: P[..., :2])]
        rho0 = 0.0 if inner is None else self.inner
        self.quadrature_chart = Chart(
            "polar", ("u*cos(v)", "u*sin(v)", "0"), [[rho0, R], [0.0, TWO_PI]],
            periodic=(False, True),
            inverse=lambda P: np.stack([np.hypot(P[..., 0], P[..., 1]),
                                        np.arctan2(P[..., 1], P[..., 0])], -1))
        self.boundary = [BoundaryCurve.circle((0, 0, 0), R, True, "outer")]
        if inner is not None:
            self.boundary.append(BoundaryCurve.circle((0, 0, 0), self.inner, False, "inner"))
        ring = R - rho0
        self.collar_width = float(collar_width or (R / 2 if inner is None else ring / 2))
        self.r0 = float(r0 or (R / 4 if inner is None else ring / 4))

    def locate(self, P):
        P = np.asarray(P, dtype=float)
        return np.zeros(P.shape[:-1], dtype=int), P[..., :2].copy()

    def normal(self, P):
        out = np.zeros(np.shape(P), dtype=float)
        out[..., 2] = 1.0
        return out

    def project_to_surface(self, P):
        out = np.array(P, dtype=float, copy=True)
        out[..., 2] = 0.0
        return out

    def _radii(self):
        radii = [self.outer]
        if self.inner is not None:
            radii.append(self.inner)
        return radii

    def boundary_coordinates_all(self, P):
        P = np.asarray(P, dtype=float)
        rho = np.hypot(P[..., 0], P[..., 1])
        theta = np.mod(np.arctan2(P[..., 1], P[..., 0]), TWO_PI)
        out = [(theta, self.outer - rho)]
        if self.inner is not None:
            out.append((theta.copy(), rho - self.inner))
        return out

    def collar_point(self, k, theta, s):
        theta = np.asarray(theta, dtype=float)
        s = np.asarray(s, dtype=float)
        R = self._radii()[k]
        rho = R - s if k == 0 else R + s
        rho = np.broadcast_to(rho, np.broadcast_shapes(theta.shape, s.shape))
        return np.stack([rho * np.cos(theta), rho * np.sin(theta), np.zeros_like(rho)], -1)

    def parallel_curve(self, k, r):
        R = self._radii()[k]
        return BoundaryCurve.circle((0, 0, 0), R - r if k == 0 else R + r, k == 0,
                                    name=f"{self.boundary[k].name}@{r:g}")

    def collar_chart(self, k):
        """Chart ``(theta, s)`` of the collar of component ``k``."""
        R = self._radii()[k]
        sgn = "-" if k == 0 else "+"
        return Chart(f"collar{k}", (f"({R!r} {sgn} v)*cos(u)", f"({R!r} {sgn} v)*sin(u)", "0"),
                     [[0.0, TWO_PI], [0.0, self.outer - (self.inner or 0.0)]],
                     periodic=(True, False), orientation_sign=1 if k == 0 else -1,
                     inverse=lambda P, R=R, k=k: np.stack([
                         np.mod(np.arctan2(P[..., 1], P[..., 0]), TWO_PI),
                         (R - np.hypot(P[..., 0], P[..., 1])) * (1 if k == 0 else -1)], -1))


class Sphere(Surface):
    """Round sphere; two stereographic scanning charts, lat-long quadrature."""

    def __init__(self, radius=1.0, name=None):
        super().__init__()
        a = float(radius)
        self.radius = a
        self.name = name or ("sphere" if a == 1.0 else f"sphere(r={a:g})")
        self.r0 = np.pi / 2 * a
        d = "(1 + u**2 + v**2)"
        self.charts = [
            Chart("north", (f"{a!r}*2*u/{d}", f"{a!r}*2*v/{d}", f"{a!r}*(1 - u**2 - v**2)/{d}"),
                  [[-1.25, 1.25], [-1.25, 1.25]],
                  inverse=lambda P: P[..., :2] / (a + P[..., 2:3])),
            Chart("south", (f"{a!r}*2*u/{d}", f"-{a!r}*2*v/{d}", f"-{a!r}*(1 - u**2 - v**2)/{d}"),
                  [[-1.25, 1.25], [-1.25, 1.25]],
                  inverse=lambda P: np.stack([P[..., 0], -P[..., 1]], -1) / (a - P[..., 2:3])),
        ]
        self.quadrature_chart = Chart(
            "latlong", (f"{a!r}*sin(u)*cos(v)", f"{a!r}*sin(u)*sin(v)", f"{a!r}*cos(u)"),
            [[0.0, np.pi], [0.0, TWO_PI]], periodic=(False, True),
            inverse=lambda P: np.stack([np.arccos(np.clip(P[..., 2] / a, -1, 1)),
                                        np.arctan2(P[..., 1], P[..., 0])], -1))

    def locate(self, P):
        P = np.asarray(P, dtype=float)
        north = P[..., 2] >= 0
        with np.errstate(divide="ignore", invalid="ignore"):
            uv = np.where(north[..., None], self.charts[0].locate(P), self.charts[1].locate(P))
        return np.where(north, 0, 1), uv

    def normal(self, P):
        P = np.asarray(P, dtype=float)
        return P / np.linalg.norm(P, axis=-1, keepdims=True)

    def project_to_surface(self, P):
        return self.radius * self.normal(P)


class Torus(Surface):
    """Axisymmetric torus ``((R + r cos t) cos p, (R + r cos t) sin p, r sin t)``."""

    genus = 1

    def __init__(self, R=2.0, r=1.0, name=None):
        super().__init__()
        self.R, self.r = float(R), float(r)
        self.name = name or "torus"
        self.r0 = 0.5 * self.r
        Rr, rr = repr(self.R), repr(self.r)
        chart = Chart(
            "angles", (f"({Rr} + {rr}*cos(u))*cos(v)", f"({Rr} + {rr}*cos(u))*sin(v)",
                       f"{rr}*sin(u)"),
            [[0.0, TWO_PI], [0.0, TWO_PI]], periodic=(True, True), orientation_sign=-1,
            inverse=self._angles)
        self.charts = [chart]
        self.quadrature_chart = chart

    def _angles(self, P):
        P = np.asarray(P, dtype=float)
        phi = np.arctan2(P[..., 1], P[..., 0])
        rho = np.hypot(P[..., 0], P[..., 1])
        theta = np.arctan2(P[..., 2], rho - self.R)
        return np.stack([np.mod(theta, TWO_PI), np.mod(phi, TWO_PI)], -1)

    def locate(self, P):
        P = np.asarray(P, dtype=float)
        return np.zeros(P.shape[:-1], dtype=int), self._angles(P)

    def _tube_center(self, P):
        phi = np.arctan2(P[..., 1], P[..., 0])
        return self.R * np.stack([np.cos(phi), np.sin(phi), np.zeros_like(phi)], -1)

    def normal(self, P):
        P = np.asarray(P, dtype=float)
        d = P - self._tube_center(P)
        return d / np.linalg.norm(d, axis=-1, keepdims=True)

    def project_to_surface(self, P):
        P = np.asarray(P, dtype=float)
        return self._tube_center(P) + self.r * self.normal(P)

    def frame(self, P):
        """Unit coordinate directions ``(e_theta, e_phi)`` at ambient points."""
        uv = self._angles(P)
        Xu, Xv = self.charts[0].tangents(uv)
        return (Xu / np.linalg.norm(Xu, axis=-1, keepdims=True),
                Xv / np.linalg.norm(Xv, axis=-1, keepdims=True))

    def generating_loops(self):
        return {
            "theta-loop": lambda t, phi0=0.3: np.stack([TWO_PI * t, np.full_like(t, phi0)], -1),
            "phi-loop": lambda t, theta0=0.3: np.stack([np.full_like(t, theta0), TWO_PI * t], -1),
        }


class ParametricSurface(Surface):
    """Single-chart surface built from expression strings (see ``load_surface``)."""

    def __init__(self, name, exprs, bounds, periodic=(False, False), genus=0,
                 boundary_count=0, orientation=1, r0=0.5, boundary_exprs=()):
        super().__init__()
        self.name = name
        self.genus = int(genus)
        self.orientation = 1 if orientation >= 0 else -1
        self.r0 = float(r0)
        chart = Chart(name, exprs, bounds, periodic, orientation_sign=self.orientation)
        self.charts = [chart]
        self.quadrature_chart = chart
        self._declared_boundaries = int(boundary_count)
        for i, (eu, ev) in enumerate(boundary_exprs):
            self.boundary.append(self._curve_from_chart(chart, eu, ev, f"boundary{i}"))
        if self.boundary and len(self.boundary) != self._declared_boundaries:
            raise ConfigError("number of boundary curves does not match boundary_count")
        self.collar_width = 2 * self.r0

    @property
    def boundary_count(self):
        return self._declared_boundaries

    def _curve_from_chart(self, chart, eu, ev, name):
        fu = expressions.compile_scalar(expressions.parse(eu, ("t",)), ("t",))
        fv = expressions.compile_scalar(expressions.parse(ev, ("t",)), ("t",))
        h = 1e-6

        def uv(t):
            return np.stack([fu(t), fv(t)], -1)

        def point(t):
            return chart.embed(uv(t))

        def dpoint(t):
            return (point(t + h) - point(t - h)) / (2 * h)

        def tangent(t):
            d = dpoint(t)
            return d / np.linalg.norm(d, axis=-1, keepdims=True)

        def normal(t):
            return np.cross(tangent(t), chart.normal(uv(t)))

        return BoundaryCurve(point, tangent, normal,
                             lambda t: np.linalg.norm(dpoint(t), axis=-1), name)

    def boundary_coordinates(self, P):
        if not self.boundary:
            shape = np.shape(P)[:-1]
            return (np.full(shape, -1), np.zeros(shape), np.full(shape, np.inf))
        return super().boundary_coordinates(P)

    @property
    def is_closed(self):
        return not self.boundary


CATALOG = {
    "disk": lambda: PlanarDomain(1.0),
    "annulus": lambda: PlanarDomain(1.0, 0.5),
    "sphere": lambda: Sphere(1.0),
    "torus": lambda: Torus(2.0, 1.0),
}


def get_surface(name):
    """Catalog lookup; ``sphere:3`` gives a sphere of radius 3."""
    if isinstance(name, Surface):
        return name
    key = str(name).strip().lower()
    if key.startswith("sphere:"):
        return Sphere(float(key.split(":", 1)[1]))
    if key not in CATALOG:
        raise ConfigError(f"unknown surface {name!r}; catalog: {sorted(CATALOG)}")
    return CATALOG[key]()


def load_surface(path_or_mapping):
    """Build a :class:`ParametricSurface` from a key-value config.

    Keys: ``name, x, y, z`` (expressions in ``u, v``), ``u_min, u_max, v_min,
    v_max``, ``periodic_u, periodic_v``, ``genus, boundary_count,
    orientation, r0`` and optionally ``boundary_<i>_u`` / ``boundary_<i>_v``
    (expressions in ``t``, keeping the surface on the left).
    """
    from .config import read_key_values

    cfg = (dict(path_or_mapping) if isinstance(path_or_mapping, dict)
           else read_key_values(path_or_mapping))
    try:
        exprs = (cfg["x"], cfg["y"], cfg["z"])
        bounds = [[float(sp.sympify(cfg["u_min"], locals={"pi": sp.pi})),
                   float(sp.sympify(cfg["u_max"], locals={"pi": sp.pi}))],
                  [float(sp.sympify(cfg["v_min"], locals={"pi": sp.pi})),
                   float(sp.sympify(cfg["v_max"], locals={"pi": sp.pi}))]]
    except KeyError as exc:
        raise ConfigError(f"surface config missing key {exc}") from exc
    truthy = lambda s: str(s).strip().lower() in {"1", "true", "yes", "on"}
    periodic = (truthy(cfg.get("periodic_u", "0")), truthy(cfg.get("periodic_v", "0")))
    n_bd = int(cfg.get("boundary_count", 0))
    curves = []
    i = 0
    while f"boundary_{i}_u" in cfg:
        curves.append((cfg[f"boundary_{i}_u"], cfg[f"boundary_{i}_v"]))
        i += 1
    genus = int(cfg.get("genus", 0))
    if genus < 0 or n_bd < 0:
        raise ConfigError("genus and boundary_count must be non-negative")
    return ParametricSurface(cfg.get("name", "custom"), exprs, bounds, periodic, genus,
                             n_bd, int(cfg.get("orientation", 1)), float(cfg.get("r0", 0.5)),
                             curves)


# ---------------------------------------------------------------------------
# operations


def euler_characteristic(S):
    return get_surface(S).euler_characteristic()


def gauss_bonnet_chi(S, quad=QuadratureSpec()):
    """``(1 / 2 pi) * integral of the Gaussian curvature`` over a closed surface."""
    S = get_surface(S)
    if not S.is_closed:
        raise BoundaryPresent(f"{S.name} has boundary; geodesic curvature term not supported")
    chart = S.quadrature_chart
    uv, w = chart.quadrature(quad.n)
    kappa = chart.gaussian_curvature(uv)
    return float(np.sum(kappa * chart.area_element(uv) * w) / TWO_PI)


def tangent_project(S, x, w):
    """``w - (w . gamma) gamma`` at surface points ``x``."""
    S = get_surface(S)
    w = np.asarray(w, dtype=float)
    gamma = S.normal(x)
    return w - np.einsum("...i,...i->...", w, gamma)[..., None] * gamma


def _ball_rule(n):
    rho, a = np.polynomial.legendre.leggauss(n)
    rho, a = 0.5 * (rho + 1.0), 0.5 * a
    m = 2 * n + 2
    t = TWO_PI * np.arange(m) / m
    R, T = np.meshgrid(rho, t, indexing="ij")
    W = np.outer(a * rho, np.full(m, TWO_PI / m))
    return np.stack([R * np.cos(T), R * np.sin(T)], -1).reshape(-1, 2), W.ravel()


def ball_nodes(S, P, eps, n=8, interior=True):
    """Vectorised :func:`metric_ball_sample` for many centres.

    Returns ambient nodes ``(M, K, 3)`` and weights ``(M, K)``.  The geodesic
    ball is replaced by the chart pre-image of the metric ellipse at the
    centre, with area-element corrected weights.
    """
    S = get_surface(S)
    P = np.atleast_2d(np.asarray(P, dtype=float))
    eps = float(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if eps > S.r0 * (1 + 1e-12):
        raise EpsTooLarge(f"eps={eps:g} exceeds r0={S.r0:g} for {S.name}")
    if interior and not S.is_closed:
        dist = S.boundary_distance(P)
        if np.any(dist < 2 * eps - 1e-12):
            raise EpsTooLarge("ball centre closer than 2*eps to the boundary")
    disk, disk_w = _ball_rule(n)
    idx, uv = S.locate(P)
    nodes = np.empty((len(P), len(disk), 3))
    weights = np.empty((len(P), len(disk)))
    for k, chart in enumerate(S.charts):
        m = idx == k
        if not np.any(m):
            continue
        g0 = chart.metric(uv[m])
        L = np.linalg.cholesky(g0)
        Minv = np.linalg.inv(np.swapaxes(L, -1, -2))
        xi = uv[m][:, None, :] + eps * np.einsum("mij,kj->mki", Minv, disk)
        dA = chart.area_element(xi)
        nodes[m] = chart.embed(xi)
        weights[m] = eps ** 2 * disk_w[None, :] * dA / np.sqrt(np.linalg.det(g0))[:, None]
    return nodes, weights


def metric_ball_sample(S, x, eps, n=8, interior=True):
    """Quadrature nodes and weights for the geodesic ball ``B_eps(x)``."""
    nodes, weights = ball_nodes(S, np.asarray(x, dtype=float)[None], eps, n, interior)
    return nodes[0], weights[0]


def arc_nodes(curve, theta, eps, n=16):
    """Arclength ball of radius ``eps`` on a boundary curve around ``theta``.

    Returns parameter nodes ``(M, n)`` and arclength weights ``(M, n)``.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    x, a = np.polynomial.legendre.leggauss(n)
    half = eps / curve.speed(theta)
    nodes = theta[:, None] + half[:, None] * x[None, :]
    return nodes, np.broadcast_to(eps * a, nodes.shape).copy()
