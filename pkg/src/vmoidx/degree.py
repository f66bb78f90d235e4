"""Brouwer degree of maps into spheres, by preimage counting and by integration."""
from __future__ import annotations

import numpy as np
from scipy.optimize import brentq
from scipy.spatial.transform import Rotation

from . import roots
from .errors import NonIntegerResult, NotRegularValue, UnderResolved, VanishingOnCircle
from .geometry import TWO_PI, QuadratureSpec, get_surface

FD_STEP = 1e-5


def winding_number(f, samples=256, max_refine=14, vanish_tol=1e-14):
    """Degree of ``theta -> f(theta) / |f(theta)|`` on ``[0, 2 pi]``.

    ``f`` maps an array of angles to an array of 2-vectors.  The sampling is
    doubled until every consecutive angle step is below ``pi / 2``.
    """
    n = int(samples)
    for _ in range(max_refine + 1):
        th = TWO_PI * np.arange(n + 1) / n
        w = np.asarray(f(th), dtype=float)
        norms = np.hypot(w[:, 0], w[:, 1])
        if norms.min() <= vanish_tol * max(norms.max(), 1.0):
            raise VanishingOnCircle(f"field vanishes on the circle (min |f| = {norms.min():.2e})")
        a, b = w[:-1], w[1:]
        steps = np.arctan2(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0],
                           a[:, 0] * b[:, 0] + a[:, 1] * b[:, 1])
        if np.max(np.abs(steps)) < np.pi / 2:
            total = steps.sum() / TWO_PI
            k = int(np.rint(total))
            if abs(total - k) > 1e-6:
                raise UnderResolved(f"accumulated angle {total} is not an integer")
            return k
        n *= 2
    raise UnderResolved("angle steps stayed above pi/2 after refinement")


def loop_winding(F, center, radius, samples=256, **kw):
    """Winding of a planar map ``F`` around the circle ``center + radius e^{i t}``."""
    c = np.asarray(center, dtype=float)

    def f(t):
        pts = c + radius * np.stack([np.cos(t), np.sin(t)], -1)
        return F(pts)

    return winding_number(f, samples, **kw)


class SphereMap:
    """A map from ``S^1`` or a closed surface into the unit sphere.

    ``domain`` is ``"circle"`` (points are unit 2-vectors) or a closed surface.
    ``fn`` takes ambient domain points and returns unit vectors in ``R^2`` or
    ``R^3`` respectively.
    """

    def __init__(self, domain, fn, name="map"):
        self.domain = "circle" if domain == "circle" else get_surface(domain)
        self.fn = fn
        self.name = name

    @property
    def dim(self):
        return 1 if self.domain == "circle" else 2

    def __call__(self, P):
        return np.asarray(self.fn(np.asarray(P, dtype=float)), dtype=float)

    def on_angle(self, theta):
        theta = np.asarray(theta, dtype=float)
        return self(np.stack([np.cos(theta), np.sin(theta)], -1))

    def __repr__(self):
        return f"SphereMap({self.name!r})"

    @classmethod
    def power(cls, k):
        """``z -> z^k`` on the unit circle."""
        def fn(P):
            t = np.arctan2(P[..., 1], P[..., 0])
            return np.stack([np.cos(k * t), np.sin(k * t)], -1)
        return cls("circle", fn, f"z^{k}")

    @classmethod
    def identity(cls):
        return cls("sphere", lambda P: P / np.linalg.norm(P, axis=-1, keepdims=True), "id")

    @classmethod
    def antipodal(cls):
        return cls("sphere", lambda P: -P / np.linalg.norm(P, axis=-1, keepdims=True),
                   "antipodal")

    @classmethod
    def constant(cls, q=(0.0, 0.0, 1.0)):
        q = np.asarray(q, dtype=float) / np.linalg.norm(q)
        return cls("sphere", lambda P: np.broadcast_to(q, np.shape(P)).copy(), "constant")

    @classmethod
    def rotation(cls, R):
        R = np.asarray(R, dtype=float)
        return cls("sphere", lambda P: (P / np.linalg.norm(P, axis=-1, keepdims=True)) @ R.T,
                   "rotation")

    @classmethod
    def gauss_map(cls, surface):
        S = get_surface(surface)
        return cls(S, S.normal, f"gauss({S.name})")

    @classmethod
    def homotopy(cls, surface, w, t):
        """``(cos t) gamma + (sin t) w`` for a unit tangent field ``w``."""
        S = get_surface(surface)

        def fn(P):
            return np.cos(t) * S.normal(P) + np.sin(t) * w(P)

        return cls(S, fn, f"H(.,{t:.3f})")


def _circle_density(phi, theta, h=FD_STEP):
    f = phi.on_angle(theta)
    df = (phi.on_angle(theta + h) - phi.on_angle(theta - h)) / (2 * h)
    return f[:, 0] * df[:, 1] - f[:, 1] * df[:, 0]


def degree_integral(phi, quad=QuadratureSpec(), tol=1e-3, check=True):
    """``(1 / |S^n|) * integral of det D phi``; must be an integer."""
    n = int(quad.n)
    if phi.dim == 1:
        th = TWO_PI * (np.arange(n) + 0.5) / n
        val = float(_circle_density(phi, th).sum() / n)
    else:
        chart = phi.domain.quadrature_chart
        uv, w = chart.quadrature(n)
        h = FD_STEP

        def f(q):
            return phi(chart.embed(q))

        eu, ev = np.array([h, 0.0]), np.array([0.0, h])
        fu = (f(uv + eu) - f(uv - eu)) / (2 * h)
        fv = (f(uv + ev) - f(uv - ev)) / (2 * h)
        dens = np.einsum("mi,mi->m", f(uv), np.cross(fu, fv))
        val = float(chart.orientation_sign * np.sum(dens * w) / (4 * np.pi))
    if check and abs(val - round(val)) > tol:
        raise NonIntegerResult(f"degree integral {val:.6f} is not an integer")
    return val


def _tangent_basis(p):
    p = np.asarray(p, dtype=float)
    p = p / np.linalg.norm(p)
    a = np.array([1.0, 0.0, 0.0]) if abs(p[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = a - (a @ p) * p
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(p, e1), p


def _preimage_signs_circle(phi, p, grid, jac_tol):
    p = np.asarray(p, dtype=float)
    p = p / np.linalg.norm(p)

    def cross(t):
        f = phi.on_angle(t)
        return p[0] * f[..., 1] - p[1] * f[..., 0]

    th = TWO_PI * np.arange(grid + 1) / grid
    c = cross(th)
    signs = []
    for i in np.flatnonzero(np.sign(c[:-1]) != np.sign(c[1:])):
        if c[i + 1] == 0.0:
            continue
        if c[i] == 0.0:
            t0 = th[i]
        else:
            t0 = brentq(cross, th[i], th[i + 1], xtol=1e-14)
        if phi.on_angle(np.array([t0]))[0] @ p <= 0:
            continue
        d = (cross(np.array([t0 + FD_STEP])) - cross(np.array([t0 - FD_STEP])))[0] / (2 * FD_STEP)
        if abs(d) <= jac_tol:
            raise NotRegularValue(f"degenerate preimage at theta={t0:.6f}")
        signs.append(int(np.sign(d)))
    return signs


def _preimage_signs_surface(phi, p, grid, jac_tol):
    S = phi.domain
    e1, e2, pn = _tangent_basis(p)
    signs = []
    for k, chart in enumerate(S.charts):
        def F(uv, chart=chart):
            f = phi(chart.embed(uv))
            return np.stack([f @ e1, f @ e2], -1)

        def keep(uv, chart=chart, k=k):
            P = chart.embed(uv)
            ok = phi(P) @ pn > 0
            if len(S.charts) > 1:
                ok &= S.locate(P)[0] == k
            return ok

        for r in roots.find_roots(F, chart.bounds, chart.periodic, grid, 1e-10, 1e-7,
                                  mask=keep):
            det = np.linalg.det(r.jacobian)
            if abs(det) <= jac_tol:
                raise NotRegularValue(f"degenerate preimage at {r.uv}")
            signs.append(int(np.sign(det)) * chart.orientation_sign)
    return signs


def degree_preimage(phi, p=None, grid=64, jac_tol=1e-8, retries=10, seed=0):
    """Signed count of preimages of a regular value ``p``.

    When ``p`` is not regular it is jittered by a random rotation of angle at
    most ``1e-2``, up to ``retries`` times.
    """
    if p is None:
        p = np.array([1.0, 0.0]) if phi.dim == 1 else np.array([0.0, 0.0, 1.0])
    p = np.asarray(p, dtype=float)
    rng = np.random.default_rng(seed)
    for attempt in range(retries + 1):
        try:
            if phi.dim == 1:
                return int(sum(_preimage_signs_circle(phi, p, 4 * grid, jac_tol)))
            return int(sum(_preimage_signs_surface(phi, p, grid, jac_tol)))
        except NotRegularValue:
            if attempt == retries:
                raise
            angle = 1e-2 * rng.random()
            if phi.dim == 1:
                c, s = np.cos(angle), np.sin(angle)
                p = np.array([[c, -s], [s, c]]) @ p
            else:
                axis = rng.standard_normal(3)
                axis /= np.linalg.norm(axis)
                p = Rotation.from_rotvec(angle * axis).apply(p)
    raise NotRegularValue("unreachable")


def homotopy_degrees(surface, w, steps=16, quad=QuadratureSpec(128)):
    """Degrees of ``H(., t)`` for ``t`` from 0 to ``pi``; equal along the path."""
    ts = np.linspace(0.0, np.pi, steps + 1)
    return ts, [degree_integral(SphereMap.homotopy(surface, w, t), quad) for t in ts]
