"""Tangent vector fields on surfaces: evaluation, chart coordinates, zeros."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import expressions, roots
from .errors import BudgetExceeded, ConfigError, OutOfChart, ZeroOnBoundary
from .geometry import TWO_PI, get_surface, tangent_project

ZERO_TOL = 1e-9
JAC_TOL = 1e-8
SEPARATION_TOL = 1e-5
FD_STEP = 1e-5


class TangentField:
    """Ambient field ``P -> R^3`` followed by projection onto ``T_P N``.

    ``fn`` receives points of shape ``(..., 3)`` on the surface.
    """

    def __init__(self, surface, fn, name="field", project=True):
        self.surface = get_surface(surface)
        self._fn = fn
        self.name = name
        self.project = project

    def __repr__(self):
        return f"TangentField({self.name!r} on {self.surface.name})"

    def raw(self, P):
        return np.asarray(self._fn(np.asarray(P, dtype=float)), dtype=float)

    def __call__(self, P):
        P = np.asarray(P, dtype=float)
        w = np.broadcast_to(self.raw(P), P.shape)
        if not self.project:
            return np.array(w)
        return tangent_project(self.surface, P, w)

    def chart_components(self, chart, uv):
        uv = np.asarray(uv, dtype=float)
        return chart.coords(uv, self(chart.embed(uv)))

    def scaled(self, lam):
        return TangentField(self.surface, lambda P: lam * self.raw(P), f"{lam:g}*{self.name}",
                            self.project)

    def plus(self, other, name=None):
        return TangentField(self.surface, lambda P: self(P) + other(P),
                            name or f"{self.name}+{getattr(other, 'name', 'w')}")

    @classmethod
    def from_expression(cls, surface, text, name=None):
        """Ambient components as expressions in ``x, y, z`` (planar input padded)."""
        fn = expressions.vector_field(text)
        return cls(surface, lambda P: fn(P[..., 0], P[..., 1], P[..., 2]), name or str(text))

    @classmethod
    def from_chart_expression(cls, surface, text, chart=0, name=None):
        """Components ``(a, b)`` along ``X_u, X_v`` as expressions in ``u, v``."""
        S = get_surface(surface)
        ch = S.charts[chart]
        fn = expressions.vector_field(text, ("u", "v"), dim=2)

        def ambient(P):
            uv = ch.locate(P)
            return ch.vector(uv, fn(uv[..., 0], uv[..., 1]))

        return cls(S, ambient, name or str(text))


class SampledField(TangentField):
    """Field sampled on per-chart rectangular grids, bilinearly interpolated."""

    def __init__(self, surface, grids, name="sampled"):
        from scipy.interpolate import RegularGridInterpolator

        S = get_surface(surface)
        self._interp = {}
        for chart_id, (us, vs, W) in grids.items():
            self._interp[chart_id] = RegularGridInterpolator(
                (us, vs), W, method="linear", bounds_error=False, fill_value=None)
        super().__init__(S, self._evaluate, name)

    def _evaluate(self, P):
        P = np.asarray(P, dtype=float)
        idx, uv = self.surface.locate(P)
        out = np.zeros(P.shape, dtype=float)
        for k, interp in self._interp.items():
            m = idx == k
            if np.any(m):
                out[m] = interp(uv[m])
        return out

    @classmethod
    def from_csv(cls, surface, path, name=None):
        """Rows ``u, v, w1, w2, w3, chart`` on a full tensor grid per chart."""
        rows = {}
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if [h.strip().lower() for h in header[:5]] != ["u", "v", "w1", "w2", "w3"]:
                raise ConfigError(f"{path}: expected header u,v,w1,w2,w3[,chart]")
            for row in reader:
                if not row:
                    continue
                cid = int(row[5]) if len(row) > 5 and row[5].strip() else 0
                rows.setdefault(cid, []).append([float(x) for x in row[:5]])
        grids = {}
        for cid, data in rows.items():
            a = np.asarray(data)
            us, vs = np.unique(a[:, 0]), np.unique(a[:, 1])
            if len(us) * len(vs) != len(a):
                raise ConfigError(f"{path}: chart {cid} samples do not form a full grid")
            W = np.empty((len(us), len(vs), 3))
            iu = np.searchsorted(us, a[:, 0])
            iv = np.searchsorted(vs, a[:, 1])
            W[iu, iv] = a[:, 2:5]
            grids[cid] = (us, vs, W)
        return cls(surface, grids, name or str(path))


@dataclass
class Zero:
    location: np.ndarray
    chart: int
    uv: np.ndarray
    chart_jacobian: np.ndarray
    sign: int
    nondegenerate: bool
    refine_residual: float

    def as_dict(self):
        return {
            "location": [float(x) for x in self.location],
            "chart": int(self.chart),
            "uv": [float(x) for x in self.uv],
            "det": float(np.linalg.det(self.chart_jacobian)),
            "sign": int(self.sign),
            "nondegenerate": bool(self.nondegenerate),
            "refine_residual": float(self.refine_residual),
        }


@dataclass
class BoundaryDatum:
    """Boundary field ``g``: one callable ``theta -> (..., 3)`` per boundary curve."""

    surface: object
    parts: list
    name: str = "datum"
    _bounds: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        self.surface = get_surface(self.surface)
        if len(self.parts) != self.surface.boundary_count:
            raise ConfigError("datum needs one component per boundary curve")

    def __call__(self, k, theta):
        theta = np.asarray(theta, dtype=float)
        curve = self.surface.boundary[k]
        w = np.asarray(self.parts[k](theta), dtype=float)
        w = np.broadcast_to(w, theta.shape + (3,))
        return tangent_project(self.surface, curve.point(theta), w)

    def norm_bounds(self, samples=4096):
        if self._bounds is None:
            th = TWO_PI * np.arange(samples) / samples
            norms = np.concatenate([np.linalg.norm(self(k, th), axis=-1)
                                    for k in range(len(self.parts))])
            self._bounds = (float(norms.min()), float(norms.max()))
        return self._bounds

    @property
    def c1(self):
        return self.norm_bounds()[0]

    @property
    def c2(self):
        return self.norm_bounds()[1]

    @classmethod
    def from_field(cls, v, name=None):
        S = v.surface
        parts = [(lambda th, c=c: v(c.point(th))) for c in S.boundary]
        return cls(S, parts, name or f"trace({v.name})")

    @classmethod
    def from_expression(cls, surface, text, name=None):
        """Ambient expression in ``x, y, z`` and the curve parameter ``t``."""
        S = get_surface(surface)
        fn = expressions.vector_field(text, ("x", "y", "z", "t"))
        parts = []
        for c in S.boundary:
            def part(th, c=c):
                P = c.point(th)
                return fn(P[..., 0], P[..., 1], P[..., 2], th)
            parts.append(part)
        return cls(S, parts, name or str(text))


def pushforward(S, chart, v, xi):
    """Chart components of ``v`` at chart point ``xi``."""
    S = get_surface(S)
    ch = S.charts[chart] if isinstance(chart, (int, np.integer)) else chart
    xi = np.asarray(xi, dtype=float)
    if not np.all(ch.contains(xi, pad=1e-12)):
        raise OutOfChart(f"point {xi.tolist()} outside chart {ch.name}")
    return v.chart_components(ch, xi)


def boundary_samples(S, n=2048):
    """``(component, theta, points)`` sampled uniformly in the curve parameter."""
    S = get_surface(S)
    th = TWO_PI * np.arange(n) / n
    return [(k, th, c.point(th)) for k, c in enumerate(S.boundary)]


def boundary_min_norm(S, v, n=2048):
    S = get_surface(S)
    if S.is_closed:
        return np.inf
    return float(min(np.linalg.norm(v(P), axis=-1).min() for _, _, P in boundary_samples(S, n)))


def norm_range(S, v, n=96):
    """Sampled ``(min, max)`` of ``|v|`` over interior quadrature nodes and boundary."""
    S = get_surface(S)
    _, P, _ = S.quadrature(n)
    norms = [np.linalg.norm(v(P), axis=-1)]
    for _, _, B in boundary_samples(S, 4 * n):
        norms.append(np.linalg.norm(v(B), axis=-1))
    norms = np.concatenate(norms)
    return float(norms.min()), float(norms.max())


def find_zeros(S, v, grid=64, zero_tol=ZERO_TOL, jac_tol=JAC_TOL, sep=SEPARATION_TOL,
               h=FD_STEP, margin=0.0, check_boundary=True):
    """Zeros of ``v`` in the interior of ``S``, refined by Newton in chart coordinates.

    A zero belongs to the chart that ``S.locate`` assigns to it, so overlapping
    charts never report the same zero twice.
    """
    S = get_surface(S)
    if check_boundary and not S.is_closed:
        m = boundary_min_norm(S, v)
        if m <= zero_tol:
            raise ZeroOnBoundary(f"min |v| on the boundary is {m:.3e}")
    found = []
    for k, chart in enumerate(S.charts):
        def F(uv, chart=chart):
            return v.chart_components(chart, uv)

        def keep(uv, chart=chart, k=k):
            P = chart.embed(uv)
            ok = S.scan_mask(P, margin)
            if len(S.charts) > 1:
                ok &= S.locate(P)[0] == k
            return ok

        for r in roots.find_roots(F, chart.bounds, chart.periodic, grid, zero_tol, sep, h,
                                  mask=keep):
            det = float(np.linalg.det(r.jacobian))
            nondeg = abs(det) > jac_tol
            found.append(Zero(chart.embed(r.uv), k, r.uv, r.jacobian,
                              int(np.sign(det)) if nondeg else 0, bool(nondeg), r.residual))
    found.sort(key=lambda z: tuple(np.round(z.location, 9)))
    return found


def _monomials(P):
    x, y, z = P[..., 0], P[..., 1], P[..., 2]
    one = np.ones_like(x)
    return np.stack([one, x, y, z, x * x, y * y, z * z, x * y, x * z, y * z], -1)


def random_polynomial_field(S, rng, degree=2):
    """Random ambient polynomial of the given degree (<= 2), tangent-projected."""
    n_terms = {0: 1, 1: 4, 2: 10}[min(int(degree), 2)]
    C = rng.standard_normal((n_terms, 3))
    return TangentField(S, lambda P: _monomials(P)[..., :n_terms] @ C, "poly")


def boundary_cutoff(S, width):
    """Smooth weight vanishing on the boundary and equal to 1 beyond ``width``."""
    from .vmo import smoothstep

    def weight(P):
        d = S.boundary_distance(P)
        return smoothstep(np.clip(d / width, 0.0, 1.0))

    return weight


def transverse_perturb(S, v, budget, seed=0, freeze_boundary=False, freeze_width=None,
                       max_retries=10, grid=64, zero_tol=ZERO_TOL, jac_tol=JAC_TOL,
                       degree=2, region_weight=None):
    """Return ``u`` with ``sup |u - v| <= budget`` and only nondegenerate zeros.

    The perturbation is a random ambient polynomial (degree <= 2) projected to
    the tangent planes, rescaled to the budget, and optionally multiplied by
    a cutoff vanishing on the boundary.  A transverse ``v`` is returned as is.
    """
    S = get_surface(S)
    if budget < 0:
        raise ValueError("budget must be non-negative")
    m = boundary_min_norm(S, v)
    if budget >= m:
        raise BudgetExceeded(f"budget {budget:g} is not below min boundary norm {m:g}")
    zeros = find_zeros(S, v, grid, zero_tol, jac_tol)
    if all(z.nondegenerate for z in zeros):
        return v
    if budget == 0:
        raise BudgetExceeded("field has degenerate zeros and the budget is 0")
    if freeze_boundary and not S.is_closed:
        cut = boundary_cutoff(S, freeze_width or S.collar_width / 2)
    else:
        cut = None
    _, Q, _ = S.quadrature(64)
    for attempt in range(max_retries):
        rng = np.random.default_rng([int(seed), attempt])
        w = random_polynomial_field(S, rng, degree)
        weight = cut
        if region_weight is not None:
            weight = region_weight if cut is None else (lambda P, a=cut: a(P) * region_weight(P))
        raw = w(Q) * (weight(Q)[..., None] if weight else 1.0)
        sup = np.linalg.norm(raw, axis=-1).max()
        if sup == 0:
            continue
        scale = 0.9 * budget / sup

        def u_fn(P, w=w, scale=scale, weight=weight):
            d = w(P) * scale
            if weight is not None:
                d = d * weight(P)[..., None]
            return v(P) + d

        u = TangentField(S, u_fn, f"{v.name}~{seed}.{attempt}")
        zs = find_zeros(S, u, grid, zero_tol, jac_tol)
        if all(z.nondegenerate for z in zs):
            return u
    raise BudgetExceeded(f"no transverse perturbation within budget after {max_retries} tries")
