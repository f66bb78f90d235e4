"""Index and inward boundary index of tangent fields, and the Morse identity."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import fields as F_
from .degree import loop_winding
from .errors import (BallContainsOtherZero, CertificationError, DegenerateBoundaryZero,
                     DegenerateZero, VanishingOnBoundary, ZeroOutsideSubregions)
from .fields import BoundaryDatum, TangentField
from .geometry import TWO_PI, get_surface

GOLDEN = (np.sqrt(5.0) - 1.0) / 4.0


@dataclass
class InwardBoundaryRegion:
    """Per boundary curve, the arcs ``(a, b)`` (in the curve parameter, ``b > a``)
    on which the field points into the surface."""

    arcs: list
    band: float
    whole: list = field(default_factory=list)

    @property
    def is_empty(self):
        return not any(self.arcs)

    def as_dict(self):
        return {"band": self.band,
                "arcs": [[[float(a), float(b)] for a, b in arcs] for arcs in self.arcs],
                "whole_curve": list(self.whole)}


@dataclass
class IndexReport:
    chi: int
    ind: int
    ind_minus: int
    zero_list: list
    epsilon1: float | None
    diagnostics: dict = field(default_factory=dict)

    @property
    def morse_residual(self):
        return int(self.chi - self.ind - self.ind_minus)

    def as_dict(self):
        return {
            "chi": int(self.chi),
            "ind": int(self.ind),
            "ind_minus": int(self.ind_minus),
            "morse_residual": self.morse_residual,
            "epsilon1": None if self.epsilon1 is None else float(self.epsilon1),
            "zeros": [z.as_dict() for z in self.zero_list],
            "diagnostics": self.diagnostics,
        }


# -- boundary traces ---------------------------------------------------------


class _Trace:
    """Normal and tangential parts of a field along one closed curve."""

    def __init__(self, curve, values):
        self.curve = curve
        self.values = values
        h = 1e-6
        t = np.array([0.3])
        dp = (curve.point(t + h) - curve.point(t - h)) / (2 * h)
        # +1 when increasing theta follows the boundary orientation
        self.direction = 1 if float(np.sum(dp * curve.unit_tangent(t))) > 0 else -1

    def normal_part(self, theta):
        theta = np.asarray(theta, dtype=float)
        return np.einsum("...i,...i->...", self.values(theta), self.curve.outward_conormal(theta))

    def tangential_part(self, theta):
        theta = np.asarray(theta, dtype=float)
        return np.einsum("...i,...i->...", self.values(theta), self.curve.unit_tangent(theta))

    def norm(self, theta):
        return np.linalg.norm(self.values(np.asarray(theta, dtype=float)), axis=-1)


def _traces(S, v, curves=None):
    """Boundary traces of a field, a datum or explicit ``(curve, values)`` pairs."""
    S = get_surface(S)
    if curves is not None:
        if isinstance(v, BoundaryDatum):
            raise ValueError("explicit curves need a field, not a boundary datum")
        return [_Trace(c, lambda th, c=c: v(c.point(th))) for c in curves]
    if isinstance(v, BoundaryDatum):
        return [_Trace(c, lambda th, k=k: v(k, th)) for k, c in enumerate(S.boundary)]
    return [_Trace(c, lambda th, c=c: v(c.point(th))) for c in S.boundary]


def _bisect(f, a, b, tol=1e-10):
    fa, fb = f(np.array([a]))[0], f(np.array([b]))[0]
    if fa == 0:
        return a
    if fb == 0:
        return b
    return brentq(lambda t: f(np.array([t]))[0], a, b, xtol=tol)


def _region_for_trace(tr, band_rel, samples):
    th = TWO_PI * np.arange(samples) / samples
    norms = tr.norm(th)
    if norms.min() <= 0.0 or not np.isfinite(norms).all():
        raise VanishingOnBoundary("field vanishes on the boundary")
    d = tr.normal_part(th)
    band = band_rel * float(norms.max())
    inward = d < -band
    if not inward.any():
        return [], band, False
    if inward.all():
        return [(0.0, TWO_PI)], band, True
    def level(t):
        return tr.normal_part(t) + band

    arcs = []
    start = int(np.flatnonzero(~inward)[0])
    order = (start + np.arange(samples)) % samples
    run = None
    for j in range(samples + 1):
        i = order[j % samples]
        base = th[i] + (TWO_PI if j >= samples or i < start else 0.0)
        if inward[i] and run is None:
            prev = base - TWO_PI / samples
            run = _bisect(level, prev, base)
        elif not inward[i] and run is not None:
            prev = base - TWO_PI / samples
            end = _bisect(level, prev, base)
            arcs.append((run, end))
            run = None
    return arcs, band, False


def inward_boundary_region(S, v, band=1e-9, samples=4096, curves=None):
    """Arcs where ``v . nu < -band * max|v|``, endpoints refined by bisection."""
    S = get_surface(S)
    arcs, whole, band_abs = [], [], 0.0
    for tr in _traces(S, v, curves):
        a, b, w = _region_for_trace(tr, band, samples)
        arcs.append(a)
        whole.append(w)
        band_abs = max(band_abs, b)
    return InwardBoundaryRegion(arcs, band_abs, whole)


def _arc_index(tr, a, b, closed, samples, jac_tol, shift=0.0):
    """Sum of signed crossings of the tangential part on one arc, and the
    endpoint formula for the same quantity (open arcs only)."""
    n = max(16, int(samples * (b - a) / TWO_PI))
    th = np.linspace(a, b, n + 1)
    if not closed:
        th = th[1:-1]

    def tau(t):
        return tr.tangential_part(t) + shift

    vals = tau(th)
    total = 0
    degenerate = False
    for i in np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:])):
        if vals[i + 1] == 0.0:
            continue
        t0 = th[i] if vals[i] == 0.0 else brentq(lambda t: tau(np.array([t]))[0], th[i], th[i + 1],
                                                 xtol=1e-13)
        h = 1e-6
        d = (tau(np.array([t0 + h]))[0] - tau(np.array([t0 - h]))[0]) / (2 * h)
        d /= float(tr.curve.speed(np.array([t0]))[0])
        if abs(d) <= jac_tol:
            degenerate = True
        total += int(np.sign(d)) * tr.direction
    if closed:
        return total, 0, degenerate
    ta, tb = tau(np.array([a]))[0], tau(np.array([b]))[0]
    start, end = (ta, tb) if tr.direction > 0 else (tb, ta)
    endpoint = int(round((np.sign(end) - np.sign(start)) / 2))
    return total, endpoint, degenerate


def inward_boundary_index(S, v, band=1e-9, samples=4096, jac_tol=1e-8, curves=None,
                          return_details=False):
    """Index of the tangential part of ``v`` on the inward boundary region.

    Zeros of the tangential part inside each inward arc count +1 when it
    crosses from negative to positive along the boundary orientation.  The
    count is checked against the endpoint signs of the tangential part.
    """
    S = get_surface(S)
    traces = _traces(S, v, curves)
    region = inward_boundary_region(S, v, band, samples, curves)
    total = 0
    details = []
    for tr, arcs, whole in zip(traces, region.arcs, region.whole):
        scale = float(tr.norm(np.linspace(0, TWO_PI, 64)).max())
        for a, b in arcs:
            shift = 0.0
            for attempt in range(6):
                got, endpoint, degenerate = _arc_index(tr, a, b, whole, samples, jac_tol, shift)
                if not degenerate:
                    break
                # identically tangential-free arcs and touching zeros: move off them
                shift = scale * 1e-7 * (attempt + 1) * (1 if attempt % 2 == 0 else -1)
            else:
                raise DegenerateBoundaryZero("tangential part has degenerate zeros on the arc")
            if not whole and got != endpoint:
                raise CertificationError(
                    f"boundary crossings {got} disagree with endpoint formula {endpoint}")
            total += got
            details.append({"arc": [float(a), float(b)], "index": got, "whole_curve": whole})
    if return_details:
        return total, region, details
    return total


# -- interior index ------------------------------------------------------------


def index_winding(S, v, z, r, others=(), samples=256):
    """Winding of the chart components of ``v`` on the chart circle of radius ``r``."""
    S = get_surface(S)
    chart = S.charts[z.chart]
    for o in others:
        if o is z:
            continue
        if o.chart == z.chart and np.hypot(*(o.uv - z.uv)) <= r:
            raise BallContainsOtherZero(f"zero at {o.uv} lies within r={r:g} of {z.uv}")
    return loop_winding(lambda uv: v.chart_components(chart, uv), z.uv, r, samples)


def _winding_radius(S, z, zeros):
    chart = S.charts[z.chart]
    r = 1e-2
    for o in zeros:
        if o is not z and o.chart == z.chart:
            r = min(r, 0.3 * float(np.hypot(*(o.uv - z.uv))))
    if not S.is_closed:
        r = min(r, 0.3 * float(S.boundary_distance(z.location)))
    g = chart.metric(z.uv)
    return max(r / np.sqrt(max(np.linalg.eigvalsh(g).max(), 1e-300)), 1e-7)


def index_transverse(S, v, zeros=None, grid=64, zero_tol=F_.ZERO_TOL, jac_tol=F_.JAC_TOL,
                     cross_check=True):
    """Sum of Jacobian signs over the zeros, each confirmed by a winding number."""
    S = get_surface(S)
    if zeros is None:
        zeros = F_.find_zeros(S, v, grid, zero_tol, jac_tol)
    bad = [z for z in zeros if not z.nondegenerate]
    if bad:
        raise DegenerateZero(f"{len(bad)} degenerate zero(s), e.g. at {bad[0].location}")
    total = 0
    for z in zeros:
        if cross_check:
            w = index_winding(S, v, z, _winding_radius(S, z, zeros), zeros)
            if w != z.sign:
                raise CertificationError(f"zero at {z.location}: sign {z.sign} but winding {w}")
        total += z.sign
    return int(total)


def default_budget(S, v):
    S = get_surface(S)
    if S.is_closed:
        return 1e-3 * F_.norm_range(S, v, 48)[1]
    return 0.25 * F_.boundary_min_norm(S, v)


def index_continuous(S, v, budget=None, seeds=(0, 1, 2), grid=64, zero_tol=F_.ZERO_TOL,
                     jac_tol=F_.JAC_TOL, return_zeros=False):
    """Index of a continuous field through transverse approximations.

    The index is computed for each seed and must agree across seeds.
    """
    S = get_surface(S)
    if not S.is_closed:
        m = F_.boundary_min_norm(S, v)
        if m <= zero_tol:
            raise F_.ZeroOnBoundary(f"min |v| on the boundary is {m:.3e}")
    if budget is None:
        budget = default_budget(S, v)
    values, zeros_first = [], None
    for seed in seeds:
        u = F_.transverse_perturb(S, v, budget, seed, grid=grid, zero_tol=zero_tol,
                                  jac_tol=jac_tol)
        zs = F_.find_zeros(S, u, grid, zero_tol, jac_tol)
        values.append(index_transverse(S, u, zs, grid, zero_tol, jac_tol))
        if zeros_first is None:
            zeros_first = zs
        if u is v:
            values = values * len(seeds)
            break
    if len(set(values)) != 1:
        raise CertificationError(f"index depends on the perturbation seed: {values}")
    if return_zeros:
        return values[0], zeros_first
    return values[0]


def stability_radius(S, v, samples=4096):
    """``(sqrt 5 - 1) / 4 * min over the boundary of |v|``."""
    S = get_surface(S)
    if isinstance(v, BoundaryDatum):
        m = v.norm_bounds(samples)[0]
    else:
        m = F_.boundary_min_norm(S, v, samples)
    if not np.isfinite(m):
        raise ValueError("stability radius needs a boundary")
    if m <= 0:
        raise VanishingOnBoundary("field vanishes on the boundary")
    return float(GOLDEN * m)


def morse_check(S, v, budget=None, grid=64, zero_tol=F_.ZERO_TOL, jac_tol=F_.JAC_TOL,
                band=1e-9, boundary=None):
    """Index report with ``chi - ind - ind_minus``; ``boundary`` may override the trace."""
    S = get_surface(S)
    ind, zeros = index_continuous(S, v, budget, grid=grid, zero_tol=zero_tol,
                                  jac_tol=jac_tol, return_zeros=True)
    if S.is_closed:
        ind_minus, eps1, region = 0, None, None
    else:
        src = v if boundary is None else boundary
        ind_minus, region, _ = inward_boundary_index(S, src, band, jac_tol=jac_tol,
                                                     return_details=True)
        eps1 = stability_radius(S, src)
    c1, c2 = F_.norm_range(S, v, 48)
    diag = {"surface": S.name, "field": getattr(v, "name", "field"),
            "sampled_min_norm": c1, "sampled_max_norm": c2,
            "zero_tol": zero_tol, "jac_tol": jac_tol, "band": band, "grid": grid,
            "inward_region": None if region is None else region.as_dict()}
    return IndexReport(S.euler_characteristic(), int(ind), int(ind_minus), zeros, eps1, diag)


# -- excision ------------------------------------------------------------------


class ChartDisk:
    """Region ``|uv - center| < radius`` in one chart."""

    def __init__(self, chart, center, radius):
        self.chart, self.center, self.radius = int(chart), np.asarray(center, float), float(radius)

    def contains_zero(self, z):
        return z.chart == self.chart and np.hypot(*(z.uv - self.center)) < self.radius

    def index(self, S, v, samples=512):
        chart = S.charts[self.chart]
        return loop_winding(lambda uv: v.chart_components(chart, uv), self.center, self.radius,
                            samples)


class ChartSector:
    """Annular sector ``r0 < |uv - c| < r1``, ``a0 < arg < a1`` in one chart."""

    def __init__(self, chart, center, r0, r1, a0, a1):
        self.chart = int(chart)
        self.center = np.asarray(center, float)
        self.r0, self.r1, self.a0, self.a1 = map(float, (r0, r1, a0, a1))

    def contains_zero(self, z):
        if z.chart != self.chart:
            return False
        d = z.uv - self.center
        rho, ang = np.hypot(*d), np.mod(np.arctan2(d[1], d[0]) - self.a0, TWO_PI)
        return self.r0 < rho < self.r1 and ang < self.a1 - self.a0

    def _loop(self, t):
        # boundary traversed counter-clockwise, t in [0, 2 pi)
        s = np.mod(t, TWO_PI) / TWO_PI * 4.0
        seg = np.minimum(s.astype(int), 3)
        f = s - seg
        ang = np.select([seg == 0, seg == 1, seg == 2, seg == 3],
                        [self.a0 + f * (self.a1 - self.a0), np.full_like(f, self.a1),
                         self.a1 - f * (self.a1 - self.a0), np.full_like(f, self.a0)])
        rad = np.select([seg == 0, seg == 1, seg == 2, seg == 3],
                        [np.full_like(f, self.r1), self.r1 - f * (self.r1 - self.r0),
                         np.full_like(f, self.r0), self.r0 + f * (self.r1 - self.r0)])
        return self.center + rad[:, None] * np.stack([np.cos(ang), np.sin(ang)], -1)

    def index(self, S, v, samples=1024):
        from .degree import winding_number

        chart = S.charts[self.chart]
        return winding_number(lambda t: v.chart_components(chart, self._loop(t)), samples)


def excision_check(S, v, U1, U2, zeros=None, grid=64):
    """Check ``ind(v, N) = ind(v, U1) + ind(v, U2)`` with region indices from windings."""
    S = get_surface(S)
    if zeros is None:
        zeros = F_.find_zeros(S, v, grid)
    regions = [U for U in (U1, U2) if U is not None]
    outside = [z for z in zeros if not any(U.contains_zero(z) for U in regions)]
    if outside:
        raise ZeroOutsideSubregions(f"zero at {outside[0].location} lies outside U1 and U2")
    whole = index_transverse(S, v, zeros)
    parts = [U.index(S, v) for U in regions]
    return whole == sum(parts), whole, parts
