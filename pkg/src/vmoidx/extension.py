"""Extension of admissible boundary data to nowhere-vanishing interior fields.

Pipeline: interpolating collar field, interior fill, cancellation of zero
clusters by angle lifting, then clamping of the norm.  The second half of
the module is the interval-average (Gagliardo type) extension of boundary
data on a flat chart.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import fields as F_
from . import roots
from .degree import winding_number
from .errors import (CertificationError, NonIntegrableDatum, NonzeroIndex, NormCollapse,
                     TopologicalObstruction, ZeroNorm)
from .fields import BoundaryDatum, TangentField
from .geometry import TWO_PI, PlanarDomain, get_surface
from .index import index_transverse, inward_boundary_index, morse_check
from .vmo import arc_average, collar_cutoff, smoothstep


# -- collar --------------------------------------------------------------------


@dataclass
class CollarField:
    field: TangentField
    r: float
    certificate: dict


def _collar_values(S, g, P, r):
    """``g_bar_s(y)`` at collar coordinates of ``P`` (``s`` clipped to ``[0, r]``)."""
    P = np.asarray(P, dtype=float)
    flat = P.reshape(-1, 3)
    k, theta, s = S.boundary_coordinates(flat)
    s = np.clip(s, 0.0, r)
    out = np.zeros(flat.shape, dtype=float)
    for j, c in enumerate(S.boundary):
        m = k == j
        if np.any(m):
            out[m] = arc_average(c, lambda t, j=j: g(j, t), theta[m], s[m])
    return out.reshape(P.shape)


def collar_extension(S, g, r=None, samples=(256, 16), max_halvings=6):
    """Field on the collar ``U_r`` whose value at ``phi(y, s)`` is the boundary
    average of ``g`` over the arc of radius ``s`` around ``y``.

    ``r`` is halved until the sampled norm lies in ``[c1/3, 3 c2]`` and the
    inward boundary index on the parallel curve ``C_r`` equals that of ``g``.
    """
    S = get_surface(S)
    c1, c2 = g.norm_bounds()
    target = inward_boundary_index(S, g)
    r = S.collar_width / 2 if r is None else float(r)
    fixed = r is not None
    last = None
    for _ in range(max_halvings + 1):
        v = TangentField(S, lambda P, r=r: _collar_values(S, g, P, r), f"collar(r={r:g})")
        th = TWO_PI * np.arange(samples[0]) / samples[0]
        ss = np.linspace(0.0, r, samples[1])
        norms = []
        for k in range(S.boundary_count):
            T, Sg = np.meshgrid(th, ss, indexing="ij")
            P = S.collar_point(k, T, Sg)
            norms.append(np.linalg.norm(v(P), axis=-1).ravel())
        norms = np.concatenate(norms)
        lo, hi = float(norms.min()), float(norms.max())
        ok_norm = lo >= c1 / 3 and hi <= 3 * c2
        inner = [S.parallel_curve(k, r) for k in range(S.boundary_count)]
        got = inward_boundary_index(S, v, curves=inner) if ok_norm else None
        last = {"r": r, "min_norm": lo, "max_norm": hi, "c1": c1, "c2": c2,
                "ind_minus_g": int(target), "ind_minus_C_r": got}
        if ok_norm and got == target:
            return CollarField(v, r, last)
        r /= 2
    if last and last["ind_minus_C_r"] is not None:
        raise CertificationError(f"collar index mismatch: {last}")
    raise NormCollapse(f"collar field norm left [c1/3, 3 c2]: {last}")


# -- interior fill -------------------------------------------------------------------


@dataclass
class FillResult:
    field: TangentField
    zeros: list
    index: int
    r: float
    info: dict = field(default_factory=dict)


def _planar(S):
    if not isinstance(S, PlanarDomain):
        raise NotImplementedError("the extension pipeline is implemented for the disk and annulus")
    return S


def interior_fill(S, collar, seed=0, budget_fraction=0.25, grid=64):
    """Fill ``N_r`` with a field equal to the collar field on ``C_r``.

    Disk: the standard extension of the collar field from ``C_r``, cut off
    towards the centre.  Annulus: the interpolation between the two collar
    traces along radial segments.  A random polynomial perturbation that
    vanishes near ``C_r`` then makes all zeros nondegenerate.
    """
    S = _planar(get_surface(S))
    v, r = collar.field, collar.r
    R = S.outer
    R_in = S.inner

    def radial(P):
        P = np.asarray(P, dtype=float)
        rho = np.hypot(P[..., 0], P[..., 1])
        return rho, np.arctan2(P[..., 1], P[..., 0])

    def at(rho_c, theta):
        return np.stack([rho_c * np.cos(theta), rho_c * np.sin(theta), np.zeros_like(theta)], -1)

    if R_in is None:
        R0 = R - r

        def base(P):
            rho, th = radial(P)
            chi = collar_cutoff(R0 - rho, R0)
            return v(at(np.full_like(rho, R0), th)) * chi[..., None]

        def depth(P):
            return R0 - radial(P)[0]
        width = R0
    else:
        a, b = R_in + r, R - r

        def base(P):
            rho, th = radial(P)
            lam = np.clip((rho - a) / (b - a), 0.0, 1.0)[..., None]
            w_in = v(at(np.full_like(rho, a), th))
            w_out = v(at(np.full_like(rho, b), th))
            n_in = np.linalg.norm(w_in, axis=-1, keepdims=True)
            n_out = np.linalg.norm(w_out, axis=-1, keepdims=True)
            direction = (1 - lam) * w_in / n_in + lam * w_out / n_out
            return direction * ((1 - lam) * n_in + lam * n_out)

        def depth(P):
            rho = radial(P)[0]
            return np.minimum(rho - a, b - rho)
        width = (b - a) / 2

    def glued(P):
        P = np.asarray(P, dtype=float)
        out = v(P)
        inner = S.boundary_distance(P) > r
        if np.any(inner):
            out[inner] = base(P[inner])
        return out

    V = TangentField(S, glued, "fill")
    vmin = float(collar.certificate["min_norm"])
    budget = budget_fraction * vmin

    def freeze(P):
        d = depth(np.asarray(P, dtype=float))
        return smoothstep(np.clip(d / (0.25 * width), 0.0, 1.0)) * (d > 0)

    Fld = F_.transverse_perturb(S, V, budget, seed, region_weight=freeze, grid=grid)
    zeros = F_.find_zeros(S, Fld, grid)
    ind = index_transverse(S, Fld, zeros)
    expected = S.euler_characteristic() - int(collar.certificate["ind_minus_C_r"])
    if ind != expected:
        raise CertificationError(f"fill index {ind} differs from chi - ind_minus = {expected}")
    return FillResult(Fld, zeros, ind, r, {"budget": budget, "zeros": len(zeros)})


# -- zero cancellation -----------------------------------------------------------------


class CancelRegion:
    """Chart region ``{ |(uv - center) / half| < 1 }`` in the 2- or max-norm.

    ``beta`` is the relative radius of the inner region holding the zeros.
    """

    def __init__(self, chart, center, half, norm="l2", beta=0.5):
        self.chart = chart
        self.center = np.asarray(center, dtype=float)
        self.half = np.broadcast_to(np.asarray(half, dtype=float), (2,)).copy()
        self.norm = norm
        self.beta = float(beta)

    def local(self, uv):
        q = (np.asarray(uv, dtype=float) - self.center)
        for d in range(2):
            if self.chart.periodic[d]:
                lo, hi = self.chart.bounds[d]
                per = hi - lo
                q[..., d] = np.mod(q[..., d] + per / 2, per) - per / 2
        return q / self.half

    def radius(self, q):
        if self.norm == "l2":
            return np.hypot(q[..., 0], q[..., 1])
        return np.maximum(np.abs(q[..., 0]), np.abs(q[..., 1]))

    def boundary(self, theta):
        d = np.stack([np.cos(theta), np.sin(theta)], -1)
        return d / self.radius(d)[..., None]

    def to_chart(self, q):
        return self.center + q * self.half


def _lift(angles):
    return np.unwrap(angles)


def cancel_zeros(S, F, region, samples=4096, check_annulus=64):
    """Replace ``F`` inside ``region`` by a nowhere-vanishing field equal to ``F``
    on the region boundary.

    The boundary direction of ``F`` (in chart components) has winding 0, so its
    angle lifts to a periodic function ``alpha``; ``psi`` rotates radially
    from a constant angle at the centre to ``alpha`` on the boundary and its
    length blends from 1 on the inner region to ``|F|`` on the boundary.
    """
    S = get_surface(S)
    chart = region.chart

    def comps(q):
        return F.chart_components(chart, region.to_chart(q))

    w = winding_number(lambda t: comps(region.boundary(t)), samples=512)
    if w != 0:
        raise NonzeroIndex(f"winding of F on the region boundary is {w}, not 0")
    # nothing to do when the region holds no zero
    lo = region.to_chart(np.array([-1.0, -1.0]))
    hi = region.to_chart(np.array([1.0, 1.0]))
    inside = lambda uv: region.radius(region.local(uv)) < 1.0
    if not roots.find_roots(lambda uv: F.chart_components(chart, uv),
                            [(lo[0], hi[0]), (lo[1], hi[1])], (False, False), 48,
                            mask=inside):
        return F
    th = TWO_PI * np.arange(samples + 1) / samples
    bvals = comps(region.boundary(th))
    alpha = _lift(np.arctan2(bvals[:, 1], bvals[:, 0]))
    if abs(alpha[-1] - alpha[0]) > 1e-6:
        raise NonzeroIndex("boundary angle does not close up")
    alpha_c = float(alpha[:-1].mean())
    beta = region.beta
    # the annulus between the inner region and the boundary must be zero free
    rr = np.linspace(beta, 1.0, check_annulus)
    tt = TWO_PI * np.arange(4 * check_annulus) / (4 * check_annulus)
    Rg, Tg = np.meshgrid(rr, tt, indexing="ij")
    ring = region.boundary(Tg) * Rg[..., None]
    ring_min = float(np.linalg.norm(comps(ring.reshape(-1, 2)), axis=-1).min())
    if ring_min <= 0:
        raise CertificationError("F vanishes between the inner region and the boundary")

    def psi_tilde(q):
        rho = region.radius(q)
        t = np.mod(np.arctan2(q[..., 1], q[..., 0]), TWO_PI)
        a_interp = np.interp(t, th, alpha)
        qb = q / np.where(rho > 0, rho, 1.0)[..., None]
        fb = comps(qb)
        a_true = a_interp + np.angle(np.exp(1j * (np.arctan2(fb[..., 1], fb[..., 0]) - a_interp)))
        ang = alpha_c + np.minimum(rho, 1.0) * (a_true - alpha_c)
        psi = np.stack([np.cos(ang), np.sin(ang)], -1)
        fq = np.linalg.norm(comps(q), axis=-1)
        s = np.clip((1.0 - rho) / (1.0 - beta), 0.0, 1.0)
        length = np.where(rho <= beta, 1.0, s + (1.0 - s) * fq)
        return psi * length[..., None]

    def new(P):
        P = np.asarray(P, dtype=float)
        out = F(P)
        idx, uv = S.locate(P)
        cid = S.charts.index(chart) if chart in S.charts else None
        if cid is None:
            uv = chart.locate(P)
            mine = np.ones(P.shape[:-1], dtype=bool)
        else:
            mine = idx == cid
        q = region.local(uv)
        inside = mine & (region.radius(q) < 1.0)
        if np.any(inside):
            out[inside] = chart.vector(uv[inside], psi_tilde(q[inside]))
        return out

    return TangentField(S, new, f"cancelled({F.name})")


def _cluster_regions(S, zeros, r):
    """Zero clusters with vanishing index sum, each wrapped in a collar-chart box."""
    chart = S.collar_chart(0)
    ring = S.outer - S.inner
    pts = chart.locate(np.array([z.location for z in zeros]))
    order = np.argsort(pts[:, 0])
    th = pts[order, 0]
    signs = np.array([zeros[i].sign for i in order])
    n = len(th)
    gaps = np.diff(np.concatenate([th, [th[0] + TWO_PI]]))
    start = (int(np.argmax(gaps)) + 1) % n
    idx = [(start + j) % n for j in range(n)]
    clusters, cur, acc = [], [], 0
    for i in idx:
        cur.append(i)
        acc += signs[i]
        if acc == 0:
            clusters.append(cur)
            cur = []
    if cur:
        raise CertificationError("zero signs do not cancel around the annulus")
    unrolled = np.empty(n)
    base = th[idx[0]]
    for i in idx:
        unrolled[i] = base + np.mod(th[i] - base, TWO_PI)
    regions = []
    for c_i, cl in enumerate(clusters):
        lo, hi = unrolled[cl[0]], unrolled[cl[-1]]
        prev_hi = unrolled[clusters[c_i - 1][-1]] - (TWO_PI if c_i == 0 else 0.0)
        next_lo = unrolled[clusters[(c_i + 1) % len(clusters)][0]] + (
            TWO_PI if c_i == len(clusters) - 1 else 0.0)
        m_left = 0.45 * (lo - prev_hi) if len(clusters) > 1 else 0.45 * (lo + TWO_PI - hi)
        m_right = 0.45 * (next_lo - hi) if len(clusters) > 1 else 0.45 * (lo + TWO_PI - hi)
        m = min(m_left, m_right, 0.5)
        center_t = 0.5 * (lo + hi)
        half_t = 0.5 * (hi - lo) + m
        s_lo, s_hi = r, ring - r
        center = np.array([np.mod(center_t, TWO_PI), 0.5 * (s_lo + s_hi)])
        half = np.array([half_t, 0.5 * (s_hi - s_lo)])
        reg = CancelRegion(chart, center, half, norm="linf")
        q = reg.local(pts[cl])
        inner = float(reg.radius(q).max())
        if inner >= 0.98:
            raise CertificationError("zero cluster touches its cancellation box")
        reg.beta = inner + 0.5 * (1.0 - inner)
        regions.append(reg)
    return regions


# -- clamping --------------------------------------------------------------------------


def clamp_vectors(w, c1, c2):
    w = np.asarray(w, dtype=float)
    n = np.linalg.norm(w, axis=-1, keepdims=True)
    if np.any(n == 0):
        raise ZeroNorm("cannot clamp a zero vector")
    return w * (np.clip(n, c1, c2) / n)


def clamp_norm(v, c1, c2):
    """Pointwise rescaling to magnitude ``min(max(|v|, c1), c2)``."""
    if not 0 < c1 <= c2:
        raise ValueError("need 0 < c1 <= c2")
    if isinstance(v, TangentField):
        return TangentField(v.surface, lambda P: clamp_vectors(v(P), c1, c2),
                            f"clamp({v.name})")
    return clamp_vectors(v, c1, c2)


# -- full pipeline -----------------------------------------------------------------------


@dataclass
class ExtensionResult:
    field: TangentField
    report: dict


def scan_norms(S, v, n=128):
    """``|v|`` on an ``n x n`` chart grid restricted to the surface."""
    S = get_surface(S)
    out = []
    for chart in S.charts:
        (u0, u1), (v0, v1) = chart.bounds
        U, V = np.meshgrid(np.linspace(u0, u1, n), np.linspace(v0, v1, n), indexing="ij")
        P = chart.embed(np.stack([U, V], -1).reshape(-1, 2))
        P = P[S.scan_mask(P, -1e-12)]
        out.append(np.linalg.norm(v(P), axis=-1))
    return np.concatenate(out)


def extend_boundary_datum(S, g, c1=None, c2=None, seed=0, scan=128, grid=64):
    """Nowhere-vanishing extension of ``g`` with ``c1 <= |v| <= c2``.

    Raises ``TopologicalObstruction`` when the inward boundary index of ``g``
    differs from the Euler characteristic.
    """
    S = _planar(get_surface(S))
    gc1, gc2 = g.norm_bounds()
    c1 = gc1 if c1 is None else float(c1)
    c2 = gc2 if c2 is None else float(c2)
    chi = S.euler_characteristic()
    ind_minus = inward_boundary_index(S, g)
    if ind_minus != chi:
        raise TopologicalObstruction(ind_minus, chi)
    collar = collar_extension(S, g)
    fill = interior_fill(S, collar, seed, grid=grid)
    Fld = fill.field
    regions = []
    if fill.zeros:
        if S.inner is None:
            R0 = S.outer - collar.r
            radius = max(float(np.linalg.norm(z.location)) for z in fill.zeros)
            if radius >= 0.98 * R0:
                raise CertificationError("zeros reach the collar")
            regions = [CancelRegion(S.charts[0], (0.0, 0.0), R0, "l2",
                                    beta=max(0.5, radius / R0 + 0.5 * (1 - radius / R0)))]
        else:
            regions = _cluster_regions(S, fill.zeros, collar.r)
    for reg in regions:
        Fld = cancel_zeros(S, Fld, reg)
    V = clamp_norm(Fld, c1, c2)
    norms = scan_norms(S, V, scan)
    rep = morse_check(S, V, grid=grid)
    report = {
        "surface": S.name, "datum": g.name, "chi": chi, "ind_minus_g": int(ind_minus),
        "c1": c1, "c2": c2, "collar": collar.certificate,
        "fill": {"zeros": len(fill.zeros), "index": fill.index, **fill.info},
        "regions": len(regions),
        "scan": {"n": scan, "min_norm": float(norms.min()), "max_norm": float(norms.max())},
        "morse": {"ind": rep.ind, "ind_minus": rep.ind_minus, "residual": rep.morse_residual},
    }
    ok = (norms.min() >= c1 * (1 - 1e-6) and norms.max() <= c2 * (1 + 1e-6)
          and rep.morse_residual == 0 and rep.ind == 0)
    report["certified"] = bool(ok)
    if not ok:
        raise CertificationError(f"extension failed certification: {report}")
    return ExtensionResult(V, report)


def random_admissible_datum(S, rng, modes=3, amplitude=0.6):
    """Random nowhere-vanishing datum with inward boundary index equal to chi.

    On the disk the boundary winding is 0; on the annulus both circles carry
    the same random winding in ``{-1, 0, 1}``.
    """
    S = _planar(get_surface(S))
    wind = 0 if S.inner is None else int(rng.integers(-1, 2))
    parts = []
    for _ in S.boundary:
        a = rng.standard_normal(modes) * amplitude / np.arange(1, modes + 1)
        b = rng.standard_normal(modes) * amplitude / np.arange(1, modes + 1)
        phase = rng.uniform(0, TWO_PI)
        m = rng.uniform(-0.3, 0.3, size=2)
        k = np.arange(1, modes + 1)

        def part(th, a=a, b=b, phase=phase, m=m):
            th = np.asarray(th, dtype=float)
            ang = phase + wind * th + (np.cos(np.multiply.outer(th, k)) @ a
                                       + np.sin(np.multiply.outer(th, k)) @ b)
            mag = 1.0 + m[0] * np.cos(th) + m[1] * np.sin(2 * th)
            return np.stack([mag * np.cos(ang), mag * np.sin(ang), np.zeros_like(th)], -1)

        parts.append(part)
    return BoundaryDatum(S, parts, "random")


# -- interval-average extension ------------------------------------------------------------


@dataclass
class GagliardoResult:
    y: np.ndarray
    t: np.ndarray
    values: np.ndarray
    sobolev_norm: float
    seminorm: float | None = None
    info: dict = field(default_factory=dict)


def interval_average(g, y, t, n=32):
    """``v(y, t) = (1 / 2t) * integral of g over [y - t, y + t]`` (``t > 0``)."""
    y, t = np.broadcast_arrays(np.asarray(y, dtype=float), np.asarray(t, dtype=float))
    x, w = np.polynomial.legendre.leggauss(n)
    nodes = y[..., None] + t[..., None] * x
    return 0.5 * np.einsum("...k,k->...", np.asarray(g(nodes), dtype=float), w)


def sobolev_estimate(g, a, b, T, n, p=2.0, quad=32):
    """Finite-difference ``W^{1,p}`` norm of the extension on ``[a, b] x (0, T]``."""
    hy, ht = (b - a) / n, T / n
    y = a + hy * (np.arange(n) + 0.5)
    t = ht * (np.arange(n) + 0.5)
    Y, Tt = np.meshgrid(y, t, indexing="ij")
    V = interval_average(g, Y, Tt, quad)
    dy, dt = np.gradient(V, hy, ht)
    total = np.sum(np.abs(V) ** p + np.abs(dy) ** p + np.abs(dt) ** p) * hy * ht
    return float(total ** (1.0 / p)), y, t, V


def gagliardo_seminorm(g, a, b, n, p=2.0):
    """Midpoint estimate of ``sum |g(x) - g(y)|^p / |x - y|^p`` off the diagonal."""
    h = (b - a) / n
    x = a + h * (np.arange(n) + 0.5)
    gx = np.asarray(g(x), dtype=float)
    D = np.abs(gx[:, None] - gx[None, :]) ** p
    dist = np.abs(x[:, None] - x[None, :])
    np.fill_diagonal(dist, np.inf)
    return float((D / dist ** p).sum() * h * h)


def gagliardo_extension(g, a=0.0, b=TWO_PI, T=0.5, n=128, p=2.0, check_trace_space=True):
    """Interval-average extension on ``[a, b] x (0, T]`` with norm estimates."""
    if not p > 1:
        raise ValueError("p must exceed 1")
    semi = None
    info = {}
    if check_trace_space:
        vals = [gagliardo_seminorm(g, a, b, m, p) for m in (n, 2 * n, 4 * n)]
        d1, d2 = vals[1] - vals[0], vals[2] - vals[1]
        info["seminorm_sequence"] = vals
        if d2 > 1e-3 * abs(vals[2]) and d2 > 0.75 * d1:
            raise NonIntegrableDatum(f"trace seminorm keeps growing under refinement: {vals}")
        semi = vals[-1]
    norm, y, t, V = sobolev_estimate(g, a, b, T, n, p)
    return GagliardoResult(y, t, V, norm, semi, info)
