"""Mean oscillation, ball averages, mollified fields and the VMO index.

Near the boundary the surface is continued by collar reflection and the
field by the standard extension ``G`` of its boundary datum, so that balls
centred on or near the boundary see half field, half extension.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import fields as F_
from .errors import CollarTooNarrow, NotConstantOverGrid
from .fields import BoundaryDatum, TangentField
from .geometry import TWO_PI, arc_nodes, ball_nodes, get_surface, tangent_project
from .index import IndexReport, index_continuous, inward_boundary_index, stability_radius


def smoothstep(t):
    """C-infinity step: 0 for ``t <= 0``, 1 for ``t >= 1``."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


def collar_cutoff(s, width):
    """1 for ``|s| <= width / 2``, smoothly 0 at ``|s| >= width``."""
    return 1.0 - smoothstep((np.abs(s) - 0.5 * width) / (0.5 * width))


def default_eps_grid(S, levels=6):
    S = get_surface(S)
    return [S.r0 / 2 ** k for k in range(1, levels + 1)]


# -- averages ------------------------------------------------------------------


def ball_average(S, u, x, eps, n=8, interior=True):
    """Measure-weighted mean of ``u`` over ``B_eps(x)``; ``x`` may hold many points."""
    S = get_surface(S)
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    nodes, w = ball_nodes(S, np.atleast_2d(x), eps, n, interior)
    vals = np.asarray(u(nodes), dtype=float)
    avg = np.einsum("mk,mk...->m...", w, vals) / w.sum(1).reshape((-1,) + (1,) * (vals.ndim - 2))
    return avg[0] if single else avg


def arc_average(curve, values, theta, eps, n=24):
    """Arclength mean over ``{|t - theta| < eps}`` on a boundary curve.

    ``eps`` may be an array (one radius per ``theta``); radius 0 returns the
    value at ``theta``.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    eps = np.broadcast_to(np.asarray(eps, dtype=float), theta.shape)
    x, a = np.polynomial.legendre.leggauss(n)
    half = eps / curve.speed(theta)
    nodes = theta[:, None] + half[:, None] * x[None, :]
    vals = values(nodes)
    return np.einsum("k,mk...->m...", 0.5 * a, vals)


# -- oscillation -------------------------------------------------------------------


@dataclass
class VmoModulus:
    eps_grid: list
    omega: list
    counts: list = field(default_factory=list)

    def is_nonincreasing(self, rel_noise=0.1):
        om = np.asarray(self.omega)
        return bool(np.all(om[1:] <= om[:-1] * (1 + rel_noise) + 1e-14))


def bmo_modulus(S, u, eps_grid, x_grid=None, n=8):
    """``omega(eps)``: max over admissible centres of the mean oscillation."""
    S = get_surface(S)
    if x_grid is None:
        _, x_grid, _ = S.quadrature(24)
    x_grid = np.asarray(x_grid, dtype=float)
    omegas, counts = [], []
    for eps in eps_grid:
        X = x_grid
        if not S.is_closed:
            X = X[S.boundary_distance(X) >= 2 * eps]
        if len(X) == 0:
            omegas.append(0.0)
            counts.append(0)
            continue
        nodes, w = ball_nodes(S, X, eps, n, interior=True)
        vals = np.asarray(u(nodes), dtype=float)
        if vals.ndim == 2:
            vals = vals[..., None]
        mean = np.einsum("mk,mkd->md", w, vals) / w.sum(1, keepdims=True)
        osc = np.einsum("mk,mk->m", w, np.linalg.norm(vals - mean[:, None, :], axis=-1))
        osc /= w.sum(1)
        omegas.append(float(osc.max()))
        counts.append(int(len(X)))
    return VmoModulus(list(map(float, eps_grid)), omegas, counts)


# -- extension and mollification -----------------------------------------------------


def standard_extension_G(S, g, cutoff_width=None):
    """``G(x) = g(pi(x)) chi(x)`` on the two-sided collar, 0 elsewhere."""
    S = get_surface(S)
    w = S.collar_width if cutoff_width is None else float(cutoff_width)
    if w <= 0 or w > S.collar_width + 1e-12:
        raise CollarTooNarrow(f"cutoff width {w:g} exceeds collar width {S.collar_width:g}")

    def G(P):
        P = np.asarray(P, dtype=float)
        out = np.zeros(P.shape, dtype=float)
        for k, (theta, s) in enumerate(S.boundary_coordinates_all(P)):
            chi = collar_cutoff(s, w)
            m = chi > 0
            if np.any(m):
                out[m] += g(k, theta[m]) * chi[m][..., None]
        return out

    return G


def glued_field(S, v, g, cutoff_width=None):
    """``v`` on the surface, the standard extension of ``g`` on the reflected collar."""
    S = get_surface(S)
    if S.is_closed:
        return v
    G = standard_extension_G(S, g, cutoff_width)

    def U(P):
        P = np.asarray(P, dtype=float)
        inside = S.boundary_distance(P) >= 0
        out = G(P)
        if np.any(inside):
            out[inside] = v(P[inside])
        return out

    return U


@dataclass
class MollifiedField:
    eps: float
    u_eps: TangentField
    raw_average: object
    g_eps: BoundaryDatum | None


def mollify(S, v, g=None, eps=None, n=8):
    """``u_eps = P ball_average(glued field)`` and ``g_eps`` on the boundary."""
    S = get_surface(S)
    if eps is None or not (0 < eps <= S.r0):
        raise ValueError(f"eps must lie in (0, r0={S.r0:g}]")
    if g is None and not S.is_closed:
        g = BoundaryDatum.from_field(v)
    U = glued_field(S, v, g)

    def raw(P):
        P = np.asarray(P, dtype=float)
        flat = P.reshape(-1, 3)
        out = ball_average(S, U, flat, eps, n, interior=False)
        return out.reshape(P.shape)

    u = TangentField(S, raw, f"mollified({getattr(v, 'name', 'v')},{eps:g})")
    g_eps = None
    if not S.is_closed:
        parts = []
        for k, c in enumerate(S.boundary):
            def part(th, k=k, c=c):
                th = np.asarray(th, dtype=float)
                flat = th.reshape(-1)
                avg = arc_average(c, lambda t: g(k, t), flat, eps)
                return avg.reshape(th.shape + (3,))
            parts.append(part)
        g_eps = BoundaryDatum(S, parts, f"g_{eps:g}")
    return MollifiedField(float(eps), u, raw, g_eps)


def _sample_points(S, eps, n=20):
    _, P, _ = S.quadrature(n)
    return P


def mollifier_diagnostics(S, M, g, n_interior=20, n_boundary=256):
    """``sup |u - u_bar|``, ``sup_bd |u - g_eps|``, ``min/max |g_eps|``."""
    S = get_surface(S)
    P = _sample_points(S, M.eps, n_interior)
    raw = M.raw_average(P)
    proj = M.u_eps(P)
    out = {"eps": M.eps, "sup_u_minus_ubar": float(np.linalg.norm(proj - raw, axis=-1).max())}
    if not S.is_closed:
        th = TWO_PI * np.arange(n_boundary) / n_boundary
        diffs, gn = [], []
        for k, c in enumerate(S.boundary):
            B = c.point(th)
            ge = M.g_eps(k, th)
            diffs.append(np.linalg.norm(M.u_eps(B) - ge, axis=-1))
            gn.append(np.linalg.norm(ge, axis=-1))
        gn = np.concatenate(gn)
        out.update(sup_boundary_u_minus_g=float(np.concatenate(diffs).max()),
                   min_g_eps=float(gn.min()), max_g_eps=float(gn.max()))
    else:
        out.update(sup_boundary_u_minus_g=0.0, min_g_eps=None, max_g_eps=None)
    return out


@dataclass
class VmoIndexResult:
    report: IndexReport
    rows: list
    certificate: dict

    def as_dict(self):
        d = self.report.as_dict()
        d["per_eps"] = self.rows
        d["certificate"] = self.certificate
        return d


def vmo_index(S, v, g=None, eps_grid=None, certify_last=4, n=8, grid=48, seeds=(0, 1, 2),
              diagnostics=True):
    """Index and inward boundary index of ``u_eps`` and ``g_eps`` over an eps grid.

    The values must be constant over the last ``certify_last`` entries of the
    (decreasing) grid; otherwise ``NotConstantOverGrid`` is raised.
    """
    S = get_surface(S)
    eps_grid = list(default_eps_grid(S) if eps_grid is None else eps_grid)
    if any(b >= a for a, b in zip(eps_grid, eps_grid[1:])):
        raise ValueError("eps grid must be strictly decreasing")
    if g is None and not S.is_closed:
        g = BoundaryDatum.from_field(v)
    rows = []
    for eps in eps_grid:
        M = mollify(S, v, g, eps, n)
        ind = index_continuous(S, M.u_eps, seeds=seeds, grid=grid)
        ind_minus = 0 if S.is_closed else inward_boundary_index(S, M.g_eps)
        row = {"eps": float(eps), "ind": int(ind), "ind_minus": int(ind_minus)}
        if diagnostics:
            row.update(mollifier_diagnostics(S, M, g))
        rows.append(row)
    tail = rows[-certify_last:]
    pairs = {(r["ind"], r["ind_minus"]) for r in tail}
    cert = {"eps_certified": [r["eps"] for r in tail], "constant": len(pairs) == 1,
            "values": sorted(pairs)}
    if len(pairs) != 1:
        raise NotConstantOverGrid(f"(ind, ind_minus) varies over the certified grid: {sorted(pairs)}")
    ind, ind_minus = tail[-1]["ind"], tail[-1]["ind_minus"]
    eps1 = None if S.is_closed else stability_radius(S, g)
    report = IndexReport(S.euler_characteristic(), ind, ind_minus, [], eps1,
                         {"surface": S.name, "field": getattr(v, "name", "field"),
                          "eps_grid": [float(e) for e in eps_grid]})
    return VmoIndexResult(report, rows, cert)


# -- boundary density --------------------------------------------------------------


def boundary_density_check(S, x0=(0, 0.0), eps_grid=(0.2, 0.1, 0.05, 0.025), n_angle=512,
                           n_radial=24, alpha=0.25):
    """Fraction of the ball ``B_eps(x0)`` lying outside the surface.

    ``x0 = (component, theta)`` is a boundary point.  The ball is the chart
    ellipse; along each ray the radial quadrature is split where the ray
    crosses the boundary, so the indicator is integrated exactly up to
    quadrature error of smooth pieces.
    """
    S = get_surface(S)
    k, theta0 = x0
    P0 = S.boundary[k].point(np.array([float(theta0)]))[0]
    idx, uv = S.locate(P0[None])
    chart = S.charts[int(idx[0])]
    uv0 = uv[0]
    g0 = chart.metric(uv0)
    Minv = np.linalg.inv(np.linalg.cholesky(g0).T)
    L = np.linalg.cholesky(g0)
    xg, wg = np.polynomial.legendre.leggauss(n_radial)
    # angle of the boundary tangent in the normalized chart frame
    tan = S.boundary[k].unit_tangent(np.array([float(theta0)]))[0]
    beta = float(np.arctan2(*(L.T @ chart.coords(uv0, tan))[::-1]))

    def sdist(q):
        return S.boundary_distance(chart.embed(q))

    rows = []
    for eps in eps_grid:
        # the ray integrand has kinks at the tangent directions and about eps/2
        # away from them, so the angular grid is refined there
        band = beta + np.concatenate([np.linspace(-2 * eps, 2 * eps, 257),
                                      np.pi + np.linspace(-2 * eps, 2 * eps, 257)])
        t = np.unique(np.mod(np.concatenate([TWO_PI * np.arange(n_angle) / n_angle, band]),
                             TWO_PI))
        gaps = np.diff(np.concatenate([t, [t[0] + TWO_PI]]))
        wt = 0.5 * (gaps + np.roll(gaps, 1))
        dirs = np.stack([np.cos(t), np.sin(t)], -1) @ Minv.T
        outside = total = 0.0
        for d, w_ang in zip(dirs, wt):
            rho = np.union1d(np.linspace(0.0, eps, 65)[1:], eps * np.geomspace(1e-10, 1 / 64, 48))
            s = sdist(uv0 + rho[:, None] * d)
            cuts = [0.0]
            for i in np.flatnonzero(np.sign(s[:-1]) != np.sign(s[1:])):
                cuts.append(brentq(lambda r: sdist((uv0 + r * d)[None])[0], rho[i], rho[i + 1],
                                   xtol=1e-15))
            cuts.append(eps)
            for a, b in zip(cuts[:-1], cuts[1:]):
                if b <= a:
                    continue
                r = 0.5 * (b - a) * xg + 0.5 * (a + b)
                q = uv0 + r[:, None] * d
                dA = chart.area_element(q) * r * (0.5 * (b - a)) * wg
                piece = w_ang * float(dA.sum())
                total += piece
                mid = uv0 + 0.5 * (a + b) * d
                if sdist(mid[None])[0] < 0:
                    outside += piece
        ratio = outside / total
        rows.append({"eps": float(eps), "ratio": ratio, "deviation": abs(ratio - 0.5),
                     "ratio_at_least_alpha": bool(ratio >= alpha)})
    return rows


def loglog_slope(xs, ys):
    xs, ys = np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float))
    return float(np.polyfit(xs, ys, 1)[0])
