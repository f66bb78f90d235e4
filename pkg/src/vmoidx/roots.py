"""Zeros of maps ``R^2 -> R^2`` on a rectangle: grid scan seeding damped Newton."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Root:
    uv: np.ndarray
    jacobian: np.ndarray
    residual: float


def fd_jacobian(F, uv, h=1e-5):
    """Central differences; ``uv`` has shape (M, 2), result (M, 2, 2)."""
    uv = np.asarray(uv, dtype=float)
    cols = []
    for d in range(2):
        e = np.zeros(2)
        e[d] = h
        cols.append((F(uv + e) - F(uv - e)) / (2 * h))
    return np.stack(cols, axis=-1)


def _grid(bounds, periodic, n):
    axes = []
    for d in range(2):
        lo, hi = bounds[d]
        axes.append(np.linspace(lo, hi, n + 1))
    U, V = np.meshgrid(*axes, indexing="ij")
    return axes, np.stack([U, V], -1)


def _seed_cells(vals, finite):
    """Cells whose corner values bracket zero in both components."""
    c = [vals[:-1, :-1], vals[1:, :-1], vals[:-1, 1:], vals[1:, 1:]]
    ok = finite[:-1, :-1] & finite[1:, :-1] & finite[:-1, 1:] & finite[1:, 1:]
    lo = np.minimum.reduce([x for x in c])
    hi = np.maximum.reduce([x for x in c])
    bracket = (lo[..., 0] <= 0) & (hi[..., 0] >= 0) & (lo[..., 1] <= 0) & (hi[..., 1] >= 0)
    return bracket & ok


def _local_minima(norm):
    """Interior grid nodes whose norm is minimal in their 3x3 neighbourhood."""
    pad = np.pad(norm, 1, constant_values=np.inf)
    m = np.ones_like(norm, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            shifted = pad[1 + di:1 + di + norm.shape[0], 1 + dj:1 + dj + norm.shape[1]]
            m &= norm <= shifted
    return m & np.isfinite(norm)


def newton(F, uv, tol=1e-12, h=1e-5, max_iter=100):
    """Vectorised damped Newton with a pseudo-inverse step and backtracking."""
    uv = np.array(uv, dtype=float, copy=True)
    f = F(uv)
    r = np.linalg.norm(f, axis=-1)
    active = np.isfinite(r) & (r > tol)
    for _ in range(max_iter):
        if not np.any(active):
            break
        idx = np.flatnonzero(active)
        J = fd_jacobian(F, uv[idx], h)
        step = np.einsum("mij,mj->mi", np.linalg.pinv(J), f[idx])
        lam = np.ones(len(idx))
        improved = np.zeros(len(idx), dtype=bool)
        for _ in range(12):
            trial = uv[idx] - lam[:, None] * step
            ft = F(trial)
            rt = np.linalg.norm(ft, axis=-1)
            good = np.isfinite(rt) & (rt < r[idx]) & ~improved
            sel = idx[good]
            uv[sel] = trial[good]
            f[sel] = ft[good]
            r[sel] = rt[good]
            improved |= good
            if improved.all():
                break
            lam = np.where(improved, lam, lam * 0.5)
        stalled = idx[~improved]
        active[stalled] = False
        active &= r > tol
    return uv, r


def find_roots(F, bounds, periodic=(False, False), n=64, tol=1e-9, sep=1e-5, h=1e-5,
               mask=None, extra_seeds=None):
    """Locate zeros of ``F: (..., 2) -> (..., 2)`` on a rectangle.

    Seeds come from cells bracketing zero in both components and from local
    minima of ``|F|`` on the grid nodes (which catches degenerate zeros that
    touch zero without a sign change).  Converged points outside the
    rectangle or rejected by ``mask`` are dropped; survivors closer than
    ``sep`` are merged.
    """
    bounds = np.asarray(bounds, dtype=float).reshape(2, 2)
    axes, nodes = _grid(bounds, periodic, n)
    vals = F(nodes.reshape(-1, 2)).reshape(nodes.shape)
    finite = np.all(np.isfinite(vals), axis=-1)
    cells = _seed_cells(vals, finite)
    ci, cj = np.nonzero(cells)
    du = (bounds[0, 1] - bounds[0, 0]) / n
    dv = (bounds[1, 1] - bounds[1, 0]) / n
    seeds = [np.stack([axes[0][ci] + 0.5 * du, axes[1][cj] + 0.5 * dv], -1)]
    norm = np.where(finite, np.linalg.norm(np.where(finite[..., None], vals, 0.0), axis=-1), np.inf)
    level = np.median(norm[np.isfinite(norm)]) if np.isfinite(norm).any() else 0.0
    mi, mj = np.nonzero(_local_minima(norm) & (norm < 0.25 * level))
    seeds.append(nodes[mi, mj])
    if extra_seeds is not None:
        seeds.append(np.asarray(extra_seeds, dtype=float).reshape(-1, 2))
    seeds = np.concatenate(seeds, 0)
    if len(seeds) == 0:
        return []
    uv, r = newton(F, seeds, tol=1e-3 * tol, h=h)
    ok = np.isfinite(r) & (r <= tol)
    for d in range(2):
        if periodic[d]:
            lo, hi = bounds[d]
            uv[:, d] = lo + np.mod(uv[:, d] - lo, hi - lo)
        else:
            pad = 1e-9 * (bounds[d, 1] - bounds[d, 0])
            ok &= (uv[:, d] >= bounds[d, 0] - pad) & (uv[:, d] <= bounds[d, 1] + pad)
    uv, r = uv[ok], r[ok]
    if mask is not None and len(uv):
        keep = np.asarray(mask(uv), dtype=bool)
        uv, r = uv[keep], r[keep]
    order = np.lexsort((uv[:, 1], uv[:, 0])) if len(uv) else np.array([], dtype=int)
    roots: list[Root] = []
    period = np.array([bounds[d, 1] - bounds[d, 0] if periodic[d] else np.inf for d in range(2)])
    for i in order[np.argsort(r[order], kind="stable")]:
        p = uv[i]
        dup = False
        for q in roots:
            diff = np.abs(p - q.uv)
            diff = np.where(np.isfinite(period), np.minimum(diff, period - diff), diff)
            if np.hypot(*diff) < sep:
                dup = True
                break
        if not dup:
            J = fd_jacobian(F, p[None], h)[0]
            roots.append(Root(p.copy(), J, float(r[i])))
    roots.sort(key=lambda z: (round(z.uv[0], 9), round(z.uv[1], 9)))
    return roots
