from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vmoidx.fields import BoundaryDatum, TangentField
from vmoidx.presets import preset_datum, preset_field
from vmoidx.vmo import (ball_average, bmo_modulus, boundary_density_check, default_eps_grid,
                        loglog_slope, mollifier_diagnostics, mollify, vmo_index)

ORIGIN = np.zeros(3)


def lens_ratio(eps):
    """Exact fraction of the disk B_eps(p), p on the unit circle, outside the unit disk."""
    area_in = (eps ** 2 * np.arccos(eps / 2) + np.arccos(1 - eps ** 2 / 2)
               - 0.5 * np.sqrt(eps ** 2 * (2 - eps) * (2 + eps)))
    return 1 - area_in / (np.pi * eps ** 2)


def test_ball_average_examples(disk):
    c = np.array([0.3, -1.2, 0.0])
    assert np.allclose(ball_average(disk, lambda P: np.broadcast_to(c, P.shape), ORIGIN, 0.1), c)
    assert np.allclose(ball_average(disk, lambda P: P, ORIGIN, 0.1), 0.0, atol=1e-15)
    sq = lambda P: np.stack([P[..., 0] ** 2, 0 * P[..., 0], 0 * P[..., 0]], -1)
    for eps in (0.2, 0.1, 0.05):
        assert ball_average(disk, sq, ORIGIN, eps)[0] == pytest.approx(eps ** 2 / 4, rel=1e-12)


@given(st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), st.floats(0.01, 0.2))
def test_ball_average_of_linear_field_is_exact(x, y, eps):
    from vmoidx.geometry import get_surface
    S = get_surface("disk")
    A = np.array([[0.3, -1.0, 0.0], [2.0, 0.5, 0.0], [0.0, 0.0, 0.0]])
    P = np.array([x, y, 0.0])
    assert np.allclose(ball_average(S, lambda Q: Q @ A.T, P, eps), A @ P, atol=1e-12)


def test_bmo_modulus_examples(disk):
    grid = [0.2, 0.1, 0.05, 0.025]
    const = bmo_modulus(disk, lambda P: np.ones(P.shape), grid)
    assert max(const.omega) == pytest.approx(0.0, abs=1e-14)
    lip = bmo_modulus(disk, lambda P: P, grid)
    assert all(o <= 2 * e + 1e-12 for o, e in zip(lip.omega, grid))
    assert lip.is_nonincreasing()
    # two half-disk values: oscillation stays near half the jump on the interface
    centres = np.array([[0.0, t, 0.0] for t in np.linspace(-0.3, 0.3, 7)])
    jump = bmo_modulus(disk, lambda P: np.stack([np.sign(P[..., 0]), 0 * P[..., 0],
                                                  0 * P[..., 0]], -1), grid, centres)
    assert min(jump.omega) >= 0.5 * 1.0 * 0.9


def test_mollified_linear_field_is_exact_inside(disk):
    v = TangentField.from_expression(disk, "(-y, x)")
    M = mollify(disk, v, eps=0.05)
    P = np.array([[0.1, 0.2, 0.0], [-0.5, 0.3, 0.0]])
    assert np.allclose(M.u_eps(P), v(P), atol=1e-13)


def test_mollified_datum_keeps_norm_bounds(disk):
    g = BoundaryDatum.from_expression(disk, "(2*x, y)")
    for eps in (0.1, 0.05, 0.025):
        diag = mollifier_diagnostics(disk, mollify(disk, TangentField.from_expression(
            disk, "(2*x, y)"), g, eps), g)
        delta = 2 * eps
        assert 1.0 - delta <= diag["min_g_eps"] and diag["max_g_eps"] <= 2.0 + delta


def test_mollified_field_stays_away_from_zero(torus):
    v = preset_field("vmo-torus")
    M = mollify(torus, v, eps=torus.r0 / 8)
    _, P, _ = torus.quadrature(24)
    c = np.linalg.norm(v(P), axis=-1).min()
    assert np.linalg.norm(M.u_eps(P), axis=-1).min() >= c / 2


def test_default_grid(disk):
    assert default_eps_grid(disk) == pytest.approx([0.25 / 2 ** k for k in range(1, 7)])


def test_vmo_index_saddle(disk):
    res = vmo_index(disk, TangentField.from_expression(disk, "(y, x)"))
    assert (res.report.ind, res.report.ind_minus, res.report.morse_residual) == (-1, 2, 0)
    assert res.certificate["constant"]


def test_vmo_index_point_singularity():
    v = preset_field("vmo-point-singular")
    res = vmo_index(v.surface, v, preset_datum("vmo-point-singular"))
    assert (res.report.ind, res.report.ind_minus) == (1, 0)
    diag = [r["sup_boundary_u_minus_g"] for r in res.rows]
    assert diag[-1] < diag[0] / 10


def test_vmo_index_torus():
    v = preset_field("vmo-torus")
    res = vmo_index(v.surface, v)
    assert res.report.ind == 0 == res.report.chi
    series = [r["sup_u_minus_ubar"] for r in res.rows]
    assert series[-1] < series[0] / 100


def test_eps_grid_must_decrease(disk):
    with pytest.raises(ValueError):
        vmo_index(disk, TangentField.from_expression(disk, "(y, x)"), eps_grid=[0.01, 0.02])


def test_boundary_density_matches_lens_area(disk):
    rows = boundary_density_check(disk)
    for r in rows:
        assert r["ratio"] == pytest.approx(lens_ratio(r["eps"]), rel=1e-5)
        assert 0.25 <= r["ratio"] < 1


def test_boundary_density_rate_is_first_order(disk):
    # the deviation from 1/2 is eps / (3 pi) to leading order
    rows = boundary_density_check(disk)
    slope = loglog_slope([r["eps"] for r in rows], [r["deviation"] for r in rows])
    assert slope == pytest.approx(1.0, abs=0.02)
    assert rows[-1]["deviation"] / rows[-1]["eps"] == pytest.approx(1 / (3 * np.pi), rel=1e-3)


def test_boundary_density_at_collar_width(disk):
    r, = boundary_density_check(disk, eps_grid=(disk.collar_width,))
    assert 0 < r["ratio"] < 1
