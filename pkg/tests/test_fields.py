from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vmoidx.errors import BudgetExceeded, ZeroOnBoundary
from vmoidx.fields import (BoundaryDatum, SampledField, TangentField, find_zeros, pushforward,
                           transverse_perturb)


def test_pushforward_flat_chart(disk):
    chart = disk.charts[0]
    uv = np.array([[0.2, -0.1]])
    assert np.allclose(pushforward(disk, chart, TangentField.from_expression(disk, "(0, 1)"), uv),
                       [[0.0, 1.0]])
    assert np.allclose(pushforward(disk, chart, TangentField.from_expression(disk, "(0, 0)"), uv),
                       0.0)


def test_pushforward_rotation_at_equator(sphere):
    # in latitude/longitude coordinates the rotation field is d/d(longitude)
    chart = sphere.quadrature_chart
    v = TangentField.from_expression(sphere, "(-y, x, 0)")
    assert chart.periodic == (False, True)  # (colatitude, longitude)
    uv = np.array([[np.pi / 2, 0.7]])
    comps = chart.coords(uv, v(chart.embed(uv)))[0]
    assert comps[0] == pytest.approx(0.0, abs=1e-12)
    assert comps[1] == pytest.approx(1.0, abs=1e-12)

@pytest.mark.parametrize("expr,signs", [("(-y, x)", [1]), ("(0, 1)", []), ("(y, x)", [-1])])
def test_figure_fields_zeros(disk, expr, signs):
    zs = find_zeros(disk, TangentField.from_expression(disk, expr))
    assert [z.sign for z in zs] == signs
    for z in zs:
        assert np.allclose(z.location, 0.0, atol=1e-9)


def test_zero_on_boundary_is_rejected(disk):
    with pytest.raises(ZeroOnBoundary):
        find_zeros(disk, TangentField.from_expression(disk, "(x**2, 0)"))


def test_sphere_rotation_has_two_positive_zeros(sphere):
    zs = find_zeros(sphere, TangentField.from_expression(sphere, "(-y, x, 0)"))
    assert sorted(round(float(z.location[2])) for z in zs) == [-1, 1]
    assert [z.sign for z in zs] == [1, 1]


det_entry = st.floats(-2.0, 2.0, allow_nan=False)


@given(det_entry, det_entry, det_entry, det_entry)
def test_linear_field_zero_sign_is_sign_of_det(a, b, c, d):
    A = np.array([[a, b], [c, d]])
    det = np.linalg.det(A)
    if abs(det) < 1e-2 or np.linalg.svd(A, compute_uv=False).min() < 0.05:
        return
    from vmoidx.geometry import get_surface
    S = get_surface("disk")
    v = TangentField(S, lambda P: np.concatenate([P[..., :2] @ A.T, 0 * P[..., :1]], -1))
    zs = find_zeros(S, v)
    assert len(zs) == 1 and zs[0].sign == int(np.sign(det))


def test_transverse_field_is_returned_unchanged(disk):
    v = TangentField.from_expression(disk, "(-y, x)")
    assert transverse_perturb(disk, v, 0.0) is v


def test_degenerate_zero_is_resolved(disk):
    # (x^2, y) has a degenerate zero at 0 and no zero on the circle
    v = TangentField.from_expression(disk, "(x**2, y)")
    budget = 0.2
    u = transverse_perturb(disk, v, budget, seed=3)
    zs = find_zeros(disk, u)
    assert all(z.nondegenerate for z in zs)
    # brute-force sign check of the chart Jacobian on a grid around each zero
    for z in zs:
        h = 1e-4
        uv = z.uv
        F = lambda q: u.chart_components(disk.charts[0], q[None])[0]
        J = np.column_stack([(F(uv + e) - F(uv - e)) / (2 * h) for e in np.eye(2) * h])
        assert np.sign(np.linalg.det(J)) == z.sign
    P = disk.quadrature(32)[1]
    assert np.linalg.norm(u(P) - v(P), axis=-1).max() <= budget + 1e-12


def test_budget_above_boundary_norm_is_rejected(disk):
    v = TangentField.from_expression(disk, "(x**2, y)")
    with pytest.raises(BudgetExceeded):
        transverse_perturb(disk, v, 2.0)


def test_datum_norm_bounds(disk):
    g = BoundaryDatum.from_expression(disk, "(2*x, y)")
    c1, c2 = g.norm_bounds()
    # the datum lives in the tangent plane of the disk: |(2 cos t, sin t)| in [1, 2]
    assert c1 == pytest.approx(1.0, abs=1e-6)
    assert c2 == pytest.approx(2.0, abs=1e-6)


def test_sampled_field_from_csv(tmp_path, disk):
    us = np.linspace(-1, 1, 21)
    rows = ["u,v,w1,w2,w3,chart"]
    for u in us:
        for v in us:
            rows.append(f"{u},{v},{-v},{u},0,0")
    path = tmp_path / "field.csv"
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    f = SampledField.from_csv(disk, str(path))
    P = np.array([[0.33, -0.21, 0.0]])
    assert np.allclose(f(P), [[0.21, 0.33, 0.0]], atol=1e-12)
    zs = find_zeros(disk, f)
    assert [z.sign for z in zs] == [1]
