from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vmoidx.errors import BallContainsOtherZero, DegenerateZero
from vmoidx.fields import TangentField, find_zeros
from vmoidx.index import (ChartDisk, ChartSector, excision_check, index_continuous,
                          index_transverse, index_winding, inward_boundary_index,
                          inward_boundary_region, morse_check, stability_radius)

GOLDEN = (np.sqrt(5) - 1) / 4


def field(S, expr):
    return TangentField.from_expression(S, expr)


@pytest.mark.parametrize("expr,ind", [("(-y, x)", 1), ("(y, x)", -1), ("(0, 1)", 0)])
def test_index_transverse_figure_fields(disk, expr, ind):
    assert index_transverse(disk, field(disk, expr)) == ind


def test_index_sphere_rotation_by_pole_windings(sphere):
    v = field(sphere, "(-y, x, 0)")
    zs = find_zeros(sphere, v)
    windings = [index_winding(sphere, v, z, 1e-2) for z in zs]
    assert windings == [1, 1]
    assert index_transverse(sphere, v) == 2


@pytest.mark.parametrize("expr,ind", [
    ("(x, y)", 1), ("(y, x)", -1), ("(x**2 - y**2, 2*x*y)", 2)])
def test_index_winding_local(disk, expr, ind):
    v = field(disk, expr)
    zs = find_zeros(disk, v, check_boundary=False) or []
    z = type("Z", (), {"chart": 0, "uv": np.zeros(2)})()
    assert index_winding(disk, v, z, 0.1) == ind


def test_winding_ball_must_isolate_zero(disk):
    v = field(disk, "(x**2 - 0.04, y)")
    zs = find_zeros(disk, v)
    with pytest.raises(BallContainsOtherZero):
        index_winding(disk, v, zs[0], 0.5, zs)


def test_degenerate_zero_is_rejected_by_transverse_index(disk):
    with pytest.raises(DegenerateZero):
        index_transverse(disk, field(disk, "(x**2, y)"))


def test_continuous_index_of_degenerate_rotation(disk):
    v = field(disk, "((x**2 + y**2) * (-y), (x**2 + y**2) * x)")
    assert index_continuous(disk, v) == 1


def test_continuous_index_matches_transverse(disk):
    v = field(disk, "(y, x)")
    assert index_continuous(disk, v) == index_transverse(disk, v) == -1
    assert index_continuous(disk, field(disk, "(0, 1)")) == 0


def test_inward_region_examples(disk):
    reg = inward_boundary_region(disk, field(disk, "(0, 1)"))
    (a, b), = reg.arcs[0]
    # v . nu = sin(theta) < 0 on (pi, 2 pi)
    assert np.mod(a, 2 * np.pi) == pytest.approx(np.pi, abs=1e-6)
    assert b - a == pytest.approx(np.pi, abs=1e-6)
    assert inward_boundary_region(disk, field(disk, "(-y, x)")).is_empty
    assert inward_boundary_region(disk, field(disk, "(x, y)")).is_empty


@pytest.mark.parametrize("expr,ind_minus", [("(0, 1)", 1), ("(-y, x)", 0), ("(y, x)", 2),
                                            ("(x, y)", 0), ("(-x, -y)", 0)])
def test_inward_boundary_index(disk, expr, ind_minus):
    assert inward_boundary_index(disk, field(disk, expr)) == ind_minus


@pytest.mark.parametrize("expr,pair", [("(0, 1)", (0, 1)), ("(-y, x)", (1, 0)),
                                       ("(y, x)", (-1, 2))])
def test_morse_check_figure_fields(disk, expr, pair):
    rep = morse_check(disk, field(disk, expr))
    assert (rep.ind, rep.ind_minus) == pair
    assert rep.morse_residual == 0


def test_morse_check_closed_sphere(sphere):
    rep = morse_check(sphere, field(sphere, "(-y, x, 0)"))
    assert (rep.ind, rep.ind_minus, rep.chi) == (2, 0, 2)


def test_annulus_angular_field(annulus):
    rep = morse_check(annulus, field(annulus, "(-y, x)"))
    assert (rep.ind, rep.ind_minus, rep.morse_residual) == (0, 0, 0)


entry = st.floats(-1.5, 1.5, allow_nan=False)


@given(entry, entry, entry, entry, st.floats(-0.3, 0.3), st.floats(-0.3, 0.3))
def test_linear_fields_satisfy_morse_identity(a, b, c, d, p, q):
    from vmoidx.geometry import get_surface
    A = np.array([[a, b], [c, d]])
    if np.linalg.svd(A, compute_uv=False).min() < 0.2:
        return
    S = get_surface("disk")
    off = np.array([p, q])
    v = TangentField(S, lambda P: np.concatenate([(P[..., :2] - off) @ A.T, 0 * P[..., :1]], -1))
    rep = morse_check(S, v)
    assert rep.morse_residual == 0
    assert rep.ind == int(np.sign(np.linalg.det(A)))


def test_stability_radius(disk):
    assert stability_radius(disk, field(disk, "(-y, x)")) == pytest.approx(GOLDEN, abs=1e-12)
    assert stability_radius(disk, field(disk, "(-2*y, 2*x)")) == pytest.approx(2 * GOLDEN,
                                                                              abs=1e-12)


def test_excision_sphere_caps(sphere):
    v = field(sphere, "(-y, x, 0)")
    ok, whole, parts = excision_check(sphere, v, ChartDisk(0, (0, 0), 0.3),
                                      ChartDisk(1, (0, 0), 0.3))
    assert ok and whole == 2 and parts == [1, 1]


def test_excision_disk_sector(disk):
    v = field(disk, "(-y, x)")
    ok, whole, parts = excision_check(disk, v, ChartDisk(0, (0, 0), 0.2),
                                      ChartSector(0, (0, 0), 0.4, 0.8, 0.0, 1.0))
    assert ok and parts == [1, 0]
    ok, whole, parts = excision_check(disk, v, None, ChartDisk(0, (0, 0), 0.2))
    assert ok and whole == parts[0] == 1
