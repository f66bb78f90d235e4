from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vmoidx.errors import NonIntegrableDatum, NonzeroIndex, TopologicalObstruction, ZeroNorm
from vmoidx.extension import (CancelRegion, cancel_zeros, clamp_norm, clamp_vectors,
                              collar_extension, extend_boundary_datum, gagliardo_extension,
                              interior_fill, interval_average, random_admissible_datum,
                              scan_norms, sobolev_estimate)
from vmoidx.fields import BoundaryDatum, TangentField, find_zeros
from vmoidx.geometry import get_surface
from vmoidx.index import inward_boundary_index


def datum(S, expr):
    return BoundaryDatum.from_expression(S, expr)


def test_collar_extension_of_constant_datum(disk):
    g = datum(disk, "(0, 1)")
    col = collar_extension(disk, g)
    P = disk.collar_point(0, np.linspace(0, 6, 13), col.r / 2)
    # averages of a constant stay constant
    assert np.allclose(col.field(P), [0.0, 1.0, 0.0], atol=1e-12)
    assert col.certificate["ind_minus_C_r"] == 1


def test_collar_extension_tends_to_datum(disk):
    g = datum(disk, "(-y + 0.3*x*y, x)")
    col = collar_extension(disk, g)
    th = np.linspace(0, 6, 9)
    near = col.field(disk.collar_point(0, th, 1e-6))
    assert np.allclose(near, g(0, th), atol=1e-4)


def test_collar_of_tangent_datum_has_no_inward_index(disk):
    col = collar_extension(disk, datum(disk, "(-y, x)"))
    assert col.certificate["ind_minus_C_r"] == 0


def test_interior_fill_index(disk):
    col = collar_extension(disk, datum(disk, "(0, 1)"))
    fill = interior_fill(disk, col, seed=0)
    assert fill.index == 0
    assert sum(z.sign for z in fill.zeros) == 0


def test_interior_fill_annulus_can_be_zero_free(annulus):
    col = collar_extension(annulus, datum(annulus, "(-y, x)"))
    fill = interior_fill(annulus, col, seed=0)
    assert fill.index == 0 and fill.zeros == []


def test_cancel_zero_pair(disk):
    F = TangentField.from_expression(disk, "(x**2 - 0.04, y)")
    assert sorted(z.sign for z in find_zeros(disk, F)) == [-1, 1]
    region = CancelRegion(disk.charts[0], (0.0, 0.0), 0.6)
    G = cancel_zeros(disk, F, region)
    assert find_zeros(disk, G) == []
    g = np.linspace(-0.6, 0.6, 121)
    X, Y = np.meshgrid(g, g)
    P = np.stack([X.ravel(), Y.ravel(), 0 * X.ravel()], -1)
    assert np.linalg.norm(G(P), axis=-1).min() > 1e-3
    outside = np.array([[0.0, 0.8, 0.0], [-0.7, 0.1, 0.0]])
    assert np.allclose(G(outside), F(outside))


def test_cancel_leaves_zero_free_field(disk):
    F = TangentField.from_expression(disk, "(0, 1)")
    assert cancel_zeros(disk, F, CancelRegion(disk.charts[0], (0.0, 0.0), 0.6)) is F


def test_cancel_refuses_single_zero(disk):
    F = TangentField.from_expression(disk, "(x, y)")
    with pytest.raises(NonzeroIndex):
        cancel_zeros(disk, F, CancelRegion(disk.charts[0], (0.0, 0.0), 0.6))


def test_cancel_in_box_region(disk):
    F = TangentField.from_expression(disk, "(x**2 - 0.04, y)")
    G = cancel_zeros(disk, F, CancelRegion(disk.charts[0], (0.0, 0.0), (0.5, 0.3), "linf", 0.6))
    assert find_zeros(disk, G) == []


def test_clamp_examples():
    w = np.array([[0.1, 0.0, 0.0], [0.0, 0.7, 0.0], [3.0, 4.0, 0.0]])
    out = clamp_vectors(w, 0.5, 2.0)
    assert np.allclose(out, [[0.5, 0, 0], [0, 0.7, 0], [1.2, 1.6, 0]])
    with pytest.raises(ZeroNorm):
        clamp_vectors(np.zeros((1, 3)), 0.5, 2.0)


def test_clamp_norm_field(disk):
    v = clamp_norm(TangentField.from_expression(disk, "(x + 2, y)"), 1.5, 2.5)
    norms = scan_norms(disk, v, 64)
    assert norms.min() >= 1.5 - 1e-12 and norms.max() <= 2.5 + 1e-12


def test_extend_constant_datum(disk):
    g = datum(disk, "(0, 1)")
    res = extend_boundary_datum(disk, g, seed=0)
    assert res.report["certified"]
    norms = scan_norms(disk, res.field, 128)
    assert norms.min() >= g.c1 * (1 - 1e-6) and norms.max() <= g.c2 * (1 + 1e-6)
    assert find_zeros(disk, res.field) == []
    th = np.linspace(0, 6, 7)
    assert np.allclose(res.field(disk.boundary[0].point(th)), g(0, th), atol=1e-9)


def test_extend_tangent_datum_is_obstructed(disk):
    with pytest.raises(TopologicalObstruction) as info:
        extend_boundary_datum(disk, datum(disk, "(-y, x)"))
    assert info.value.exit_code == 2
    assert (info.value.ind_minus, info.value.chi) == (0, 1)


def test_extend_annulus_angular(annulus):
    res = extend_boundary_datum(annulus, datum(annulus, "(-y, x)"))
    assert res.report["certified"] and res.report["morse"]["residual"] == 0


@settings(max_examples=3)
@given(st.integers(0, 10_000), st.sampled_from(["disk", "annulus"]))
def test_random_admissible_data_extend(seed, name):
    S = get_surface(name)
    g = random_admissible_datum(S, np.random.default_rng(seed))
    assert inward_boundary_index(S, g) == S.euler_characteristic()
    res = extend_boundary_datum(S, g, seed=seed)
    assert res.report["certified"]
    assert find_zeros(S, res.field) == []


def test_interval_average_of_sine_is_closed_form():
    y = np.linspace(0, 2 * np.pi, 41)
    t = np.linspace(1e-3, 0.5, 17)
    Y, T = np.meshgrid(y, t)
    assert np.allclose(interval_average(np.sin, Y, T), np.sin(Y) * np.sin(T) / T, atol=1e-12)


def test_sobolev_estimate_converges():
    coarse, *_ = sobolev_estimate(np.sin, 0, 2 * np.pi, 0.5, 64)
    fine, *_ = sobolev_estimate(np.sin, 0, 2 * np.pi, 0.5, 256)
    assert 0.9 <= fine / coarse <= 1.1


def test_trace_space_check_flags_a_jump():
    with pytest.raises(NonIntegrableDatum):
        gagliardo_extension(lambda y: np.sign(y - np.pi), n=64)


def test_p_must_exceed_one():
    with pytest.raises(ValueError):
        gagliardo_extension(np.sin, p=1.0)
