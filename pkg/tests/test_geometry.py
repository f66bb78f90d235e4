from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vmoidx.errors import BoundaryPresent, ConfigError, EpsTooLarge
from vmoidx.geometry import (QuadratureSpec, ball_nodes, gauss_bonnet_chi, get_surface,
                             load_surface, tangent_project)


@pytest.mark.parametrize("name,chi", [("sphere", 2), ("torus", 0), ("disk", 1), ("annulus", 0)])
def test_euler_characteristic(name, chi):
    assert get_surface(name).euler_characteristic() == chi


@pytest.mark.parametrize("name,chi", [("sphere", 2.0), ("torus", 0.0), ("sphere:3", 2.0)])
def test_curvature_integral_recovers_chi(name, chi):
    assert gauss_bonnet_chi(name, QuadratureSpec(256)) == pytest.approx(chi, abs=1e-6)


def test_curvature_integral_needs_closed_surface():
    with pytest.raises(BoundaryPresent):
        gauss_bonnet_chi("disk")


def test_torus_curvature_matches_closed_form(torus):
    # K = cos(phi) / (r (R + r cos(phi))) on the torus of revolution
    chart = torus.quadrature_chart
    uv = np.array([[0.3, 0.7], [1.1, 2.5], [4.0, 5.9]])
    P = chart.embed(uv)
    rho = np.hypot(P[:, 0], P[:, 1])
    cos_tube = (rho - 2.0) / 1.0
    assert np.allclose(chart.gaussian_curvature(uv), cos_tube / (1.0 * rho), atol=1e-10)


def test_tangent_projection_examples(sphere):
    n = np.array([[0.0, 0.0, 1.0]])
    assert np.allclose(tangent_project(sphere, n, n), 0.0)
    assert np.allclose(tangent_project(sphere, n, [[1.0, 0.0, 1.0]]), [[1.0, 0.0, 0.0]])
    w = np.array([[0.3, -0.2, 0.0]])
    assert np.allclose(tangent_project(sphere, n, w), w)


unit = st.floats(-1.0, 1.0, allow_nan=False)


@given(unit, unit, unit, unit, unit, unit)
def test_projection_is_idempotent_and_tangent(a, b, c, p, q, r):
    S = get_surface("sphere")
    x = np.array([[a, b, c + 1.5]])
    x /= np.linalg.norm(x)
    w = np.array([[p, q, r]])
    t = tangent_project(S, x, w)
    assert np.allclose(tangent_project(S, x, t), t, atol=1e-12)
    assert abs(float(t[0] @ x[0])) < 1e-12


def test_flat_ball_weights(disk):
    _, w = ball_nodes(disk, np.array([[0.0, 0.0, 0.0]]), 0.1)
    assert w.sum() == pytest.approx(np.pi * 0.01, abs=1e-8)


def test_sphere_ball_area_tends_to_flat(sphere):
    x = np.array([[0.0, 0.6, 0.8]])
    ratios = [ball_nodes(sphere, x, e)[1].sum() / (np.pi * e * e) for e in (0.2, 0.1, 0.05)]
    errs = np.abs(np.array(ratios) - 1)
    assert errs[-1] < 1e-3 and errs[-1] < errs[0]


def test_ball_near_boundary_is_rejected(disk):
    with pytest.raises(EpsTooLarge):
        ball_nodes(disk, np.array([[0.9, 0.0, 0.0]]), 0.1, interior=True)
    with pytest.raises(EpsTooLarge):
        ball_nodes(disk, np.array([[0.0, 0.0, 0.0]]), 1.0)


def test_collar_coordinates_round_trip(annulus):
    for k in range(2):
        th = np.linspace(0, 6, 7)
        P = annulus.collar_point(k, th, 0.05)
        kk, t2, s2 = annulus.boundary_coordinates(P)
        assert np.all(kk == k)
        assert np.allclose(s2, 0.05, atol=1e-12)
        assert np.allclose(np.mod(t2 - th + np.pi, 2 * np.pi) - np.pi, 0.0, atol=1e-12)


def test_unknown_surface_is_config_error():
    with pytest.raises(ConfigError):
        get_surface("klein-bottle")


def test_parametric_surface_from_config(tmp_path):
    cfg = tmp_path / "sphere.cfg"
    cfg.write_text("# unit sphere by latitude and longitude\n"
                   "x = cos(u) * cos(v)\ny = sin(u) * cos(v)\nz = sin(v)\n"
                   "u_min = 0\nu_max = 2*pi\nv_min = -1.5\nv_max = 1.5\n"
                   "periodic_u = true\ngenus = 0\n", encoding="utf-8")
    S = load_surface(str(cfg))
    assert S.euler_characteristic() == 2
    uv = np.array([[0.4, 0.2]])
    assert np.allclose(np.linalg.norm(S.charts[0].embed(uv), axis=-1), 1.0)
