from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vmoidx.degree import (SphereMap, degree_integral, degree_preimage, homotopy_degrees,
                           winding_number)
from vmoidx.errors import VanishingOnCircle
from vmoidx.geometry import QuadratureSpec, get_surface


def unwrap_oracle(f, n=20000):
    """Independent winding count: unwrap a densely sampled angle."""
    th = np.linspace(0.0, 2 * np.pi, n + 1)
    w = f(th)
    ang = np.unwrap(np.arctan2(w[:, 1], w[:, 0]))
    return int(round((ang[-1] - ang[0]) / (2 * np.pi)))


@pytest.mark.parametrize("f,expected", [
    (lambda t: np.stack([np.cos(t), np.sin(t)], -1), 1),
    (lambda t: np.stack([np.cos(2 * t), -np.sin(2 * t)], -1), -2),
    (lambda t: np.stack([np.ones_like(t), np.zeros_like(t)], -1), 0),
])
def test_winding_examples(f, expected):
    assert winding_number(f) == expected == unwrap_oracle(f)


def test_winding_rejects_vanishing():
    with pytest.raises(VanishingOnCircle):
        winding_number(lambda t: np.stack([np.cos(t) + 1, np.sin(t)], -1))


@given(st.integers(-6, 6), st.floats(0.0, 6.3), st.floats(0.0, 0.9))
def test_winding_matches_unwrap_oracle(k, phase, wobble):
    f = lambda t: np.stack([np.cos(k * t + phase + wobble * np.sin(3 * t)),
                            np.sin(k * t + phase + wobble * np.sin(3 * t))], -1)
    assert winding_number(f) == unwrap_oracle(f) == k


@pytest.mark.parametrize("k", range(-3, 4))
def test_circle_power_degree(k):
    phi = SphereMap.power(k)
    assert degree_preimage(phi) == k
    assert degree_integral(phi) == pytest.approx(k, abs=1e-6)


def test_cubic_degree_at_p1():
    assert degree_preimage(SphereMap.power(3), np.array([1.0, 0.0])) == 3


@pytest.mark.parametrize("phi,expected", [
    (SphereMap.identity(), 1),
    (SphereMap.antipodal(), -1),
    (SphereMap.constant(), 0),
    (SphereMap.gauss_map("sphere"), 1),
    (SphereMap.gauss_map("torus"), 0),
])
def test_sphere_map_degrees(phi, expected):
    assert degree_integral(phi) == pytest.approx(expected, abs=1e-6)
    assert degree_preimage(phi, np.array([0.3, -0.2, 0.93])) == expected


def test_rotation_has_degree_one():
    c, s = np.cos(0.7), np.sin(0.7)
    R = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]])
    assert degree_preimage(SphereMap.rotation(R)) == 1


def test_gauss_map_integral_is_half_chi():
    for name in ("sphere", "torus"):
        S = get_surface(name)
        val = degree_integral(SphereMap.gauss_map(S), QuadratureSpec(256))
        assert val == pytest.approx(S.euler_characteristic() / 2, abs=1e-6)


def test_homotopy_keeps_degree_on_torus():
    T = get_surface("torus")
    w = lambda P: T.frame(P)[1]
    ts, degs = homotopy_degrees(T, w, steps=6)
    assert [round(d) for d in degs] == [0] * 7
