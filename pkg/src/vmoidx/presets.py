"""Named example fields, boundary data and line fields.

Every preset is a small record naming the surface and how to build the object.
The figure-style names reproduce the classical planar and toroidal examples:

``figure1-a``  constant field ``(0, 1)`` on the unit disk; ind 0, inward index 1
``figure1-b``  rotation ``(-y, x)`` on the unit disk; ind 1, inward index 0
``figure1-c``  saddle ``(y, x)`` on the unit disk; ind -1, inward index 2
``figure2-n0`` director ``cos(phi/2) e_theta + sin(phi/2) e_phi`` on the torus
``figure2-n1`` director ``cos(3 phi/2) e_theta + sin(3 phi/2) e_phi`` on the torus
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .fields import BoundaryDatum, TangentField
from .geometry import get_surface
from .qtensor import LineField, torus_figure_field


@dataclass(frozen=True)
class Preset:
    name: str
    kind: str
    surface: str
    description: str
    field: str | None = None
    datum: str | None = None


def _point_singular(P):
    # bounded rotation field (-y, x) / |x|; the value at the origin is irrelevant
    r = np.hypot(P[..., 0], P[..., 1])
    safe = np.where(r > 0, r, 1.0)
    out = np.stack([-P[..., 1] / safe, P[..., 0] / safe, np.zeros_like(r)], -1)
    return np.where((r > 0)[..., None], out, 0.0)


def _half_defect(sign):
    # director at angle sign * theta / 2, shrinking linearly to the core
    def director(P):
        th = np.arctan2(P[..., 1], P[..., 0])
        r = np.hypot(P[..., 0], P[..., 1])
        return r[..., None] * np.stack([np.cos(th / 2), sign * np.sin(th / 2),
                                        np.zeros_like(th)], -1)
    return director


PRESETS = {p.name: p for p in [
    Preset("figure1-a", "field", "disk", "constant field (0, 1)", "(0, 1)"),
    Preset("figure1-b", "field", "disk", "rotation field (-y, x)", "(-y, x)"),
    Preset("figure1-c", "field", "disk", "saddle field (y, x)", "(y, x)"),
    Preset("radial", "field", "disk", "outward radial field (x, y)", "(x, y)"),
    Preset("sphere-rotation", "field", "sphere", "rotation about the z axis", "(-y, x, 0)"),
    Preset("torus-coordinate", "field", "torus",
           "rotation about the symmetry axis, nowhere zero", "(-y, x, 0)"),
    Preset("annulus-angular", "field", "annulus", "angular field (-y, x)", "(-y, x)"),
    Preset("vmo-figure1-c", "vmo", "disk", "saddle field read as a VMO field", "(y, x)"),
    Preset("vmo-point-singular", "vmo", "disk",
           "bounded field (-y, x)/|x| with a point singularity at 0", None, "(-y, x)"),
    Preset("vmo-torus", "vmo", "torus", "nowhere-vanishing twisted rotation field",
           "(-y, x, z)"),
    Preset("extend-figure1-a", "extend", "disk", "boundary datum (0, 1)", None, "(0, 1)"),
    Preset("extend-figure1-b", "extend", "disk", "tangent boundary datum (-y, x)", None,
           "(-y, x)"),
    Preset("extend-annulus-angular", "extend", "annulus", "angular datum on both circles",
           None, "(-y, x)"),
    Preset("figure2-n0", "linefield", "torus", "half-twist director field, i = 0"),
    Preset("figure2-n1", "linefield", "torus", "half-twist director field, i = 1"),
    Preset("torus-meridian", "linefield", "torus", "orientable director e_theta"),
    Preset("sphere-rotation-lines", "linefield", "sphere", "line field of the rotation field"),
    Preset("planar-half", "linefield", "disk", "director angle theta/2, index +1/2"),
    Preset("planar-minus-half", "linefield", "disk", "director angle -theta/2, index -1/2"),
]}


def get_preset(name):
    key = str(name).strip().lower()
    if key not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; known: {sorted(PRESETS)}")
    return PRESETS[key]


def preset_field(name):
    p = get_preset(name)
    S = get_surface(p.surface)
    if p.name == "vmo-point-singular":
        return TangentField(S, _point_singular, "(-y,x)/|x|")
    if p.field is None:
        raise ConfigError(f"preset {name!r} has no field")
    return TangentField.from_expression(S, p.field, p.name)


def preset_datum(name):
    p = get_preset(name)
    S = get_surface(p.surface)
    if p.datum is not None:
        return BoundaryDatum.from_expression(S, p.datum, p.name)
    return BoundaryDatum.from_field(preset_field(name))


def preset_linefield(name):
    p = get_preset(name)
    if p.kind != "linefield":
        raise ConfigError(f"preset {name!r} is not a line field")
    S = get_surface(p.surface)
    if p.name in ("figure2-n0", "figure2-n1"):
        director = torus_figure_field(S, int(p.name[-1]))
    elif p.name == "torus-meridian":
        director = lambda P: S.frame(P)[0]
    elif p.name == "sphere-rotation-lines":
        rot = lambda P: np.stack([-P[..., 1], P[..., 0], np.zeros(P.shape[:-1])], -1)
        return LineField.from_director(S, rot, name=p.name, melt=True)
    else:
        sign = 1.0 if p.name == "planar-half" else -1.0
        return LineField.from_director(S, _half_defect(sign), name=p.name, melt=True)
    return LineField.from_director(S, director, name=p.name)
