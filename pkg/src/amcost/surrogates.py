"""Constructed stand-in geometries for the blower and the reference basket.

The real part geometries are not available, so these closed meshes are
built with analytic volumes and heights:

* the blower surrogate is a 50 x 40 x 2 mm base slab carrying a centred
  10 mm wide column; its volume is exactly 8.403 cm³ and its height
  33.88 mm, and its 50 x 40 mm footprint tiles a 250 x 250 mm plate with
  5 mm clearance as a 4 x 5 lattice;
* four reference parts, all lower than the blower, with distinct volumes
  and footprints.
"""

from __future__ import annotations

import numpy as np

from .geometry import PartSpec, TriangleMesh

BLOWER_VOLUME_CM3 = 8.403
BLOWER_HEIGHT_MM = 33.88

_BASE = (50.0, 40.0, 2.0)
_COLUMN_WIDTH = 10.0
# column depth chosen so that slab + column enclose exactly BLOWER_VOLUME_CM3
_COLUMN_DEPTH = (BLOWER_VOLUME_CM3 * 1000.0 - _BASE[0] * _BASE[1] * _BASE[2]) / (
    _COLUMN_WIDTH * (BLOWER_HEIGHT_MM - _BASE[2]))


def _box_corners(lo, hi) -> np.ndarray:
    x0, y0, z0 = lo
    x1, y1, z1 = hi
    v = np.array([
        [x0, y0, z0], [x1, y0, z0], [x1, y1, z0], [x0, y1, z0],
        [x0, y0, z1], [x1, y0, z1], [x1, y1, z1], [x0, y1, z1],
    ], dtype=float)
    # outward winding
    faces = [
        (0, 2, 1), (0, 3, 2),  # bottom
        (4, 5, 6), (4, 6, 7),  # top
        (0, 1, 5), (0, 5, 4),  # y0
        (2, 3, 7), (2, 7, 6),  # y1
        (1, 2, 6), (1, 6, 5),  # x1
        (3, 0, 4), (3, 4, 7),  # x0
    ]
    return v[np.array(faces)]


def box_mesh(size, origin=(0.0, 0.0, 0.0), name: str = "box") -> TriangleMesh:
    """Axis-aligned box of `size` (mm) with its minimum corner at `origin`."""
    lo = np.asarray(origin, dtype=float)
    return TriangleMesh.from_triangle_soup(_box_corners(lo, lo + np.asarray(size, dtype=float)), name=name)


def prism_mesh(radius: float, height: float, sides: int = 8, name: str = "prism") -> TriangleMesh:
    """Regular `sides`-gon prism circumscribed by `radius`, standing on z = 0 with its bbox at the origin."""
    if sides < 3:
        raise ValueError("a prism needs at least 3 sides")
    ang = 2 * np.pi * np.arange(sides) / sides
    ring = np.column_stack([radius * np.cos(ang), radius * np.sin(ang)])
    ring -= ring.min(axis=0)
    bottom = np.column_stack([ring, np.zeros(sides)])
    top = np.column_stack([ring, np.full(sides, float(height))])
    tris = []
    for i in range(1, sides - 1):
        tris.append([bottom[0], bottom[i + 1], bottom[i]])
        tris.append([top[0], top[i], top[i + 1]])
    for i in range(sides):
        j = (i + 1) % sides
        tris.append([bottom[i], bottom[j], top[j]])
        tris.append([bottom[i], top[j], top[i]])
    return TriangleMesh.from_triangle_soup(np.array(tris), name=name)


def combine(meshes, name: str) -> TriangleMesh:
    """Concatenate closed shells into one mesh (touching shells keep their own faces)."""
    corners = np.concatenate([m.corners for m in meshes])
    return TriangleMesh.from_triangle_soup(corners, name=name)


def blower_mesh() -> TriangleMesh:
    bx, by, bz = _BASE
    slab = box_mesh(_BASE, name="slab")
    column = box_mesh(
        (_COLUMN_WIDTH, _COLUMN_DEPTH, BLOWER_HEIGHT_MM - bz),
        origin=((bx - _COLUMN_WIDTH) / 2, (by - _COLUMN_DEPTH) / 2, bz),
        name="column",
    )
    return combine([slab, column], name="blower")


def reference_meshes() -> list[TriangleMesh]:
    """The four reference-basket stand-ins (housing, flange, bracket, pin)."""
    housing = box_mesh((60.0, 45.0, 20.0), name="housing")
    flange = prism_mesh(20.0, 12.0, sides=8, name="flange")
    bracket = combine([
        box_mesh((40.0, 30.0, 4.0), name="bracket_base"),
        box_mesh((4.0, 26.0, 21.0), origin=(2.0, 2.0, 4.0), name="bracket_web"),
    ], name="bracket")
    pin = box_mesh((15.0, 15.0, 30.0), name="pin")
    return [housing, flange, bracket, pin]


def blower_part() -> PartSpec:
    return PartSpec.from_mesh(blower_mesh(), role="required")


def reference_basket() -> list[PartSpec]:
    return [PartSpec.from_mesh(m, role="reference") for m in reference_meshes()]
