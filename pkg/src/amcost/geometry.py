"""Triangle meshes, STL ingest, exact volumes and voxelization.

All lengths are millimetres; volumes are reported in cm³.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

MM3_PER_CM3 = 1000.0

# area below which a triangle counts as degenerate (mm²)
_DEGENERATE_AREA = 1e-12

UNIT_SCALE = {"mm": 1.0, "cm": 10.0, "m": 1000.0, "in": 25.4}


class MeshError(ValueError):
    """Raised for unreadable, malformed or invalid mesh data."""


class OpenMeshError(MeshError):
    """Raised when an operation needs a closed mesh and the mesh has boundary edges."""


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    """Indexed triangle mesh in millimetres.

    Construction validates the data: finite coordinates, at least four
    triangles, indices in range and no zero-area triangles.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    name: str = "part"

    def __post_init__(self):
        vertices = np.array(self.vertices, dtype=float).reshape(-1, 3)
        triangles = np.array(self.triangles, dtype=np.int64).reshape(-1, 3)
        if not np.all(np.isfinite(vertices)):
            raise MeshError(f"{self.name}: non-finite vertex coordinates")
        if len(triangles) < 4:
            raise MeshError(f"{self.name}: need at least 4 triangles, got {len(triangles)}")
        if triangles.min() < 0 or triangles.max() >= len(vertices):
            raise MeshError(f"{self.name}: triangle index out of range")
        areas = _triangle_areas(vertices, triangles)
        if np.any(areas <= _DEGENERATE_AREA):
            raise MeshError(f"{self.name}: {int(np.sum(areas <= _DEGENERATE_AREA))} degenerate triangles")
        vertices.setflags(write=False)
        triangles.setflags(write=False)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "triangles", triangles)

    @classmethod
    def from_triangle_soup(cls, corners: np.ndarray, name: str = "part", decimals: int = 9) -> "TriangleMesh":
        """Build an indexed mesh from an (N, 3, 3) array of triangle corners.

        Vertices are merged after rounding to `decimals`; triangles that
        collapse to zero area in the process are dropped.
        """
        corners = np.asarray(corners, dtype=float).reshape(-1, 3, 3)
        if len(corners) == 0:
            raise MeshError(f"{name}: empty mesh")
        flat = np.round(corners.reshape(-1, 3), decimals) + 0.0  # +0.0 folds -0.0
        vertices, inverse = np.unique(flat, axis=0, return_inverse=True)
        triangles = inverse.reshape(-1, 3)
        areas = _triangle_areas(vertices, triangles)
        triangles = triangles[areas > _DEGENERATE_AREA]
        return cls(vertices, triangles, name)

    @property
    def corners(self) -> np.ndarray:
        return self.vertices[self.triangles]

    @property
    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    @property
    def extents(self) -> np.ndarray:
        lo, hi = self.bounds
        return hi - lo

    def is_closed(self) -> bool:
        """True when every edge is shared by exactly two triangles with opposite directions."""
        t = self.triangles
        directed = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        forward = {tuple(e) for e in directed.tolist()}
        if len(forward) != len(directed):
            return False
        return all((b, a) in forward for a, b in forward)

    def translated(self, offset) -> "TriangleMesh":
        return TriangleMesh(self.vertices + np.asarray(offset, dtype=float), self.triangles, self.name)

    def scaled(self, factor: float) -> "TriangleMesh":
        return TriangleMesh(self.vertices * factor, self.triangles, self.name)


def _triangle_areas(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    c = vertices[triangles]
    return 0.5 * np.linalg.norm(np.cross(c[:, 1] - c[:, 0], c[:, 2] - c[:, 0]), axis=1)


# --------------------------------------------------------------------------
# STL I/O

def load_mesh(path, unit: str = "mm", name: str | None = None) -> TriangleMesh:
    """Read a binary or ASCII STL file.

    Args:
        path: STL file path.
        unit: length unit of the file; coordinates are converted to mm.
        name: mesh name, defaults to the file stem.

    Raises:
        MeshError: unreadable file, malformed record or empty mesh.
    """
    path = Path(path)
    if unit not in UNIT_SCALE:
        raise MeshError(f"unknown unit {unit!r}; expected one of {sorted(UNIT_SCALE)}")
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise MeshError(f"cannot read {path}: {exc}") from exc
    name = name or path.stem
    if _looks_binary(data):
        corners = _parse_binary(data, path)
    else:
        corners = _parse_ascii(data, path)
    if len(corners) == 0:
        raise MeshError(f"{path}: empty mesh")
    # 0.1 µm merge grid: absorbs float32 noise from binary files
    return TriangleMesh.from_triangle_soup(corners * UNIT_SCALE[unit], name=name, decimals=4)


def _looks_binary(data: bytes) -> bool:
    if len(data) >= 84:
        (count,) = struct.unpack_from("<I", data, 80)
        if len(data) == 84 + 50 * count:
            return True
    # ASCII files start with "solid" (some binary exporters do too, hence the size test first)
    return not data.lstrip().lower().startswith(b"solid")


def _parse_binary(data: bytes, path: Path) -> np.ndarray:
    if len(data) < 84:
        raise MeshError(f"{path}: truncated binary STL header")
    (count,) = struct.unpack_from("<I", data, 80)
    if len(data) < 84 + 50 * count:
        raise MeshError(f"{path}: malformed record, header declares {count} triangles "
                        f"but only {(len(data) - 84) // 50} complete records present")
    record = np.dtype([("normal", "<f4", 3), ("v", "<f4", (3, 3)), ("attr", "<u2")])
    records = np.frombuffer(data, dtype=record, count=count, offset=84)
    return records["v"].astype(float)


def _parse_ascii(data: bytes, path: Path) -> np.ndarray:
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError as exc:
        raise MeshError(f"{path}: not a valid STL file") from exc
    tokens = text.split()
    corners: list[list[float]] = []
    facet: list[list[float]] = []
    i = 0
    n = len(tokens)
    in_facet = False
    while i < n:
        tok = tokens[i].lower()
        if tok == "facet":
            if in_facet:
                raise MeshError(f"{path}: malformed record, nested facet")
            in_facet = True
            facet = []
            i += 1
        elif tok == "vertex":
            if not in_facet:
                raise MeshError(f"{path}: malformed record, vertex outside facet")
            try:
                facet.append([float(t) for t in tokens[i + 1:i + 4]])
            except ValueError as exc:
                raise MeshError(f"{path}: malformed vertex record") from exc
            if len(facet[-1]) != 3:
                raise MeshError(f"{path}: malformed record, truncated vertex")
            i += 4
        elif tok == "endfacet":
            if not in_facet or len(facet) != 3:
                raise MeshError(f"{path}: malformed record, facet with {len(facet)} vertices")
            corners.append(facet)
            in_facet = False
            i += 1
        else:
            i += 1
    if in_facet:
        raise MeshError(f"{path}: malformed record, unterminated facet")
    return np.array(corners, dtype=float).reshape(-1, 3, 3)


def save_stl(mesh: TriangleMesh, path, binary: bool = True) -> None:
    """Write `mesh` as STL; facet normals are recomputed from the winding."""
    c = mesh.corners
    normals = np.cross(c[:, 1] - c[:, 0], c[:, 2] - c[:, 0])
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    path = Path(path)
    if binary:
        record = np.dtype([("normal", "<f4", 3), ("v", "<f4", (3, 3)), ("attr", "<u2")])
        out = np.zeros(len(c), dtype=record)
        out["normal"] = normals
        out["v"] = c
        header = mesh.name.encode("ascii", "replace")[:80].ljust(80, b" ")
        path.write_bytes(header + struct.pack("<I", len(c)) + out.tobytes())
        return
    lines = [f"solid {mesh.name}"]
    for nrm, tri in zip(normals, c):
        lines.append(f"  facet normal {nrm[0]:.9g} {nrm[1]:.9g} {nrm[2]:.9g}")
        lines.append("    outer loop")
        lines.extend(f"      vertex {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}" for v in tri)
        lines.append("    endloop")
        lines.append("  endfacet")
    lines.append(f"endsolid {mesh.name}")
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


# --------------------------------------------------------------------------
# measures

def mesh_volume(mesh: TriangleMesh) -> float:
    """Enclosed volume in cm³ from the signed-tetrahedron sum.

    Raises:
        OpenMeshError: if the mesh has boundary or non-manifold edges.
    """
    if not mesh.is_closed():
        raise OpenMeshError(f"{mesh.name}: mesh is not closed; volume undefined")
    c = mesh.corners
    # shift to the centroid to keep the sum well conditioned far from the origin
    c = c - mesh.vertices.mean(axis=0)
    signed = np.einsum("ij,ij->i", c[:, 0], np.cross(c[:, 1], c[:, 2])).sum() / 6.0
    return float(signed) / MM3_PER_CM3


def part_height(mesh: TriangleMesh) -> float:
    """Extent along the build (z) axis in mm."""
    return float(mesh.extents[2])


# --------------------------------------------------------------------------
# voxelization

@dataclass(frozen=True, eq=False)
class VoxelGrid:
    resolution: float
    origin: np.ndarray
    occupancy: np.ndarray = field(repr=False)

    @property
    def dims(self) -> tuple[int, int, int]:
        return tuple(int(d) for d in self.occupancy.shape)

    @property
    def occupied_count(self) -> int:
        return int(np.count_nonzero(self.occupancy))

    @property
    def occupied_volume(self) -> float:
        """Occupied volume in cm³."""
        return self.occupied_count * self.resolution ** 3 / MM3_PER_CM3

    def footprint(self) -> np.ndarray:
        """Plate projection as an (nx, ny) boolean mask."""
        return self.occupancy.any(axis=2)


class VoxelizationError(ValueError):
    pass


def voxelize(mesh: TriangleMesh, resolution: float = 1.0) -> VoxelGrid:
    """Rasterize a closed mesh onto a regular grid anchored at its bounding-box minimum.

    A voxel is occupied iff its centre is inside the mesh, decided by casting
    a ray along +z through every (x, y) column of centres and toggling parity
    at each crossing. Points on shared edges are assigned to exactly one of
    the triangles (top-left rule), so coincident edges are never double
    counted.
    """
    if not resolution > 0:
        raise VoxelizationError(f"resolution must be positive, got {resolution}")
    if not mesh.is_closed():
        raise OpenMeshError(f"{mesh.name}: cannot voxelize an open mesh")
    lo, hi = mesh.bounds
    # voxels whose centres fall outside the bounding box can never be occupied
    dims = np.floor((hi - lo) / resolution + 0.5).astype(int)
    if np.any(dims <= 0):
        raise VoxelizationError(f"{mesh.name}: resolution {resolution} mm collapses grid dims to {dims.tolist()}")
    nx, ny, nz = (int(d) for d in dims)
    xs = lo[0] + (np.arange(nx) + 0.5) * resolution
    ys = lo[1] + (np.arange(ny) + 0.5) * resolution

    toggles = np.zeros((nx, ny, nz + 1), dtype=np.int32)
    c = mesh.corners
    for tri in c:
        a, b, d = tri[0], tri[1], tri[2]
        area2 = (b[0] - a[0]) * (d[1] - a[1]) - (b[1] - a[1]) * (d[0] - a[0])
        if area2 == 0.0:
            continue  # vertical in projection: never crossed by a z ray
        i0 = np.searchsorted(xs, min(a[0], b[0], d[0]), side="left")
        i1 = np.searchsorted(xs, max(a[0], b[0], d[0]), side="right")
        j0 = np.searchsorted(ys, min(a[1], b[1], d[1]), side="left")
        j1 = np.searchsorted(ys, max(a[1], b[1], d[1]), side="right")
        if i0 >= i1 or j0 >= j1:
            continue
        px, py = np.meshgrid(xs[i0:i1], ys[j0:j1], indexing="ij")
        inside = np.ones(px.shape, dtype=bool)
        ccw = area2 > 0
        for p, q in ((a, b), (b, d), (d, a)):
            inside &= _edge_test(p, q, px, py, ccw)
        if not inside.any():
            continue
        # z of the triangle plane at each covered centre (barycentric)
        l1 = ((px - a[0]) * (d[1] - a[1]) - (py - a[1]) * (d[0] - a[0])) / area2
        l2 = ((b[0] - a[0]) * (py - a[1]) - (b[1] - a[1]) * (px - a[0])) / area2
        z = a[2] + l1 * (b[2] - a[2]) + l2 * (d[2] - a[2])
        # first centre strictly above the crossing
        k = np.floor((z - lo[2]) / resolution + 0.5).astype(int)
        k = np.clip(k, 0, nz)
        ii, jj = np.nonzero(inside)
        np.add.at(toggles, (ii + i0, jj + j0, k[ii, jj]), 1)
    occupancy = (np.cumsum(toggles, axis=2)[:, :, :nz] % 2).astype(bool)
    occupancy.setflags(write=False)
    return VoxelGrid(float(resolution), lo.copy(), occupancy)


def _edge_test(p, q, px, py, ccw: bool) -> np.ndarray:
    # Evaluate the edge function with the endpoints in canonical (lexicographic)
    # order so two triangles sharing an edge get exactly opposite values.
    flip = (p[0], p[1]) > (q[0], q[1])
    s, t = (q, p) if flip else (p, q)
    dx, dy = t[0] - s[0], t[1] - s[1]
    w = dx * (py - s[1]) - dy * (px - s[0])
    # orient so that the triangle interior is on the positive side
    if flip == ccw:
        w = -w
        owns_ties = not (dy < 0 or (dy == 0 and dx < 0))
    else:
        owns_ties = dy < 0 or (dy == 0 and dx < 0)
    return (w > 0) | ((w == 0) & owns_ties)


# --------------------------------------------------------------------------
# parts

Role = Literal["required", "reference"]


@dataclass(frozen=True, eq=False)
class PartSpec:
    """A part to be packed: geometry plus its deposited volume (part and supports)."""

    mesh: TriangleMesh
    deposited_volume: float
    role: Role = "required"

    def __post_init__(self):
        if not self.deposited_volume > 0:
            raise ValueError(f"{self.mesh.name}: deposited_volume must be > 0")
        if self.role not in ("required", "reference"):
            raise ValueError(f"{self.mesh.name}: role must be 'required' or 'reference'")

    @classmethod
    def from_mesh(cls, mesh: TriangleMesh, role: Role = "required", deposited_volume: float | None = None) -> "PartSpec":
        volume = mesh_volume(mesh) if deposited_volume is None else deposited_volume
        return cls(mesh, volume, role)

    @property
    def name(self) -> str:
        return self.mesh.name

    @property
    def footprint(self) -> tuple[float, float]:
        """(x, y) bounding-box size in mm."""
        ext = self.mesh.extents
        return float(ext[0]), float(ext[1])

    @property
    def height(self) -> float:
        return part_height(self.mesh)
