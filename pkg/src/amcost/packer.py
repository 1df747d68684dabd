"""Build-plate packing of required and filler parts.

Parts keep their build orientation and sit directly on the plate (no
stacking), so packing is a 2D problem over each part's projected voxel
footprint. Placement is bottom-left first fit on a lattice whose pitch is
the voxel resolution: the first free lattice cell in (y, x) order wins.
Spacing is enforced by dilating every placed footprint (and the plate
border) by ``ceil(spacing / pitch)`` cells.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np
from scipy import ndimage, signal

from .geometry import PartSpec, VoxelGrid, voxelize

DEFAULT_LAYER_THICKNESS = 0.02  # mm
DEFAULT_RESOLUTION = 1.0  # mm


class PackingError(ValueError):
    """Raised when a required part cannot be placed."""


@dataclass(frozen=True)
class BuildVolume:
    """Machine envelope in mm; `spacing` is the minimum clearance between parts and to the walls."""

    x: float = 250.0
    y: float = 250.0
    z: float = 215.0
    spacing: float = 5.0

    def __post_init__(self):
        for name in ("x", "y", "z"):
            if not getattr(self, name) > 0:
                raise ValueError(f"build volume {name} must be > 0")
        if self.spacing < 0:
            raise ValueError("spacing must be >= 0")


@dataclass(frozen=True)
class PartInstance:
    part: PartSpec
    position: tuple[float, float]  # plate position of the part's bbox minimum, mm


@dataclass(frozen=True)
class PackedBuild:
    instances: tuple[PartInstance, ...]
    mode: Literal["single", "mixed"]
    layer_thickness: float = DEFAULT_LAYER_THICKNESS
    resolution: float = DEFAULT_RESOLUTION
    requested: int = 0
    truncated: bool = False

    @property
    def V_Build(self) -> float:
        """Total deposited volume in cm³."""
        return math.fsum(inst.part.deposited_volume for inst in self.instances)

    @property
    def height(self) -> float:
        return max((inst.part.height for inst in self.instances), default=0.0)

    @property
    def n_layers(self) -> int:
        return compute_layers(self.height, self.layer_thickness)

    def count(self, name: str) -> int:
        return sum(1 for inst in self.instances if inst.part.name == name)

    def volume_fractions(self) -> np.ndarray:
        """Per-instance share of V_Build, in instance order."""
        vols = np.array([inst.part.deposited_volume for inst in self.instances])
        return vols / self.V_Build

    def manifest(self) -> dict:
        return {
            "mode": self.mode,
            "instances": [
                {
                    "part": inst.part.name,
                    "role": inst.part.role,
                    "x_mm": round(inst.position[0], 6),
                    "y_mm": round(inst.position[1], 6),
                    "deposited_volume_cm3": round(inst.part.deposited_volume, 6),
                }
                for inst in self.instances
            ],
            "totals": {
                "instances": len(self.instances),
                "requested": self.requested,
                "truncated": self.truncated,
                "V_build_cm3": round(self.V_Build, 6),
                "height_mm": round(self.height, 6),
                "layer_thickness_mm": self.layer_thickness,
                "n_layers": self.n_layers,
            },
        }

    def write_manifest(self, path) -> None:
        Path(path).write_text(json.dumps(self.manifest(), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def compute_layers(height: float, layer_thickness: float = DEFAULT_LAYER_THICKNESS) -> int:
    """Number of layers needed to reach `height`, i.e. ceil(height / layer_thickness)."""
    if not layer_thickness > 0:
        raise ValueError(f"layer thickness must be > 0, got {layer_thickness}")
    if height < 0:
        raise ValueError(f"height must be >= 0, got {height}")
    ratio = height / layer_thickness
    # 33.88 / 0.02 evaluates to 1694.0000000000002 in binary floating point
    return int(math.ceil(ratio - 1e-9 * max(1.0, ratio)))


class _Plate:
    """Occupancy raster of the plate plus per-part feasible-position maps."""

    def __init__(self, bv: BuildVolume, pitch: float):
        self.bv = bv
        self.pitch = pitch
        self.nx = int(math.floor(bv.x / pitch + 1e-9))
        self.ny = int(math.floor(bv.y / pitch + 1e-9))
        self.gap = int(math.ceil(bv.spacing / pitch - 1e-9))
        # raster indexed [iy, ix] so that C-order scanning is bottom-left
        self.blocked = np.zeros((self.ny, self.nx), dtype=bool)
        g = self.gap
        if g:
            self.blocked[:g, :] = True
            self.blocked[-g:, :] = True
            self.blocked[:, :g] = True
            self.blocked[:, -g:] = True
        self._voxels: dict[int, VoxelGrid] = {}
        self._masks: dict[int, np.ndarray] = {}
        self._feasible: dict[int, np.ndarray] = {}
        self.instances: list[PartInstance] = []

    def voxels(self, part: PartSpec) -> VoxelGrid:
        key = id(part)
        if key not in self._voxels:
            self._voxels[key] = voxelize(part.mesh, self.pitch)
        return self._voxels[key]

    def mask(self, part: PartSpec) -> np.ndarray:
        key = id(part)
        if key not in self._masks:
            self._masks[key] = self.voxels(part).footprint().T.copy()  # -> [iy, ix]
        return self._masks[key]

    def feasible(self, part: PartSpec) -> np.ndarray:
        key = id(part)
        if key not in self._feasible:
            self._feasible[key] = self._initial_feasible(part)
        return self._feasible[key]

    def _initial_feasible(self, part: PartSpec) -> np.ndarray:
        m = self.mask(part)
        mh, mw = m.shape
        if mh > self.ny or mw > self.nx or part.height > self.bv.z:
            return np.zeros((0, 0), dtype=bool)
        hits = signal.correlate(self.blocked.astype(float), m.astype(float), mode="valid", method="fft")
        free = hits < 0.5
        # the true bounding box, not just the voxel mask, must stay on the plate
        ext_x, ext_y = part.footprint
        max_ix = int(math.floor((self.bv.x - ext_x) / self.pitch + 1e-9))
        max_iy = int(math.floor((self.bv.y - ext_y) / self.pitch + 1e-9))
        free[max_iy + 1:, :] = False
        free[:, max_ix + 1:] = False
        return free

    def try_place(self, part: PartSpec) -> PartInstance | None:
        free = self.feasible(part)
        hit = np.flatnonzero(free)
        if hit.size == 0:
            return None
        iy, ix = divmod(int(hit[0]), free.shape[1])
        self._commit(part, iy, ix)
        inst = PartInstance(part, (ix * self.pitch, iy * self.pitch))
        self.instances.append(inst)
        return inst

    def _commit(self, part: PartSpec, iy: int, ix: int) -> None:
        m = self.mask(part)
        g = self.gap
        grown = ndimage.binary_dilation(np.pad(m, g), structure=np.ones((2 * g + 1, 2 * g + 1), bool)) if g else m
        oy, ox = iy - g, ix - g
        y0, x0 = max(oy, 0), max(ox, 0)
        y1, x1 = min(oy + grown.shape[0], self.ny), min(ox + grown.shape[1], self.nx)
        region = grown[y0 - oy:y1 - oy, x0 - ox:x1 - ox]
        self.blocked[y0:y1, x0:x1] |= region
        # positions of every tracked part that now collide with the new region
        for key, free in self._feasible.items():
            if free.size == 0:
                continue
            other = self._masks[key]
            hits = signal.correlate(region.astype(float), other.astype(float), mode="full") > 0.5
            # hits[a, b] corresponds to placing `other` at (y0 - mh + 1 + a, x0 - mw + 1 + b)
            py0 = y0 - other.shape[0] + 1
            px0 = x0 - other.shape[1] + 1
            a0, b0 = max(0, -py0), max(0, -px0)
            a1 = min(hits.shape[0], free.shape[0] - py0)
            b1 = min(hits.shape[1], free.shape[1] - px0)
            if a0 < a1 and b0 < b1:
                free[py0 + a0:py0 + a1, px0 + b0:px0 + b1] &= ~hits[a0:a1, b0:b1]


def pack_single(part: PartSpec, quantity: int, bv: BuildVolume | None = None,
                layer_thickness: float = DEFAULT_LAYER_THICKNESS,
                resolution: float = DEFAULT_RESOLUTION) -> PackedBuild:
    """Place up to `quantity` copies of one part; `truncated` is set if fewer fit.

    Raises:
        PackingError: if not even one copy fits the build volume.
    """
    if quantity < 1:
        raise ValueError("quantity must be >= 1")
    bv = bv or BuildVolume()
    plate = _Plate(bv, resolution)
    for _ in range(quantity):
        if plate.try_place(part) is None:
            break
    if not plate.instances:
        raise PackingError(f"{part.name}: footprint {part.footprint} mm does not fit the build volume")
    return PackedBuild(tuple(plate.instances), "single", layer_thickness, resolution,
                       requested=quantity, truncated=len(plate.instances) < quantity)


def fill_order(basket: Sequence[PartSpec], resolution: float = DEFAULT_RESOLUTION) -> list[PartSpec]:
    """Basket parts by descending footprint area, ties broken by name."""
    def area(p: PartSpec) -> float:
        return float(np.count_nonzero(voxelize(p.mesh, resolution).footprint())) * resolution ** 2
    return sorted(basket, key=lambda p: (-area(p), p.name))


def pack_mixed(required: Sequence[tuple[PartSpec, int]], basket: Sequence[PartSpec],
               bv: BuildVolume | None = None,
               layer_thickness: float = DEFAULT_LAYER_THICKNESS,
               resolution: float = DEFAULT_RESOLUTION) -> PackedBuild:
    """Compose a mixed build.

    Required instances go first, in the given order; then one copy of every
    basket part; then the basket is cycled round-robin (descending footprint
    area, ties by name) until no basket part fits anywhere.

    Raises:
        PackingError: naming the first required or basket part that cannot be placed.
    """
    if not basket:
        raise ValueError("basket must not be empty")
    bv = bv or BuildVolume()
    plate = _Plate(bv, resolution)
    requested = 0
    for part, count in required:
        if count < 0:
            raise ValueError(f"{part.name}: negative count")
        requested += count
        for k in range(count):
            if plate.try_place(part) is None:
                raise PackingError(f"required part {part.name!r} instance {k + 1} of {count} cannot be placed")
    order = fill_order(basket, resolution)
    for part in order:
        if plate.try_place(part) is None:
            raise PackingError(f"reference part {part.name!r} does not fit after the required parts")
    active = list(order)
    while active:
        active = [part for part in active if plate.try_place(part) is not None]
    return PackedBuild(tuple(plate.instances), "mixed", layer_thickness, resolution, requested=requested)


def occupancy_grid(build: PackedBuild, bv: BuildVolume | None = None) -> np.ndarray:
    """Per-voxel instance count on a plate-wide grid at the build's resolution."""
    bv = bv or BuildVolume()
    r = build.resolution
    nx = int(math.ceil(bv.x / r - 1e-9))
    ny = int(math.ceil(bv.y / r - 1e-9))
    cache: dict[int, VoxelGrid] = {}
    nz = 1
    for inst in build.instances:
        if id(inst.part) not in cache:
            cache[id(inst.part)] = voxelize(inst.part.mesh, r)
        nz = max(nz, cache[id(inst.part)].dims[2])
    counts = np.zeros((nx, ny, nz), dtype=np.int32)
    for inst in build.instances:
        occ = cache[id(inst.part)].occupancy
        ix = int(round(inst.position[0] / r))
        iy = int(round(inst.position[1] / r))
        dx, dy, dz = occ.shape
        counts[ix:ix + dx, iy:iy + dy, :dz] += occ
    return counts
