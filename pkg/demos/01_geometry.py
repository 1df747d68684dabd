"""Load a bundled part, check it is watertight, measure it and voxelize it.

The blower surrogate is a flat slab with a central column. Its height sets
the layer count of every build it appears in.
"""

from amcost import load_mesh, mesh_volume, voxelize
from amcost.packer import compute_layers
from amcost.scenario import bundled_path

mesh = load_mesh(bundled_path("parts/blower.stl"))
print(f"{mesh.name}: {len(mesh.triangles)} triangles, closed = {mesh.is_closed()}")
print(f"extents (mm): {mesh.extents.round(3).tolist()}")
print(f"volume: {mesh_volume(mesh):.3f} cm3")

for res in (2.0, 1.0, 0.5):
    grid = voxelize(mesh, res)
    print(f"voxels at {res} mm: dims {grid.dims}, occupied volume {grid.occupied_volume:.3f} cm3")

height = float(mesh.extents[2])
print(f"layers at 0.02 mm: {compute_layers(height, 0.02)}")
