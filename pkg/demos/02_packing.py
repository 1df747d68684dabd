"""Fill the default 250 x 250 mm plate.

A blower-only build stops at 20 copies. A mixed build places the requested
blowers, one of each reference part, then tops up the plate with the basket.
"""

from collections import Counter

from amcost.packer import BuildVolume, occupancy_grid, pack_mixed, pack_single
from amcost.surrogates import blower_part, reference_basket

bv = BuildVolume()
blower = blower_part()

single = pack_single(blower, 25, bv)
print(f"single: asked 25, placed {len(single.instances)} (truncated = {single.truncated})")
print(f"  V_Build {single.V_Build:.2f} cm3, {single.n_layers} layers")

mixed = pack_mixed([(blower, 4)], reference_basket(), bv)
print("mixed with 4 blowers:")
for name, n in sorted(Counter(i.part.name for i in mixed.instances).items()):
    print(f"  {name:8s} x {n}")
print(f"  V_Build {mixed.V_Build:.2f} cm3, blower share v = {blower.deposited_volume / mixed.V_Build:.4f}")

grid = occupancy_grid(mixed, bv)
print(f"max voxel occupancy {grid.max()} (1 means no overlaps)")
mixed.write_manifest("mixed_manifest.json")
print("manifest written to mixed_manifest.json")
