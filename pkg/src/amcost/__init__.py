"""Capacity-aware cost estimation for powder-bed additive manufacturing.

Packs a machine build volume with required and filler parts, estimates
build time, prices units with an expected cost of build failure and
compares the result with a conventional route, use phase included.
"""

from .costing import (CostBreakdown, FailureModel, ProcessProfile, breakdown, build_cost, default_profile,
                      failure_multiplier, specific_cost, survival_probability, total_unit_cost, unit_cost,
                      volume_fraction)
from .geometry import (MeshError, OpenMeshError, PartSpec, TriangleMesh, VoxelGrid, load_mesh, mesh_volume,
                       part_height, save_stl, voxelize)
from .lifecycle import UsePhaseScenario, annual_energy_saving, discounted_saving, value_share
from .packer import BuildVolume, PackedBuild, PackingError, PartInstance, compute_layers, pack_mixed, pack_single
from .scenario import (ComparisonReport, ConventionalCostRecord, Scenario, ScenarioError, SweepRow, compare,
                       emit_report, load_scenario, run_sweep)
from .timemodel import CalibrationError, TimeModelParams, calibrate, estimate_build_time

__version__ = "0.1.0"
