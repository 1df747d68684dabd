"""Cost sweeps over blower count, with and without filler parts.

Fixture mode replays the published build volumes and times. Packed mode
derives them from the surrogate geometry and the calibrated time model.
"""

from amcost.costing import breakdown
from amcost.scenario import bundled_path, load_scenario, run_sweep

scenario = load_scenario(bundled_path("blower.scenario"))
cal = scenario.calibration
print(f"time model: t_layer {cal.params.t_layer:.2f} s, melt rate {cal.params.melt_rate:.2f} cm3/h, "
      f"max residual {100 * cal.max_relative_residual:.2f}%")

print("\ncount  fixture-single  packed-single  fixture-mixed")
fixture = {(r.mode, r.count): r for r in run_sweep(scenario, "fixture")}
packed = {r.count: r for r in run_sweep(scenario, "single")}
for n in (1, 2, 4, 8, 13, 20):
    mixed = fixture.get(("mixed", n))
    print(f"{n:5d}  {fixture[('single', n)].C_Total:14.2f}  {packed[n].C_Total:13.2f}  "
          f"{mixed.C_Total if mixed else float('nan'):13.2f}")

row = fixture[("mixed", 4)]
bd = breakdown(row.v, row.V_Build, row.T_Build, scenario.profile, scenario.failure, scenario.n_layers)
print(f"\nwhere the {bd.C_Total:.2f} EUR of a blower in the 4-blower mixed build goes:")
for name, share in sorted(bd.shares.items(), key=lambda kv: -kv[1]):
    print(f"  {name:20s} {100 * share:5.1f}%")
