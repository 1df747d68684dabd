"""Compare against the machined blower and split the created value.

Cheaper manufacture is a one-off gain for the producer, while the lighter
blower saves the operator energy every year of its service life.
"""

from amcost.lifecycle import discounted_saving
from amcost.scenario import bundled_path, compare_scenario, load_scenario

scenario = load_scenario(bundled_path("blower.scenario"))
report = compare_scenario(scenario)

lo, hi = report.savings_envelope
print(f"mixed builds save {100 * lo:.1f}% to {100 * hi:.1f}% against conventional unit costs")
print(f"blower-only costing overstates the mixed cost by {100 * report.mean_overstatement:.1f}% on average")
print(f"4-blower build: {100 * report.reference_saving:.1f}% cheaper, {report.reference_delta:.2f} EUR per unit")

life = report.lifecycle
print(f"\nenergy saving {life.S_Energy:.2f} EUR/yr, worth {life.DS_Energy:.2f} EUR over {life.k} years at r = {life.r}")
print(f"manufacturer's share of the value: {100 * report.theta:.2f}%")

print("\nsensitivity of the discounted saving to the rate:")
for r in (0.0, 0.02, 0.05, 0.10):
    print(f"  r = {r:.2f}: {discounted_saving(life.S_Energy, r, life.k):8.2f} EUR")
