"""Activity-based AM cost model with an expected cost of build failure.

Build cost::

    C_Build = P_Material * V_Build + C_SetupLabour + (Cdot_Indirect + Cdot_Energy) * T_Build

Per unit, with volume fraction ``v = V_part / V_Build``::

    C_Unit  = v * C_Build + Cdot_Labour * T_Process
    C_Total = v * C_Build * (1 - p)**-n + Cdot_Labour * T_Process

Post-processing labour follows the failure node, so it is not inflated by
the failure multiplier.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field


@dataclass(frozen=True)
class ProcessProfile:
    """Rates and prices of the AM route, in EUR, hours and cm³.

    The optional fields are kept for reference and consistency checks only;
    the cost model uses the aggregated rates.
    """

    p_material: float  # EUR / cm³
    c_setup_labour: float  # EUR per build
    indirect_rate: float  # EUR / h
    energy_rate: float  # EUR / h
    labour_rate: float  # EUR / h
    t_process: float  # h per unit
    production_overhead_rate: float | None = None
    admin_overhead_rate: float | None = None
    machine_cost_rate: float | None = None
    machine_utilisation: float | None = None
    annual_operating_hours: float | None = None
    energy_price: float | None = None  # EUR / MJ
    energy_consumption_rate: float | None = None  # MJ / h

    def __post_init__(self):
        for name, value in asdict(self).items():
            if value is not None and (not math.isfinite(value) or value < 0):
                raise ValueError(f"profile.{name} must be a finite value >= 0, got {value}")
        parts = (self.production_overhead_rate, self.admin_overhead_rate, self.machine_cost_rate)
        if all(p is not None for p in parts) and abs(sum(parts) - self.indirect_rate) > 0.005:
            raise ValueError(
                f"profile.indirect_rate {self.indirect_rate} != overhead + admin + machine rates {sum(parts):.4f}")
        if self.energy_price is not None and self.energy_consumption_rate is not None:
            implied = self.energy_price * self.energy_consumption_rate
            if abs(implied - self.energy_rate) > 0.005:
                raise ValueError(f"profile.energy_rate {self.energy_rate} != price x consumption {implied:.4f}")

    @property
    def postprocess_cost(self) -> float:
        """Post-processing labour per unit, EUR."""
        return self.labour_rate * self.t_process


def default_profile() -> ProcessProfile:
    """EOSINT M270 / 17-4PH reference profile."""
    return ProcessProfile(
        p_material=0.6916,
        c_setup_labour=72.04,
        indirect_rate=23.12,
        energy_rate=0.18,
        labour_rate=22.75,
        t_process=37 / 60,
        production_overhead_rate=5.11,
        admin_overhead_rate=0.35,
        machine_cost_rate=17.66,
        machine_utilisation=0.5704,
        annual_operating_hours=5000.0,
        energy_price=0.02,
        energy_consumption_rate=9.18,
    )


@dataclass(frozen=True)
class FailureModel:
    """Constant, independent probability of outright build failure per layer."""

    p_constant: float = 0.00025
    # when False, setup labour is kept outside the failure multiplier
    setup_in_failure: bool = True

    def __post_init__(self):
        if not 0 <= self.p_constant < 1:
            raise ValueError(f"failure.p_constant must be in [0, 1), got {self.p_constant}")

    @classmethod
    def from_mean_layers(cls, mean_layers: float, setup_in_failure: bool = True) -> "FailureModel":
        """Per-layer probability whose geometric mean number of layers to failure is `mean_layers`."""
        if not mean_layers > 0:
            raise ValueError("mean_layers must be > 0")
        return cls(1.0 / mean_layers, setup_in_failure)


def build_cost(profile: ProcessProfile, V_Build: float, T_Build: float) -> float:
    if V_Build < 0 or T_Build < 0:
        raise ValueError("V_Build and T_Build must be >= 0")
    return (profile.p_material * V_Build + profile.c_setup_labour
            + (profile.indirect_rate + profile.energy_rate) * T_Build)


def volume_fraction(V_part: float, V_Build: float) -> float:
    if V_Build <= 0:
        raise ValueError("V_Build must be > 0")
    if not 0 < V_part <= V_Build:
        raise ValueError(f"V_part {V_part} must lie in (0, V_Build={V_Build}]")
    return V_part / V_Build


def unit_cost(v: float, C_Build: float, profile: ProcessProfile) -> float:
    _check_fraction(v)
    return v * C_Build + profile.postprocess_cost


def survival_probability(failure: FailureModel, n_layers: int) -> float:
    """Probability that all `n_layers` layers deposit without failure."""
    if n_layers < 0:
        raise ValueError("n_layers must be >= 0")
    return (1.0 - failure.p_constant) ** n_layers


def failure_multiplier(failure: FailureModel, n_layers: int) -> float:
    """Expected number of build attempts per successful build, (1 - p)**-n."""
    if n_layers < 0:
        raise ValueError("n_layers must be >= 0")
    return (1.0 - failure.p_constant) ** -n_layers


def total_unit_cost(v: float, C_Build: float, profile: ProcessProfile,
                    failure: FailureModel, n_layers: int) -> float:
    _check_fraction(v)
    mult = failure_multiplier(failure, n_layers)
    if not math.isfinite(mult):
        raise ValueError("survival probability underflows to zero")
    at_risk = C_Build if failure.setup_in_failure else C_Build - profile.c_setup_labour
    return v * at_risk * mult + v * (C_Build - at_risk) + profile.postprocess_cost


def specific_cost(C_Total: float, V_part: float) -> float:
    """Cost per cm³ of deposited part volume."""
    if not V_part > 0:
        raise ValueError("V_part must be > 0")
    return C_Total / V_part


def _check_fraction(v: float) -> None:
    if not 0 < v <= 1:
        raise ValueError(f"volume fraction must lie in (0, 1], got {v}")


COMPONENTS = ("material", "setup_labour", "indirect", "energy", "failure_premium", "postprocess_labour")


@dataclass(frozen=True)
class CostBreakdown:
    """Per-unit cost decomposition (EUR)."""

    v: float
    C_Build: float
    material: float
    setup_labour: float
    indirect: float
    energy: float
    postprocess_labour: float
    failure_premium: float
    C_Unit: float
    C_Total: float
    shares: dict[str, float] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


def breakdown(v: float, V_Build: float, T_Build: float, profile: ProcessProfile,
              failure: FailureModel, n_layers: int) -> CostBreakdown:
    C_Build = build_cost(profile, V_Build, T_Build)
    material = v * profile.p_material * V_Build
    setup = v * profile.c_setup_labour
    indirect = v * profile.indirect_rate * T_Build
    energy = v * profile.energy_rate * T_Build
    post = profile.postprocess_cost
    C_Unit = material + setup + indirect + energy + post
    C_Total = total_unit_cost(v, C_Build, profile, failure, n_layers)
    premium = C_Total - C_Unit
    values = dict(material=material, setup_labour=setup, indirect=indirect, energy=energy,
                  failure_premium=premium, postprocess_labour=post)
    shares = {k: values[k] / C_Total for k in COMPONENTS} if C_Total > 0 else {k: 0.0 for k in COMPONENTS}
    return CostBreakdown(v=v, C_Build=C_Build, C_Unit=C_Unit, C_Total=C_Total, shares=shares, **values)
