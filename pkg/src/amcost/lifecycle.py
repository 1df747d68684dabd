"""Use-phase energy savings, their discounted value and the value-capture share."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

J_PER_MJ = 1e6
S_PER_H = 3600.0


@dataclass(frozen=True)
class UsePhaseScenario:
    power_conventional: float  # W
    power_am: float  # W
    annual_hours: float  # h / year
    lifetime_hours: float  # h
    k: float  # depreciation period, years
    use_energy_price: float  # EUR / MJ
    r: float  # annual discount rate
    throughput_high: float | None = None  # units / h, metadata
    throughput_low: float | None = None

    def __post_init__(self):
        for name in ("power_conventional", "power_am", "annual_hours", "lifetime_hours", "use_energy_price"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"use_phase.{name} must be >= 0")
        if not self.annual_hours > 0:
            raise ValueError("use_phase.annual_hours must be > 0")
        if not 0 <= self.r < 1:
            raise ValueError(f"use_phase.r must be in [0, 1), got {self.r}")
        implied = self.lifetime_hours / self.annual_hours
        if abs(implied - self.k) > 5e-4 * max(1.0, implied):
            raise ValueError(f"use_phase.k {self.k} inconsistent with lifetime/annual hours {implied:.4f}")
        if self.power_am > self.power_conventional:
            warnings.warn("AM design draws more power than the conventional one; savings are negative",
                          stacklevel=2)

    def annual_energy(self, power: float) -> float:
        """Annual energy in MJ at `power` W."""
        return power * self.annual_hours * S_PER_H / J_PER_MJ


def annual_energy_saving(s: UsePhaseScenario) -> float:
    """Yearly energy-cost saving of the AM design, EUR / year."""
    return (s.annual_energy(s.power_conventional) - s.annual_energy(s.power_am)) * s.use_energy_price


def discounted_saving(S: float, r: float, k: float) -> float:
    """Present value of a continuous annuity paying `S` per year for `k` years at rate `r`.

    Closed form ``S * ((1 - r)**k - 1) / ln(1 - r)``; r = 0 returns the limit ``S * k``.
    """
    if not 0 <= r < 1:
        raise ValueError(f"discount rate must be in [0, 1), got {r}")
    if k < 0:
        raise ValueError("k must be >= 0")
    if r == 0:
        return S * k
    # expm1/log1p keep precision for tiny r
    return S * math.expm1(k * math.log1p(-r)) / math.log1p(-r)


def value_share(C_conventional: float, C_total_am: float, DS: float) -> float:
    """Share of created value captured by the manufacturer on unit level."""
    delta = C_conventional - C_total_am
    denom = DS + delta
    if denom == 0:
        raise ZeroDivisionError("value share undefined: DS + (C_conventional - C_total) == 0")
    return delta / denom


@dataclass(frozen=True)
class LifecycleResult:
    S_Energy: float
    DS_Energy: float
    r: float
    k: float


def evaluate(s: UsePhaseScenario) -> LifecycleResult:
    S = annual_energy_saving(s)
    return LifecycleResult(S, discounted_saving(S, s.r, s.k), s.r, s.k)
