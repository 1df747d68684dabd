"""Linear build-time model: per-layer recoat overhead plus volumetric exposure."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


class CalibrationError(ValueError):
    pass


@dataclass(frozen=True)
class TimeModelParams:
    t_layer: float  # s per layer
    melt_rate: float  # cm³ per h

    def __post_init__(self):
        if not (self.t_layer > 0 and self.melt_rate > 0):
            raise ValueError(f"time model parameters must be positive: {self}")

    def build_time(self, n_layers: float, volume: float) -> float:
        """Build time in hours."""
        return n_layers * self.t_layer / 3600.0 + volume / self.melt_rate


@dataclass(frozen=True)
class Calibration:
    params: TimeModelParams
    observations: tuple[tuple[int, float, float], ...]
    residuals: tuple[float, ...]  # relative: (predicted - observed) / observed

    @property
    def max_relative_residual(self) -> float:
        return max(abs(r) for r in self.residuals)

    def provenance(self) -> dict:
        return {
            "t_layer_s": self.params.t_layer,
            "melt_rate_cm3_per_h": self.params.melt_rate,
            "n_observations": len(self.observations),
            "max_relative_residual": self.max_relative_residual,
            "residuals": list(self.residuals),
        }


def calibrate(observations: Sequence[tuple[int, float, float]]) -> Calibration:
    """Least-squares fit of ``T = n * t_layer / 3600 + V / melt_rate``.

    Args:
        observations: (n_layers, V_Build cm³, T_Build h) triples.

    Raises:
        CalibrationError: fewer than two distinct volumes, or a non-positive fitted parameter.
    """
    obs = np.asarray(observations, dtype=float).reshape(-1, 3)
    if len(obs) < 2 or np.ptp(obs[:, 1]) == 0:
        raise CalibrationError("need at least two observations with distinct V_Build")
    n, v, t = obs.T
    design = np.column_stack([n / 3600.0, v])
    coef, _, rank, _ = np.linalg.lstsq(design, t, rcond=None)
    if rank < 2:
        raise CalibrationError("singular calibration system")
    t_layer, inv_rate = coef
    if t_layer <= 0 or inv_rate <= 0:
        raise CalibrationError(f"non-physical fit: t_layer={t_layer:.4g} s, 1/melt_rate={inv_rate:.4g} h/cm³")
    params = TimeModelParams(float(t_layer), float(1.0 / inv_rate))
    predicted = design @ coef
    residuals = tuple(float(r) for r in (predicted - t) / t)
    return Calibration(params, tuple((int(a), float(b), float(c)) for a, b, c in obs), residuals)


def estimate_build_time(build, params: TimeModelParams) -> float:
    """Build time in hours for a PackedBuild; an empty build takes no time."""
    if not build.instances:
        return 0.0
    return params.build_time(build.n_layers, build.V_Build)
