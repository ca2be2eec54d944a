"""Synthetic highway/motorway trips and a longitudinal vehicle model.

All vehicle constants are synthetic stand-ins for a mid-size EV; none come
from measured data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .battery import EcmParamMap
from .signal import SampledSignal

AIR_DENSITY = 1.2  # kg/m^3
GRAVITY = 9.81  # m/s^2


class DriveError(ValueError):
    pass


@dataclass(frozen=True)
class TripSpec:
    n_transitions: int = 2
    highway_speed: float = 20.0
    motorway_speed: float = 34.0
    hold_duration_range: tuple[float, float] = (300.0, 600.0)
    ramp_accel: float = 1.0
    jitter_sigma: float = 0.5
    # AR(1) coefficient of the jitter; 0 gives white noise
    jitter_corr: float = 0.95
    total_soc_window: tuple[float, float] = (0.95, 0.05)
    seed: int = 0
    period: float = 1.0

    def __post_init__(self):
        if self.n_transitions < 0:
            raise DriveError("n_transitions must be >= 0")
        if self.highway_speed < 0 or self.motorway_speed < 0:
            raise DriveError("speeds must be non-negative")
        lo, hi = self.hold_duration_range
        if not 0 < lo <= hi:
            raise DriveError(f"bad hold duration range {self.hold_duration_range}")
        if self.ramp_accel <= 0 or self.jitter_sigma < 0 or not 0 <= self.jitter_corr < 1:
            raise DriveError("ramp_accel > 0, jitter_sigma >= 0, 0 <= jitter_corr < 1 required")
        z_start, z_end = self.total_soc_window
        if not 0 <= z_end < z_start <= 1:
            raise DriveError("SOC window must satisfy 0 <= z_end < z_start <= 1")

    @property
    def ramp_duration(self) -> float:
        return abs(self.motorway_speed - self.highway_speed) / self.ramp_accel


@dataclass(frozen=True)
class VehiclePack:
    mass: float = 2000.0
    drag_area_cd_a: float = 0.7
    rolling_coeff: float = 0.01
    drivetrain_eff: float = 0.9
    regen_eff: float = 0.6
    aux_power: float = 500.0
    series_cells: int = 120
    parallel_cells: int = 4

    def __post_init__(self):
        for name in ("mass", "drag_area_cd_a", "rolling_coeff", "drivetrain_eff", "regen_eff",
                     "series_cells", "parallel_cells"):
            if getattr(self, name) <= 0:
                raise DriveError(f"{name} must be positive")
        if self.aux_power < 0:
            raise DriveError("aux_power must be non-negative")


def generate_trip(spec: TripSpec) -> SampledSignal:
    """Alternating highway and motorway holds joined by constant-acceleration ramps.

    The trip starts on the highway. Hold lengths are uniform in
    ``hold_duration_range``; a smooth zero-mean Gaussian jitter (AR(1) with
    stationary std ``jitter_sigma``) is added on top.
    """
    if spec.ramp_duration > spec.hold_duration_range[0]:
        raise DriveError(
            f"ramp of {spec.ramp_duration:g} s longer than the shortest hold {spec.hold_duration_range[0]:g} s"
        )
    rng = np.random.default_rng(spec.seed)
    T = spec.period
    holds = rng.uniform(*spec.hold_duration_range, size=spec.n_transitions + 1)
    speeds = [spec.highway_speed, spec.motorway_speed]
    ramp_n = int(round(spec.ramp_duration / T))
    pieces = []
    for j, hold in enumerate(holds):
        v = speeds[j % 2]
        pieces.append(np.full(max(1, int(round(hold / T))), v))
        if j < spec.n_transitions:
            v_next = speeds[(j + 1) % 2]
            pieces.append(np.linspace(v, v_next, ramp_n + 2)[1:-1])
    base = np.concatenate(pieces)
    jitter = _ar1(rng, len(base), spec.jitter_sigma, spec.jitter_corr)
    return SampledSignal(0.0, T, np.maximum(base + jitter, 0.0))


def _ar1(rng, n: int, sigma: float, rho: float) -> np.ndarray:
    if sigma == 0:
        return np.zeros(n)
    eps = rng.normal(0.0, sigma, n)
    out = np.empty(n)
    out[0] = eps[0]
    scale = np.sqrt(1.0 - rho * rho)
    for k in range(1, n):
        out[k] = rho * out[k - 1] + scale * eps[k]
    return out


def battery_power(speed: SampledSignal, vp: VehiclePack) -> np.ndarray:
    """Pack terminal power in watts (positive = discharge), auxiliaries included."""
    v = speed.values
    if np.any(v < 0):
        raise DriveError("speed must be non-negative")
    accel = np.diff(v, prepend=v[:1]) / speed.period
    force = vp.mass * accel + 0.5 * AIR_DENSITY * vp.drag_area_cd_a * v**2 + vp.rolling_coeff * vp.mass * GRAVITY
    wheel = force * v
    batt = np.where(wheel >= 0, wheel / vp.drivetrain_eff, wheel * vp.regen_eff)
    return batt + vp.aux_power


def current_from_speed(
    speed: SampledSignal, vp: VehiclePack, pmap: EcmParamMap, z0: float, capacity: float
) -> np.ndarray:
    """Per-cell current (A) for a speed trace, with pack voltage from OCV at the running SOC."""
    power = battery_power(speed, vp).tolist()
    step = speed.period / (3600.0 * capacity)
    out = np.empty(len(power))
    z = z0
    for k, p in enumerate(power):
        v_pack = vp.series_cells * float(pmap.ocv(z))
        if v_pack <= 0:
            raise DriveError("non-positive pack voltage; check the OCV map")
        i_cell = p / v_pack / vp.parallel_cells
        out[k] = i_cell
        z -= step * i_cell
    return out
