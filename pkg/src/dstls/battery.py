"""1RC equivalent-circuit cell: SOC-dependent parameters, ARX form, simulation.

Sign convention: positive current discharges the cell.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .signal import SignalError, read_csv_columns, write_csv_columns

CELL_TRACE_COLUMNS = ("t", "i", "v", "z", "v_oc", "vbar", "theta1", "theta2", "theta3")
PARAM_MAP_COLUMNS = ("z", "v_oc", "r0", "r1", "c1")


class BatteryError(ValueError):
    pass


class ArxTheta(NamedTuple):
    """Overpotential ARX coefficients ``vbar_k = theta1*vbar_{k-1} + theta2*i_k + theta3*i_{k-1}``."""

    theta1: float
    theta2: float
    theta3: float


@dataclass(frozen=True)
class EcmParamMap:
    """Breakpoint table over SOC with piecewise-linear interpolation."""

    z: np.ndarray
    v_oc: np.ndarray
    r0: np.ndarray
    r1: np.ndarray
    c1: np.ndarray

    def __post_init__(self):
        arrays = {}
        for name in PARAM_MAP_COLUMNS:
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            arrays[name] = arr
            object.__setattr__(self, name, arr)
        n = len(arrays["z"])
        if n < 2 or any(len(a) != n for a in arrays.values()):
            raise BatteryError("parameter map needs >= 2 breakpoints and equal-length columns")
        z = arrays["z"]
        if np.any(np.diff(z) <= 0) or z[0] != 0.0 or z[-1] != 1.0:
            raise BatteryError("SOC breakpoints must be strictly increasing from 0 to 1")
        if np.any(np.diff(arrays["v_oc"]) <= 0):
            raise BatteryError("OCV must be strictly increasing in SOC")
        for name in ("r0", "r1", "c1"):
            if np.any(arrays[name] <= 0):
                raise BatteryError(f"{name} must be positive at every breakpoint")

    def ocv(self, z):
        return np.interp(z, self.z, self.v_oc)

    def params(self, z):
        """``(v_oc, r0, r1, c1)`` at ``z`` (scalar or array)."""
        return tuple(np.interp(z, self.z, getattr(self, name)) for name in PARAM_MAP_COLUMNS[1:])

    @classmethod
    def default(cls) -> "EcmParamMap":
        """Synthetic prismatic-cell map (not fitted to any real cell).

        OCV 3.0 V to 4.2 V, series and RC resistances rising by half towards
        empty, constant 10 kF capacitance.
        """
        z = np.round(np.linspace(0.0, 1.0, 11), 12)
        scale = 1.0 + 0.5 * (1.0 - z)
        return cls(
            z=z,
            v_oc=3.0 + 1.0 * z + 0.2 * z**2,
            r0=1.0e-3 * scale,
            r1=0.5e-3 * scale,
            c1=np.full_like(z, 1.0e4),
        )

    @classmethod
    def constant(cls, v_oc: float, r0: float, r1: float, c1: float, ocv_slope: float = 1e-6) -> "EcmParamMap":
        """SOC-independent resistances; OCV gets a tiny slope to stay increasing."""
        z = np.array([0.0, 1.0])
        return cls(z, [v_oc - ocv_slope / 2, v_oc + ocv_slope / 2], [r0, r0], [r1, r1], [c1, c1])

    def to_csv(self, path) -> None:
        write_csv_columns(path, {name: getattr(self, name) for name in PARAM_MAP_COLUMNS})

    @classmethod
    def from_csv(cls, path) -> "EcmParamMap":
        cols = read_csv_columns(path)
        missing = [c for c in PARAM_MAP_COLUMNS if c not in cols]
        if missing:
            raise BatteryError(f"{path}: missing columns {missing}")
        return cls(*(cols[c] for c in PARAM_MAP_COLUMNS))


def arx_from_ecm(r0, r1, c1, t) -> ArxTheta:
    """Bilinear discretisation of the 1RC overpotential dynamics.

    Accepts scalars or equal-shape arrays.
    """
    for name, x in (("r0", r0), ("r1", r1), ("c1", c1), ("t", t)):
        if np.any(np.asarray(x) <= 0):
            raise BatteryError(f"{name} must be positive")
    tau2 = 2.0 * r1 * c1
    den = tau2 + t
    return ArxTheta((tau2 - t) / den, r0 + r1 * t / den, ((r0 + r1) * t - 2.0 * r0 * r1 * c1) / den)


def lookup_params(pmap: EcmParamMap, z: float) -> tuple[float, float, float, float]:
    if not 0.0 <= z <= 1.0:
        raise BatteryError(f"SOC out of range [0, 1]: {z}")
    return tuple(float(x) for x in pmap.params(z))


@dataclass(frozen=True)
class CellTrace:
    """Ground-truth (or measured) per-sample cell data."""

    current: np.ndarray
    terminal_voltage: np.ndarray
    overpotential: np.ndarray
    soc: np.ndarray
    v_oc: np.ndarray
    theta_true: np.ndarray  # (K, 3)
    capacity: float
    period: float = 1.0
    t0: float = 0.0
    saturated: bool = False

    def __len__(self) -> int:
        return len(self.current)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.period * np.arange(len(self))

    def truncated(self, k: int) -> "CellTrace":
        return CellTrace(
            self.current[:k],
            self.terminal_voltage[:k],
            self.overpotential[:k],
            self.soc[:k],
            self.v_oc[:k],
            self.theta_true[:k],
            self.capacity,
            self.period,
            self.t0,
            self.saturated,
        )

    def to_csv(self, path) -> None:
        th = self.theta_true
        write_csv_columns(
            path,
            dict(
                zip(
                    CELL_TRACE_COLUMNS,
                    (self.times, self.current, self.terminal_voltage, self.soc, self.v_oc,
                     self.overpotential, th[:, 0], th[:, 1], th[:, 2]),
                )
            ),
        )

    @classmethod
    def from_csv(cls, path, capacity: float = float("nan")) -> "CellTrace":
        from .signal import infer_period

        cols = read_csv_columns(path)
        missing = [c for c in CELL_TRACE_COLUMNS if c not in cols]
        if missing:
            raise SignalError(f"{path}: missing columns {missing}")
        period = infer_period(cols["t"], str(path))
        theta = np.column_stack([cols["theta1"], cols["theta2"], cols["theta3"]])
        return cls(cols["i"], cols["v"], cols["vbar"], cols["z"], cols["v_oc"], theta, capacity,
                   period, float(cols["t"][0]))


def coulomb_count(current, z0: float, capacity: float, t: float) -> tuple[np.ndarray, bool]:
    """SOC after each sample, clamped to [0, 1]; second value flags clamping."""
    z = z0 - np.cumsum(np.asarray(current, dtype=float)) * (t / (3600.0 * capacity))
    saturated = bool(np.any(z < 0.0) or np.any(z > 1.0))
    if saturated:
        # clamping is path dependent, so integrate step by step
        out = np.empty_like(z)
        zk = z0
        step = t / (3600.0 * capacity)
        for k, ik in enumerate(current):
            zk = min(1.0, max(0.0, zk - step * ik))
            out[k] = zk
        z = out
    return z, saturated


def simulate_cell(pmap: EcmParamMap, current, z0: float, capacity: float, t: float = 1.0) -> CellTrace:
    current = np.asarray(current, dtype=float)
    if current.ndim != 1 or len(current) == 0:
        raise BatteryError("current series must be a non-empty 1-D array")
    if not np.all(np.isfinite(current)):
        raise BatteryError("current must be finite")
    if capacity <= 0:
        raise BatteryError("capacity must be positive")
    if not 0.0 <= z0 <= 1.0:
        raise BatteryError(f"initial SOC out of range: {z0}")
    z, saturated = coulomb_count(current, z0, capacity, t)
    v_oc, r0, r1, c1 = pmap.params(z)
    theta = np.column_stack(arx_from_ecm(r0, r1, c1, t))
    vbar = kernels.arx_overpotential(theta, current)
    return CellTrace(current, v_oc + vbar, vbar, z, v_oc, theta, capacity, t, 0.0, saturated)


def overpotential_from_measurement(v, z, pmap: EcmParamMap) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    z = np.asarray(z, dtype=float)
    if v.shape != z.shape:
        raise BatteryError(f"length mismatch: {v.shape} vs {z.shape}")
    if np.any(z < 0) or np.any(z > 1):
        raise BatteryError("SOC out of range [0, 1]")
    return v - pmap.ocv(z)
