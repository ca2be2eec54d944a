"""Run configuration in a flat ``section.key = value`` text format.

Lists are comma separated; ``#`` starts a comment. Every key has a default,
so an empty file is a valid config.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path


class ConfigError(ValueError):
    pass


@dataclass
class EtreSection:
    v_h: float = 20.0
    dv_h: float = 5.0
    v_m: float = 34.0
    dv_m: float = 10.0
    d: list[float] = field(default_factory=lambda: [10.0, 30.0, 60.0])
    d_tmax: float = 60.0
    window: int = 0  # 0 selects l_max


@dataclass
class RlsSection:
    theta0: list[float] = field(default_factory=lambda: [0.0, 0.0, 0.0])
    p0: list[float] = field(default_factory=lambda: [1e6, 1e6, 1e6])
    lam: float = 0.999


@dataclass
class NoiseSection:
    sigma_i: float = 0.02
    sigma_v: float = 0.002


@dataclass
class SimSection:
    period: float = 1.0
    z0: float = 0.95
    z_end: float = 0.05
    capacity_ah: float = 50.0
    series_cells: int = 120
    parallel_cells: int = 4
    mass: float = 2000.0
    drag_area_cd_a: float = 0.7
    rolling_coeff: float = 0.01
    drivetrain_eff: float = 0.9
    regen_eff: float = 0.6
    aux_power: float = 500.0


@dataclass
class TripSection:
    n_transitions_min: int = 6
    n_transitions_max: int = 10
    highway_speed: float = 20.0
    motorway_speed: float = 34.0
    hold_min: float = 900.0
    hold_max: float = 2400.0
    ramp_accel: float = 1.0
    jitter_sigma: float = 0.5
    jitter_corr: float = 0.99


@dataclass
class HarnessSection:
    trips: int = 20
    trials: int = 10
    master_seed: int = 2025
    workers: int = 1


@dataclass
class PathsSection:
    param_map: str = ""  # empty: built-in synthetic map
    segments_dir: str = ""  # empty: do not write per-run segment files


@dataclass
class Config:
    etre: EtreSection = field(default_factory=EtreSection)
    rls: RlsSection = field(default_factory=RlsSection)
    noise: NoiseSection = field(default_factory=NoiseSection)
    sim: SimSection = field(default_factory=SimSection)
    trip: TripSection = field(default_factory=TripSection)
    harness: HarnessSection = field(default_factory=HarnessSection)
    paths: PathsSection = field(default_factory=PathsSection)

    # `lambda` is a keyword; map the file spelling onto the attribute
    _ALIASES = {("rls", "lambda"): "lam"}

    def set(self, dotted: str, raw: str) -> None:
        try:
            section_name, key = dotted.split(".", 1)
        except ValueError:
            raise ConfigError(f"key {dotted!r} is not of the form section.key") from None
        section = getattr(self, section_name, None)
        if section is None or not dataclasses.is_dataclass(section):
            raise ConfigError(f"unknown section {section_name!r}")
        attr = self._ALIASES.get((section_name, key), key)
        fields = {f.name: f for f in dataclasses.fields(section)}
        if attr not in fields:
            raise ConfigError(f"unknown key {dotted!r}")
        setattr(section, attr, _coerce(fields[attr], raw, dotted))

    def items(self):
        for f in dataclasses.fields(self):
            section = getattr(self, f.name)
            for sf in dataclasses.fields(section):
                key = next((k for (s, k), a in self._ALIASES.items() if s == f.name and a == sf.name), sf.name)
                yield f"{f.name}.{key}", getattr(section, sf.name)

    def dumps(self) -> str:
        lines = ["# dstls configuration (fully resolved)"]
        for key, value in self.items():
            lines.append(f"{key} = {_render(value)}")
        return "\n".join(lines) + "\n"

    def validate(self) -> None:
        if not self.etre.d:
            raise ConfigError("etre.d needs at least one value")
        if any(x < 0 for x in [*self.etre.d, self.etre.d_tmax, self.etre.dv_h, self.etre.dv_m]):
            raise ConfigError("etre durations and tube widths must be non-negative")
        if not 0 < self.rls.lam <= 1:
            raise ConfigError("rls.lambda must be in (0, 1]")
        if len(self.rls.theta0) != 3 or len(self.rls.p0) != 3 or min(self.rls.p0) <= 0:
            raise ConfigError("rls.theta0 needs 3 values and rls.p0 3 positive values")
        if self.noise.sigma_i < 0 or self.noise.sigma_v < 0:
            raise ConfigError("noise sigmas must be non-negative")
        if not 0 <= self.sim.z_end < self.sim.z0 <= 1:
            raise ConfigError("need 0 <= sim.z_end < sim.z0 <= 1")
        if self.sim.period <= 0 or self.sim.capacity_ah <= 0:
            raise ConfigError("sim.period and sim.capacity_ah must be positive")
        if not 0 <= self.trip.n_transitions_min <= self.trip.n_transitions_max:
            raise ConfigError("need 0 <= trip.n_transitions_min <= trip.n_transitions_max")
        if self.harness.trips < 1 or self.harness.trials < 1 or self.harness.workers < 1:
            raise ConfigError("harness.trips, harness.trials and harness.workers must be >= 1")


def _coerce(f: dataclasses.Field, raw: str, key: str):
    raw = raw.strip()
    typ = f.type if isinstance(f.type, str) else getattr(f.type, "__name__", str(f.type))
    try:
        if typ.startswith("list"):
            return [float(x) for x in raw.split(",") if x.strip()]
        if typ == "int":
            return int(raw)
        if typ == "float":
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


def _render(value) -> str:
    if isinstance(value, list):
        return ", ".join(_render(x) for x in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def loads(text: str, base: Config | None = None) -> Config:
    cfg = base or Config()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'section.key = value'")
        key, value = line.split("=", 1)
        try:
            cfg.set(key.strip(), value)
        except ConfigError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
    cfg.validate()
    return cfg


def load(path) -> Config:
    return loads(Path(path).read_text(encoding="utf-8"))
