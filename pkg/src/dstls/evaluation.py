"""Error metrics and the Monte Carlo comparison of RLS, TLS and DS-TLS."""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .battery import CellTrace, EcmParamMap, coulomb_count, simulate_cell
from .config import Config
from .drive import TripSpec, VehiclePack, current_from_speed, generate_trip
from .pipeline import (
    EstimateTrace,
    SelectorConfig,
    detect_segments,
    ds_tls_run,
    l_bounds,
    rls_run,
    tls_fixed_run,
)
from .signal import IndexInterval, SampledSignal, add_gaussian_noise, derive_seed, write_csv_columns

log = logging.getLogger(__name__)

RESULTS_COLUMNS = (
    "method", "d",
    "mape1_mean", "mape1_std", "mape2_mean", "mape2_std", "mape3_mean", "mape3_std",
    "rmse_mv_mean", "rmse_mv_std", "du_mean", "du_std",
)  # fmt: skip

CH_TRIP, CH_CURRENT, CH_VOLTAGE = 0, 1, 2


class EvaluationError(RuntimeError):
    pass


def predicted_voltage(theta_hat, current, vbar_measured, v_oc) -> np.ndarray:
    """One-step-ahead terminal voltage from measured lagged overpotential and current."""
    theta_hat = np.asarray(theta_hat, dtype=float)
    current = np.asarray(current, dtype=float)
    vbar = np.asarray(vbar_measured, dtype=float)
    v_oc = np.asarray(v_oc, dtype=float)
    K = len(current)
    if theta_hat.shape != (K, 3) or len(vbar) != K or len(v_oc) != K:
        raise EvaluationError("series length mismatch")
    vbar_prev = np.concatenate(([0.0], vbar[:-1]))
    i_prev = np.concatenate((current[:1], current[:-1]))
    return v_oc + theta_hat[:, 0] * vbar_prev + theta_hat[:, 1] * current + theta_hat[:, 2] * i_prev


def rmse(v_true, v_pred, l_max: int) -> float:
    v_true = np.asarray(v_true, dtype=float)
    v_pred = np.asarray(v_pred, dtype=float)
    if v_true.shape != v_pred.shape:
        raise EvaluationError("series length mismatch")
    if len(v_true) <= l_max:
        raise EvaluationError(f"trip length {len(v_true)} <= l_max {l_max}")
    err = v_true[l_max:] - v_pred[l_max:]
    return float(np.sqrt(np.mean(err * err)))


def mape(theta_true, theta_hat, l_max: int, i: int) -> float:
    """Mean absolute percentage error of parameter ``i`` (1-based) after the first ``l_max`` samples."""
    true = np.asarray(theta_true, dtype=float)[l_max:, i - 1]
    est = np.asarray(theta_hat, dtype=float)[l_max:, i - 1]
    if len(true) == 0:
        raise EvaluationError("empty evaluation window")
    if np.any(true == 0):
        raise EvaluationError(f"theta{i} is zero inside the evaluation window")
    return float(100.0 * np.mean(np.abs((true - est) / true)))


def data_usage(segments, k_total: int) -> float:
    segs = sorted(segments)
    for a, b in zip(segs, segs[1:]):
        if b.begin < a.end:
            raise EvaluationError(f"overlapping segments {a} and {b}")
    if segs and (segs[0].begin < 0 or segs[-1].end > k_total):
        raise EvaluationError("segment outside the trip")
    return 100.0 * sum(s.end - s.begin for s in segs) / k_total


def l_tls_from_segments(segments) -> int:
    """Rounded mean segment length; halves round away from zero."""
    lengths = [s.end - s.begin for s in segments]
    if not lengths:
        raise EvaluationError("no segments to size TLS from")
    mean = sum(lengths) / len(lengths)
    return int(np.floor(mean + 0.5))


@dataclass(frozen=True)
class Metrics:
    rmse_v: float
    mape: tuple[float, float, float]
    data_usage: float | None = None


@dataclass(frozen=True)
class ResultsRow:
    method: str
    d: float | None
    mean: dict
    std: dict

    def as_csv_row(self) -> list[str]:
        out = [self.method, "" if self.d is None else _fmt(self.d)]
        for key in ("mape1", "mape2", "mape3", "rmse_mv", "du"):
            m, s = self.mean.get(key), self.std.get(key)
            out += ["" if m is None else _fmt(m), "" if s is None else _fmt(s)]
        return out


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def evaluate(trace: EstimateTrace, truth: CellTrace, current, voltage, vbar_meas, l_max: int, du=False) -> Metrics:
    v_hat = predicted_voltage(trace.theta_hat, current, vbar_meas, truth.v_oc)
    m = tuple(mape(truth.theta_true, trace.theta_hat, l_max, i) for i in (1, 2, 3))
    usage = data_usage(trace.selected_segments, len(truth)) if du else None
    return Metrics(rmse(voltage, v_hat, l_max), m, usage)


# -- trip synthesis ---------------------------------------------------------


@dataclass(frozen=True)
class TripData:
    trip_id: int
    seed: int
    n_transitions: int
    speed: SampledSignal
    truth: CellTrace


def build_pmap(cfg: Config) -> EcmParamMap:
    return EcmParamMap.from_csv(cfg.paths.param_map) if cfg.paths.param_map else EcmParamMap.default()


def build_vehicle(cfg: Config) -> VehiclePack:
    s = cfg.sim
    return VehiclePack(s.mass, s.drag_area_cd_a, s.rolling_coeff, s.drivetrain_eff, s.regen_eff,
                       s.aux_power, s.series_cells, s.parallel_cells)


def make_trip(cfg: Config, trip_id: int, pmap: EcmParamMap | None = None) -> TripData:
    """Speed profile and noiseless cell trace, cut where SOC reaches ``sim.z_end``."""
    pmap = pmap or build_pmap(cfg)
    seq = derive_seed(cfg.harness.master_seed, trip_id, 0, CH_TRIP)
    seed = int(seq.generate_state(1)[0])
    rng = np.random.default_rng(seq)
    tc = cfg.trip
    n_tr = int(rng.integers(tc.n_transitions_min, tc.n_transitions_max + 1))
    spec = TripSpec(n_tr, tc.highway_speed, tc.motorway_speed, (tc.hold_min, tc.hold_max), tc.ramp_accel,
                    tc.jitter_sigma, tc.jitter_corr, (cfg.sim.z0, cfg.sim.z_end), seed, cfg.sim.period)
    speed = generate_trip(spec)
    current = current_from_speed(speed, build_vehicle(cfg), pmap, cfg.sim.z0, cfg.sim.capacity_ah)
    z, _ = coulomb_count(current, cfg.sim.z0, cfg.sim.capacity_ah, cfg.sim.period)
    below = np.flatnonzero(z < cfg.sim.z_end)
    if len(below):
        k = int(below[0])
        current = current[:k]
        speed = speed.slice(0, k)
    truth = simulate_cell(pmap, current, cfg.sim.z0, cfg.sim.capacity_ah, cfg.sim.period)
    if truth.saturated:
        raise EvaluationError(f"trip {trip_id}: SOC clamped at a limit")
    return TripData(trip_id, seed, n_tr, speed, truth)


# -- Monte Carlo ------------------------------------------------------------


def _noisy(cfg: Config, trip: TripData, trial: int):
    ms = cfg.harness.master_seed
    t = trip.truth
    cur = add_gaussian_noise(SampledSignal(0.0, t.period, t.current), cfg.noise.sigma_i,
                             derive_seed(ms, trip.trip_id, trial, CH_CURRENT)).values
    volt = add_gaussian_noise(SampledSignal(0.0, t.period, t.terminal_voltage), cfg.noise.sigma_v,
                              derive_seed(ms, trip.trip_id, trial, CH_VOLTAGE)).values
    return cur, volt


def selector_for(cfg: Config, d: float) -> SelectorConfig:
    e = cfg.etre
    return SelectorConfig.transition(e.v_h, e.dv_h, e.v_m, e.dv_m, d, e.d_tmax, cfg.sim.period, e.window or None)


def run_trip(cfg: Config, trip_id: int) -> dict:
    """All trials and methods for one trip.

    Returns ``{"trip": TripData, "metrics": {(method, d): [Metrics per trial]},
    "segments": {(d, trial): [IndexInterval]}}``.
    """
    pmap = build_pmap(cfg)
    trip = make_trip(cfg, trip_id, pmap)
    truth = trip.truth
    K = len(truth)
    selectors = {d: selector_for(cfg, d) for d in cfg.etre.d}
    rls_lmax = max(s.l_max for s in selectors.values())
    if K <= rls_lmax:
        raise EvaluationError(f"trip {trip_id}: {K} samples, not longer than l_max {rls_lmax}")
    candidates = {d: detect_segments(trip.speed, sel) for d, sel in selectors.items()}
    metrics: dict = {}
    segments: dict = {}
    for trial in range(cfg.harness.trials):
        cur, volt = _noisy(cfg, trip, trial)
        vbar = volt - truth.v_oc
        where = f"trip {trip_id}, trial {trial}"
        try:
            est = rls_run(cur, volt, truth.soc, pmap, cfg.rls.lam, cfg.rls.theta0, cfg.rls.p0)
            metrics.setdefault(("RLS", None), []).append(evaluate(est, truth, cur, volt, vbar, rls_lmax))
        except Exception as exc:
            raise EvaluationError(f"{where}, method RLS: {exc}") from exc
        for d, sel in selectors.items():
            try:
                ds = ds_tls_run(trip.speed, cur, volt, truth.soc, pmap, sel, cfg.rls.theta0, candidates[d])
                ds_metrics = evaluate(ds, truth, cur, volt, vbar, sel.l_max, du=True)
            except Exception as exc:
                raise EvaluationError(f"{where}, method DS-TLS d={d:g}: {exc}") from exc
            segments[(d, trial)] = ds.selected_segments
            try:
                # initialization is a bootstrap, not a selection: excluded from sizing
                l_tls = l_tls_from_segments(ds.selected_segments[1:])
                tls = tls_fixed_run(cur, volt, truth.soc, pmap, l_tls, cfg.rls.theta0)
                metrics.setdefault(("TLS", d), []).append(evaluate(tls, truth, cur, volt, vbar, sel.l_max))
            except Exception as exc:
                raise EvaluationError(f"{where}, method TLS d={d:g}: {exc}") from exc
            metrics.setdefault(("DS-TLS", d), []).append(ds_metrics)
    return {"trip": trip, "metrics": metrics, "segments": segments}


def _trial_mean(ms: list[Metrics]) -> dict:
    out = {
        "mape1": float(np.mean([m.mape[0] for m in ms])),
        "mape2": float(np.mean([m.mape[1] for m in ms])),
        "mape3": float(np.mean([m.mape[2] for m in ms])),
        "rmse_mv": float(np.mean([1e3 * m.rmse_v for m in ms])),
    }
    if ms[0].data_usage is not None:
        out["du"] = float(np.mean([m.data_usage for m in ms]))
    return out


def method_keys(cfg: Config) -> list:
    keys = [("RLS", None)]
    for d in cfg.etre.d:
        keys += [("TLS", d), ("DS-TLS", d)]
    return keys


def aggregate(per_trip: list[dict], keys) -> list[ResultsRow]:
    """Average trials within each trip, then mean and population std across trips."""
    rows = []
    for key in keys:
        trip_means = [_trial_mean(r["metrics"][key]) for r in per_trip]
        mean, std = {}, {}
        for name in trip_means[0]:
            vals = np.array([t[name] for t in trip_means])
            mean[name] = float(vals.mean())
            std[name] = float(vals.std())
        rows.append(ResultsRow(key[0], key[1], mean, std))
    return rows


def run_monte_carlo(cfg: Config, segments_dir=None) -> list[ResultsRow]:
    cfg.validate()
    trip_ids = list(range(cfg.harness.trips))
    if cfg.harness.workers > 1:
        with ProcessPoolExecutor(cfg.harness.workers) as pool:
            per_trip = list(pool.map(run_trip, [cfg] * len(trip_ids), trip_ids))
    else:
        per_trip = []
        for tid in trip_ids:
            per_trip.append(run_trip(cfg, tid))
            log.info("trip %d done (%d samples)", tid, len(per_trip[-1]["trip"].truth))
    segments_dir = segments_dir or cfg.paths.segments_dir
    if segments_dir:
        write_segments(segments_dir, per_trip)
    return aggregate(per_trip, method_keys(cfg))


def segments_filename(trip_id: int, d: float, trial: int) -> str:
    return f"trip{trip_id:03d}_d{d:g}_trial{trial:02d}_segments.csv"


def write_segments(directory, per_trip: list[dict]) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {"trip": [], "seed": [], "n_transitions": [], "samples": []}
    for r in per_trip:
        trip: TripData = r["trip"]
        manifest["trip"].append(trip.trip_id)
        manifest["seed"].append(trip.seed)
        manifest["n_transitions"].append(trip.n_transitions)
        manifest["samples"].append(len(trip.truth))
        for (d, trial), segs in r["segments"].items():
            write_segments_csv(directory / segments_filename(trip.trip_id, d, trial), segs)
    write_csv_columns(directory / "manifest.csv", manifest)


def write_segments_csv(path, segments: list[IndexInterval]) -> None:
    write_csv_columns(path, {"begin": [s.begin for s in segments], "end": [s.end for s in segments]})


def write_results_csv(path, rows: list[ResultsRow]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULTS_COLUMNS)
        for row in rows:
            w.writerow(row.as_csv_row())


def read_results_csv(path) -> list[dict]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


__all__ = [
    "Metrics",
    "ResultsRow",
    "TripData",
    "data_usage",
    "l_bounds",
    "l_tls_from_segments",
    "make_trip",
    "mape",
    "predicted_voltage",
    "rmse",
    "run_monte_carlo",
    "run_trip",
    "write_results_csv",
]
