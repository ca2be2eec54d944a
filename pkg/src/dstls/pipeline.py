"""Estimation runs over a whole trip: data-selective TLS, fixed-interval TLS, RLS."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .battery import EcmParamMap, overpotential_from_measurement
from .estimators import EstimationError, UninformativeSegment, build_regression, tls_solve
from .etre import Expr, PreparedMatcher, build_transition_expr
from .signal import IndexInterval, SampledSignal

METHODS = ("RLS", "TLS", "DS-TLS")


class PipelineError(ValueError):
    pass


def l_bounds(d: float, d_tmax: float, period: float) -> tuple[int, int]:
    """Segment length bounds in samples: ``2d / T`` and ``(2d + d_tmax) / T``."""
    if d < 0 or d_tmax < 0 or period <= 0:
        raise PipelineError("need d, d_tmax >= 0 and period > 0")
    out = []
    for seconds in (2 * d, 2 * d + d_tmax):
        count = seconds / period
        if not math.isclose(count, round(count), rel_tol=0, abs_tol=1e-9):
            raise PipelineError(f"{seconds} s is not a whole number of {period} s samples")
        out.append(int(round(count)))
    return out[0], out[1]


@dataclass(frozen=True)
class SelectorConfig:
    expr: Expr
    d: float
    d_tmax: float
    period: float = 1.0
    window_len_w: int | None = None  # defaults to l_max

    def __post_init__(self):
        l_min, l_max = l_bounds(self.d, self.d_tmax, self.period)
        if self.window_len_w is None:
            object.__setattr__(self, "window_len_w", l_max)
        if self.window_len_w < l_max:
            raise PipelineError(f"window {self.window_len_w} shorter than l_max {l_max}")

    @classmethod
    def transition(cls, v_h=20.0, dv_h=5.0, v_m=34.0, dv_m=10.0, d=30.0, d_tmax=60.0, period=1.0, window=None):
        expr = build_transition_expr(v_h, dv_h, v_m, dv_m, d, d_tmax)
        return cls(expr, d, d_tmax, period, window)

    @property
    def l_min(self) -> int:
        return l_bounds(self.d, self.d_tmax, self.period)[0]

    @property
    def l_max(self) -> int:
        return l_bounds(self.d, self.d_tmax, self.period)[1]


@dataclass
class EstimateTrace:
    theta_hat: np.ndarray  # (K, 3)
    selected_segments: list[IndexInterval]
    method: str
    updated: np.ndarray = field(default=None)  # bool per sample: an update landed here
    failed_segments: list[IndexInterval] = field(default_factory=list)

    def __post_init__(self):
        if self.updated is None:
            self.updated = np.zeros(len(self.theta_hat), dtype=bool)


def select_segment(
    window: SampledSignal, cfg: SelectorConfig, k: int, min_begin: int | None = None
) -> IndexInterval | None:
    """Longest match ending at the window's last sample, in absolute indices.

    ``min_begin`` (absolute) excludes matches starting earlier.
    """
    n = len(window)
    offset = k + 1 - n
    lo = 0 if min_begin is None else max(0, min_begin - offset)
    if lo >= n:
        return None
    begins = PreparedMatcher(cfg.expr, window).begins_ending_at(n, lo)
    if len(begins) == 0:
        return None
    return IndexInterval(int(begins[0]) + offset, k + 1)


def detect_segments(speed: SampledSignal, cfg: SelectorConfig, start: int | None = None) -> list[IndexInterval]:
    """Per-sample segment detection with cooldown, as the DS-TLS loop sees it.

    After every selection (and after the initial ``l_max`` samples) no
    matching happens for ``l_max`` samples, and the next segment may not
    start within ``l_max`` samples of the previous segment's start.
    Selection depends on speed only, so this runs once per trip.
    """
    l_max = cfg.l_max
    W = cfg.window_len_w
    matcher = PreparedMatcher(cfg.expr, speed)
    k = (l_max - 1 + l_max + 1) if start is None else start
    prev_begin = 0
    found = []
    K = len(speed)
    while k < K:
        lo = max(k + 1 - W, prev_begin + l_max)
        begins = matcher.begins_ending_at(k + 1, lo) if lo <= k else ()
        if len(begins):
            seg = IndexInterval(int(begins[0]), k + 1)
            found.append(seg)
            prev_begin = seg.begin
            k += l_max + 1
        else:
            k += 1
    return found


def _check_aligned(*series):
    n = len(series[0])
    if any(len(s) != n for s in series):
        raise PipelineError("series length mismatch")
    return n


def _tls_on(vbar, current, seg: IndexInterval):
    return tls_solve(build_regression(vbar[seg.begin : seg.end], current[seg.begin : seg.end]))


def ds_tls_run(
    speed: SampledSignal,
    current,
    voltage,
    soc,
    pmap: EcmParamMap,
    cfg: SelectorConfig,
    theta0=(0.0, 0.0, 0.0),
    candidates: list[IndexInterval] | None = None,
) -> EstimateTrace:
    """Data-selective TLS over one trip.

    ``candidates`` may carry a precomputed :func:`detect_segments` result
    for the same speed trace and config.
    """
    current = np.asarray(current, dtype=float)
    K = _check_aligned(speed.values, current, voltage, soc)
    l_max = cfg.l_max
    if K < l_max:
        raise PipelineError(f"trip of {K} samples shorter than l_max = {l_max}")
    vbar = overpotential_from_measurement(voltage, soc, pmap)
    if candidates is None:
        candidates = detect_segments(speed, cfg)
    init = IndexInterval(0, l_max)
    theta = np.empty((K, 3))
    updated = np.zeros(K, dtype=bool)
    selected, failed = [], []
    current_theta = np.asarray(theta0, dtype=float)
    pos = 0
    for seg in [init, *candidates]:
        theta[pos : seg.end - 1] = current_theta
        try:
            current_theta = np.array(_tls_on(vbar, current, seg))
        except UninformativeSegment:
            failed.append(seg)
        else:
            selected.append(seg)
            updated[seg.end - 1] = True
        pos = seg.end - 1
    theta[pos:] = current_theta
    return EstimateTrace(theta, selected, "DS-TLS", updated, failed)


def tls_fixed_run(current, voltage, soc, pmap: EcmParamMap, l_tls: int, theta0=(0.0, 0.0, 0.0)) -> EstimateTrace:
    """TLS on consecutive disjoint blocks of ``l_tls`` samples; a trailing partial block is unused."""
    current = np.asarray(current, dtype=float)
    K = _check_aligned(current, voltage, soc)
    if l_tls < 5:
        raise PipelineError("l_tls must be >= 5")
    if l_tls > K:
        raise PipelineError(f"l_tls = {l_tls} exceeds trip length {K}")
    vbar = overpotential_from_measurement(voltage, soc, pmap)
    theta = np.empty((K, 3))
    updated = np.zeros(K, dtype=bool)
    selected, failed = [], []
    current_theta = np.asarray(theta0, dtype=float)
    pos = 0
    for begin in range(0, K - l_tls + 1, l_tls):
        seg = IndexInterval(begin, begin + l_tls)
        theta[pos : seg.end - 1] = current_theta
        try:
            current_theta = np.array(_tls_on(vbar, current, seg))
        except UninformativeSegment:
            failed.append(seg)
        else:
            selected.append(seg)
            updated[seg.end - 1] = True
        pos = seg.end - 1
    theta[pos:] = current_theta
    return EstimateTrace(theta, selected, "TLS", updated, failed)


def rls_run(current, voltage, soc, pmap: EcmParamMap, lam=0.999, theta0=(0.0, 0.0, 0.0), p0=None) -> EstimateTrace:
    """RLS at every sample from ``k = 1`` (the first sample has no lagged regressor)."""
    current = np.asarray(current, dtype=float)
    K = _check_aligned(current, voltage, soc)
    if not 0 < lam <= 1:
        raise EstimationError(f"forgetting factor must be in (0, 1], got {lam}")
    p0 = np.diag([1e6, 1e6, 1e6]) if p0 is None else np.asarray(p0, dtype=float)
    if p0.ndim == 1:
        p0 = np.diag(p0)
    vbar = overpotential_from_measurement(voltage, soc, pmap)
    theta, _ = kernels.rls_filter(vbar, current, lam, theta0, p0)
    updated = np.ones(K, dtype=bool)
    updated[0] = False
    return EstimateTrace(theta, [], "RLS", updated)
