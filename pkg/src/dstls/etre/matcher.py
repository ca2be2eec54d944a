"""Discrete-time matching of expressions against sampled signals.

Two engines share one semantics. Expressions that normalise to a union of
*chains* (concatenations of tube runs and wildcards, each with a count
range) are matched by the run-length kernel in :mod:`dstls.kernels`.
Everything else goes through a relation-matrix engine: each subexpression
becomes an ``(n+1) x (n+1)`` boolean table ``M[b, e]`` over all intervals.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .. import kernels
from ..signal import IndexInterval, SampledSignal
from .ast import Any, Concat, Expr, Plus, Tube, Union, Within, is_bare_any_within

MatchSet = frozenset  # frozenset[IndexInterval]

MAX_CHAINS = 64
UNBOUNDED = np.iinfo(np.int64).max // 4


def allowed_counts(lo: float, hi: float, period: float, n: int) -> tuple[int, int]:
    """Contiguous range of sample counts ``c <= n`` with ``lo <= c*period <= hi``.

    Returns ``(cmin, cmax)``; ``cmin > cmax`` means no count qualifies.
    """
    cmin, cmax = n + 1, -1
    for c in range(n + 1):
        if lo <= c * period <= hi:
            cmin = min(cmin, c)
            cmax = c
        elif c * period > hi:
            break
    return cmin, cmax


# -- chain normal form ------------------------------------------------------


@dataclass(frozen=True)
class _Item:
    tube: Tube | None  # None: wildcard
    unbounded: bool  # tube run of any length >= 1 (Plus) vs exactly one sample
    bounds: tuple[tuple[float, float], ...] = ()


def _item(expr: Expr) -> _Item | None:
    if isinstance(expr, Tube):
        return _Item(expr, False)
    if isinstance(expr, Any):
        return _Item(None, True)
    if isinstance(expr, Plus):
        inner = _item(expr.inner)
        if inner is None or inner.bounds:
            return None
        return _Item(inner.tube, True)
    if isinstance(expr, Within):
        inner = _item(expr.inner)
        if inner is None:
            return None
        return _Item(inner.tube, inner.unbounded, inner.bounds + ((expr.lo, expr.hi),))
    return None


def chain_form(expr: Expr) -> list[list[_Item]] | None:
    """Rewrite ``expr`` as a union of item chains, or ``None`` if not possible."""
    item = _item(expr)
    if item is not None:
        return [[item]]
    if isinstance(expr, Union):
        a, b = chain_form(expr.left), chain_form(expr.right)
        if a is None or b is None or len(a) + len(b) > MAX_CHAINS:
            return None
        return a + b
    if isinstance(expr, Concat):
        a, b = chain_form(expr.left), chain_form(expr.right)
        if a is None or b is None or len(a) * len(b) > MAX_CHAINS:
            return None
        return [x + y for x, y in itertools.product(a, b)]
    return None


class _CompiledChain:
    def __init__(self, items: list[_Item], values: np.ndarray, period: float):
        n = len(values)
        k = len(items)
        self.is_tube = np.zeros(k, dtype=np.int8)
        self.cmin = np.zeros(k, dtype=np.int64)
        self.cmax = np.zeros(k, dtype=np.int64)
        self.runs = np.zeros((k, n), dtype=np.int64)
        self.empty = False
        for j, it in enumerate(items):
            if it.tube is None:
                lo_c, hi_c = 0, UNBOUNDED
            else:
                lo_c, hi_c = 1, (UNBOUNDED if it.unbounded else 1)
                self.is_tube[j] = 1
                self.runs[j] = _run_lengths(np.abs(values - it.tube.center) <= it.tube.delta)
            for lo, hi in it.bounds:
                a, b = allowed_counts(lo, hi, period, n)
                lo_c, hi_c = max(lo_c, a), min(hi_c, b)
            self.cmin[j], self.cmax[j] = lo_c, hi_c
            if lo_c > hi_c:
                self.empty = True

    def begins(self, e: int, lo_bound: int) -> np.ndarray:
        if self.empty:
            return np.zeros(e + 1, dtype=np.uint8)
        return kernels.chain_begins(self.is_tube, self.cmin, self.cmax, self.runs, e, lo_bound)


def _run_lengths(ok: np.ndarray) -> np.ndarray:
    """``run[i]`` = number of consecutive True values ending at index ``i``."""
    ok = ok.astype(np.int64)
    idx = np.arange(len(ok))
    last_false = np.maximum.accumulate(np.where(ok == 0, idx, -1))
    return (idx - last_false) * ok


# -- relation-matrix engine -------------------------------------------------


def _compose(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # counts stay far below 2**24, so float32 products are exact
    return (a.astype(np.float32) @ b.astype(np.float32)) > 0


def _duration_mask(n: int, lo: float, hi: float, period: float) -> np.ndarray:
    cmin, cmax = allowed_counts(lo, hi, period, n)
    gap = np.arange(n + 1)[None, :] - np.arange(n + 1)[:, None]
    return (gap >= cmin) & (gap <= cmax)


def relation_table(expr: Expr, values: np.ndarray, period: float) -> np.ndarray:
    """Boolean ``(n+1, n+1)`` table with ``M[b, e]`` true iff ``values[b:e]`` matches."""
    n = len(values)
    if isinstance(expr, Tube):
        m = np.zeros((n + 1, n + 1), dtype=bool)
        ok = np.abs(values - expr.center) <= expr.delta
        m[np.arange(n), np.arange(1, n + 1)] = ok
        return m
    if isinstance(expr, Any):
        return np.triu(np.ones((n + 1, n + 1), dtype=bool))
    if isinstance(expr, Union):
        return relation_table(expr.left, values, period) | relation_table(expr.right, values, period)
    if isinstance(expr, Concat):
        return _compose(relation_table(expr.left, values, period), relation_table(expr.right, values, period))
    if isinstance(expr, Within):
        return relation_table(expr.inner, values, period) & _duration_mask(n, expr.lo, expr.hi, period)
    if isinstance(expr, Plus):
        base = relation_table(expr.inner, values, period)
        closure = base
        while True:
            nxt = closure | _compose(closure, closure)
            if np.array_equal(nxt, closure):
                return closure
            closure = nxt
    raise TypeError(f"not an expression: {expr!r}")


# -- public API -------------------------------------------------------------


class PreparedMatcher:
    """An expression bound to one signal, answering "which matches end at ``e``".

    Precomputation (tube run lengths) is shared across queries, which is what
    the per-sample segment selector needs.
    """

    def __init__(self, expr: Expr, signal: SampledSignal):
        self.expr = expr
        self.signal = signal
        self.allow_empty = is_bare_any_within(expr)
        chains = chain_form(expr)
        self.fast = chains is not None
        if self.fast:
            self._chains = [_CompiledChain(c, signal.values, signal.period) for c in chains]
        self._table = None

    def begins_ending_at(self, e: int, lo_bound: int = 0) -> np.ndarray:
        """Sorted begin indices ``b >= lo_bound`` such that ``[b, e)`` matches."""
        if self.fast:
            mask = np.zeros(e + 1, dtype=np.uint8)
            for ch in self._chains:
                mask |= ch.begins(e, lo_bound)
            begins = np.flatnonzero(mask)
        else:
            # locality: matches inside [lo_bound, e) depend only on those samples
            window = self.signal.values[lo_bound:e]
            table = relation_table(self.expr, window, self.signal.period)
            begins = np.flatnonzero(table[:, e - lo_bound]) + lo_bound
        if not self.allow_empty:
            begins = begins[begins < e]
        return begins

    def all_matches(self) -> frozenset:
        n = len(self.signal)
        if self.fast:
            out = []
            for e in range(n + 1):
                out.extend(IndexInterval(int(b), e) for b in self.begins_ending_at(e))
            return frozenset(out)
        table = relation_table(self.expr, self.signal.values, self.signal.period)
        bs, es = np.nonzero(table)
        keep = (bs < es) | self.allow_empty
        return frozenset(IndexInterval(int(b), int(e)) for b, e in zip(bs[keep], es[keep]))


def match_all(expr: Expr, signal: SampledSignal) -> frozenset:
    """All intervals ``[b, e)`` of ``signal`` whose samples match ``expr``."""
    if len(signal) == 0:
        raise ValueError("cannot match against an empty signal")
    return PreparedMatcher(expr, signal).all_matches()


def sorted_matches(matches: Iterable[IndexInterval]) -> list[IndexInterval]:
    return sorted(matches)
