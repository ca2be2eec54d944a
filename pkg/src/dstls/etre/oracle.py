"""Brute-force reference matcher used to test :func:`match_all`.

Enumerates every interval and decides membership by memoised recursive
descent over the expression tree. Deliberately naive: no run-length
tricks, no relation algebra.
"""

from __future__ import annotations

import sys

from ..signal import IndexInterval, SampledSignal
from .ast import Any, Concat, Expr, Plus, Tube, Union, Within, is_bare_any_within

MAX_ORACLE_LENGTH = 500


class OracleTooLong(ValueError):
    pass


def _compile(node: Expr, values: list, period: float, n: int):
    """Return ``(member, memo)``; ``member(b, e) -> bool`` is memoised per interval."""
    # memo[b][e]: 0 unknown, 1 false, 2 true
    memo = [bytearray(n + 1) for _ in range(n + 1)]

    if isinstance(node, Tube):
        c, d = node.center, node.delta

        def decide(b, e):
            return e == b + 1 and abs(values[b] - c) <= d

    elif isinstance(node, Any):

        def decide(b, e):
            return True

    elif isinstance(node, Union):
        left, _ = _compile(node.left, values, period, n)
        right, _ = _compile(node.right, values, period, n)

        def decide(b, e):
            return left(b, e) or right(b, e)

    elif isinstance(node, Concat):
        left, left_memo = _compile(node.left, values, period, n)
        right, _ = _compile(node.right, values, period, n)

        def decide(b, e):
            row = left_memo[b]
            for m in range(b, e + 1):
                if row[m] == 1:  # known non-member, skip the call
                    continue
                if left(b, m) and right(m, e):
                    return True
            return False

    elif isinstance(node, Plus):
        inner, inner_memo = _compile(node.inner, values, period, n)

        def decide(b, e):
            if b == e:
                return inner(b, b)
            row = inner_memo[b]
            # first piece non-empty, so the recursion always shrinks
            for m in range(b + 1, e + 1):
                if row[m] == 1:
                    continue
                if inner(b, m) and (m == e or member(m, e)):
                    return True
            return False

    elif isinstance(node, Within):
        inner, _ = _compile(node.inner, values, period, n)
        lo, hi = node.lo, node.hi

        def decide(b, e):
            return lo <= (e - b) * period <= hi and inner(b, e)

    else:
        raise TypeError(f"not an expression: {node!r}")

    def member(b, e):
        row = memo[b]
        v = row[e]
        if v:
            return v == 2
        res = decide(b, e)
        row[e] = 2 if res else 1
        return res

    return member, memo


def brute_force_match(expr: Expr, signal: SampledSignal) -> frozenset:
    n = len(signal)
    if n > MAX_ORACLE_LENGTH:
        raise OracleTooLong(f"signal too long for oracle: {n} > {MAX_ORACLE_LENGTH}")
    member, _ = _compile(expr, signal.values.tolist(), signal.period, n)
    allow_empty = is_bare_any_within(expr)
    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 20 * n + 1000))
    try:
        return frozenset(
            IndexInterval(b, e)
            for b in range(n + 1)
            for e in range(b if allow_empty else b + 1, n + 1)
            if member(b, e)
        )
    finally:
        sys.setrecursionlimit(old_limit)
