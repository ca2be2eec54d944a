"""Expression tree for extended timed regular expressions over speed samples."""

from __future__ import annotations

from dataclasses import dataclass


class ExprError(ValueError):
    pass


class Expr:
    """Base class; nodes are immutable and hashable."""

    def __or__(self, other: "Expr") -> "Union":
        return Union(self, other)

    def __add__(self, other: "Expr") -> "Concat":
        return Concat(self, other)

    def __str__(self) -> str:
        from .parser import to_text

        return to_text(self)


@dataclass(frozen=True)
class Tube(Expr):
    """One sample with ``|v - center| <= delta``."""

    center: float
    delta: float

    def __post_init__(self):
        if self.delta < 0:
            raise ExprError(f"negative delta: {self.delta}")


@dataclass(frozen=True)
class Any(Expr):
    """Any sequence of samples, including the empty one."""


@dataclass(frozen=True)
class Concat(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Union(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Plus(Expr):
    inner: Expr


@dataclass(frozen=True)
class Within(Expr):
    """``inner`` restricted to durations ``lo <= count * period <= hi``."""

    inner: Expr
    lo: float
    hi: float

    def __post_init__(self):
        if self.lo < 0:
            raise ExprError(f"negative duration bound: {self.lo}")
        if self.lo > self.hi:
            raise ExprError(f"lo > hi: [{self.lo}, {self.hi}]")


def depth(expr: Expr) -> int:
    if isinstance(expr, (Tube, Any)):
        return 1
    if isinstance(expr, (Concat, Union)):
        return 1 + max(depth(expr.left), depth(expr.right))
    return 1 + depth(expr.inner)


def is_bare_any_within(expr: Expr) -> bool:
    """Only this top-level form may report zero-length matches."""
    return isinstance(expr, Within) and isinstance(expr.inner, Any)
