"""Extended timed regular expressions: syntax tree, text syntax, matchers."""

from .ast import Any, Concat, Expr, ExprError, Plus, Tube, Union, Within
from .matcher import PreparedMatcher, chain_form, match_all, relation_table
from .oracle import OracleTooLong, brute_force_match
from .parser import ParseError, parse_etre, to_text


def build_transition_expr(v_h, dv_h, v_m, dv_m, d, d_tmax) -> Expr:
    """Highway-to-motorway or motorway-to-highway transition.

    Each side is a tube run of ``d`` seconds; between them any samples for
    at most ``d_tmax`` seconds.
    """
    args = dict(v_h=v_h, dv_h=dv_h, v_m=v_m, dv_m=dv_m, d=d, d_tmax=d_tmax)
    bad = [k for k, x in args.items() if x < 0]
    if bad:
        raise ExprError(f"arguments must be non-negative: {', '.join(bad)}")
    highway = Within(Plus(Tube(v_h, dv_h)), d, d)
    motorway = Within(Plus(Tube(v_m, dv_m)), d, d)
    gap = Within(Any(), 0, d_tmax)
    return Union(Concat(Concat(highway, gap), motorway), Concat(Concat(motorway, gap), highway))


__all__ = [
    "Any",
    "Concat",
    "Expr",
    "ExprError",
    "OracleTooLong",
    "ParseError",
    "Plus",
    "PreparedMatcher",
    "Tube",
    "Union",
    "Within",
    "brute_force_match",
    "build_transition_expr",
    "chain_form",
    "match_all",
    "parse_etre",
    "relation_table",
    "to_text",
]
