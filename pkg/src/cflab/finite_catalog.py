"""Built-in rank-2 systems."""
from __future__ import annotations

from fractions import Fraction
from functools import partial

from .finite_rank import RankKSystem, stack_castle
from .rank_one import ClosedForm

R2_ORDERS = ([1, 1, 2, 2], [2, 2, 1, 1])
FB_ORDERS = ([1, 1, 2], [2, 1])


def _with_rule(sys: RankKSystem, rule) -> RankKSystem:
    return RankKSystem(sys.k, sys.Fs, sys.Cs, sys.name, sys.certificate, rule)


def r2(horizon: int = 6) -> RankKSystem:
    """Two towers of equal height, r = [[2, 2], [2, 2]], orders 1122 and 2211."""
    cert = ClosedForm("no spacers: total mass 1", trend=lambda n: Fraction(1), limit=Fraction(1),
                      spacer_free=True)
    return _with_rule(stack_castle(2, R2_ORDERS, None, horizon, "r2", cert), r2)


def r2s(horizon: int = 6) -> RankKSystem:
    """r2 with one spacer on top of tower 1 at every stage; total mass 7/6."""
    cert = ClosedForm("total mass 1 + (1 - 4^-n) / 6",
                      trend=lambda n: 1 + (1 - Fraction(1, 4 ** n)) / 6, limit=Fraction(7, 6))
    sp = ([0, 0, 0, 1], [0, 0, 0, 0])
    return _with_rule(stack_castle(2, R2_ORDERS, sp, horizon, "r2s", cert), r2s)


def fb(horizon: int = 6) -> RankKSystem:
    """Fibonacci-type castle, r = [[2, 1], [1, 1]]: tower 1 stacks 1,1,2 and tower 2 stacks 2,1."""
    cert = ClosedForm("no spacers: total mass 1", trend=lambda n: Fraction(1), limit=Fraction(1),
                      spacer_free=True)
    return _with_rule(stack_castle(2, FB_ORDERS, None, horizon, "fb", cert), fb)


def r2_orders(orders, horizon: int = 6, name: str = "r2-custom") -> RankKSystem:
    """Same shape as r2 with other stacking orders (used for mutation tests)."""
    return stack_castle(2, orders, None, horizon, name)


RANK_K = {"r2": r2, "r2s": r2s, "fb": fb}
