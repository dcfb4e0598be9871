"""Built-in example systems."""
from __future__ import annotations

from fractions import Fraction
from functools import partial

from .groups import GroupSet
from .rank_one import ClosedForm, RankOneSystem, build_cut_and_stack


def odometer(horizon: int = 10) -> RankOneSystem:
    """Binary odometer: C_n = {0, 2^(n-1)}, F_n = [0, 2^n)."""
    cert = ClosedForm("#F_n / 2^n = 1", trend=lambda n: Fraction(1), limit=Fraction(1), spacer_free=True)
    sys = build_cut_and_stack(lambda n, h: 2, lambda n, h: (0, 0), horizon, "odometer", cert)
    return _with_rule(sys, odometer)


def chacon(horizon: int = 10) -> RankOneSystem:
    """Chacon's map: C_{n+1} = {0, h_n, 2h_n + 1}, h_{n+1} = 3h_n + 1."""
    cert = ClosedForm("#F_n / 3^n = (3^(n+1) - 1) / (2 * 3^n)",
                      trend=lambda n: Fraction(3 ** (n + 1) - 1, 2 * 3 ** n), limit=Fraction(3, 2))
    sys = build_cut_and_stack(lambda n, h: 3, lambda n, h: (0, 1, 0), horizon, "chacon", cert)
    return _with_rule(sys, chacon)


def hk(horizon: int = 10) -> RankOneSystem:
    """Infinite-measure example with C_{n+1} = {0, 3h_n} and h_{n+1} = 4h_n."""
    cert = ClosedForm("#F_n / 2^n = 2^n", trend=lambda n: Fraction(2 ** n), diverges=True)
    sys = build_cut_and_stack(lambda n, h: 2, lambda n, h: (2 * h, 0), horizon, "hk", cert)
    return _with_rule(sys, hk)


def z2lh(horizon: int = 4, factor: int = 10) -> RankOneSystem:
    """Z^2 system with box shapes and two far-apart translates per level.

    C_{n+1} = {0, factor * s_n * e_1} where s_n is the x-side of F_n, and F_{n+1}
    is the bounding box of F_n + C_{n+1} grown by s_n on every side, so that
    e_1 + F_n + C_{n+1} and e_2 + F_n + C_{n+1} stay inside F_{n+1}.
    """
    F = GroupSet.box((0, 0), (1, 1))
    Fs, Cs = [F], []
    for _ in range(horizon):
        (x0, y0), (x1, y1) = F.box_bounds()
        s = x1 - x0
        v = factor * s
        Cs.append(GroupSet([(0, 0), (v, 0)], dim=2))
        F = GroupSet.box((x0 - s, y0 - s), (x1 + v + s, y1 + s))
        Fs.append(F)
    sys = RankOneSystem(tuple(Fs), tuple(Cs), "z2lh" if factor == 10 else f"z2lh(factor={factor})")
    return _with_rule(sys, partial(z2lh, factor=factor))


def _with_rule(sys: RankOneSystem, rule) -> RankOneSystem:
    return RankOneSystem(sys.Fs, sys.Cs, sys.name, sys.certificate, rule)


RANK_ONE = {"odometer": odometer, "chacon": chacon, "hk": hk, "z2lh": z2lh}


def names() -> list[str]:
    from . import finite_catalog
    return sorted(RANK_ONE) + sorted(finite_catalog.RANK_K)


def get(name: str, **params):
    """Look up a catalog system by name (rank one or rank k)."""
    if name in RANK_ONE:
        return RANK_ONE[name](**params)
    from . import finite_catalog
    if name in finite_catalog.RANK_K:
        return finite_catalog.RANK_K[name](**params)
    raise KeyError(f"unknown catalog system {name!r}; known: {', '.join(names())}")
