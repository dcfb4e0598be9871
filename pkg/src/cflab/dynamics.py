"""Correlation sums mu(A & T_k^{-1} B) computed in the depth-L tower picture.

A cylinder of level n <= L occupies a set of levels of the depth-L castle.  For
a shift k a position p of A contributes when p + k is a position of B in the
same tower; positions with p + k past the top of their tower are the escape
mass, which widens the interval instead of being guessed.

Two engines are provided.  ``TowerModel`` lists positions explicitly (rank k,
and single towers whose top wraps onto the base).  ``DigitPairTable`` counts
pairs of digit strings by the value of sum (d_j - c_j), which reaches depths
where the towers have astronomically many levels.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np

from .certified import CertifiedValue, frac_str
from .errors import InconclusiveDepth, PreconditionFailed, UnsupportedShape
from .finite_rank import (
    CylinderK,
    MeasureSolution,
    RankKSystem,
    balanced_diagnostics,
    cylinder_measure_k,
    from_rank_one,
    solve_invariant_measure,
)
from .groups import GroupSet, diffset, sub, sumset, sumset_all
from .rank_one import Cylinder, RankOneSystem, large_holes_check, measure, refine

AnySystem = Union[RankOneSystem, RankKSystem]
AnyCylinder = Union[Cylinder, CylinderK]

_INT64_LIMIT = 2 ** 62


def _as_k(sys: AnySystem) -> RankKSystem:
    return from_rank_one(sys) if isinstance(sys, RankOneSystem) else sys


def _cyl_k(cyl: AnyCylinder) -> CylinderK:
    if isinstance(cyl, CylinderK):
        return cyl
    return CylinderK(cyl.level, ((1, cyl.support),))


def base_cylinder(sys: AnySystem) -> AnyCylinder:
    """X_0 = [F_0]_0."""
    if isinstance(sys, RankOneSystem):
        return Cylinder(0, sys.F(0))
    return CylinderK(0, tuple((i, sys.F(0, i)) for i in sys.marks))


def cylinder_mass(sys: AnySystem, cyl: AnyCylinder, sol: MeasureSolution | None = None) -> CertifiedValue:
    if isinstance(sys, RankOneSystem) and isinstance(cyl, Cylinder):
        return CertifiedValue.exact(measure(sys, cyl))
    ksys = _as_k(sys)
    sol = sol or solve_invariant_measure(ksys)
    return cylinder_measure_k(ksys, sol, _cyl_k(cyl))


# -- explicit engine -------------------------------------------------------

class TowerModel:
    """The castle at depth L with every cylinder expanded into level positions.

    ``sol`` supplies the level masses; by default the system is extended a few
    stages past L (when it has a generator rule) so that lambda_L is pinned down
    by later placements.
    """

    def __init__(self, sys: AnySystem, depth: int, sol: MeasureSolution | None = None, pad: int = 2):
        ksys = _as_k(sys)
        if ksys.dim != 1:
            raise UnsupportedShape("tower model needs an action of Z")
        if depth > ksys.horizon:
            ksys = ksys.extend(depth)
        if sol is None:
            solver_sys = ksys
            if ksys.k > 1 and ksys.rule is not None and ksys.horizon < depth + pad:
                solver_sys = ksys.extend(depth + pad)
            sol = solve_invariant_measure(solver_sys)
        self.sys = ksys
        self.depth = depth
        self.sol = sol
        self.heights = ksys.heights(depth)
        if max(self.heights) >= _INT64_LIMIT:
            raise UnsupportedShape(f"tower heights at depth {depth} exceed the explicit engine")
        self.wrap = ksys.wraps()
        self._cache: dict = {}

    def positions(self, cyl: AnyCylinder) -> dict[int, np.ndarray]:
        """Sorted level positions of the cylinder in each tower at depth L."""
        c = _cyl_k(cyl)
        key = (c.level, c.parts)
        if key in self._cache:
            return self._cache[key]
        if c.level > self.depth:
            raise ValueError(f"cylinder level {c.level} exceeds depth {self.depth}")
        out: dict[int, list] = {j: [] for j in self.sys.marks}
        by_src: dict[int, list] = {}
        for e in self.sys.composite_edges(c.level, self.depth):
            by_src.setdefault(e.src, []).append(e)
        for i, part in c.parts:
            pts = np.array(part.ints(), dtype=np.int64)
            for e in by_src.get(i, ()):
                out[e.tgt].append(pts + e.g[0])
        res = {j: (np.sort(np.concatenate(v)) if v else np.zeros(0, dtype=np.int64)) for j, v in out.items()}
        self._cache[key] = res
        return res

    def _pairs_in(self, a: np.ndarray, b: np.ndarray, lo: int, hi: int) -> int:
        """#{(p, q) in a x b : lo <= q - p < hi}."""
        if len(a) == 0 or len(b) == 0 or hi <= lo:
            return 0
        return int((np.searchsorted(b, a + hi, "left") - np.searchsorted(b, a + lo, "left")).sum())

    def window_counts(self, A: AnyCylinder, B: AnyCylinder, k0: int, k1: int) -> tuple[list[int], list[int]]:
        """Per tower: matched pairs and unresolved (position, shift) pairs over shifts k0 <= k < k1, k0 >= 0.

        An unresolved pair is charged either to a point of A that leaves its
        tower through the top, or to a point of B that was entered from the
        bottom; both counts bound the same unknown mass, and the smaller one
        (after weighting by level masses) is kept.
        """
        if k0 < 0:
            raise ValueError("window must start at a nonnegative shift")
        pa, pb = self.positions(A), self.positions(B)
        hits, esc, entered = [], [], []
        for j in self.sys.marks:
            a, b, h = pa[j], pb[j], self.heights[j - 1]
            if self.wrap:
                total = 0
                t0 = (k0 // h) * h
                while t0 < k1:
                    u, v = max(k0, t0) - t0, min(k1, t0 + h) - t0
                    total += self._pairs_in(a, b, u, v) + self._pairs_in(a, b, u - h, v - h)
                    t0 += h
                hits.append(total)
                esc.append(0)
            else:
                hits.append(self._pairs_in(a, b, k0, k1))
                start = np.maximum(k0, h - a)
                esc.append(int(np.clip(k1 - start, 0, None).sum()))
                entered.append(int(np.clip(k1 - np.maximum(k0, b + 1), 0, None).sum()))
        if not self.wrap and self.sol.linear(self.depth, entered).hi < self.sol.linear(self.depth, esc).hi:
            esc = entered
        return hits, esc

    def _value(self, hits: Sequence[int], esc: Sequence[int]) -> CertifiedValue:
        base = self.sol.linear(self.depth, hits)
        extra = self.sol.linear(self.depth, esc).hi if any(esc) else Fraction(0)
        return CertifiedValue(base.lo, base.hi + extra)

    def correlation(self, A: AnyCylinder, B: AnyCylinder, k: int) -> CertifiedValue:
        if k < 0:
            return self.correlation(B, A, -k)
        return self._value(*self.window_counts(A, B, k, k + 1))

    def window_sum(self, A: AnyCylinder, B: AnyCylinder, k0: int, k1: int) -> CertifiedValue:
        """Sum of correlation(A, B, k) over k0 <= k < k1 (any signs)."""
        total = CertifiedValue.exact(0)
        if k0 < 0:
            total = total + self._value(*self.window_counts(B, A, max(1, -k1 + 1), -k0 + 1))
            k0 = 0
        if k1 > k0:
            total = total + self._value(*self.window_counts(A, B, k0, k1))
        return total


# -- digit engine ----------------------------------------------------------

class DigitPairTable:
    """Multiplicities of s = sum_j (d_j - c_j) over digit pairs c_j, d_j in C_j, restricted to [lo, hi).

    Levels are processed from the top down; partial sums that cannot return to
    the window are dropped.  The few states of the upper levels are kept as
    exact Python integers and the lower levels go through numpy.
    """

    SWITCH = 512

    def __init__(self, levels: Sequence[Sequence[int]], lo: int, hi: int):
        levels = list(levels)  # top level first
        deltas = [Counter(d - c for c in lv for d in lv) for lv in levels]
        spread = [max(lv) - min(lv) for lv in levels]
        rem = [sum(spread[i + 1:]) for i in range(len(levels))]
        states = {0: 1}
        idx = 0
        while idx < len(levels) and len(states) <= self.SWITCH:
            new: dict[int, int] = {}
            r = rem[idx]
            for s, m in states.items():
                for dl, cnt in deltas[idx].items():
                    t = s + dl
                    if t + r < lo or t - r >= hi:
                        continue
                    new[t] = new.get(t, 0) + m * cnt
            states = new
            idx += 1
        self.top = sorted(states.items())
        vals = np.zeros(1, dtype=np.int64)
        cnts = np.ones(1, dtype=np.int64)
        if idx < len(levels) and self.top:
            bound = 1
            for lv in levels[idx:]:
                bound *= len(lv) ** 2
            if bound >= _INT64_LIMIT:
                raise UnsupportedShape("too many lower digit levels for the numpy stage")
            smin, smax = self.top[0][0], self.top[-1][0]
            blo, bhi = lo - smax, hi - smin
            for i in range(idx, len(levels)):
                r = rem[i]
                dl = np.array(list(deltas[i].keys()), dtype=np.int64)
                dc = np.array(list(deltas[i].values()), dtype=np.int64)
                v = (vals[:, None] + dl[None, :]).ravel()
                c = (cnts[:, None] * dc[None, :]).ravel()
                keep = (v + r >= blo) & (v - r < bhi)
                v, c = v[keep], c[keep]
                order = np.argsort(v, kind="stable")
                v, c = v[order], c[order]
                if len(v):
                    starts = np.concatenate(([0], np.flatnonzero(np.diff(v)) + 1))
                    c = np.add.reduceat(c, starts)
                    v = v[starts]
                vals, cnts = v, c
        self.vals = vals
        self.cum = np.concatenate(([0], np.cumsum(cnts)))

    def count(self, lo: int, hi: int) -> int:
        """Number of digit pairs with lo <= s < hi."""
        total = 0
        for s, m in self.top:
            a = np.searchsorted(self.vals, lo - s, "left")
            b = np.searchsorted(self.vals, hi - s, "left")
            total += m * int(self.cum[b] - self.cum[a])
        return total


def escape_count(levels: Sequence[Sequence[int]], bases: Sequence[int], h: int, k0: int, k1: int) -> int:
    """sum over p = a + c_{n+1} + ... + c_L of #{k0 <= k < k1 : p + k >= h}."""
    levels = list(levels)  # top level first
    width = k1 - k0
    if width <= 0 or not bases:
        return 0
    amin, amax = min(bases), max(bases)
    rmax = [sum(max(lv) for lv in levels[i:]) for i in range(len(levels) + 1)]
    rmin = [sum(min(lv) for lv in levels[i:]) for i in range(len(levels) + 1)]
    leaves = [1] * (len(levels) + 1)
    for i in range(len(levels) - 1, -1, -1):
        leaves[i] = leaves[i + 1] * len(levels[i])
    total = 0
    states = {0: 1}
    for i in range(len(levels) + 1):
        new: dict[int, int] = {}
        for s, m in states.items():
            if s + amax + rmax[i] + k1 - 1 < h:
                continue
            if s + amin + rmin[i] + k0 >= h:
                total += m * leaves[i] * len(bases) * width
                continue
            if i == len(levels):
                total += m * sum(max(0, k1 - max(k0, h - (s + a))) for a in bases)
                continue
            for c in levels[i]:
                new[s + c] = new.get(s + c, 0) + m
        states = new
    return total


def _rank_one_digits(sys: RankOneSystem, n: int, L: int) -> list[list[int]]:
    return [sys.C(j).ints() for j in range(L, n, -1)]


def _common_level(sys: RankOneSystem, A: Cylinder, B: Cylinder) -> tuple[Cylinder, Cylinder]:
    n = max(A.level, B.level)
    return refine(sys, A, n), refine(sys, B, n)


def digit_window_sum(sys: RankOneSystem, A: Cylinder, B: Cylinder, k0: int, k1: int, depth: int) -> CertifiedValue:
    """Sum over k0 <= k < k1 (k0 >= 0) of mu([A] & T_k^{-1}[B]) using digit-pair counting."""
    if sys.dim != 1 or not sys.is_interval_system():
        raise UnsupportedShape("digit engine needs interval towers over Z")
    if depth > sys.horizon:
        sys = sys.extend(depth)
    A, B = _common_level(sys, A, B)
    n = A.level
    a_pts, b_pts = A.support.ints(), B.support.ints()
    diffs = Counter(b - a for a in a_pts for b in b_pts)
    levels = _rank_one_digits(sys, n, depth)
    table = DigitPairTable(levels, k0 - max(diffs), k1 - min(diffs))
    hits = sum(m * table.count(k0 - e, k1 - e) for e, m in diffs.items())
    # unresolved pairs: points of A leaving through the top, or (mirrored) points of B entered from the bottom
    esc = min(escape_count(levels, a_pts, sys.height(depth), k0, k1),
              escape_count([[-c for c in lv] for lv in levels], [-b for b in b_pts], 1, k0, k1))
    lam = Fraction(1, sys.prod(depth))
    return CertifiedValue(hits * lam, (hits + esc) * lam)


# -- public operations -----------------------------------------------------

def _engine_for(sys: AnySystem, engine: str) -> str:
    if engine != "auto":
        return engine
    if isinstance(sys, RankOneSystem) and sys.is_interval_system() and not from_rank_one(sys).wraps():
        return "digits"
    return "tower"


def correlation(sys: AnySystem, A: AnyCylinder, B: AnyCylinder, k: int, depth: int,
                sol: MeasureSolution | None = None, engine: str = "auto") -> CertifiedValue:
    """Certified mu(A & T_k^{-1} B), i.e. the mass of points of A whose k-th iterate lies in B."""
    if _engine_for(sys, engine) == "digits":
        if k < 0:
            return digit_window_sum(sys, B, A, -k, -k + 1, depth)
        return digit_window_sum(sys, A, B, k, k + 1, depth)
    return TowerModel(sys, depth, sol).correlation(A, B, k)


def window_sum(sys: AnySystem, A: AnyCylinder, B: AnyCylinder, k0: int, k1: int, depth: int,
               sol: MeasureSolution | None = None, engine: str = "auto") -> CertifiedValue:
    if _engine_for(sys, engine) == "digits":
        total = CertifiedValue.exact(0)
        if k0 < 0:
            total = total + digit_window_sum(sys, B, A, max(1, -k1 + 1), -k0 + 1, depth)
            k0 = 0
        if k1 > k0:
            total = total + digit_window_sum(sys, A, B, k0, k1, depth)
        return total
    return TowerModel(sys, depth, sol).window_sum(A, B, k0, k1)


@dataclass
class CorrelationReport:
    A: str
    B: str
    window: str
    depth: int
    numerator: CertifiedValue
    denominator: CertifiedValue | None = None
    ratio: CertifiedValue | None = None
    target: CertifiedValue | None = None
    per_shift: list[tuple[int, CertifiedValue]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def relative_error(self) -> CertifiedValue | None:
        """Range of |ratio - target| / target over the two intervals."""
        if self.ratio is None or self.target is None or self.target.lo <= 0:
            return None
        lo_gap = max(Fraction(0), self.ratio.lo - self.target.hi, self.target.lo - self.ratio.hi)
        hi_gap = max(abs(self.ratio.hi - self.target.lo), abs(self.target.hi - self.ratio.lo))
        return CertifiedValue(lo_gap / self.target.hi, hi_gap / self.target.lo)

    def to_json(self) -> dict:
        out = {"A": self.A, "B": self.B, "window": self.window, "depth": self.depth,
               "numerator": self.numerator.to_json()}
        for key in ("denominator", "ratio", "target"):
            v = getattr(self, key)
            if v is not None:
                out[key] = v.to_json()
        if self.per_shift:
            out["per_shift"] = [{"k": k, **v.to_json()} for k, v in self.per_shift]
        if self.notes:
            out["notes"] = self.notes
        return out


def _check_in_base_rank_one(sys: RankOneSystem, cyl: Cylinder) -> None:
    S = sumset(sys.F(0), sys.offsets_sum(0, cyl.level))
    if not cyl.support.issubset(S):
        raise PreconditionFailed(f"{cyl} is not contained in [F_0]_0")


def _check_in_base_rank_k(sys: RankKSystem, cyl: CylinderK) -> None:
    pos: dict[int, set] = {j: set() for j in sys.marks}
    for e in sys.composite_edges(0, cyl.level):
        for f in sys.F(0, e.src):
            pos[e.tgt].add(f[0] + e.g[0])
    for i, part in cyl.parts:
        if not set(part.ints()) <= pos[i]:
            raise PreconditionFailed(f"{cyl} is not contained in X_0")


def _ratio(num: CertifiedValue, den: CertifiedValue) -> CertifiedValue:
    if den.lo <= 0:
        raise InconclusiveDepth("denominator interval reaches 0; increase the depth")
    return num / den


def wre_ratio_rank_one(sys: RankOneSystem, A: Cylinder, B: Cylinder, l: int, depth: int,
                       engine: str = "auto") -> CorrelationReport:
    """sum_{0 <= k < h_l} mu(A & T_k^{-1} B) against the same sum for A = B = [F_0]_0."""
    _check_in_base_rank_one(sys, A)
    _check_in_base_rank_one(sys, B)
    h_l = len((sys if l <= sys.horizon else sys.extend(l)).F(l))
    X0 = base_cylinder(sys)
    num = window_sum(sys, A, B, 0, h_l, depth, engine=engine)
    den = window_sum(sys, X0, X0, 0, h_l, depth, engine=engine)
    target = CertifiedValue.exact(measure(sys, A) * measure(sys, B))
    return CorrelationReport(str(A), str(B), f"[0, {h_l})", depth, num, den, _ratio(num, den), target)


def wre_ratio_rank_k(sys: RankKSystem, A: CylinderK, B: CylinderK, l: int, depth: int,
                     sol: MeasureSolution | None = None) -> CorrelationReport:
    """As wre_ratio_rank_one with h_l = min_i #F_l^i and X_0 as the reference set."""
    sys = _as_k(sys)
    A, B = _cyl_k(A), _cyl_k(B)
    _check_in_base_rank_k(sys, A)
    _check_in_base_rank_k(sys, B)
    model = TowerModel(sys, depth, sol)
    h_l = min(len(model.sys.F(l, i)) for i in model.sys.marks)
    X0 = base_cylinder(model.sys)
    num = model.window_sum(A, B, 0, h_l)
    den = model.window_sum(X0, X0, 0, h_l)
    mA = cylinder_measure_k(model.sys, model.sol, A)
    mB = cylinder_measure_k(model.sys, model.sol, B)
    return CorrelationReport(str(A), str(B), f"[0, {h_l})", depth, num, den, _ratio(num, den), mA * mB)


def a_n(sys: AnySystem, Y: AnyCylinder, window: GroupSet, depth: int,
        sol: MeasureSolution | None = None, engine: str = "auto") -> CertifiedValue:
    """sum over g in the window of mu(Y & T_g Y), divided by mu(Y)^2."""
    mY = cylinder_mass(sys, Y, sol)
    if mY.hi == 0:
        raise ValueError("Y has zero measure")
    total = CertifiedValue.exact(0)
    pts = window.ints()
    runs, start = [], None
    for i, x in enumerate(pts):
        if start is None:
            start = x
        if i + 1 == len(pts) or pts[i + 1] != x + 1:
            runs.append((start, x + 1))
            start = None
    for k0, k1 in runs:
        total = total + window_sum(sys, Y, Y, k0, k1, depth, sol, engine)
    return total / (mY * mY)


@dataclass
class BoundReport:
    ratio: CertifiedValue
    bound: Fraction
    passed: bool
    margin: Fraction

    def to_json(self) -> dict:
        return {"ratio": self.ratio.to_json(), "bound": frac_str(self.bound), "pass": self.passed,
                "margin": frac_str(self.margin)}


def bound_check_rank_one(sys: RankOneSystem, A: Cylinder, B: Cylinder, l: int, depth: int,
                         tolerance=Fraction(1, 10 ** 9)) -> BoundReport:
    """Certified ratio against 2 min(mu A, mu B)."""
    rep = wre_ratio_rank_one(sys, A, B, l, depth)
    bound = 2 * min(measure(sys, A), measure(sys, B))
    margin = bound - rep.ratio.hi
    return BoundReport(rep.ratio, bound, rep.ratio.hi <= bound + Fraction(tolerance), margin)


def bound_check_rank_k(sys: RankKSystem, A: CylinderK, B: CylinderK, l: int, depth: int,
                       sol: MeasureSolution | None = None, tolerance=Fraction(1, 10 ** 9)) -> BoundReport:
    """Certified ratio against 4k min(mu A, mu B) / min_j delta_j, with delta_j read at level l."""
    ksys = _as_k(sys)
    model = TowerModel(ksys, depth, sol)
    rep = wre_ratio_rank_k(ksys, A, B, l, depth, model.sol)
    bal = balanced_diagnostics(model.sys.extend(max(l, depth)), model.sol)
    dmin = min(v.hi for v in bal.deltas[l])
    if dmin <= 0:
        raise InconclusiveDepth("delta estimate is not positive")
    mA = cylinder_measure_k(model.sys, model.sol, _cyl_k(A))
    mB = cylinder_measure_k(model.sys, model.sol, _cyl_k(B))
    bound = 4 * ksys.k * min(mA.lo, mB.lo) / dmin
    margin = bound - rep.ratio.hi
    return BoundReport(rep.ratio, bound, rep.ratio.hi <= bound + Fraction(tolerance), margin)


# -- Z^d window sums -------------------------------------------------------

def _positions_nd(sys: RankOneSystem, cyl: Cylinder, L: int) -> np.ndarray:
    pts = sumset(cyl.support, sys.offsets_sum(cyl.level, L))
    return np.array(pts.sorted(), dtype=np.int64).reshape(-1, sys.dim)


def abelian_window_sums(sys: RankOneSystem, A: Cylinder, B: Cylinder, n: int, depth: int) -> CorrelationReport:
    """sum over g in F_n - F_n of mu(A & T_g^{-1} B) for Z^d actions with box shapes.

    The reference sum (A = B = [F_0]_0) is compared with #(C_1 + ... + C_n)
    whenever the large-holes condition holds for e_1..e_d at every level below
    the depth; the comparison is reported in ``notes``.
    """
    if not (sys.F(n).is_box and sys.F(depth).is_box):
        raise UnsupportedShape("window sums need box shapes")
    _check_in_base_rank_one(sys, A)
    _check_in_base_rank_one(sys, B)
    W = diffset(sys.F(n), sys.F(n))
    wlo, whi = W.box_bounds()
    flo, fhi = sys.F(depth).box_bounds()
    wsize = len(W)
    lam = Fraction(1, sys.prod(depth))

    def window_total(X: Cylinder, Y: Cylinder) -> CertifiedValue:
        px, py = _positions_nd(sys, X, depth), _positions_nd(sys, Y, depth)
        hits = 0
        for p in px:
            d = py - p
            hits += int(np.all((d >= wlo) & (d < whi), axis=1).sum())
        inside = np.prod(np.clip(np.minimum(px + np.array(whi), fhi) - np.maximum(px + np.array(wlo), flo), 0, None),
                         axis=1)
        esc = int(wsize * len(px) - inside.sum())
        return CertifiedValue(hits * lam, (hits + esc) * lam)

    X0 = base_cylinder(sys)
    num = window_total(A, B)
    den = window_total(X0, X0)
    target = CertifiedValue.exact(measure(sys, A) * measure(sys, B))
    rep = CorrelationReport(str(A), str(B), "F_n - F_n", depth, num, den, _ratio(num, den), target)
    units = [tuple(int(a == b) for b in range(sys.dim)) for a in range(sys.dim)]
    holes = all(large_holes_check(sys, g, m)[0] for g in units for m in range(depth))
    if holes:
        expected = len(sumset_all((sys.C(j) for j in range(1, n + 1)), sys.dim))
        ok = den.lo == den.hi == expected
        rep.notes.append(f"reference sum {'equals' if ok else 'differs from'} #(C_1+...+C_n) = {expected}")
    return rep


def offset_count_identity(sys: RankOneSystem, n: int, depth: int) -> tuple[bool, CertifiedValue, int]:
    """Whether the reference window sum at level n equals #(C_1 + ... + C_n) exactly."""
    X0 = base_cylinder(sys)
    rep = abelian_window_sums(sys, X0, X0, n, depth)
    expected = len(sumset_all((sys.C(j) for j in range(1, n + 1)), sys.dim))
    return rep.denominator.lo == rep.denominator.hi == expected, rep.denominator, expected


def per_shift_table(sys: AnySystem, A: AnyCylinder, B: AnyCylinder, shifts: Iterable[int], depth: int,
                    sol: MeasureSolution | None = None) -> list[tuple[int, CertifiedValue]]:
    model = TowerModel(sys, depth, sol) if _engine_for(sys, "auto") == "tower" else None
    out = []
    for k in shifts:
        v = model.correlation(A, B, k) if model else correlation(sys, A, B, k, depth)
        out.append((k, v))
    return out
