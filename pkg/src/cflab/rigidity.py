"""Partial rigidity for actions of finite rank over Z.

Exactness, quasi-exactness and consecutive-ordering checks read the castle
view.  The rigidity-time search follows the pigeonhole chain over tower bases:
start at the heaviest base, repeatedly move the current set up by the height
of the tower it sits in and keep the heaviest base it lands on, and stop at the
first repeated tower.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .certified import CertifiedValue, frac_str
from .dynamics import TowerModel, _as_k
from .errors import InconclusiveDepth, PreconditionFailed
from .finite_rank import CylinderK, RankKSystem, castle_view, cylinder_measure_k, r_matrix, solve_invariant_measure
from .groups import GroupSet
from .rank_one import RankOneSystem

AnySystem = Union[RankOneSystem, RankKSystem]


def _tower_masses(sys: RankKSystem, sol, n: int) -> list[CertifiedValue]:
    hs = sys.heights(n)
    out = []
    for j in sys.marks:
        w = [0] * sys.k
        w[j - 1] = hs[j - 1]
        out.append(sol.linear(n, w))
    return out


def _normalizer(sys: RankKSystem, sol, n: int) -> CertifiedValue:
    cert = sys.certificate
    if cert is not None and cert.limit is not None:
        return CertifiedValue.exact(cert.limit)
    return sol.linear(n, sys.heights(n))


@dataclass
class ExactnessReport:
    no_spacers: list[bool]
    masses: list[CertifiedValue]
    verdict: str
    exact: bool

    def to_json(self) -> dict:
        return {"no_spacers": self.no_spacers, "min_tower_mass": [m.to_json() for m in self.masses],
                "verdict": self.verdict}


def exactness_check(sys: AnySystem, threshold=Fraction(1, 1000)) -> ExactnessReport:
    """Spacer-free stages and the trend of min_j mu(W_n^j), masses taken relative to the total."""
    ksys = _as_k(sys)
    sol = solve_invariant_measure(ksys)
    cv = castle_view(ksys)
    no_sp = [all(g == 0 for j in ksys.marks for g in cv.gaps[n][j]) for n in range(ksys.horizon)]
    masses = []
    for n in range(ksys.horizon):  # the horizon itself has undetermined level masses
        tot = _normalizer(ksys, sol, n)
        masses.append(min((m / tot for m in _tower_masses(ksys, sol, n)), key=lambda v: v.lo))
    low = min((m.lo for m in masses), default=Fraction(1))
    exact = all(no_sp) and low > threshold
    if not all(no_sp):
        verdict = f"not exact (spacers at stage {no_sp.index(False) + 1})"
    elif not exact:
        verdict = f"not exact (tower mass {frac_str(low)} <= {frac_str(Fraction(threshold))})"
    else:
        verdict = "exact rank one" if ksys.k == 1 else f"exact rank at most {ksys.k}"
    return ExactnessReport(no_sp, masses, verdict, exact)


@dataclass
class QuasiExactReport:
    R: int
    gap_trend: list[int]
    delta: Fraction
    verdict: str
    quasi_exact: bool

    def to_json(self) -> dict:
        return {"R": self.R, "gap_trend": self.gap_trend, "delta": frac_str(self.delta), "verdict": self.verdict}


def quasi_exact_params(sys: AnySystem, threshold=Fraction(1, 1000)) -> QuasiExactReport:
    """R = largest spacer run next to a placement, per stage and overall.

    A finite prefix always has some R; the run lengths are judged bounded when
    the later half of the stages does not exceed the earlier half.
    """
    ksys = _as_k(sys)
    cv = castle_view(ksys)
    ex = exactness_check(ksys, threshold)
    trend = []
    for n in range(ksys.horizon):
        runs = [g for j in ksys.marks for g in cv.gaps[n][j]]
        runs += [cv.placements[n][j][0][1] for j in ksys.marks if cv.placements[n][j]]
        trend.append(max(runs, default=0))
    R = max(trend, default=0)
    half = len(trend) // 2
    bounded = len(trend) < 2 or max(trend[half:]) <= max(trend[:half])
    delta = min((m.lo for m in ex.masses), default=Fraction(0))
    ok = bounded and delta > Fraction(threshold)
    if ok:
        verdict = "quasi-exact"
    elif not bounded:
        verdict = f"not quasi-exact (spacer runs grow: {trend[-1]} at the last stage)"
    else:
        verdict = f"not quasi-exact (tower mass {frac_str(delta)} too small)"
    return QuasiExactReport(R, trend, delta, verdict, ok)


@dataclass
class StageCheck:
    stage: int
    tower: int
    ok: bool
    witness: object = None

    def to_json(self) -> dict:
        return {"stage": self.stage, "tower": self.tower, "ok": self.ok,
                "witness": None if self.witness is None else list(self.witness)}


@dataclass
class CheckReport:
    items: list[StageCheck]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.items)

    def first_failure(self) -> StageCheck | None:
        return next((c for c in self.items if not c.ok), None)

    def to_json(self) -> dict:
        return {"ok": self.ok, "items": [c.to_json() for c in self.items]}


def _orders(ksys: RankKSystem) -> list[dict[int, list[int]]]:
    cv = castle_view(ksys)
    return [{j: [i for i, _ in cv.placements[n][j]] for j in ksys.marks} for n in range(ksys.horizon)]


def co_condition(sys: AnySystem) -> CheckReport:
    """Copies of one tower sit in a single contiguous run inside every tower of the next castle."""
    ksys = _as_k(sys)
    items = []
    for n, stage in enumerate(_orders(ksys), start=1):
        for j, order in stage.items():
            bad = None
            seen, prev = set(), None
            for i in order:
                if i != prev and i in seen:
                    bad = (i,) + tuple(order)
                    break
                seen.add(i)
                prev = i
            items.append(StageCheck(n, j, bad is None, None if bad is None else tuple(order)))
    return CheckReport(items)


@dataclass
class RelaxedCOReport:
    R: int
    L: int
    R_trend: list[int]
    L_trend: list[int]

    def to_json(self) -> dict:
        return {"R": self.R, "L": self.L, "R_trend": self.R_trend, "L_trend": self.L_trend}


def co_relaxed_condition(sys: AnySystem) -> RelaxedCOReport:
    """R: largest spacer run between neighbouring copies; L: most copies between two consecutive copies of one tower."""
    ksys = _as_k(sys)
    cv = castle_view(ksys)
    Rs, Ls = [], []
    for n in range(ksys.horizon):
        r = l = 0
        for j in ksys.marks:
            gaps = cv.gaps[n][j][:-1]
            r = max([r] + gaps)
            order = [i for i, _ in cv.placements[n][j]]
            last: dict[int, int] = {}
            for idx, i in enumerate(order):
                if i in last:
                    l = max(l, idx - last[i] - 1)
                last[i] = idx
        Rs.append(r)
        Ls.append(l)
    return RelaxedCOReport(max(Rs, default=0), max(Ls, default=0), Rs, Ls)


def nondegeneracy_check(sys: AnySystem) -> CheckReport:
    """Each tower that appears inside another appears there at least twice."""
    ksys = _as_k(sys)
    items = []
    for n in range(1, ksys.horizon + 1):
        r = r_matrix(ksys, n)
        for i in range(ksys.k):
            for j in range(ksys.k):
                ok = r[i][j] != 1
                items.append(StageCheck(n, j + 1, ok, None if ok else (i + 1, j + 1, r[i][j])))
    return CheckReport(items)


# -- rigidity times --------------------------------------------------------

@dataclass
class RigidityFinding:
    stage: int
    time: int
    tower: int
    ratio: CertifiedValue
    chain: list[int]
    a: int
    b: int
    guarantee: Fraction
    depth: int
    chain_masses: list[Fraction] = field(default_factory=list)
    scan: list[tuple[int, CertifiedValue]] = field(default_factory=list)

    @property
    def meets_guarantee(self) -> bool:
        return self.ratio.lo >= self.guarantee

    def to_json(self) -> dict:
        out = {"stage": self.stage, "time": self.time, "tower": self.tower, "ratio": self.ratio.to_json(),
               "chain": self.chain, "a": self.a, "b": self.b, "guarantee": frac_str(self.guarantee),
               "meets_guarantee": self.meets_guarantee, "depth": self.depth}
        if self.scan:
            out["scan"] = [{"shift": s, **v.to_json()} for s, v in self.scan]
        return out


def _base(n: int, j: int) -> CylinderK:
    return CylinderK(n, ((j, GroupSet([(0,)])),))


def _shift(model: TowerModel, pos: dict[int, np.ndarray], h: int) -> dict[int, np.ndarray]:
    out = {}
    for j, p in pos.items():
        top = model.heights[j - 1]
        q = p + h
        out[j] = np.sort(q % top) if model.wrap else q[q < top]
    return out


def _mass_lo(model: TowerModel, pos: dict[int, np.ndarray]) -> Fraction:
    return model.sol.linear(model.depth, [len(pos[j]) for j in model.sys.marks]).lo


def find_rigidity_time(sys: AnySystem, n: int, depth: int | None = None, tie_order: Sequence[int] | None = None,
                       scan_width: int | None = None) -> RigidityFinding:
    """Pigeonhole chain over the bases of the n-th castle.

    Choices are made on certified lower bounds, ties going to the tower listed
    first in ``tie_order`` (default: lowest index).  The returned ratio is
    mu(T_m B & B) / mu(B) for the base B of the repeated tower.  With spacers
    present the shifts m .. m + scan_width are scanned as well (default k(R+1)).
    """
    ksys = _as_k(sys)
    depth = n + 2 if depth is None else depth
    model = TowerModel(ksys, depth)
    k = ksys.k
    prio = {j: idx for idx, j in enumerate(tie_order or range(1, k + 1))}
    hs = model.sys.heights(n)
    bases = {j: model.positions(_base(n, j)) for j in ksys.marks}

    def pick(cands: dict[int, dict]) -> int:
        return max(cands, key=lambda j: (_mass_lo(model, cands[j]), -prio[j]))

    j0 = pick(bases)
    chain, masses = [j0], [_mass_lo(model, bases[j0])]
    current = bases[j0]
    while True:
        moved = _shift(model, current, hs[chain[-1] - 1])
        cands = {j: {t: np.intersect1d(moved[t], bases[j][t]) for t in ksys.marks} for j in ksys.marks}
        j = pick(cands)
        current = cands[j]
        chain.append(j)
        masses.append(_mass_lo(model, current))
        if j in chain[:-1]:
            break
        if len(chain) > k + 1:
            raise AssertionError("pigeonhole chain did not repeat")
    b = len(chain) - 1
    a = chain.index(chain[-1])
    m = sum(hs[chain[t] - 1] for t in range(a, b))
    B = _base(n, chain[a])
    mB = cylinder_measure_k(model.sys, model.sol, B)
    ratio = model.correlation(B, B, m) / mB
    finding = RigidityFinding(n, m, chain[a], ratio, chain, a, b, Fraction(1, k ** k), depth, masses)
    if scan_width is None:
        qe = co_relaxed_condition(ksys)
        scan_width = 0 if qe.R == 0 else k * (qe.R + 1)
    if scan_width:
        finding.scan = [(m + s, model.correlation(B, B, m + s) / mB) for s in range(scan_width + 1)]
    return finding


@dataclass
class CORigidityStage:
    stage: int
    tower: int
    time: int
    ratios: list[tuple[int, int, CertifiedValue]]

    @property
    def worst(self) -> CertifiedValue:
        return min((r for _, _, r in self.ratios), key=lambda v: v.lo)

    def to_json(self) -> dict:
        return {"stage": self.stage, "tower": self.tower, "time": self.time,
                "worst": self.worst.to_json(),
                "levels": [{"tower": i, "level": x, **r.to_json()} for i, x, r in self.ratios]}


def _levels(ksys: RankKSystem, l: int) -> list[tuple[int, int, CylinderK]]:
    return [(i, x, CylinderK(l, ((i, GroupSet([(x,)])),))) for i in ksys.marks for x in ksys.F(l, i).ints()]


def co_rigidity_times(sys: AnySystem, l: int = 0, stages: Sequence[int] | None = None) -> list[CORigidityStage]:
    """Times h_m = height of the heaviest tower of the m-th castle, with mu(T_h I & I) / mu(I) for levels I of castle l."""
    ksys = _as_k(sys)
    if not co_condition(ksys).ok:
        raise PreconditionFailed("consecutive-ordering condition fails")
    if not nondegeneracy_check(ksys).ok:
        raise PreconditionFailed("some tower appears exactly once inside another")
    if not exactness_check(ksys).no_spacers or not all(exactness_check(ksys).no_spacers):
        raise PreconditionFailed("spacers present")
    stages = list(stages) if stages is not None else list(range(max(l, 0), ksys.horizon - 1))
    out = []
    for m in stages:
        model = TowerModel(ksys, m + 2)
        masses = _tower_masses(model.sys, model.sol, m)
        p = max(ksys.marks, key=lambda j: (masses[j - 1].lo, -j))
        h = model.sys.heights(m)[p - 1]
        ratios = []
        for i, x, I in _levels(model.sys, l):
            mI = cylinder_measure_k(model.sys, model.sol, I)
            ratios.append((i, x, model.correlation(I, I, h) / mI))
        out.append(CORigidityStage(m, p, h, ratios))
    return out


@dataclass
class PartialRigidityEstimate:
    eta: Fraction
    table: list[tuple[int, int, int, CertifiedValue]]

    def to_json(self) -> dict:
        return {"eta": frac_str(self.eta),
                "table": [{"tower": i, "level": x, "time": d, **r.to_json()} for i, x, d, r in self.table]}


def partial_rigidity_estimate(sys: AnySystem, times: Sequence[int], l: int, depth: int) -> PartialRigidityEstimate:
    """min over levels J of castle l and over the times d of the certified lower bound of mu(J & T_d J) / mu(J)."""
    ksys = _as_k(sys)
    model = TowerModel(ksys, depth)
    if max(times) >= max(model.heights) and not model.wrap:
        raise InconclusiveDepth(f"time {max(times)} is not below the depth-{depth} tower heights")
    table = []
    for i, x, J in _levels(model.sys, l):
        mJ = cylinder_measure_k(model.sys, model.sol, J)
        for d in times:
            table.append((i, x, d, model.correlation(J, J, d) / mJ))
    eta = min(r.lo for *_, r in table)
    return PartialRigidityEstimate(eta, table)
