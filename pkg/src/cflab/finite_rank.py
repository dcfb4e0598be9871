"""(C,F)-systems of rank at most k over marked alphabets.

Points of F_n carry a tower mark in {1..k}; an edge (i, c, j) places a copy of
tower i, shifted by c, inside tower j of the next stage.  Marks are 1-based.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

from .certified import CertifiedValue, frac_str
from .errors import StructurallyDegenerate, UnsupportedShape
from .groups import Element, GroupSet, add, as_element, fmt_element, sumset, zero
from .rank_one import ClosedForm, ConditionResult, RankOneSystem, ValidationReport


class MarkedElement(NamedTuple):
    g: Element
    mark: int


class Edge(NamedTuple):
    src: int
    g: Element
    tgt: int


class _Undefined:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "UNDEFINED"

    def __bool__(self) -> bool:
        return False


UNDEFINED = _Undefined()


def star_product(a, c: Edge):
    """(f, i) * (i, g, j) = (f + g, j); also composes two edges.  Mismatched marks give UNDEFINED."""
    if a is UNDEFINED:
        return UNDEFINED
    if isinstance(a, Edge):
        if a.tgt != c.src:
            return UNDEFINED
        return Edge(a.src, add(a.g, c.g), c.tgt)
    if a.mark != c.src:
        return UNDEFINED
    return MarkedElement(add(a.g, c.g), c.tgt)


def compose_edge_sets(first: Sequence[Edge], second: Sequence[Edge]) -> list[Edge]:
    """All defined products e * e' in order of (e, e')."""
    by_src: dict[int, list[Edge]] = {}
    for e in second:
        by_src.setdefault(e.src, []).append(e)
    return [Edge(e.src, add(e.g, e2.g), e2.tgt) for e in first for e2 in by_src.get(e.tgt, ())]


@dataclass(frozen=True, eq=False)
class RankKSystem:
    """Prefix of a rank-k construction: F_n^i for marks i, and edge sets C_1..C_N."""

    k: int
    Fs: tuple[dict, ...]
    Cs: tuple[tuple[Edge, ...], ...]
    name: str = "custom"
    certificate: ClosedForm | None = None
    rule: Callable[[int], "RankKSystem"] | None = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.Fs) != len(self.Cs) + 1:
            raise ValueError("need one more F than C")
        for n, F in enumerate(self.Fs):
            if sorted(F) != list(range(1, self.k + 1)):
                raise ValueError(f"F_{n} must have parts for marks 1..{self.k}")
        for n, C in enumerate(self.Cs, start=1):
            for e in C:
                if not (1 <= e.src <= self.k and 1 <= e.tgt <= self.k):
                    raise ValueError(f"edge {e} in C_{n} has a mark outside 1..{self.k}")

    @property
    def dim(self) -> int:
        return self.Fs[0][1].dim

    @property
    def horizon(self) -> int:
        return len(self.Cs)

    @property
    def marks(self) -> range:
        return range(1, self.k + 1)

    def F(self, n: int, i: int) -> GroupSet:
        return self.Fs[n][i]

    def C(self, n: int) -> tuple[Edge, ...]:
        if not 1 <= n <= self.horizon:
            raise IndexError(f"C_{n} outside horizon {self.horizon}")
        return self.Cs[n - 1]

    def edges(self, n: int, i: int | None = None, j: int | None = None) -> list[Edge]:
        return [e for e in self.C(n) if (i is None or e.src == i) and (j is None or e.tgt == j)]

    def size(self, n: int) -> int:
        return sum(len(self.F(n, i)) for i in self.marks)

    def heights(self, n: int) -> list[int]:
        """h_n^j for interval towers F_n^j = [0, h_n^j)."""
        out = []
        for j in self.marks:
            b = self.F(n, j).interval_bounds()
            if b is None or b[0] != 0:
                raise UnsupportedShape(f"F_{n}^{j} is not an interval [0, h)")
            out.append(b[1])
        return out

    def is_interval_system(self) -> bool:
        try:
            for n in range(self.horizon + 1):
                self.heights(n)
        except UnsupportedShape:
            return False
        return self.dim == 1

    def wraps(self) -> bool:
        """Single spacer-free tower certified beyond the horizon: T_1 maps the top level onto the base."""
        if self.k != 1 or self.certificate is None or not self.certificate.spacer_free:
            return False
        if not self.is_interval_system():
            return False
        for n in range(self.horizon):
            offs = GroupSet((e.g for e in self.C(n + 1)), dim=self.dim)
            if sumset(self.F(n, 1), offs) != self.F(n + 1, 1) or len(offs) * len(self.F(n, 1)) != len(self.F(n + 1, 1)):
                return False
        return True

    def extend(self, horizon: int) -> "RankKSystem":
        if horizon <= self.horizon:
            return RankKSystem(self.k, self.Fs[: horizon + 1], self.Cs[:horizon], self.name,
                               self.certificate, self.rule)
        if self.rule is None:
            raise ValueError(f"{self.name} has no generator rule beyond horizon {self.horizon}")
        return self.rule(horizon)

    def composite_edges(self, n: int, m: int) -> list[Edge]:
        """C_{n+1} * ... * C_m; for m = n the identity edges (i, 0, i)."""
        z = zero(self.dim)
        out = [Edge(i, z, i) for i in self.marks]
        for l in range(n + 1, m + 1):
            out = compose_edge_sets(out, self.C(l))
        return out


def from_rank_one(sys: RankOneSystem) -> RankKSystem:
    Fs = tuple({1: f} for f in sys.Fs)
    Cs = tuple(tuple(Edge(1, c, 1) for c in C) for C in sys.Cs)
    rule = None if sys.rule is None else (lambda horizon: from_rank_one(sys.rule(horizon)))
    return RankKSystem(1, Fs, Cs, sys.name, sys.certificate, rule)


@dataclass(frozen=True)
class CylinderK:
    level: int
    parts: tuple[tuple[int, GroupSet], ...]

    @classmethod
    def of(cls, level: int, cells: Mapping[int, Iterable], dim: int = 1) -> "CylinderK":
        parts = tuple(sorted((i, GroupSet((as_element(c, dim) for c in v), dim=dim)) for i, v in cells.items()))
        return cls(level, parts)

    def part(self, i: int) -> GroupSet | None:
        for m, s in self.parts:
            if m == i:
                return s
        return None

    def count(self, i: int) -> int:
        s = self.part(i)
        return 0 if s is None else len(s)

    def __str__(self) -> str:
        inner = ", ".join(f"{s}x{{{i}}}" for i, s in self.parts)
        return f"[{inner}]_{self.level}"


# -- validation ------------------------------------------------------------

def _translates_overlap(A: GroupSet, a: Element, B: GroupSet, b: Element) -> bool:
    if A.is_box and B.is_box:
        (alo, ahi), (blo, bhi) = A.box_bounds(), B.box_bounds()
        return all(max(alo[x] + a[x], blo[x] + b[x]) < min(ahi[x] + a[x], bhi[x] + b[x])
                   for x in range(len(a)))
    small, big, s, t = (A, B, a, b) if len(A) <= len(B) else (B, A, b, a)
    return any(add(p, s) in big.translate(t) for p in small)


def validate_rank_k(sys: RankKSystem) -> ValidationReport:
    """Conditions (I), (II), (III), (V), with the complete-graph condition as advisory."""
    z = zero(sys.dim)
    out: list[ConditionResult] = []
    ok0 = all(sys.F(0, i) == GroupSet([z]) for i in sys.marks)
    out.append(ConditionResult("I", 0, ok0, detail="" if ok0 else "F_0 must be {(0, i)}"))
    for n in range(1, sys.horizon + 1):
        bad = [i for i in sys.marks if len(sys.edges(n, i=i)) < 2]
        out.append(ConditionResult("I", n, not bad, bad[0] if bad else None,
                                   "" if not bad else f"tower {bad[0]} has fewer than 2 outgoing edges in C_{n}"))
    for n in range(sys.horizon):
        bad = None
        for e in sys.C(n + 1):
            if not sys.F(n, e.src).translate(e.g).issubset(sys.F(n + 1, e.tgt)):
                bad = e
                break
        out.append(ConditionResult("II", n + 1, bad is None, bad,
                                   "" if bad is None else f"F_{n} * {tuple(bad)} not inside F_{n + 1}"))
    for n in range(sys.horizon):
        bad = None
        for j in sys.marks:
            into = sys.edges(n + 1, j=j)
            for b in range(len(into)):
                for a in range(b):
                    e, f = into[a], into[b]
                    if _translates_overlap(sys.F(n, e.src), e.g, sys.F(n, f.src), f.g):
                        bad = (e, f)
                        break
                if bad:
                    break
            if bad:
                break
        out.append(ConditionResult("III", n + 1, bad is None, bad,
                                   "" if bad is None else f"placements {tuple(bad[0])} and {tuple(bad[1])} overlap"))
    for n in range(sys.horizon + 1):
        miss = [i for i in sys.marks if z not in sys.F(n, i)]
        out.append(ConditionResult("V", n, not miss, miss[0] if miss else None,
                                   "" if not miss else f"(0, {miss[0]}) not in F_{n}"))
    for n in range(1, sys.horizon + 1):
        have = set(sys.C(n))
        miss = [i for i in sys.marks if Edge(i, z, i) not in have]
        out.append(ConditionResult("V", n, not miss, miss[0] if miss else None,
                                   "" if not miss else f"({miss[0]}, 0, {miss[0]}) not in C_{n}"))
    for n in range(1, sys.horizon + 1):
        r = r_matrix(sys, n)
        thin_pairs = [(i + 1, j + 1) for i in range(sys.k) for j in range(sys.k) if r[i][j] < 2]
        out.append(ConditionResult("advisory-IV", n, not thin_pairs, thin_pairs[0] if thin_pairs else None,
                                   "" if not thin_pairs else
                                   f"#C_{n}^{thin_pairs[0]} < 2; minimality not asserted"))
    order = {"I": 0, "II": 1, "III": 2, "V": 3, "advisory-IV": 4}
    out.sort(key=lambda r: (order[r.condition], r.level))
    return ValidationReport(out)


def r_matrix(sys: RankKSystem, n: int) -> list[list[int]]:
    """r_n[i][j] = number of edges (i, c, j) in C_n (0-based indices)."""
    r = [[0] * sys.k for _ in range(sys.k)]
    for e in sys.C(n):
        r[e.src - 1][e.tgt - 1] += 1
    return r


def matmul(a: list[list[int]], b: list[list[int]]) -> list[list[int]]:
    return [[sum(a[i][t] * b[t][j] for t in range(len(b))) for j in range(len(b[0]))] for i in range(len(a))]


def identity(k: int) -> list[list[int]]:
    return [[int(i == j) for j in range(k)] for i in range(k)]


# -- invariant measure -----------------------------------------------------

def birkhoff_tau_upper(a: list[list[int]]) -> float:
    """Upper bound for the projective contraction coefficient of a positive matrix."""
    k = len(a)
    if k == 1:
        return 0.0
    phi = min(Fraction(a[i][p] * a[j][q], a[j][p] * a[i][q])
              for i in range(k) for j in range(k) for p in range(k) for q in range(k))
    s = math.nextafter(math.sqrt(float(phi)), 0.0)
    s = math.nextafter(s, 0.0)  # absorb the rounding of float(phi)
    tau = (1 - s) / (1 + s)
    return min(1.0, math.nextafter(math.nextafter(tau, 2.0), 2.0))


@dataclass
class MeasureSolution:
    """Certified level masses lambda_n^i with mu(X_0) = scale.

    lambda_n = P_n x / <c, x> over the unknown positive tail vector x, where
    P_n = r_{n+1} ... r_N and c_j are the column sums of P_0; every ratio of two
    positive linear forms in x is bounded by its values at the coordinate vertices.
    """

    k: int
    products: list[list[list[int]]]
    scale: Fraction
    verdict: str
    contraction: float
    blocks: list[tuple[int, int]]

    @property
    def horizon(self) -> int:
        return len(self.products) - 1

    def form_ratio(self, num: Sequence[tuple[int, Sequence]], den: Sequence[tuple[int, Sequence]]
                   ) -> CertifiedValue:
        """Hull of (sum of w . lambda_n over num) / (same over den) across admissible tails."""
        vals = []
        for col in range(self.k):
            a = sum(Fraction(w[i]) * self.products[n][i][col] for n, w in num for i in range(self.k))
            b = sum(Fraction(w[i]) * self.products[n][i][col] for n, w in den for i in range(self.k))
            if b == 0:
                raise ZeroDivisionError("denominator form vanishes on a tail vertex")
            vals.append(a / b)
        return CertifiedValue(min(vals), max(vals))

    def _norm(self) -> list[tuple[int, list[int]]]:
        return [(0, [1] * self.k)]

    def linear(self, n: int, weights: Sequence) -> CertifiedValue:
        """Certified value of sum_i weights[i] * lambda_n^i."""
        return self.form_ratio([(n, weights)], self._norm()) * self.scale

    def lam(self, n: int, i: int) -> CertifiedValue:
        w = [0] * self.k
        w[i - 1] = 1
        return self.linear(n, w)

    def vector(self, n: int) -> list[CertifiedValue]:
        return [self.lam(n, i) for i in range(1, self.k + 1)]

    def ratio(self, n: int, i: int, j: int) -> CertifiedValue:
        """lambda_n^i / lambda_n^j."""
        wi, wj = [0] * self.k, [0] * self.k
        wi[i - 1] = 1
        wj[j - 1] = 1
        return self.form_ratio([(n, wi)], [(n, wj)])

    def share(self, n: int, i: int) -> CertifiedValue:
        """lambda_n^i / sum_j lambda_n^j."""
        wi = [0] * self.k
        wi[i - 1] = 1
        return self.form_ratio([(n, wi)], [(n, [1] * self.k)])

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "contraction_upper": self.contraction,
                "lambda": [[v.to_json() for v in self.vector(n)] for n in range(self.horizon + 1)]}


def solve_invariant_measure(sys: RankKSystem, tolerance: float = 1e-9, scale=1) -> MeasureSolution:
    k, N = sys.k, sys.horizon
    rs = [r_matrix(sys, n) for n in range(1, N + 1)]
    for n, r in enumerate(rs, start=1):
        for j in range(k):
            if all(r[i][j] == 0 for i in range(k)):
                raise StructurallyDegenerate(n, j + 1)
    products = [identity(k)]
    for r in reversed(rs):
        products.append(matmul(r, products[-1]))
    products.reverse()  # products[n] = r_{n+1} ... r_N
    tau, blocks, start, acc = 1.0, [], 0, None
    for n, r in enumerate(rs):
        acc = r if acc is None else matmul(acc, r)
        if all(x > 0 for row in acc for x in row):
            tau *= birkhoff_tau_upper(acc)
            blocks.append((start, n + 1))
            start, acc = n + 1, None
    if not blocks:
        tau = 1.0 if k > 1 else 0.0
    verdict = "certified" if tau < tolerance else "undecided"
    return MeasureSolution(k, products, Fraction(scale), verdict, tau, blocks)


def cylinder_measure_k(sys: RankKSystem, sol: MeasureSolution, cyl: CylinderK) -> CertifiedValue:
    for i, s in cyl.parts:
        if not s.issubset(sys.F(cyl.level, i)):
            raise ValueError(f"part {i} of {cyl} is not inside F_{cyl.level}^{i}")
    return sol.linear(cyl.level, [cyl.count(i) for i in sys.marks])


@dataclass
class FinitenessReport:
    values: list[CertifiedValue]
    verdict: str
    certified: bool

    def to_json(self) -> dict:
        return {"values": [v.to_json() for v in self.values], "verdict": self.verdict,
                "certified": self.certified}


def check_finiteness_k(sys: RankKSystem, sol: MeasureSolution) -> FinitenessReport:
    vals = [sol.linear(n, [len(sys.F(n, i)) for i in sys.marks]) for n in range(sys.horizon + 1)]
    cert = sys.certificate
    if cert is not None and cert.trend is not None and all(v.contains(cert.trend(n)) for n, v in enumerate(vals)):
        if cert.diverges:
            return FinitenessReport(vals, "infinite", True)
        if cert.limit is not None:
            return FinitenessReport(vals, f"finite({frac_str(cert.limit)})", True)
    return FinitenessReport(vals, f"undecided (last value {vals[-1]})", False)


def _inside_count(P: GroupSet, shift: Element, Q: GroupSet) -> int:
    """#((P + shift) & Q)."""
    if P.is_box and Q.is_box:
        (plo, phi), (qlo, qhi) = P.box_bounds(), Q.box_bounds()
        out = 1
        for x in range(len(shift)):
            out *= max(0, min(phi[x] + shift[x], qhi[x]) - max(plo[x] + shift[x], qlo[x]))
        return out
    return sum(1 for p in P if add(p, shift) in Q)


def check_ae_action_k(sys: RankKSystem, sol: MeasureSolution, g, n: int) -> dict[int, CertifiedValue]:
    """Mass of (g + F_n * C_{n+1} * ... * C_m) & F_m relative to the mass of F_n, for m = n+1..N."""
    g = as_element(g, sys.dim)
    den = [(n, [len(sys.F(n, i)) for i in sys.marks])]
    out = {}
    for m in range(n + 1, sys.horizon + 1):
        counts = [0] * sys.k
        for e in sys.composite_edges(n, m):
            counts[e.tgt - 1] += _inside_count(sys.F(n, e.src), add(e.g, g), sys.F(m, e.tgt))
        out[m] = sol.form_ratio([(m, counts)], den)
    return out


# -- castle and spacer views -----------------------------------------------

@dataclass
class CastleView:
    heights: list[list[int]]
    placements: list[dict[int, list[tuple[int, int]]]]
    gaps: list[dict[int, list[int]]]

    def to_json(self) -> dict:
        return {"heights": self.heights,
                "stages": [{str(j): {"placements": [list(p) for p in self.placements[n][j]],
                                     "gaps": self.gaps[n][j]} for j in self.placements[n]}
                           for n in range(len(self.placements))]}


def castle_view(sys: RankKSystem) -> CastleView:
    """Per stage n+1 and tower j: the copies (source, offset) in offset order and the spacer runs after each."""
    if sys.dim != 1:
        raise UnsupportedShape("castle view needs towers over Z")
    heights = [sys.heights(n) for n in range(sys.horizon + 1)]
    placements, gaps = [], []
    for n in range(sys.horizon):
        pl, gp = {}, {}
        for j in sys.marks:
            items = sorted(((e.src, e.g[0]) for e in sys.edges(n + 1, j=j)), key=lambda t: t[1])
            pl[j] = items
            g = []
            for idx, (i, c) in enumerate(items):
                end = c + heights[n][i - 1]
                nxt = items[idx + 1][1] if idx + 1 < len(items) else heights[n + 1][j - 1]
                g.append(nxt - end)
            gp[j] = g
        placements.append(pl)
        gaps.append(gp)
    return CastleView(heights, placements, gaps)


class _Extends:
    def __repr__(self) -> str:
        return "EXTENDS"


EXTENDS = _Extends()


@dataclass
class SpacerData:
    level: int
    positions: dict[int, list[int]]
    roofs: dict[tuple[int, int], object]
    stable: bool | None
    note: str

    def to_json(self) -> dict:
        return {"level": self.level, "positions": {str(j): v for j, v in self.positions.items()},
                "roofs": [{"tower": j, "position": p, "roof": "extends" if r is EXTENDS else r}
                          for (j, p), r in sorted(self.roofs.items())],
                "stable": self.stable, "note": self.note}


def _base_positions(sys: RankKSystem, n: int) -> dict[int, list[int]]:
    pos: dict[int, list[int]] = {j: [] for j in sys.marks}
    for e in sys.composite_edges(0, n):
        pos[e.tgt].append(e.g[0])
    return {j: sorted(v) for j, v in pos.items()}


def _roofs(pos: dict[int, list[int]]) -> dict[tuple[int, int], object]:
    out = {}
    for j, ps in pos.items():
        for a, b in zip(ps, ps[1:]):
            out[(j, a)] = b - a
        if ps:
            out[(j, ps[-1])] = EXTENDS
    return out


def spacer_data(sys: RankKSystem, n: int) -> SpacerData:
    """Base-copy positions S_n = F_0 * C_1 * ... * C_n and the roof above each copy.

    The roof of a copy is the distance to the next copy above it in the same
    tower; the topmost copy gets EXTENDS until a later stage stacks something
    on it.  ``stable`` records whether every resolved roof at level n reappears
    unchanged at level n+1 in each placed copy (None at the horizon).
    """
    if sys.dim != 1:
        raise UnsupportedShape("spacer data needs towers over Z")
    if any(len(sys.F(0, i)) != 1 for i in sys.marks):
        raise UnsupportedShape("spacer data needs single-point F_0")
    pos = _base_positions(sys, n)
    roofs = _roofs(pos)
    stable = None
    if n < sys.horizon:
        nxt = _roofs(_base_positions(sys, n + 1))
        stable = True
        for e in sys.C(n + 1):
            for p in pos[e.src]:
                r = roofs[(e.src, p)]
                if r is not EXTENDS and nxt[(e.tgt, p + e.g[0])] != r:
                    stable = False
    note = "roof = gap to the next base copy in the same tower; EXTENDS marks the top copy"
    return SpacerData(n, pos, roofs, stable, note)


# -- balance ---------------------------------------------------------------

@dataclass
class BalanceReport:
    deltas: list[list[CertifiedValue]]
    shares: list[list[CertifiedValue]]
    column_ratios: list[list[list[Fraction]]]
    threshold: Fraction
    verdict: str
    balanced: bool

    def to_json(self) -> dict:
        return {"delta": [[v.to_json() for v in row] for row in self.deltas],
                "Lambda": [[v.to_json() for v in row] for row in self.shares],
                "column_ratios": [[[frac_str(x) for x in row] for row in m] for m in self.column_ratios],
                "threshold": frac_str(self.threshold), "verdict": self.verdict}


def balanced_diagnostics(sys: RankKSystem, sol: MeasureSolution, threshold=Fraction(1, 20)) -> BalanceReport:
    """delta_j^(n) = mu(X_0 & [F_n^j]_n), Lambda_i^(n) = lambda_n^i / sum_j lambda_n^j.

    Levels below the horizon are judged; at the horizon itself the shares are
    not determined by the prefix.
    """
    threshold = Fraction(threshold)
    deltas, shares, cols = [], [], []
    for n in range(sys.horizon + 1):
        counts = {j: 0 for j in sys.marks}
        for e in sys.composite_edges(0, n):
            counts[e.tgt] += len(sys.F(0, e.src))
        row = []
        for j in sys.marks:
            w = [0] * sys.k
            w[j - 1] = counts[j]
            row.append(sol.linear(n, w))
        deltas.append(row)
        shares.append([sol.share(n, i) for i in sys.marks])
    for n in range(1, sys.horizon + 1):
        r = r_matrix(sys, n)
        m = []
        for i in range(sys.k):
            m.append([Fraction(r[i][l], sum(r[t][l] for t in range(sys.k))) for l in range(sys.k)])
        cols.append(m)
    judged = shares[:-1] if sys.horizon > 0 else shares
    low = min(v.lo for row in judged for v in row)
    balanced = low >= threshold
    verdict = "balanced at horizon" if balanced else f"not balanced (min share {frac_str(low)} < {frac_str(threshold)})"
    return BalanceReport(deltas, shares, cols, threshold, verdict, balanced)


def telescope_k(sys: RankKSystem, cuts: Sequence[int]) -> RankKSystem:
    cuts = list(cuts)
    if not cuts or cuts[0] != 0:
        raise ValueError("cut points must start at 0")
    if any(b <= a for a, b in zip(cuts, cuts[1:])):
        raise ValueError("cut points must be strictly increasing")
    if cuts[-1] > sys.horizon:
        raise ValueError(f"cut {cuts[-1]} beyond horizon {sys.horizon}")
    Fs = tuple(sys.Fs[c] for c in cuts)
    Cs = []
    for a, b in zip(cuts, cuts[1:]):
        edges = list(sys.C(a + 1))
        for l in range(a + 2, b + 1):
            edges = compose_edge_sets(edges, sys.C(l))
        Cs.append(tuple(edges))
    return RankKSystem(sys.k, Fs, tuple(Cs), f"{sys.name}|telescoped")


def stack_castle(k: int, orders, spacers=None, horizon: int = 6, name: str = "castle",
                 certificate: ClosedForm | None = None) -> RankKSystem:
    """Cutting and stacking with k columns of height 1 at stage 0.

    ``orders(n, heights)[j-1]`` lists the source towers stacked, bottom to top,
    to form tower j of stage n+1; ``spacers(n, heights)[j-1]`` gives the spacer
    run after each copy (default none).  Both may also be fixed sequences.
    """
    heights = [1] * k
    Fs = [{i: GroupSet.interval(0, 1) for i in range(1, k + 1)}]
    Cs = []
    for n in range(horizon):
        ords = orders(n, tuple(heights)) if callable(orders) else orders
        sps = (spacers(n, tuple(heights)) if callable(spacers) else spacers) if spacers is not None else None
        edges, new_h = [], []
        for j in range(1, k + 1):
            seq = ords[j - 1]
            gaps = sps[j - 1] if sps is not None else [0] * len(seq)
            if len(gaps) != len(seq):
                raise ValueError(f"stage {n} tower {j}: {len(seq)} copies but {len(gaps)} spacer runs")
            pos = 0
            for i, s in zip(seq, gaps):
                edges.append(Edge(i, (pos,), j))
                pos += heights[i - 1] + s
            new_h.append(pos)
        heights = new_h
        Fs.append({j: GroupSet.interval(0, heights[j - 1]) for j in range(1, k + 1)})
        Cs.append(tuple(edges))
    return RankKSystem(k, tuple(Fs), tuple(Cs), name, certificate)


def fmt_edge(e: Edge) -> str:
    return f"({e.src}, {fmt_element(e.g)}, {e.tgt})"
