"""Finite-horizon rank-one (C,F)-systems over Z^d.

A system is given by finite sets F_0, ..., F_N and offsets C_1, ..., C_N.  The
associated space is built from level-n coordinates f_n in F_n together with the
later digits c_{n+1}, c_{n+2}, ...; the cylinder [A]_n collects the points whose
level-n coordinate lies in A, and carries mass #A / (#C_1 ... #C_n).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .certified import CertifiedValue, frac_str
from .errors import InvalidCylinder, ThinningFailed
from .groups import (
    Element,
    GroupSet,
    add,
    as_element,
    diffset,
    disjoint_translates,
    fmt_element,
    sub,
    sumset,
    sumset_all,
    zero,
)


@dataclass(frozen=True)
class ClosedForm:
    """Analytic information about a system beyond its stored prefix.

    ``trend(n)`` is the exact closed form of #F_n / (#C_1...#C_n); ``limit`` is
    its limit (None when it diverges).  ``spacer_free`` asserts that
    F_{n+1} = F_n + C_{n+1} at every level, including those past the horizon.
    """

    description: str
    trend: Callable[[int], Fraction] | None = None
    limit: Fraction | None = None
    diverges: bool = False
    spacer_free: bool = False


@dataclass(frozen=True, eq=False)
class RankOneSystem:
    """Prefix (F_0..F_N, C_1..C_N) of a (C,F)-construction."""

    Fs: tuple[GroupSet, ...]
    Cs: tuple[GroupSet, ...]
    name: str = "custom"
    certificate: ClosedForm | None = None
    rule: Callable[[int], "RankOneSystem"] | None = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.Fs) != len(self.Cs) + 1:
            raise ValueError("need one more F than C")
        dims = {s.dim for s in self.Fs} | {s.dim for s in self.Cs}
        if len(dims) != 1:
            raise ValueError(f"mixed dimensions {sorted(dims)}")
        prods = [1]
        for c in self.Cs:
            prods.append(prods[-1] * len(c))
        object.__setattr__(self, "_prods", tuple(prods))

    @property
    def dim(self) -> int:
        return self.Fs[0].dim

    @property
    def horizon(self) -> int:
        return len(self.Cs)

    def F(self, n: int) -> GroupSet:
        return self.Fs[n]

    def C(self, n: int) -> GroupSet:
        """Offsets C_n, 1 <= n <= N."""
        if not 1 <= n <= self.horizon:
            raise IndexError(f"C_{n} outside horizon {self.horizon}")
        return self.Cs[n - 1]

    def prod(self, n: int) -> int:
        """#C_1 * ... * #C_n."""
        return self._prods[n]

    def height(self, n: int) -> int:
        b = self.Fs[n].interval_bounds()
        if b is None or b[0] != 0:
            raise ValueError(f"F_{n} is not an interval [0, h)")
        return b[1]

    def is_interval_system(self) -> bool:
        if self.dim != 1:
            return False
        for f in self.Fs:
            b = f.interval_bounds()
            if b is None or b[0] != 0:
                return False
        return True

    def spacer_free_prefix(self) -> bool:
        return all(sumset(self.Fs[n], self.Cs[n]) == self.Fs[n + 1] for n in range(self.horizon))

    def wraps(self) -> bool:
        """True when the tower at every depth covers the whole space.

        Needs a certificate for the levels past the horizon and an exact
        tiling inside it.
        """
        return (
            self.certificate is not None
            and self.certificate.spacer_free
            and self.is_interval_system()
            and self.spacer_free_prefix()
        )

    def extend(self, horizon: int) -> "RankOneSystem":
        if horizon <= self.horizon:
            return truncate(self, horizon)
        if self.rule is None:
            raise ValueError(f"{self.name} has no generator rule beyond horizon {self.horizon}")
        return self.rule(horizon)

    def as_rank_k(self):
        from .finite_rank import from_rank_one
        return from_rank_one(self)

    def offsets_sum(self, n: int, m: int) -> GroupSet:
        """C_{n+1} + ... + C_m."""
        return sumset_all((self.C(i) for i in range(n + 1, m + 1)), self.dim)


def truncate(sys: RankOneSystem, horizon: int) -> RankOneSystem:
    return RankOneSystem(sys.Fs[: horizon + 1], sys.Cs[:horizon], sys.name, sys.certificate, sys.rule)


@dataclass(frozen=True)
class Cylinder:
    level: int
    support: GroupSet

    @classmethod
    def of(cls, level: int, cells: Iterable, dim: int = 1) -> "Cylinder":
        return cls(level, GroupSet((as_element(c, dim) for c in cells), dim=dim))

    def __str__(self) -> str:
        return f"[{self.support}]_{self.level}"


@dataclass(frozen=True)
class ConditionResult:
    condition: str
    level: int
    ok: bool
    witness: object = None
    detail: str = ""

    def to_json(self) -> dict:
        w = self.witness
        if isinstance(w, tuple) and w and isinstance(w[0], tuple):
            w = [fmt_element(x) for x in w]
        elif isinstance(w, tuple):
            w = fmt_element(w)
        return {"condition": self.condition, "level": self.level, "ok": self.ok,
                "witness": w, "detail": self.detail}


@dataclass
class ValidationReport:
    results: list[ConditionResult]
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results if not r.condition.startswith("advisory"))

    def failures(self) -> list[ConditionResult]:
        return [r for r in self.results if not r.ok]

    def first_failure(self, condition: str | None = None) -> ConditionResult | None:
        for r in self.results:
            if not r.ok and (condition is None or r.condition == condition):
                return r
        return None

    def to_json(self) -> dict:
        return {"ok": self.ok, "results": [r.to_json() for r in self.results], "notes": self.notes}


def _fmt_pair(w) -> str:
    return "(" + ", ".join(fmt_element(x) for x in w) + ")"


def validate(sys: RankOneSystem) -> ValidationReport:
    """Check (I)-(IV) level by level, keeping the first witness of each failure."""
    d = sys.dim
    z = zero(d)
    out = []
    out.append(ConditionResult("I", 0, sys.F(0) == GroupSet([z]),
                               detail="F_0 = {0}" if sys.F(0) == GroupSet([z]) else f"F_0 = {sys.F(0)}"))
    for n in range(1, sys.horizon + 1):
        size = len(sys.C(n))
        out.append(ConditionResult("I", n, size > 1, detail=f"#C_{n} = {size}"))
    for n in range(sys.horizon):
        Fn, Fn1, C = sys.F(n), sys.F(n + 1), sys.C(n + 1)
        bad = None
        for c in C:
            if not Fn.translate(c).issubset(Fn1):
                bad = c
                break
        out.append(ConditionResult("II", n + 1, bad is None, bad,
                                   "" if bad is None else f"F_{n} + {fmt_element(bad)} not inside F_{n + 1}"))
    for n in range(sys.horizon):
        ok, w = disjoint_translates(sys.F(n), sys.C(n + 1))
        out.append(ConditionResult("III", n + 1, ok, w,
                                   "" if ok else f"translates of F_{n} by {_fmt_pair(w)} overlap"))
    for n in range(sys.horizon + 1):
        ok = z in sys.F(n)
        out.append(ConditionResult("IV", n, ok, detail="" if ok else f"0 not in F_{n}"))
    for n in range(1, sys.horizon + 1):
        ok = z in sys.C(n)
        out.append(ConditionResult("IV", n, ok, detail="" if ok else f"0 not in C_{n}"))
    order = {"I": 0, "II": 1, "III": 2, "IV": 3}
    out.sort(key=lambda r: (order[r.condition], r.level))
    return ValidationReport(out)


def measure(sys: RankOneSystem, cyl: Cylinder) -> Fraction:
    """mu([A]_n) = #A / (#C_1 ... #C_n), normalised so that mu([F_0]_0) = 1."""
    n = cyl.level
    if not 0 <= n <= sys.horizon:
        raise InvalidCylinder(f"level {n} outside horizon {sys.horizon}")
    if not cyl.support.issubset(sys.F(n)):
        raise InvalidCylinder(f"support of {cyl} is not inside F_{n}")
    return Fraction(len(cyl.support), sys.prod(n))


def refine(sys: RankOneSystem, cyl: Cylinder, to_level: int) -> Cylinder:
    """Rewrite [A]_n as [A + C_{n+1} + ... + C_m]_m."""
    if not cyl.level <= to_level <= sys.horizon:
        raise InvalidCylinder(f"cannot refine level {cyl.level} to {to_level}")
    return Cylinder(to_level, sumset(cyl.support, sys.offsets_sum(cyl.level, to_level)))


@dataclass
class TrendReport:
    values: list[Fraction]
    verdict: str
    certified: bool

    def to_json(self) -> dict:
        return {"values": [frac_str(v) for v in self.values], "verdict": self.verdict,
                "certified": self.certified}


def total_measure_trend(sys: RankOneSystem) -> TrendReport:
    """The sequence #F_n / (#C_1...#C_n), which is nondecreasing and at least 1.

    A finite prefix alone never settles finiteness; the verdict is "finite" or
    "infinite" only when the system's closed form reproduces every stored value.
    """
    vals = [Fraction(len(sys.F(n)), sys.prod(n)) for n in range(sys.horizon + 1)]
    cert = sys.certificate
    if cert is not None and cert.trend is not None and all(cert.trend(n) == v for n, v in enumerate(vals)):
        if cert.diverges:
            return TrendReport(vals, "infinite", True)
        if cert.limit is not None:
            return TrendReport(vals, f"finite({frac_str(cert.limit)})", True)
    return TrendReport(vals, f"undecided (last value {frac_str(vals[-1])})", False)


# -- full and almost-everywhere action ------------------------------------

def _bbox_of_sum(parts: Sequence[GroupSet]) -> tuple[Element, Element]:
    lo = list(parts[0].bbox()[0])
    hi = list(parts[0].bbox()[1])
    for p in parts[1:]:
        plo, phi = p.bbox()
        for i in range(len(lo)):
            lo[i] += plo[i]
            hi[i] += phi[i] - 1
    return tuple(lo), tuple(hi)


def count_escaping(sys: RankOneSystem, base: GroupSet, g: Element, n: int, m: int) -> int:
    """Number of digit choices x in base + C_{n+1} + ... + C_m with g + x outside F_m.

    Points are counted with multiplicity (one per digit tuple).  Boxes are handled
    by pruning on bounding boxes, so huge towers never get materialised.
    """
    g = as_element(g, sys.dim)
    Fm = sys.F(m)
    levels = [sys.C(i) for i in range(n + 1, m + 1)]
    fb = Fm.box_bounds() if Fm.is_box else None
    if fb is None:
        total = 0
        for b in base:
            start = add(b, g)
            for digits in itertools.product(*(lv.sorted() for lv in levels)):
                p = start
                for c in digits:
                    p = add(p, c)
                if p not in Fm:
                    total += 1
        return total
    flo, fhi = fb
    d = sys.dim
    # bounding boxes of the remaining digit sums C_i + ... + C_m
    rem_lo = [[0] * d for _ in range(len(levels) + 1)]
    rem_hi = [[0] * d for _ in range(len(levels) + 1)]
    rem_count = [1] * (len(levels) + 1)
    for i in range(len(levels) - 1, -1, -1):
        lo, hi = levels[i].bbox()
        for a in range(d):
            rem_lo[i][a] = rem_lo[i + 1][a] + lo[a]
            rem_hi[i][a] = rem_hi[i + 1][a] + hi[a] - 1
        rem_count[i] = rem_count[i + 1] * len(levels[i])
    blo, bhi = base.bbox()
    bsize = len(base)
    base_box = base.box_bounds() if base.is_box else None
    sorted_levels = [lv.sorted() for lv in levels]

    def rec(i: int, s: Element) -> int:
        lo = [s[a] + g[a] + blo[a] + rem_lo[i][a] for a in range(d)]
        hi = [s[a] + g[a] + bhi[a] - 1 + rem_hi[i][a] for a in range(d)]
        if all(flo[a] <= lo[a] and hi[a] < fhi[a] for a in range(d)):
            return 0
        if any(hi[a] < flo[a] or lo[a] >= fhi[a] for a in range(d)):
            return bsize * rem_count[i]
        if i == len(levels):
            shift = add(s, g)
            if base_box is not None:
                inside = 1
                for a in range(d):
                    w = min(base_box[1][a] + shift[a], fhi[a]) - max(base_box[0][a] + shift[a], flo[a])
                    inside *= max(w, 0)
                return bsize - inside
            return sum(1 for b in base if add(b, shift) not in Fm)
        return sum(rec(i + 1, add(s, c)) for c in sorted_levels[i])

    return rec(0, zero(d))


def check_full_action(sys: RankOneSystem, g) -> dict[int, int | None]:
    """For each n, the least m <= N with g + F_n + C_{n+1} + ... + C_m inside F_m (or None)."""
    g = as_element(g, sys.dim)
    out = {}
    for n in range(sys.horizon + 1):
        found = None
        for m in range(n, sys.horizon + 1):
            Fm = sys.F(m)
            parts = [sys.F(n).translate(g)] + [sys.C(i) for i in range(n + 1, m + 1)]
            if Fm.is_box:
                lo, hi = _bbox_of_sum(parts)
                flo, fhi = Fm.box_bounds()
                inside = all(a <= x and y <= b for x, y, a, b in zip(lo, hi, flo, fhi))
            else:
                inside = count_escaping(sys, sys.F(n), g, n, m) == 0
            if inside:
                found = m
                break
        out[n] = found
    return out


def check_ae_action(sys: RankOneSystem, g, n: int) -> dict[int, Fraction]:
    """The ratios #((g + F_n + C_{n+1} + ... + C_m) & F_m) / (#F_n #C_{n+1}...#C_m), m = n+1..N."""
    g = as_element(g, sys.dim)
    out = {}
    for m in range(n + 1, sys.horizon + 1):
        total = len(sys.F(n)) * (sys.prod(m) // sys.prod(n))
        out[m] = Fraction(total - count_escaping(sys, sys.F(n), g, n, m), total)
    return out


# -- return-time expansions ------------------------------------------------

@dataclass(frozen=True)
class Expansion:
    """One term g = b + c_{n+1} + ... + c_j - d_j - ... - d_{n+1} - a, with c_j != d_j."""

    start: int
    level: int
    c: tuple[Element, ...]
    d: tuple[Element, ...]

    def cell(self, a: Element) -> Element:
        """Level-j coordinate of the piece [a + d_{n+1} + ... + d_j]_j."""
        p = a
        for x in self.d:
            p = add(p, x)
        return p


def _pair_table(C: GroupSet) -> dict[Element, list[tuple[Element, Element]]]:
    table: dict[Element, list] = {}
    for c in C.sorted():
        for d in C.sorted():
            table.setdefault(sub(c, d), []).append((c, d))
    return table


def return_expansions(sys: RankOneSystem, g, a, b, n: int, depth: int
                      ) -> tuple[list[Expansion], CertifiedValue]:
    """All expansions with top level j <= depth and the certified measure of [a]_n & T_g^{-1}[b]_n.

    ``lo`` sums the measures of the pieces found; ``hi`` adds the mass of
    [a]_n whose g-translate has not re-entered the tower by level ``depth``.
    """
    d = sys.dim
    g, a, b = as_element(g, d), as_element(a, d), as_element(b, d)
    if a not in sys.F(n) or b not in sys.F(n):
        raise InvalidCylinder(f"a={fmt_element(a)}, b={fmt_element(b)} must lie in F_{n}")
    if not n <= depth <= sys.horizon:
        raise ValueError(f"depth {depth} must lie in [{n}, {sys.horizon}]")
    t = add(sub(g, b), a)  # required value of sum(c_l - d_l)
    tables = {l: _pair_table(sys.C(l)) for l in range(n + 1, depth + 1)}
    reach = {n: [0] * d}
    for l in range(n + 1, depth + 1):
        lo, hi = sys.C(l).bbox()
        reach[l] = [reach[l - 1][i] + hi[i] - 1 - lo[i] for i in range(d)]

    found: list[Expansion] = []
    if t == zero(d):
        found.append(Expansion(n, n, (), ()))

    def walk(level: int, need: Element, top: int, cs: list, ds: list) -> None:
        if level == n:
            if need == zero(d):
                found.append(Expansion(n, top, tuple(reversed(cs)), tuple(reversed(ds))))
            return
        r = reach[level - 1]
        for delta, pairs in tables[level].items():
            if level == top and delta == zero(d):
                continue
            rest = sub(need, delta)
            if any(abs(rest[i]) > r[i] for i in range(d)):
                continue
            for c, dd in pairs:
                if level == top and c == dd:
                    continue
                cs.append(c)
                ds.append(dd)
                walk(level - 1, rest, top, cs, ds)
                cs.pop()
                ds.pop()

    for j in range(n + 1, depth + 1):
        walk(j, t, j, [], [])
    found.sort(key=lambda e: (e.level, e.c, e.d))
    lo = sum((Fraction(1, sys.prod(e.level)) for e in found), Fraction(0))
    tail = Fraction(count_escaping(sys, GroupSet([a]), g, n, depth), sys.prod(depth))
    return found, CertifiedValue(lo, lo + tail)


# -- transformations of the construction sequence --------------------------

def telescope(sys: RankOneSystem, cuts: Sequence[int]) -> RankOneSystem:
    """Pass to the subsequence F_{k_0}, F_{k_1}, ... with merged offsets."""
    cuts = list(cuts)
    if not cuts or cuts[0] != 0:
        raise ValueError("cut points must start at 0")
    if any(b <= a for a, b in zip(cuts, cuts[1:])):
        raise ValueError("cut points must be strictly increasing")
    if cuts[-1] > sys.horizon:
        raise ValueError(f"cut {cuts[-1]} beyond horizon {sys.horizon}")
    Fs = tuple(sys.F(k) for k in cuts)
    Cs = tuple(sys.offsets_sum(a, b) for a, b in zip(cuts, cuts[1:]))
    return RankOneSystem(Fs, Cs, f"{sys.name}|telescoped")


@dataclass
class ThinResult:
    system: RankOneSystem
    densities: list[Fraction]
    threshold: Callable[[int], Fraction]
    below_threshold: list[int]
    note: str

    def to_json(self) -> dict:
        return {"densities": [frac_str(x) for x in self.densities],
                "below_threshold": self.below_threshold, "note": self.note}


def _default_threshold(n: int) -> Fraction:
    return Fraction(1) - (Fraction(1, n * n) if n > 0 else Fraction(1))


def thin(sys: RankOneSystem, generators: Sequence, threshold: Callable[[int], Fraction] | None = None
         ) -> ThinResult:
    """Keep c in C_{n+1} only if g_j + F_n + c stays inside F_{n+1} for every j <= min(J, n).

    The density sequence #C'_{n+1} / #C_{n+1} is reported together with the
    levels where it does not exceed ``threshold(n)`` (default 1 - n^-2); the
    caller decides whether the deficiencies are summable.
    """
    gens = [as_element(g, sys.dim) for g in generators]
    threshold = threshold or _default_threshold
    Cs, dens, low = [], [], []
    for n in range(sys.horizon):
        active = gens[: min(len(gens), n)]
        keep = [c for c in sys.C(n + 1)
                if all(sys.F(n).translate(add(g, c)).issubset(sys.F(n + 1)) for g in active)]
        if not keep:
            raise ThinningFailed(n + 1)
        Cs.append(GroupSet(keep, dim=sys.dim))
        dens.append(Fraction(len(keep), len(sys.C(n + 1))))
        if n > 0 and dens[-1] <= threshold(n):
            low.append(n)
    note = ("density threshold 1 - n^-2 per level n; a threshold of 1 - n^2 would be vacuous, "
            "so the exponent is read as negative")
    return ThinResult(RankOneSystem(sys.Fs, tuple(Cs), f"{sys.name}|thinned"), dens, threshold, low, note)


def large_holes_check(sys: RankOneSystem, g, n: int) -> tuple[bool, Element | None]:
    """Whether (g + F_n + F_n - F_n - F_n) meets C_{n+1} - C_{n+1} only in 0."""
    g = as_element(g, sys.dim)
    Fn = sys.F(n)
    window = diffset(sumset(Fn, Fn), sumset(Fn, Fn)).translate(g)
    cs = sys.C(n + 1).sorted()
    z = zero(sys.dim)
    candidates = [sub(cs[j], cs[i]) for i in range(len(cs)) for j in range(len(cs)) if i < j]
    candidates += [sub(cs[i], cs[j]) for i in range(len(cs)) for j in range(len(cs)) if i < j]
    for x in candidates:
        if x != z and x in window:
            return False, x
    return True, None


def convolution_window_counts(sys: RankOneSystem, l: int, n: int, L: int, shifts: Iterable
                              ) -> dict[Element, int]:
    """#{(c, c') in D x D : c - c' in F_n - F_n + h} for D = C_{l+1} + ... + C_L."""
    if not l < n <= L <= sys.horizon:
        raise ValueError("need l < n <= L <= horizon")
    D = sys.offsets_sum(l, L).sorted()
    W = diffset(sys.F(n), sys.F(n))
    diffs: dict[Element, int] = {}
    for c in D:
        for c2 in D:
            k = sub(c, c2)
            diffs[k] = diffs.get(k, 0) + 1
    out = {}
    for h in shifts:
        h = as_element(h, sys.dim)
        out[h] = sum(cnt for k, cnt in diffs.items() if sub(k, h) in W)
    return out


def build_cut_and_stack(cuts, spacers, horizon: int | None = None, name: str = "cut-and-stack",
                        certificate: ClosedForm | None = None) -> RankOneSystem:
    """Classical cutting and stacking over Z.

    At stage n the current column of height h_n is cut into r_n copies and
    copy i is followed by s_{n,i} spacer levels (the last one being the spacers
    on top).  ``cuts`` and ``spacers`` are sequences indexed by n or callables
    ``f(n, h_n)``.
    """
    if horizon is None:
        if callable(cuts) or callable(spacers):
            raise ValueError("horizon required with callable rules")
        horizon = len(cuts)
    h = 1
    Fs, Cs = [GroupSet.interval(0, 1)], []
    for n in range(horizon):
        r = cuts(n, h) if callable(cuts) else cuts[n]
        s = list(spacers(n, h) if callable(spacers) else spacers[n])
        if r < 2:
            raise ValueError(f"stage {n}: need at least 2 copies")
        if len(s) != r:
            raise ValueError(f"stage {n}: {r} copies but {len(s)} spacer counts")
        if any(x < 0 for x in s):
            raise ValueError(f"stage {n}: negative spacer count")
        offs, pos = [], 0
        for x in s:
            offs.append(pos)
            pos += h + x
        Cs.append(GroupSet.of_ints(offs))
        h = pos
        Fs.append(GroupSet.interval(0, h))
    return RankOneSystem(tuple(Fs), tuple(Cs), name, certificate)
