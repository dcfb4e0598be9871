"""Ordered Bratteli diagrams of spacer-free finite-rank systems over Z.

Vertices of level n >= 0 are the towers 1..k; a single root sits below level 0.
Level-0 edges join the root to each tower, and the edges of level n >= 1 are
the placements (i, c, j) of C_n, ordered inside each target j by offset.
A path e_0 e_1 ... e_L is the same thing as a level of the depth-L castle.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

from .errors import UnsupportedShape
from .finite_rank import Edge, RankKSystem, castle_view, stack_castle
from .rank_one import RankOneSystem

MAXIMAL = "maximal"


class DEdge(NamedTuple):
    src: int
    tgt: int
    rank: int


@dataclass(frozen=True)
class OrderedBratteliDiagram:
    k: int
    levels: tuple[tuple[DEdge, ...], ...]

    def __post_init__(self):
        for n, edges in enumerate(self.levels):
            by_tgt: dict[int, list[int]] = {}
            for e in edges:
                if n == 0 and e.src != 0:
                    raise ValueError("level-0 edges must start at the root 0")
                by_tgt.setdefault(e.tgt, []).append(e.rank)
            for j, ranks in by_tgt.items():
                if sorted(ranks) != list(range(len(ranks))):
                    raise ValueError(f"level {n}, vertex {j}: ranks {sorted(ranks)} are not 0..{len(ranks) - 1}")

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def incoming(self, n: int, j: int) -> list[DEdge]:
        return sorted((e for e in self.levels[n] if e.tgt == j), key=lambda e: e.rank)

    def indegree(self, n: int, j: int) -> int:
        return sum(1 for e in self.levels[n] if e.tgt == j)

    def to_json(self) -> dict:
        return {"k": self.k, "levels": [{"edges": [{"src": e.src, "tgt": e.tgt, "rank": e.rank}
                                                   for e in sorted(lv, key=lambda e: (e.tgt, e.rank))]}
                                        for lv in self.levels]}

    @classmethod
    def from_json(cls, data: dict) -> "OrderedBratteliDiagram":
        levels = tuple(tuple(DEdge(e["src"], e["tgt"], e["rank"]) for e in lv["edges"]) for lv in data["levels"])
        return cls(int(data["k"]), levels)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)

    def to_dot(self) -> str:
        lines = ["digraph bratteli {", "  rankdir=BT;", '  root [label="root"];']
        for n in range(len(self.levels)):
            for j in range(1, self.k + 1):
                lines.append(f'  v{n}_{j} [label="{j}"];')
        for n, lv in enumerate(self.levels):
            for e in sorted(lv, key=lambda e: (e.tgt, e.rank)):
                src = "root" if n == 0 else f"v{n - 1}_{e.src}"
                lines.append(f'  {src} -> v{n}_{e.tgt} [id="e{n}_{e.tgt}_{e.rank}", label="{e.rank}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _as_k(sys) -> RankKSystem:
    return sys.as_rank_k() if isinstance(sys, RankOneSystem) else sys


def export(sys: Union[RankOneSystem, RankKSystem]) -> OrderedBratteliDiagram:
    ksys = _as_k(sys)
    cv = castle_view(ksys)
    for n in range(ksys.horizon):
        for j in ksys.marks:
            if any(cv.gaps[n][j]) or (cv.placements[n][j] and cv.placements[n][j][0][1] != 0):
                raise UnsupportedShape(f"spacers in tower {j} at stage {n + 1}; no diagram")
    if any(len(ksys.F(0, i)) != 1 for i in ksys.marks):
        raise UnsupportedShape("F_0 must be a single level per tower")
    levels = [tuple(DEdge(0, i, 0) for i in ksys.marks)]
    for n in range(ksys.horizon):
        edges = []
        for j in ksys.marks:
            for rank, (i, _) in enumerate(cv.placements[n][j]):
                edges.append(DEdge(i, j, rank))
        levels.append(tuple(edges))
    return OrderedBratteliDiagram(ksys.k, tuple(levels))


def permute_ranks(diag: OrderedBratteliDiagram, level: int, target: int, order: Sequence[int]) -> OrderedBratteliDiagram:
    """Reassign ranks into one vertex: the edge currently at rank r gets rank order[r]."""
    lv = []
    for e in diag.levels[level]:
        lv.append(DEdge(e.src, e.tgt, order[e.rank]) if e.tgt == target else e)
    levels = list(diag.levels)
    levels[level] = tuple(lv)
    return OrderedBratteliDiagram(diag.k, tuple(levels))


def _check_path(diag: OrderedBratteliDiagram, path: Sequence[DEdge]) -> None:
    if not path:
        raise ValueError("empty path")
    if path[0].src != 0:
        raise ValueError("path must start at the root")
    for n, e in enumerate(path):
        if n >= len(diag.levels) or e not in diag.levels[n]:
            raise ValueError(f"edge {tuple(e)} is not an edge of level {n}")
        if n > 0 and e.src != path[n - 1].tgt:
            raise ValueError(f"path breaks between levels {n - 1} and {n}")


def minimal_path(diag: OrderedBratteliDiagram, top: int, j: int) -> tuple[DEdge, ...]:
    """The order-minimal path from the root to vertex j of level ``top``."""
    out = []
    for n in range(top, -1, -1):
        e = diag.incoming(n, j)[0]
        out.append(e)
        j = e.src
    return tuple(reversed(out))


def vershik_successor(diag: OrderedBratteliDiagram, path: Sequence[DEdge]):
    """Adic successor: bump the lowest non-maximal edge, reset everything below it to minimal."""
    path = tuple(path)
    _check_path(diag, path)
    for n, e in enumerate(path):
        if e.rank + 1 < diag.indegree(n, e.tgt):
            nxt = diag.incoming(n, e.tgt)[e.rank + 1]
            lower = minimal_path(diag, n - 1, nxt.src) if n > 0 else ()
            return lower + (nxt,) + path[n + 1:]
    return MAXIMAL


def to_cf(diag: OrderedBratteliDiagram, name: str = "from-diagram") -> RankKSystem:
    """Offsets are prefix sums of source heights along each target's order."""
    def orders(n, heights):
        return [[e.src for e in diag.incoming(n + 1, j)] for j in range(1, diag.k + 1)]
    return stack_castle(diag.k, orders, None, diag.depth, name)


# -- equivalence oracle ----------------------------------------------------

@dataclass
class OracleReport:
    depth: int
    checked: int
    passed: bool
    counterexample: dict | None = None

    def to_json(self) -> dict:
        return {"depth": self.depth, "checked": self.checked, "pass": self.passed,
                "counterexample": self.counterexample}


def _edge_keys(ksys: RankKSystem, n: int) -> dict[Edge, tuple[int, int, int]]:
    """System edge -> (src, tgt, index among the parallel edges sorted by offset)."""
    out = {}
    groups: dict[tuple[int, int], list[Edge]] = {}
    for e in ksys.C(n):
        groups.setdefault((e.src, e.tgt), []).append(e)
    for (i, j), es in groups.items():
        for idx, e in enumerate(sorted(es, key=lambda e: e.g)):
            out[e] = (i, j, idx)
    return out


def equivalence_oracle(sys: Union[RankOneSystem, RankKSystem], depth: int,
                       diagram: OrderedBratteliDiagram | None = None) -> OracleReport:
    """Check phi(T p) = successor(phi(p)) at every level p of every tower of the depth-L castle.

    phi reads off the placement digits of p.  System edges are matched with
    diagram edges through (source, target, index among parallel edges), a key
    that does not depend on the order, so an export with wrong ranks is caught.
    """
    ksys = _as_k(sys)
    if depth > ksys.horizon:
        ksys = ksys.extend(depth)
    diag = diagram if diagram is not None else export(ksys)
    if diag.depth < depth:
        raise ValueError(f"diagram depth {diag.depth} < {depth}")
    heights = [ksys.heights(n) for n in range(depth + 1)]
    key_maps = [None] + [_edge_keys(ksys, n) for n in range(1, depth + 1)]
    dmaps = []
    for n in range(depth + 1):
        groups: dict[tuple[int, int], list[DEdge]] = {}
        for e in diag.levels[n]:
            groups.setdefault((e.src, e.tgt), []).append(e)
        # parallel diagram edges are matched to system edges by their listing order in the export
        dmaps.append({(i, j, idx): e for (i, j), es in groups.items() for idx, e in enumerate(es)})
    edges_into = [None] + [{j: sorted(ksys.edges(n, j=j), key=lambda e: e.g) for j in ksys.marks}
                           for n in range(1, depth + 1)]

    def phi(j: int, p: int) -> tuple[DEdge, ...]:
        out = []
        for n in range(depth, 0, -1):
            hit = None
            for e in edges_into[n][j]:
                if e.g[0] <= p < e.g[0] + heights[n - 1][e.src - 1]:
                    hit = e
                    break
            if hit is None:
                raise UnsupportedShape(f"level {p} of tower {j} at stage {n} is a spacer")
            out.append(dmaps[n][key_maps[n][hit]])
            p -= hit.g[0]
            j = hit.src
        out.append(dmaps[0][(0, j, 0)])
        return tuple(reversed(out))

    checked = 0
    for j in ksys.marks:
        h = heights[depth][j - 1]
        cur = phi(j, 0)
        for p in range(h):
            succ = vershik_successor(diag, cur)
            checked += 1
            if p == h - 1:
                if succ != MAXIMAL:
                    return OracleReport(depth, checked, False, _cex(j, p, cur, succ, MAXIMAL))
            else:
                want = phi(j, p + 1)
                if succ != want:
                    return OracleReport(depth, checked, False, _cex(j, p, cur, succ, want))
                cur = want
    return OracleReport(depth, checked, True)


def _fmt_path(path) -> object:
    if path == MAXIMAL:
        return MAXIMAL
    return [list(e) for e in path]


def _cex(j, p, path, got, want) -> dict:
    return {"tower": j, "level": p, "path": _fmt_path(path), "successor": _fmt_path(got),
            "expected": _fmt_path(want)}
