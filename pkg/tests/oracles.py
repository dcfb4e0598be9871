"""Independent brute-force references used to freeze and cross-check values.

Nothing here touches the numpy tower model or the digit tables: positions are
enumerated straight from the offset sets, one digit string at a time.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import product


def positions_rank_one(Cs, cells, n, L):
    """Levels of F_L (over Z) occupied by [cells]_n: a + c_{n+1} + ... + c_L."""
    out = set()
    digit_sets = [sorted(x for (x,) in Cs[i - 1]) for i in range(n + 1, L + 1)]
    for digits in product(*digit_sets):
        s = sum(digits)
        for a in cells:
            out.add(a + s)
    return out


def level_count(Cs, L):
    k = 1
    for i in range(L):
        k *= len(Cs[i])
    return k


def correlation_rank_one(sys, A_level, A_cells, B_level, B_cells, shift, L, wrap=False):
    """(lo, hi) for mu(A & T^-shift B) from depth-L positions.

    Unresolved mass is the smaller of two counts: points of A whose shifted
    level leaves the tower, and points of B whose unshifted level does.
    """
    Cs = sys.Cs
    height = len(sys.F(L))
    PA = positions_rank_one(Cs, A_cells, A_level, L)
    PB = positions_rank_one(Cs, B_cells, B_level, L)
    mass = Fraction(1, level_count(Cs, L))
    hit = esc = 0
    for p in PA:
        q = p + shift
        if wrap:
            q %= height
        if 0 <= q < height:
            hit += q in PB
        else:
            esc += 1
    if not wrap:
        esc = min(esc, sum(1 for q in PB if not 0 <= q - shift < height))
    return hit * mass, (hit + esc) * mass


def positions_rank_k(sys, parts, n, L):
    """Per tower j of stage L, the levels occupied by the rank-k cylinder with ``parts`` at stage n."""
    cur = {i: set(cells) for i, cells in parts.items()}
    for m in range(n + 1, L + 1):
        nxt: dict[int, set] = {j: set() for j in range(1, sys.k + 1)}
        for e in sys.C(m):
            for x in cur.get(e.src, ()):
                nxt[e.tgt].add(x + e.g[0])
        cur = nxt
    return cur


def odometer_digits(p, L):
    return [(p >> i) & 1 for i in range(L)]
