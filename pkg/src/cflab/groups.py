"""Elements and finite subsets of the lattice group Z^d.

Elements are plain tuples of Python ints.  A :class:`GroupSet` is an
immutable finite subset stored either as an explicit frozenset of tuples or,
for axis-parallel boxes, as a pair of corners so that very large towers can be
handled without materialising them.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .errors import DimensionMismatch, UnsupportedShape

Element = tuple[int, ...]


def elem(*coords: int) -> Element:
    return tuple(int(c) for c in coords)


def zero(dim: int) -> Element:
    return (0,) * dim


def unit(dim: int, axis: int) -> Element:
    return tuple(1 if i == axis else 0 for i in range(dim))


def add(a: Element, b: Element) -> Element:
    if len(a) != len(b):
        raise DimensionMismatch(f"cannot add {a} and {b}")
    return tuple(x + y for x, y in zip(a, b))


def neg(a: Element) -> Element:
    return tuple(-x for x in a)


def sub(a: Element, b: Element) -> Element:
    if len(a) != len(b):
        raise DimensionMismatch(f"cannot subtract {b} from {a}")
    return tuple(x - y for x, y in zip(a, b))


def scale(k: int, a: Element) -> Element:
    return tuple(k * x for x in a)


def as_element(x, dim: int | None = None) -> Element:
    """Coerce an int or a sequence of ints into an element."""
    if isinstance(x, int):
        e = (x,)
    else:
        e = tuple(int(c) for c in x)
    if dim is not None and len(e) != dim:
        raise DimensionMismatch(f"{x} is not an element of Z^{dim}")
    return e


def fmt_element(e: Element) -> str:
    return str(e[0]) if len(e) == 1 else "(" + ", ".join(map(str, e)) + ")"


class GroupSet:
    """A finite subset of Z^d.

    Use :meth:`box` / :meth:`interval` for boxes and the constructor for
    explicit point sets.  Boxes are half-open: ``[lo, hi)`` per axis.
    """

    __slots__ = ("dim", "_pts", "_lo", "_hi", "_hash")

    def __init__(self, points: Iterable = (), dim: int | None = None):
        pts = frozenset(as_element(p) for p in points)
        if pts:
            dims = {len(p) for p in pts}
            if len(dims) != 1:
                raise DimensionMismatch(f"mixed dimensions {sorted(dims)}")
            d = dims.pop()
            if dim is not None and d != dim:
                raise DimensionMismatch(f"points of dimension {d}, expected {dim}")
            dim = d
        if dim is None:
            raise ValueError("dimension of an empty set must be given")
        self.dim = dim
        self._pts = pts
        self._lo = None
        self._hi = None
        self._hash = None

    @classmethod
    def box(cls, lo: Sequence[int], hi: Sequence[int]) -> "GroupSet":
        lo, hi = as_element(lo), as_element(hi)
        if len(lo) != len(hi):
            raise DimensionMismatch("box corners of different dimension")
        s = cls.__new__(cls)
        s.dim = len(lo)
        s._hash = None
        if any(h <= l for l, h in zip(lo, hi)):
            s._pts, s._lo, s._hi = frozenset(), None, None
        else:
            s._pts, s._lo, s._hi = None, lo, hi
        return s

    @classmethod
    def interval(cls, a: int, b: int) -> "GroupSet":
        """The subset {a, ..., b-1} of Z."""
        return cls.box((a,), (b,))

    @classmethod
    def of_ints(cls, values: Iterable[int]) -> "GroupSet":
        return cls(((v,) for v in values), dim=1)

    @classmethod
    def empty(cls, dim: int) -> "GroupSet":
        return cls((), dim=dim)

    # shape ---------------------------------------------------------------
    @property
    def is_box(self) -> bool:
        return self._lo is not None

    def box_bounds(self) -> tuple[Element, Element] | None:
        """Corners ``(lo, hi)`` if the set is a nonempty box, else None.

        Explicit point sets that happen to fill their bounding box count as boxes.
        """
        if self._lo is not None:
            return self._lo, self._hi
        if not self._pts:
            return None
        lo, hi = self.bbox()
        size = 1
        for l, h in zip(lo, hi):
            size *= h - l
        return (lo, hi) if size == len(self._pts) else None

    def bbox(self) -> tuple[Element, Element]:
        """Smallest box ``[lo, hi)`` containing the set (nonempty sets only)."""
        if self._lo is not None:
            return self._lo, self._hi
        if not self._pts:
            raise ValueError("empty set has no bounding box")
        lo = tuple(min(p[i] for p in self._pts) for i in range(self.dim))
        hi = tuple(max(p[i] for p in self._pts) + 1 for i in range(self.dim))
        return lo, hi

    def interval_bounds(self) -> tuple[int, int] | None:
        """For subsets of Z that are intervals: ``(a, b)`` with set = [a, b)."""
        if self.dim != 1:
            return None
        b = self.box_bounds()
        return None if b is None else (b[0][0], b[1][0])

    # container protocol ----------------------------------------------------
    def __len__(self) -> int:
        if self._lo is not None:
            n = 1
            for l, h in zip(self._lo, self._hi):
                n *= h - l
            return n
        return len(self._pts)

    def __bool__(self) -> bool:
        return self._lo is not None or bool(self._pts)

    def __contains__(self, x) -> bool:
        e = as_element(x)
        if len(e) != self.dim:
            return False
        if self._lo is not None:
            return all(l <= c < h for c, l, h in zip(e, self._lo, self._hi))
        return e in self._pts

    def __iter__(self) -> Iterator[Element]:
        if self._lo is not None:
            return itertools.product(*(range(l, h) for l, h in zip(self._lo, self._hi)))
        return iter(sorted(self._pts))

    def points(self) -> frozenset:
        if self._lo is not None:
            return frozenset(iter(self))
        return self._pts

    def sorted(self) -> list[Element]:
        return list(iter(self))

    def ints(self) -> list[int]:
        """Sorted coordinates of a subset of Z."""
        if self.dim != 1:
            raise DimensionMismatch("ints() needs a subset of Z")
        return [p[0] for p in self]

    def __eq__(self, other) -> bool:
        if not isinstance(other, GroupSet):
            return NotImplemented
        if self.dim != other.dim or len(self) != len(other):
            return False
        if self._lo is not None and other._lo is not None:
            return self._lo == other._lo and self._hi == other._hi
        if self._lo is not None or other._lo is not None:
            a, b = (self, other) if self._lo is not None else (other, self)
            return a.box_bounds() == b.box_bounds()
        return self._pts == other._pts

    def __hash__(self) -> int:
        if self._hash is None:
            b = self.box_bounds()
            self._hash = hash(("box", b)) if b is not None else hash(self.points())
        return self._hash

    def __repr__(self) -> str:
        if self._lo is not None:
            if self.dim == 1:
                return f"[{self._lo[0]}, {self._hi[0]})"
            return " x ".join(f"[{l}, {h})" for l, h in zip(self._lo, self._hi))
        return "{" + ", ".join(fmt_element(p) for p in self) + "}"

    # set algebra ------------------------------------------------------------
    def _check(self, other: "GroupSet") -> None:
        if self.dim != other.dim:
            raise DimensionMismatch(f"Z^{self.dim} vs Z^{other.dim}")

    def issubset(self, other: "GroupSet") -> bool:
        self._check(other)
        if not self:
            return True
        ob = other.box_bounds() if other._lo is not None else None
        if ob is not None:
            lo, hi = self.bbox()
            return all(ol <= l and h <= oh for l, h, ol, oh in zip(lo, hi, *ob))
        if len(self) > len(other):
            return False
        return all(p in other for p in self)

    def translate(self, g: Element) -> "GroupSet":
        g = as_element(g, self.dim)
        if self._lo is not None:
            return GroupSet.box(add(self._lo, g), add(self._hi, g))
        return GroupSet((add(p, g) for p in self._pts), dim=self.dim)

    def negate(self) -> "GroupSet":
        if self._lo is not None:
            return GroupSet.box(tuple(1 - h for h in self._hi), tuple(1 - l for l in self._lo))
        return GroupSet((neg(p) for p in self._pts), dim=self.dim)

    def union(self, other: "GroupSet") -> "GroupSet":
        self._check(other)
        return GroupSet(self.points() | other.points(), dim=self.dim)

    def intersection(self, other: "GroupSet") -> "GroupSet":
        self._check(other)
        if self._lo is not None and other._lo is not None:
            lo = tuple(max(a, b) for a, b in zip(self._lo, other._lo))
            hi = tuple(min(a, b) for a, b in zip(self._hi, other._hi))
            return GroupSet.box(lo, hi)
        small, big = (self, other) if len(self) <= len(other) else (other, self)
        return GroupSet((p for p in small if p in big), dim=self.dim)

    def difference(self, other: "GroupSet") -> "GroupSet":
        self._check(other)
        return GroupSet((p for p in self if p not in other), dim=self.dim)

    def __add__(self, other: "GroupSet") -> "GroupSet":
        return sumset(self, other)

    def __sub__(self, other: "GroupSet") -> "GroupSet":
        return diffset(self, other)


def sumset(A: GroupSet, B: GroupSet) -> GroupSet:
    """{a + b : a in A, b in B}; boxes stay boxes."""
    A._check(B)
    if not A or not B:
        return GroupSet.empty(A.dim)
    if A.is_box and B.is_box:
        return GroupSet.box(add(A._lo, B._lo), tuple(x + y - 1 for x, y in zip(A._hi, B._hi)))
    if A.is_box and len(B) == 1:
        return A.translate(next(iter(B)))
    if B.is_box and len(A) == 1:
        return B.translate(next(iter(A)))
    return GroupSet((add(a, b) for a in A for b in B), dim=A.dim)


def sumset_all(sets: Iterable[GroupSet], dim: int) -> GroupSet:
    """Iterated sumset; the empty sum is {0}."""
    out = GroupSet([zero(dim)])
    for s in sets:
        out = sumset(out, s)
    return out


def diffset(A: GroupSet, B: GroupSet) -> GroupSet:
    return sumset(A, B.negate())


def _box_overlap(lo1, hi1, lo2, hi2) -> int:
    n = 1
    for a, b, c, d in zip(lo1, hi1, lo2, hi2):
        w = min(b, d) - max(a, c)
        if w <= 0:
            return 0
        n *= w
    return n


def folner_defect(g: Element, F: GroupSet) -> Fraction:
    """#((g + F) symmetric-difference F) / #F."""
    if not F:
        raise ValueError("Folner defect of the empty set")
    g = as_element(g, F.dim)
    b = F.box_bounds() if F.is_box else None
    if b is not None:
        lo, hi = b
        common = _box_overlap(lo, hi, add(lo, g), add(hi, g))
        return Fraction(2 * (len(F) - common), len(F))
    pts = F.points()
    moved = {add(p, g) for p in pts}
    return Fraction(len(moved ^ pts), len(pts))


def disjoint_translates(F: GroupSet, C: GroupSet) -> tuple[bool, tuple[Element, Element] | None]:
    """Whether the translates F + c, c in C, are pairwise disjoint.

    On failure the first overlapping pair (c, c') in sorted order is returned.
    """
    F._check(C)
    cs = C.sorted()
    if not F or len(cs) < 2:
        return True, None
    b = F.box_bounds()
    if b is not None:
        size = tuple(h - l for l, h in zip(*b))
        for j in range(1, len(cs)):
            for i in range(j):
                if all(abs(x - y) < s for x, y, s in zip(cs[i], cs[j], size)):
                    return False, (cs[i], cs[j])
        return True, None
    diffs = diffset(F, F).points()
    for j in range(1, len(cs)):
        for i in range(j):
            if sub(cs[j], cs[i]) in diffs:
                return False, (cs[i], cs[j])
    return True, None


def cover_by_translates(F: GroupSet) -> tuple[int, GroupSet]:
    """Disjoint translates of a box F whose union contains F - F.

    Along an axis of length h > 1 the two translates [-(h-1), 1) and [1, h+1)
    cover [-(h-1), h-1]; an axis of length 1 needs a single translate.
    """
    b = F.box_bounds()
    if b is None:
        raise UnsupportedShape("cover_by_translates supports boxes only")
    lo, hi = b
    choices = []
    for l, h in zip(lo, hi):
        side = h - l
        choices.append((-l,) if side == 1 else (-(side - 1) - l, 1 - l))
    offsets = GroupSet(itertools.product(*choices), dim=F.dim)
    return len(offsets), offsets
