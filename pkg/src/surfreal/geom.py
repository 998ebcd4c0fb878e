"""Exact integer predicates on lattice points.

All arithmetic is on Python ints. Coordinates are bounded by ``MAX_COORD`` so
the same formulas stay exact in fixed-width 128-bit arithmetic as well; the
compiled annealing kernel relies on a tighter bound of its own.
"""

from __future__ import annotations

from enum import IntEnum
from itertools import combinations
from typing import NamedTuple, Sequence

MAX_COORD = 1 << 19


class GridPoint(NamedTuple):
    x: int
    y: int
    z: int


Point = Sequence[int]


class Orientation(IntEnum):
    NEGATIVE = -1
    ZERO = 0
    POSITIVE = 1


class DegenerateInput(ValueError):
    """The caller broke the general-position or disjointness precondition."""


def check_point(p: Point) -> None:
    if len(p) != 3:
        raise ValueError(f"expected a 3D point, got {p!r}")
    for c in p:
        if not isinstance(c, int) or isinstance(c, bool):
            raise TypeError(f"coordinates must be ints, got {p!r}")
        if not -MAX_COORD <= c <= MAX_COORD:
            raise ValueError(f"coordinate {c} exceeds the exactness bound 2^19")


def det3(a: Point, b: Point, c: Point, d: Point) -> int:
    """det[b-a; c-a; d-a], unchecked."""
    bx, by, bz = b[0] - a[0], b[1] - a[1], b[2] - a[2]
    cx, cy, cz = c[0] - a[0], c[1] - a[1], c[2] - a[2]
    dx, dy, dz = d[0] - a[0], d[1] - a[1], d[2] - a[2]
    return bx * (cy * dz - cz * dy) - by * (cx * dz - cz * dx) + bz * (cx * dy - cy * dx)


def _sign(v: int) -> int:
    return (v > 0) - (v < 0)


def orient3d(a: Point, b: Point, c: Point, d: Point) -> Orientation:
    """Sign of det[b-a; c-a; d-a]; positive when (b-a, c-a, d-a) is right-handed."""
    for p in (a, b, c, d):
        check_point(p)
    return Orientation(_sign(det3(a, b, c, d)))


def collinear(a: Point, b: Point, c: Point) -> bool:
    ux, uy, uz = b[0] - a[0], b[1] - a[1], b[2] - a[2]
    vx, vy, vz = c[0] - a[0], c[1] - a[1], c[2] - a[2]
    return uy * vz - uz * vy == 0 and uz * vx - ux * vz == 0 and ux * vy - uy * vx == 0


def in_general_position(points: Sequence[Point]) -> bool:
    """No two points equal, no three collinear, no four coplanar."""
    for p in points:
        check_point(p)
    if len(set(map(tuple, points))) != len(points):
        return False
    if len(points) < 4:
        return not any(collinear(*t) for t in combinations(points, 3))
    return all(det3(*q) != 0 for q in combinations(points, 4))


def extend_general_position(prefix: Sequence[Point], p: Point) -> bool:
    """Whether ``prefix + [p]`` is in general position, given that ``prefix`` is.

    Only subsets containing ``p`` are examined.
    """
    check_point(p)
    p = tuple(p)
    if any(tuple(q) == p for q in prefix):
        return False
    if len(prefix) < 3:
        return not any(collinear(a, b, p) for a, b in combinations(prefix, 2))
    if len(prefix) == 3:
        # the triples inside prefix were vetted, but the quadruple also covers
        # collinear triples through p
        return det3(prefix[0], prefix[1], prefix[2], p) != 0
    return all(det3(a, b, c, p) != 0 for a, b, c in combinations(prefix, 3))


def crosses(p: Point, q: Point, a: Point, b: Point, c: Point) -> bool:
    """Strict crossing test without precondition checks.

    Any zero determinant yields False, which is what the annealing energy
    wants on degenerate placements.
    """
    s1 = det3(a, b, c, p)
    s2 = det3(a, b, c, q)
    if (s1 > 0 and s2 > 0) or (s1 < 0 and s2 < 0) or s1 == 0 or s2 == 0:
        return False
    o1 = det3(p, q, a, b)
    if o1 == 0:
        return False
    o2 = det3(p, q, b, c)
    if o2 == 0 or (o1 > 0) != (o2 > 0):
        return False
    o3 = det3(p, q, c, a)
    return o3 != 0 and (o1 > 0) == (o3 > 0)


def segment_triangle_crossing(p: Point, q: Point, a: Point, b: Point, c: Point) -> bool:
    """Whether the open segment pq meets the open triangle abc.

    The five points must be distinct and in general position; the five
    determinants evaluated here are exactly the five 4-subsets, so a zero
    among them is reported as ``DegenerateInput``.
    """
    pts = [tuple(x) for x in (p, q, a, b, c)]
    for x in pts:
        check_point(x)
    if len(set(pts)) != 5:
        raise DegenerateInput("segment and triangle must not share points")
    s1 = det3(a, b, c, p)
    s2 = det3(a, b, c, q)
    o1 = det3(p, q, a, b)
    o2 = det3(p, q, b, c)
    o3 = det3(p, q, c, a)
    if 0 in (s1, s2, o1, o2, o3):
        raise DegenerateInput("points are not in general position")
    if (s1 > 0) == (s2 > 0):
        return False
    return (o1 > 0) == (o2 > 0) == (o3 > 0)


def _disjoint_edges(tri: Sequence[Point], other: Sequence[Point]):
    keys = {tuple(x) for x in other}
    for u, v in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
        if tuple(u) not in keys and tuple(v) not in keys:
            yield u, v


def _boxes_disjoint(t1: Sequence[Point], t2: Sequence[Point]) -> bool:
    for k in range(3):
        if max(p[k] for p in t1) < min(p[k] for p in t2):
            return True
        if max(p[k] for p in t2) < min(p[k] for p in t1):
            return True
    return False


def triangles_conflict(t1: Sequence[Point], t2: Sequence[Point], shared: int) -> bool:
    """Whether two triangles intersect beyond their common face.

    ``shared`` is the number of common vertex labels; shared vertices must
    have identical coordinates.
    """
    if shared not in (0, 1, 2):
        raise ValueError(f"shared must be 0, 1 or 2, got {shared}")
    common = {tuple(x) for x in t1} & {tuple(x) for x in t2}
    if len(common) != shared:
        raise DegenerateInput(
            f"triangles share {len(common)} points but {shared} labels"
        )
    if shared == 2:
        return False
    if _boxes_disjoint(t1, t2):
        return False
    for u, v in _disjoint_edges(t1, t2):
        if segment_triangle_crossing(u, v, *t2):
            return True
    for u, v in _disjoint_edges(t2, t1):
        if segment_triangle_crossing(u, v, *t1):
            return True
    return False
