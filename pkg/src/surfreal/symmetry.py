"""The 48 symmetries of the cubic grid {0..extent-1}^3 and lexicographic
canonical forms of point sets under them."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations, product
from typing import Iterable, Sequence

Point = tuple[int, int, int]


@dataclass(frozen=True)
class CubeIsometry:
    """Coordinate ``k`` of the image is coordinate ``axis_permutation[k]`` of
    the input, reflected as ``extent - 1 - c`` when ``flips[k]`` is set."""

    axis_permutation: tuple[int, int, int]
    flips: tuple[bool, bool, bool]
    extent: int

    def __call__(self, p: Sequence[int]) -> Point:
        m = self.extent - 1
        out = []
        for k in range(3):
            c = p[self.axis_permutation[k]]
            out.append(m - c if self.flips[k] else c)
        return (out[0], out[1], out[2])

    def compose(self, other: CubeIsometry) -> CubeIsometry:
        """``self ∘ other``: apply ``other`` first."""
        if other.extent != self.extent:
            raise ValueError("cannot compose isometries of different grids")
        perm = tuple(other.axis_permutation[self.axis_permutation[k]] for k in range(3))
        flips = tuple(
            self.flips[k] != other.flips[self.axis_permutation[k]] for k in range(3)
        )
        return CubeIsometry(perm, flips, self.extent)  # type: ignore[arg-type]

    def inverse(self) -> CubeIsometry:
        perm = [0, 0, 0]
        flips = [False, False, False]
        for k in range(3):
            perm[self.axis_permutation[k]] = k
            flips[self.axis_permutation[k]] = self.flips[k]
        return CubeIsometry(tuple(perm), tuple(flips), self.extent)  # type: ignore[arg-type]

    @property
    def preserves_orientation(self) -> bool:
        perm = self.axis_permutation
        inversions = sum(perm[i] > perm[j] for i in range(3) for j in range(i + 1, 3))
        return (inversions + sum(self.flips)) % 2 == 0


@lru_cache(maxsize=None)
def all_isometries(extent: int) -> tuple[CubeIsometry, ...]:
    """All 48 isometries, identity first."""
    if extent < 1:
        raise ValueError(f"extent must be positive, got {extent}")
    return tuple(
        CubeIsometry(perm, flips, extent)  # type: ignore[arg-type]
        for perm in permutations(range(3))
        for flips in product((False, True), repeat=3)
    )


def in_grid(p: Sequence[int], extent: int) -> bool:
    return len(p) == 3 and all(0 <= c < extent for c in p)


def apply(g: CubeIsometry, p: Sequence[int]) -> Point:
    if not in_grid(p, g.extent):
        raise ValueError(f"point {tuple(p)} outside the grid of extent {g.extent}")
    return g(p)


def canonical_form(points: Iterable[Sequence[int]], extent: int) -> tuple[Point, ...]:
    """Least sorted image of the set over all 48 isometries."""
    pts = [tuple(p) for p in points]
    for p in pts:
        if not in_grid(p, extent):
            raise ValueError(f"point {p} outside the grid of extent {extent}")
    return min(tuple(sorted(g(p) for p in pts)) for g in all_isometries(extent))


def is_canonical(points: Iterable[Sequence[int]], extent: int) -> bool:
    pts = tuple(sorted(tuple(p) for p in points))
    return canonical_form(pts, extent) == pts


def prefix_can_be_lexmin(prefix: Sequence[Sequence[int]], extent: int) -> bool:
    """False when some isometry maps the prefix set to a lexicographically
    smaller sorted sequence.

    Sound for pruning: the i-th smallest point of an image can only decrease
    when points are added, so the same isometry also beats every extension of
    the prefix by points larger than its last element.
    """
    pts = [tuple(p) for p in prefix]
    target = tuple(pts)
    for g in all_isometries(extent)[1:]:
        if tuple(sorted(g(p) for p in pts)) < target:
            return False
    return True


def orbit(points: Iterable[Sequence[int]], extent: int) -> set[tuple[Point, ...]]:
    pts = [tuple(p) for p in points]
    return {tuple(sorted(g(p) for p in pts)) for g in all_isometries(extent)}


def orbit_size(points: Iterable[Sequence[int]], extent: int) -> int:
    """48 divided by the order of the set stabilizer."""
    return len(orbit(points, extent))
