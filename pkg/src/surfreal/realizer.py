"""Deciding whether lattice placements embed a triangulation.

A placement realizes the surface when its points are in general position and
no edge crosses a facet it shares no vertex with. In general position every
improper facet-facet intersection shows up as such a crossing, so the
(edge, facet) pairs with disjoint labels are the only ones examined. Their
crossing count is the intersection edge functional used as annealing energy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

from .geom import check_point, crosses, in_general_position
from .surface import Edge, Facet, Triangulation

Placement = Mapping[int, tuple[int, int, int]]
Conflict = tuple[Edge, Facet]


class PartialPlacementError(ValueError):
    pass


@dataclass(frozen=True)
class Realization:
    triangulation: Triangulation
    placement: dict[int, tuple[int, int, int]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        placement = {int(k): tuple(v) for k, v in self.placement.items()}
        object.__setattr__(self, "placement", placement)
        for label, p in placement.items():
            if label not in self.triangulation.labels:
                raise ValueError(f"label {label} outside 1..{self.triangulation.vertex_count}")
            check_point(p)
        if len(set(placement.values())) != len(placement):
            raise ValueError("placement maps two labels to the same point")

    @property
    def is_total(self) -> bool:
        return len(self.placement) == self.triangulation.vertex_count

    def points(self) -> list[tuple[int, int, int]]:
        return [self.placement[v] for v in sorted(self.placement)]


@dataclass(frozen=True)
class VerificationReport:
    general_position_ok: bool
    conflicts: tuple[Conflict, ...]
    is_valid_embedding: bool

    def lines(self) -> list[str]:
        out = [
            f"general_position: {'ok' if self.general_position_ok else 'FAILED'}",
            f"conflicts: {len(self.conflicts)}",
        ]
        for (u, v), (a, b, c) in self.conflicts:
            out.append(f"  edge {u}-{v} crosses facet {a}-{b}-{c}")
        out.append(f"valid_embedding: {str(self.is_valid_embedding).lower()}")
        return out


@lru_cache(maxsize=256)
def disjoint_pairs(t: Triangulation) -> tuple[Conflict, ...]:
    """(edge, facet) pairs sharing no label, sorted."""
    return tuple(
        (e, f)
        for e in t.edge_list
        for f in sorted(t.facets)
        if e[0] not in f and e[1] not in f
    )


@lru_cache(maxsize=256)
def pairs_by_label(t: Triangulation) -> dict[int, tuple[Conflict, ...]]:
    """For each label, the disjoint (edge, facet) pairs that involve it."""
    out: dict[int, list[Conflict]] = {v: [] for v in t.labels}
    for e, f in disjoint_pairs(t):
        for v in (*e, *f):
            out[v].append((e, f))
    return {v: tuple(ps) for v, ps in out.items()}


def _crossing_pairs(t: Triangulation, placement: Placement) -> list[Conflict]:
    found = []
    for (u, v), (a, b, c) in disjoint_pairs(t):
        P = placement
        if u in P and v in P and a in P and b in P and c in P:
            if crosses(P[u], P[v], P[a], P[b], P[c]):
                found.append(((u, v), (a, b, c)))
    return found


def verify(r: Realization) -> VerificationReport:
    if not r.is_total:
        raise PartialPlacementError(
            "verify needs a total placement; use partial_compatible for partial ones"
        )
    gp = in_general_position(r.points())
    conflicts = tuple(_crossing_pairs(r.triangulation, r.placement))
    return VerificationReport(gp, conflicts, gp and not conflicts)


def partial_compatible(r: Realization) -> bool:
    """General position of the placed points and no crossing among the
    (edge, facet) pairs whose labels are all placed."""
    if not in_general_position(r.points()):
        return False
    return not _crossing_pairs(r.triangulation, r.placement)


def conflict_count(r: Realization) -> int:
    if not r.is_total:
        raise PartialPlacementError("conflict_count needs a total placement")
    return len(_crossing_pairs(r.triangulation, r.placement))
