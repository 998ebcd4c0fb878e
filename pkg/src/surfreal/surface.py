"""Abstract triangulated surfaces: validation, Euler characteristic, genus,
vertex links and the Heawood lower bound on the vertex count."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

Facet = tuple[int, int, int]
Edge = tuple[int, int]


class TriangulationError(ValueError):
    """Raised when a facet list violates the basic triangulation invariants."""


@dataclass(frozen=True)
class NonManifoldEdge:
    edge: Edge
    facet_count: int


@dataclass(frozen=True)
class DisconnectedVertexLink:
    vertex: int


@dataclass(frozen=True)
class NonOrientable:
    pass


@dataclass(frozen=True)
class Disconnected:
    components: int


Failure = NonManifoldEdge | DisconnectedVertexLink | NonOrientable | Disconnected


@dataclass(frozen=True, eq=False)
class Triangulation:
    """A labeled abstract 2-complex given by its facets.

    Labels are 1-based. Facets are stored as sorted triples in input order;
    the order carries no meaning beyond reporting.
    """

    name: str
    vertex_count: int
    facets: tuple[Facet, ...]

    def __init__(self, name: str, vertex_count: int, facets: Iterable[Sequence[int]]):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "vertex_count", vertex_count)
        object.__setattr__(self, "facets", tuple(_normalize_facet(f) for f in facets))
        self._check()

    def _check(self) -> None:
        n = self.vertex_count
        if not isinstance(n, int) or n < 1:
            raise TriangulationError(f"vertex_count must be a positive integer, got {n!r}")
        seen: set[Facet] = set()
        used: set[int] = set()
        for f in self.facets:
            if len(set(f)) != 3:
                raise TriangulationError(f"facet {list(f)} has repeated labels")
            if f[0] < 1 or f[2] > n:
                raise TriangulationError(f"facet {list(f)} has a label outside 1..{n}")
            if f in seen:
                raise TriangulationError(f"duplicate facet {list(f)}")
            seen.add(f)
            used.update(f)
        missing = sorted(set(range(1, n + 1)) - used)
        if missing:
            raise TriangulationError(f"labels {missing} occur in no facet")

    # frozen + cached_property needs __dict__; identity hashing keeps caches cheap
    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Triangulation):
            return NotImplemented
        return (self.name, self.vertex_count, self.facets) == (
            other.name,
            other.vertex_count,
            other.facets,
        )

    def __hash__(self) -> int:
        return hash((self.name, self.vertex_count, self.facets))

    @property
    def labels(self) -> range:
        return range(1, self.vertex_count + 1)

    @cached_property
    def edge_list(self) -> tuple[Edge, ...]:
        return tuple(sorted({e for f in self.facets for e in combinations(f, 2)}))

    @cached_property
    def edge_facets(self) -> dict[Edge, list[Facet]]:
        out: dict[Edge, list[Facet]] = defaultdict(list)
        for f in self.facets:
            for e in combinations(f, 2):
                out[e].append(f)
        return dict(out)

    def relabel(self, perm: dict[int, int], name: str | None = None) -> Triangulation:
        return Triangulation(
            self.name if name is None else name,
            self.vertex_count,
            [[perm[v] for v in f] for f in self.facets],
        )


def _normalize_facet(f: Sequence[int]) -> Facet:
    f = tuple(f)
    if len(f) != 3:
        raise TriangulationError(f"facet {list(f)} does not have exactly 3 labels")
    if not all(isinstance(v, int) and not isinstance(v, bool) for v in f):
        raise TriangulationError(f"facet {list(f)} has non-integer labels")
    return tuple(sorted(f))  # type: ignore[return-value]


@dataclass(frozen=True)
class TopologyReport:
    V: int
    E: int
    F: int
    euler_characteristic: int
    is_closed_surface: bool
    is_orientable: bool
    genus: int | None
    failures: tuple[Failure, ...] = field(default=())

    def summary(self) -> str:
        parts = [
            f"V={self.V} E={self.E} F={self.F} chi={self.euler_characteristic}",
            f"closed={self.is_closed_surface} orientable={self.is_orientable}",
            f"genus={'-' if self.genus is None else self.genus}",
        ]
        if self.failures:
            parts.append("failures=" + ",".join(_describe(f) for f in self.failures))
        return " ".join(parts)


def _describe(f: Failure) -> str:
    if isinstance(f, NonManifoldEdge):
        return f"NonManifoldEdge({f.edge[0]}-{f.edge[1]}:{f.facet_count})"
    if isinstance(f, DisconnectedVertexLink):
        return f"DisconnectedVertexLink({f.vertex})"
    if isinstance(f, Disconnected):
        return f"Disconnected({f.components})"
    return "NonOrientable"


def edges(t: Triangulation) -> list[Edge]:
    """All label pairs spanned by some facet, sorted."""
    return list(t.edge_list)


def _link_graph(t: Triangulation, v: int) -> dict[int, list[int]]:
    adj: dict[int, list[int]] = defaultdict(list)
    for f in t.facets:
        if v in f:
            a, b = (x for x in f if x != v)
            adj[a].append(b)
            adj[b].append(a)
    return adj


def _is_single_cycle(adj: dict[int, list[int]]) -> bool:
    if not adj or any(len(nb) != 2 for nb in adj.values()):
        return False
    start = next(iter(adj))
    seen = {start}
    stack = [start]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(adj)


def _components(t: Triangulation) -> int:
    parent = {v: v for v in t.labels}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b, c in t.facets:
        parent[find(b)] = find(a)
        parent[find(c)] = find(a)
    return len({find(v) for v in t.labels})


def coherent_orientation(t: Triangulation) -> list[Facet] | None:
    """Orient every facet so that each shared edge is traversed in opposite
    directions by its two facets. Returns the oriented facets in input order,
    or None when no such orientation exists. Edges with more than two facets
    make the complex non-orientable for our purposes."""
    if any(len(fs) > 2 for fs in t.edge_facets.values()):
        return None
    oriented: dict[Facet, Facet] = {}
    for root in t.facets:
        if root in oriented:
            continue
        oriented[root] = root
        stack = [root]
        while stack:
            f = stack.pop()
            o = oriented[f]
            for i in range(3):
                a, b = o[i], o[(i + 1) % 3]
                for g in t.edge_facets[(min(a, b), max(a, b))]:
                    if g == f:
                        continue
                    if g in oriented:
                        og = oriented[g]
                        if not any(og[k] == b and og[(k + 1) % 3] == a for k in range(3)):
                            return None
                    else:
                        c = next(x for x in g if x != a and x != b)
                        oriented[g] = (b, a, c)
                        stack.append(g)
    return [oriented[f] for f in t.facets]


def validate_closed_surface(t: Triangulation) -> TopologyReport:
    """Check that ``t`` is a connected closed surface and compute its topology."""
    V = t.vertex_count
    E = len(t.edge_list)
    F = len(t.facets)
    chi = V - E + F
    failures: list[Failure] = []
    for e, fs in t.edge_facets.items():
        if len(fs) != 2:
            failures.append(NonManifoldEdge(e, len(fs)))
    for v in t.labels:
        if not _is_single_cycle(_link_graph(t, v)):
            failures.append(DisconnectedVertexLink(v))
    ncomp = _components(t)
    if ncomp != 1:
        failures.append(Disconnected(ncomp))
    closed = not failures
    orientable = coherent_orientation(t) is not None
    if not orientable:
        failures.append(NonOrientable())
    genus = None
    if closed and orientable:
        genus = (2 - chi) // 2
    return TopologyReport(V, E, F, chi, closed, orientable, genus, tuple(failures))


def vertex_link(t: Triangulation, v: int) -> tuple[int, ...]:
    """The link cycle of ``v``: starts at its smallest neighbor and proceeds
    toward the smaller of that neighbor's two cycle-neighbors."""
    adj = _link_graph(t, v)
    if not _is_single_cycle(adj):
        raise ValueError(f"link of vertex {v} is not a single cycle")
    start = min(adj)
    prev, cur = start, min(adj[start])
    cycle = [start]
    while cur != start:
        cycle.append(cur)
        a, b = adj[cur]
        prev, cur = cur, (b if a == prev else a)
    return tuple(cycle)


def heawood_bound(chi: int) -> int:
    """Least n with n >= (7 + sqrt(49 - 24*chi)) / 2, in integer arithmetic."""
    if not isinstance(chi, int) or isinstance(chi, bool):
        raise TypeError(f"chi must be an int, got {type(chi).__name__}")
    if chi > 2:
        raise ValueError(f"no closed surface has Euler characteristic {chi} > 2")
    disc = 49 - 24 * chi
    root = math.isqrt(disc)
    if root * root < disc:
        root += 1
    # smallest n with 2n - 7 >= root
    return (7 + root + 1) // 2
