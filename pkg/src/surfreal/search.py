"""Exhaustive symmetry-reduced enumeration of lattice realizations.

Point sets are generated as strictly increasing sequences of grid points
(lexicographic order on (x, y, z)). Each new point must keep the set in general
position and keep the sequence a possible lexicographic minimum of its
isometry orbit. Alongside the points we carry the labeling frontier: every
injective assignment of surface labels to the placed points that has no
crossing among fully placed (edge, facet) pairs. An empty frontier prunes the
subtree. When the frontier grows past ``frontier_cap`` it is dropped for that
subtree and labelings are instead searched depth-first at the leaves.

The DFS keeps its whole state in two integer lists (the prefix and a cursor
per level) so it can stop at any node boundary and resume exactly.
"""

from __future__ import annotations

import hashlib
import json
import sys
import time
from dataclasses import asdict, dataclass, replace
from itertools import combinations, product
from typing import Callable, Iterator, Sequence

from .geom import collinear, crosses, det3
from .realizer import Realization, disjoint_pairs, verify
from .surface import Triangulation
from .symmetry import is_canonical, prefix_can_be_lexmin


Point = tuple[int, int, int]
Labeling = tuple[int, ...]


class CheckpointMismatch(ValueError):
    pass


def grid_points(extent: int) -> list[Point]:
    return list(product(range(extent), repeat=3))


@dataclass(frozen=True)
class SearchConfig:
    triangulation: Triangulation
    extent: int
    # bounds on the first d points: lower <= prefix[:d] < upper, None = open
    shard_lower: tuple[Point, ...] | None = None
    shard_upper: tuple[Point, ...] | None = None
    max_nodes: int | None = None
    max_seconds: float | None = None
    report_interval: int = 0
    frontier_cap: int = 100_000
    prune_lexmin: bool = True
    prune_labeling: bool = True
    shard_id: str | None = None

    def __post_init__(self) -> None:
        if self.extent < 1:
            raise ValueError(f"extent must be >= 1, got {self.extent}")
        lo, hi = self.shard_lower, self.shard_upper
        for b in (lo, hi):
            if b is not None and any(b[i] >= b[i + 1] for i in range(len(b) - 1)):
                raise ValueError(f"shard bound {b} is not strictly increasing")
        if lo is not None and hi is not None:
            if len(lo) != len(hi) or not lo < hi:
                raise ValueError("shard bounds must have equal depth and lower < upper")

    @property
    def shard_depth(self) -> int | None:
        b = self.shard_lower if self.shard_lower is not None else self.shard_upper
        return None if b is None else len(b)

    def digest(self) -> str:
        """Identity of the search space; budgets and tuning knobs excluded."""
        t = self.triangulation
        payload = {
            "surface": t.name,
            "n": t.vertex_count,
            "facets": [list(f) for f in t.facets],
            "extent": self.extent,
            "lower": None if self.shard_lower is None else [list(p) for p in self.shard_lower],
            "upper": None if self.shard_upper is None else [list(p) for p in self.shard_upper],
        }
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


@dataclass
class SearchStats:
    nodes_expanded: int = 0
    gp_prefixes: int = 0
    lexmin_survivors: int = 0
    labeling_frontier_peak: int = 0
    canonical_sets_tested: int = 0
    realizations_found: int = 0

    def __add__(self, other: SearchStats) -> SearchStats:
        return SearchStats(
            self.nodes_expanded + other.nodes_expanded,
            self.gp_prefixes + other.gp_prefixes,
            self.lexmin_survivors + other.lexmin_survivors,
            max(self.labeling_frontier_peak, other.labeling_frontier_peak),
            self.canonical_sets_tested + other.canonical_sets_tested,
            self.realizations_found + other.realizations_found,
        )

    def summary(self) -> str:
        return " ".join(f"{k}={v}" for k, v in asdict(self).items())


@dataclass
class Checkpoint:
    config_hash: str
    prefix: list[int]
    cursors: list[int]
    stats: SearchStats
    done: bool = False

    def to_json(self) -> str:
        return json.dumps(
            {
                "config_hash": self.config_hash,
                "prefix": self.prefix,
                "cursors": self.cursors,
                "stats": asdict(self.stats),
                "done": self.done,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> Checkpoint:
        d = json.loads(text)
        return cls(d["config_hash"], d["prefix"], d["cursors"], SearchStats(**d["stats"]), d["done"])


@dataclass
class SearchOutcome:
    realizations: list[Realization]
    stats: SearchStats
    checkpoint: Checkpoint | None = None

    @property
    def complete(self) -> bool:
        return self.checkpoint is None or self.checkpoint.done


class _Geometry:
    """Per-triangulation lookup tables for the frontier and leaf searches."""

    def __init__(self, t: Triangulation):
        self.n = t.vertex_count
        self.edges = set(t.edge_list)
        self.facets = set(t.facets)
        self.pairs = disjoint_pairs(t)

    def is_pair(self, e: tuple[int, int], f: tuple[int, ...]) -> bool:
        return (min(e), max(e)) in self.edges and tuple(sorted(f)) in self.facets


def _new_crossings(pts: Sequence[Point]) -> list[tuple[tuple[int, int], tuple[int, int, int]]]:
    """Crossing (segment, triangle) position configurations that involve the
    last point of ``pts``."""
    k = len(pts) - 1
    out = []
    if k < 4:
        return out
    others = range(k)
    for j in others:
        rest = [i for i in others if i != j]
        for a, b, c in combinations(rest, 3):
            if crosses(pts[k], pts[j], pts[a], pts[b], pts[c]):
                out.append(((j, k), (a, b, c)))
    for i, j in combinations(others, 2):
        rest = [x for x in others if x != i and x != j]
        for a, b in combinations(rest, 2):
            if crosses(pts[i], pts[j], pts[a], pts[b], pts[k]):
                out.append(((i, j), (a, b, k)))
    return out


class Search:
    """Resumable DFS. Iterate to stream realizations; afterwards ``stats`` and
    ``checkpoint`` describe how the run ended."""

    def __init__(
        self,
        config: SearchConfig,
        resume: Checkpoint | None = None,
        progress: Callable[[SearchStats], None] | None = None,
    ):
        self.config = config
        t = config.triangulation
        self.V = t.vertex_count
        self.points = grid_points(config.extent)
        self.geo = _Geometry(t)
        self.progress = progress
        self.checkpoint: Checkpoint | None = None
        if resume is not None:
            if resume.config_hash != config.digest():
                raise CheckpointMismatch("checkpoint belongs to a different search")
            self.stats = replace(resume.stats)
            self.prefix = list(resume.prefix)
            self.cursors = list(resume.cursors)
            self._finished = resume.done
        else:
            self.stats = SearchStats()
            self.prefix = []
            self.cursors = [0]
            self._finished = False
        self._rebuild()

    # -- frontier ---------------------------------------------------------

    def _rebuild(self) -> None:
        self.crossings: list[list] = []
        self.frontiers: list[list[Labeling] | None] = [[()]]
        for d in range(1, len(self.prefix) + 1):
            pts = [self.points[i] for i in self.prefix[:d]]
            cr = _new_crossings(pts)
            self.crossings.append(cr)
            self.frontiers.append(self._extend_frontier(self.frontiers[-1], cr))

    def _extend_frontier(self, parent: list[Labeling] | None, new_cr) -> list[Labeling] | None:
        if parent is None or not self.config.prune_labeling:
            return None
        k = len(parent[0]) if parent else 0
        if parent and (self.V - k) * len(parent) > self.config.frontier_cap:
            return None
        is_pair = self.geo.is_pair
        out = []
        for lab in parent:
            used = set(lab)
            for L in range(1, self.V + 1):
                if L in used:
                    continue
                full = lab + (L,)
                if any(
                    is_pair((full[s0], full[s1]), (full[a], full[b], full[c]))
                    for (s0, s1), (a, b, c) in new_cr
                ):
                    continue
                out.append(full)
        return out

    # -- shard bounds -----------------------------------------------------

    def _in_shard_range(self, idx: Sequence[int]) -> bool:
        """Whether some depth-d extension of ``idx`` lies in the shard range."""
        cfg = self.config
        d = cfg.shard_depth
        if d is None:
            return True
        seq = tuple(self.points[i] for i in idx[:d])
        j = len(seq)
        if cfg.shard_lower is not None and seq < cfg.shard_lower[:j]:
            return False
        if cfg.shard_upper is not None:
            up = cfg.shard_upper[:j]
            if seq > up or (j == d and seq == up):
                return False
        return True

    def _owns(self, idx: Sequence[int]) -> bool:
        """Shallow nodes are counted by the shard holding their least depth-d
        extension, so stats of a shard partition add up to the whole run."""
        cfg = self.config
        d = cfg.shard_depth
        if d is None or len(idx) >= d:
            return True
        ext = list(idx) + [idx[-1] + 1 + i for i in range(d - len(idx))]
        if ext[-1] >= len(self.points):
            return False
        seq = tuple(self.points[i] for i in ext)
        if cfg.shard_lower is not None and seq < cfg.shard_lower:
            return False
        if cfg.shard_upper is not None and seq >= cfg.shard_upper:
            return False
        return True

    # -- leaves -----------------------------------------------------------

    def _leaf_labelings(self, depth_frontier: list[Labeling] | None) -> list[Labeling]:
        if depth_frontier is not None:
            return sorted(depth_frontier)
        pts = [self.points[i] for i in self.prefix]
        crossing = set()
        for cr in self.crossings:
            crossing.update(cr)
        return sorted(_dfs_labelings(self.geo, len(pts), crossing))

    # -- main loop --------------------------------------------------------

    def __iter__(self) -> Iterator[Realization]:
        cfg = self.config
        P = len(self.points)
        V = self.V
        st = self.stats
        start = time.monotonic()
        budget_nodes = None if cfg.max_nodes is None else st.nodes_expanded + cfg.max_nodes
        next_report = (
            st.nodes_expanded + cfg.report_interval if cfg.report_interval else None
        )
        if V > P:
            self._finished = True
        while not self._finished:
            if budget_nodes is not None and st.nodes_expanded >= budget_nodes:
                break
            if cfg.max_seconds is not None and time.monotonic() - start >= cfg.max_seconds:
                break
            depth = len(self.prefix)
            cand = self.cursors[depth]
            if depth == V or cand > P - (V - depth):
                if depth == 0:
                    self._finished = True
                    break
                self.prefix.pop()
                self.cursors.pop()
                self.frontiers.pop()
                self.crossings.pop()
                continue
            self.cursors[depth] = cand + 1
            child = self.prefix + [cand]
            if not self._in_shard_range(child):
                if depth < (cfg.shard_depth or 0) and cfg.shard_upper is not None:
                    seq = tuple(self.points[i] for i in child)
                    if seq > cfg.shard_upper[: len(seq)]:
                        # every later candidate at this level is past the range
                        self.cursors[depth] = P
                continue
            owned = self._owns(child)
            if owned:
                st.nodes_expanded += 1
                if next_report is not None and st.nodes_expanded >= next_report:
                    next_report += cfg.report_interval
                    if self.progress is not None:
                        self.progress(st)
            pts = [self.points[i] for i in child]
            if not _extends_gp(pts):
                continue
            if owned:
                st.gp_prefixes += 1
            if cfg.prune_lexmin and not prefix_can_be_lexmin(pts, cfg.extent):
                continue
            if owned:
                st.lexmin_survivors += 1
            cr = _new_crossings(pts)
            frontier = self._extend_frontier(self.frontiers[-1], cr)
            if frontier is not None:
                if owned:
                    st.labeling_frontier_peak = max(st.labeling_frontier_peak, len(frontier))
                if not frontier:
                    continue
            self.prefix.append(cand)
            self.cursors.append(cand + 1)
            self.frontiers.append(frontier)
            self.crossings.append(cr)
            if depth + 1 == V:
                yield from self._emit(pts, frontier)
        self.checkpoint = Checkpoint(
            cfg.digest(), list(self.prefix), list(self.cursors), replace(st), self._finished
        )

    def _emit(self, pts: list[Point], frontier: list[Labeling] | None) -> Iterator[Realization]:
        if not is_canonical(pts, self.config.extent):
            return
        self.stats.canonical_sets_tested += 1
        t = self.config.triangulation
        for lab in self._leaf_labelings(frontier):
            r = Realization(t, {lab[i]: pts[i] for i in range(len(pts))})
            if verify(r).is_valid_embedding:
                self.stats.realizations_found += 1
                yield r


def _extends_gp(pts: Sequence[Point]) -> bool:
    """General position of ``pts`` given that ``pts[:-1]`` already is."""
    *prefix, p = pts
    k = len(prefix)
    if k < 3:
        return not any(collinear(a, b, p) for a, b in combinations(prefix, 2))
    return all(det3(a, b, c, p) != 0 for a, b, c in combinations(prefix, 3))


def _dfs_labelings(geo: _Geometry, npts: int, crossing: set) -> list[Labeling]:
    """All injective labelings of ``npts`` positions whose geometric
    crossings never land on an (edge, facet) pair of the surface."""
    by_last: dict[int, list] = {k: [] for k in range(npts)}
    for (s0, s1), tri in crossing:
        by_last[max(s0, s1, *tri)].append(((s0, s1), tri))
    out: list[Labeling] = []
    lab: list[int] = []
    used = [False] * (geo.n + 1)
    is_pair = geo.is_pair

    def rec(k: int) -> None:
        if k == npts:
            out.append(tuple(lab))
            return
        for L in range(1, geo.n + 1):
            if used[L]:
                continue
            lab.append(L)
            if not any(
                is_pair((lab[s0], lab[s1]), (lab[a], lab[b], lab[c]))
                for (s0, s1), (a, b, c) in by_last[k]
            ):
                used[L] = True
                rec(k + 1)
                used[L] = False
            lab.pop()

    rec(0)
    return out


def enumerate_realizations(
    config: SearchConfig,
    resume: Checkpoint | None = None,
    progress: Callable[[SearchStats], None] | None = None,
) -> SearchOutcome:
    s = Search(config, resume, progress)
    found = list(s)
    assert s.checkpoint is not None
    return SearchOutcome(found, s.stats, None if s.checkpoint.done else s.checkpoint)


def viable_prefixes(config: SearchConfig, depth: int) -> list[tuple[Point, ...]]:
    """Depth-``depth`` prefixes surviving general position and lexmin pruning."""
    pts = grid_points(config.extent)
    V = config.triangulation.vertex_count
    P = len(pts)
    out: list[tuple[Point, ...]] = []

    def rec(prefix: list[Point], start: int) -> None:
        if len(prefix) == depth:
            out.append(tuple(prefix))
            return
        for i in range(start, P - (V - len(prefix)) + 1):
            cand = prefix + [pts[i]]
            if not _extends_gp(cand):
                continue
            if config.prune_lexmin and not prefix_can_be_lexmin(cand, config.extent):
                continue
            rec(cand, i + 1)

    rec([], 0)
    return out


def shard(config: SearchConfig, depth: int) -> list[SearchConfig]:
    """Split the search into disjoint prefix ranges, one per viable
    depth-``depth`` prefix. The ranges together cover every depth-``depth``
    sequence, so the union of shard outputs is the unsharded output."""
    V = config.triangulation.vertex_count
    if not 1 <= depth < V:
        raise ValueError(f"shard depth must be in 1..{V - 1}, got {depth}")
    starts = viable_prefixes(config, depth)
    if not starts:
        return [replace(config, shard_lower=None, shard_upper=None, shard_id="empty")]
    out = []
    for i, lo in enumerate(starts):
        hi = starts[i + 1] if i + 1 < len(starts) else None
        out.append(
            replace(
                config,
                shard_lower=None if i == 0 else lo,
                shard_upper=hi,
                shard_id=f"{i + 1}of{len(starts)}",
            )
        )
    if len(out) == 1:
        # a single shard with open bounds on both sides would lose its depth
        out[0] = replace(out[0], shard_lower=None, shard_upper=None)
    return out


def stderr_progress(stats: SearchStats) -> None:
    print(f"progress {stats.summary()}", file=sys.stderr, flush=True)
