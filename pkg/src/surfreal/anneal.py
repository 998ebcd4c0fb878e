"""Simulated annealing on the intersection edge functional.

Energy of a placement = crossing (edge, facet) pairs
    + penalty * (collinear triples + coplanar quadruples).

With ``penalty`` above the number of (edge, facet) pairs any degenerate
placement scores worse than every general-position one. Points never
coincide: a move onto an occupied point swaps the two vertices.

The inner loop is compiled with numba. Coordinates stay below
``MAX_KERNEL_EXTENT`` so every determinant fits in int64.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from numba import njit

from .realizer import Realization, disjoint_pairs, verify
from .surface import Triangulation

MAX_KERNEL_EXTENT = 1 << 16


@dataclass(frozen=True)
class Schedule:
    t0: float = 3.0
    cooling: float = 0.999
    # moves without a new best before reheating; None -> 50 * V * extent^3
    restart_after: int | None = None
    max_moves: int = 2_000_000
    max_seconds: float | None = None
    penalty: int | None = None
    chunk: int = 20_000

    def restart_threshold(self, n: int, extent: int) -> int:
        if self.restart_after is not None:
            return self.restart_after
        return 50 * n * extent**3


@dataclass
class AnnealResult:
    realization: Realization
    energy: int
    moves: int
    seed: int
    restarts: int
    # (move index, energy) every time the best energy improves
    trace: list[tuple[int, int]] = field(default_factory=list)

    @property
    def success(self) -> bool:
        return self.energy == 0


# -- kernel -----------------------------------------------------------------


@njit(cache=True)
def _next(state):
    # xorshift64*
    x = state[0]
    x ^= x >> np.uint64(12)
    x ^= x << np.uint64(25)
    x ^= x >> np.uint64(27)
    state[0] = x
    return x * np.uint64(2685821657736338717)


@njit(cache=True)
def _randint(state, n):
    return np.int64((_next(state) >> np.uint64(11)) % np.uint64(n))


@njit(cache=True)
def _uniform(state):
    return np.float64(_next(state) >> np.uint64(11)) / 9007199254740992.0


@njit(cache=True)
def _det(P, a, b, c, d):
    bx = P[b, 0] - P[a, 0]
    by = P[b, 1] - P[a, 1]
    bz = P[b, 2] - P[a, 2]
    cx = P[c, 0] - P[a, 0]
    cy = P[c, 1] - P[a, 1]
    cz = P[c, 2] - P[a, 2]
    dx = P[d, 0] - P[a, 0]
    dy = P[d, 1] - P[a, 1]
    dz = P[d, 2] - P[a, 2]
    return bx * (cy * dz - cz * dy) - by * (cx * dz - cz * dx) + bz * (cx * dy - cy * dx)


@njit(cache=True)
def _crosses(P, p, q, a, b, c):
    s1 = _det(P, a, b, c, p)
    s2 = _det(P, a, b, c, q)
    if s1 == 0 or s2 == 0 or (s1 > 0) == (s2 > 0):
        return False
    o1 = _det(P, p, q, a, b)
    if o1 == 0:
        return False
    o2 = _det(P, p, q, b, c)
    if o2 == 0 or (o1 > 0) != (o2 > 0):
        return False
    o3 = _det(P, p, q, c, a)
    return o3 != 0 and (o1 > 0) == (o3 > 0)


@njit(cache=True)
def _collinear(P, a, b, c):
    ux = P[b, 0] - P[a, 0]
    uy = P[b, 1] - P[a, 1]
    uz = P[b, 2] - P[a, 2]
    vx = P[c, 0] - P[a, 0]
    vy = P[c, 1] - P[a, 1]
    vz = P[c, 2] - P[a, 2]
    return uy * vz - uz * vy == 0 and uz * vx - ux * vz == 0 and ux * vy - uy * vx == 0


@njit(cache=True)
def _degeneracies_at(P, v, limit):
    """Collinear triples and coplanar quadruples containing v; counting
    stops once the count exceeds ``limit``."""
    n = P.shape[0]
    deg = 0
    for a in range(n):
        if a == v:
            continue
        for b in range(a + 1, n):
            if b == v:
                continue
            if _collinear(P, v, a, b):
                deg += 1
                if deg > limit:
                    return deg
            for c in range(b + 1, n):
                if c == v:
                    continue
                if _det(P, v, a, b, c) == 0:
                    deg += 1
                    if deg > limit:
                        return deg
    return deg


@njit(cache=True)
def _total_energy(P, pairs, crossed, penalty):
    """Full recount; refreshes the per-pair crossing cache."""
    n = P.shape[0]
    e = 0
    for i in range(pairs.shape[0]):
        c = _crosses(P, pairs[i, 0], pairs[i, 1], pairs[i, 2], pairs[i, 3], pairs[i, 4])
        crossed[i] = c
        e += c
    deg = 0
    for a in range(n):
        for b in range(a + 1, n):
            for c in range(b + 1, n):
                if _collinear(P, a, b, c):
                    deg += 1
                for d in range(c + 1, n):
                    if _det(P, a, b, c, d) == 0:
                        deg += 1
    return e + penalty * deg


@njit(cache=True)
def _gather(v, w, pairs, vptr, vidx, touched):
    """Indices of pairs involving v (or w when w >= 0), without repeats."""
    m = 0
    for k in range(vptr[v], vptr[v + 1]):
        touched[m] = vidx[k]
        m += 1
    if w >= 0:
        for k in range(vptr[w], vptr[w + 1]):
            i = vidx[k]
            if (pairs[i, 0] == v or pairs[i, 1] == v or pairs[i, 2] == v
                    or pairs[i, 3] == v or pairs[i, 4] == v):
                continue
            touched[m] = i
            m += 1
    return m


@njit(cache=True)
def _run_chunk(P, occ, extent, pairs, vptr, vidx, crossed, touched, fresh, penalty,
               rng, fstate, istate, best_P, n_moves, restart_after, t0, cooling,
               trace_buf):
    """Advance the chain by up to ``n_moves`` moves.

    fstate = [temperature]; istate = [energy, best, moves, since_best,
    restarts, trace_len]. Stops early when the energy reaches 0.

    The Metropolis coin is drawn before the new energy is known, which turns
    acceptance into the bound ``new <= old - T*log(u)`` and lets the
    evaluation stop as soon as that bound is exceeded.
    """
    n = P.shape[0]
    npts = extent * extent * extent
    T = fstate[0]
    energy = istate[0]
    best = istate[1]
    moves = istate[2]
    since = istate[3]
    restarts = istate[4]
    tlen = istate[5]
    for _ in range(n_moves):
        if energy == 0:
            break
        v = _randint(rng, n)
        idx = _randint(rng, npts - 1)
        u = _uniform(rng)
        ox = P[v, 0]
        oy = P[v, 1]
        oz = P[v, 2]
        cur = (ox * extent + oy) * extent + oz
        if idx >= cur:
            idx += 1
        nx = idx // (extent * extent)
        ny = (idx // extent) % extent
        nz = idx % extent
        w = occ[idx] - 1
        moves += 1
        m = _gather(v, w, pairs, vptr, vidx, touched)
        old = 0
        for k in range(m):
            old += crossed[touched[k]]
        d_old = 0
        if w < 0:
            d_old = _degeneracies_at(P, v, n * n * n)
            old += penalty * d_old
        slack = np.inf if u == 0.0 else -T * math.log(u)
        thr = old + slack
        P[v, 0] = nx
        P[v, 1] = ny
        P[v, 2] = nz
        if w >= 0:
            P[w, 0] = ox
            P[w, 1] = oy
            P[w, 2] = oz
        new = 0
        ok = True
        if w < 0:
            limit = n * n * n
            if penalty > 0 and thr < np.inf:
                limit = int(thr // penalty)
            d_new = _degeneracies_at(P, v, limit)
            new = penalty * d_new
            ok = new <= thr
        if ok:
            for k in range(m):
                i = touched[k]
                c = _crosses(P, pairs[i, 0], pairs[i, 1], pairs[i, 2], pairs[i, 3], pairs[i, 4])
                fresh[k] = c
                new += c
                if new > thr:
                    ok = False
                    break
        if ok:
            for k in range(m):
                crossed[touched[k]] = fresh[k]
            occ[cur] = 0 if w < 0 else w + 1
            occ[idx] = v + 1
            energy += new - old
        else:
            P[v, 0] = ox
            P[v, 1] = oy
            P[v, 2] = oz
            if w >= 0:
                P[w, 0] = nx
                P[w, 1] = ny
                P[w, 2] = nz
        T *= cooling
        if energy < best:
            best = energy
            since = 0
            best_P[:, :] = P
            if tlen < trace_buf.shape[0]:
                trace_buf[tlen, 0] = moves
                trace_buf[tlen, 1] = energy
                tlen += 1
        else:
            since += 1
            if since >= restart_after:
                T = t0
                since = 0
                restarts += 1
    fstate[0] = T
    istate[0] = energy
    istate[1] = best
    istate[2] = moves
    istate[3] = since
    istate[4] = restarts
    istate[5] = tlen


# -- driver -----------------------------------------------------------------


def _pair_tables(t: Triangulation):
    pairs = np.array(
        [[u - 1, v - 1, a - 1, b - 1, c - 1] for (u, v), (a, b, c) in disjoint_pairs(t)],
        dtype=np.int64,
    ).reshape(-1, 5)
    n = t.vertex_count
    lists: list[list[int]] = [[] for _ in range(n)]
    for i, row in enumerate(pairs):
        for x in row:
            lists[x].append(i)
    vptr = np.zeros(n + 1, dtype=np.int64)
    for v in range(n):
        vptr[v + 1] = vptr[v] + len(lists[v])
    vidx = np.array([i for lst in lists for i in lst], dtype=np.int64)
    return pairs, vptr, vidx


def default_penalty(t: Triangulation) -> int:
    return len(disjoint_pairs(t)) + 1


def degeneracy_count(points: list[tuple[int, int, int]]) -> int:
    """Collinear triples plus coplanar quadruples (pure Python)."""
    from .geom import collinear, det3

    return sum(collinear(*t) for t in combinations(points, 3)) + sum(
        det3(*q) == 0 for q in combinations(points, 4)
    )


def energy(r: Realization, penalty: int | None = None) -> int:
    """Full recount of the annealing energy, independent of the kernel."""
    from .realizer import conflict_count

    lam = default_penalty(r.triangulation) if penalty is None else penalty
    return conflict_count(r) + lam * degeneracy_count(r.points())


def _seed_state(seed: int) -> np.ndarray:
    # splitmix64 so that small consecutive seeds give unrelated streams
    z = (seed + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    z ^= z >> 31
    return np.array([z or 1], dtype=np.uint64)


def anneal(
    t: Triangulation,
    extent: int,
    schedule: Schedule = Schedule(),
    seed: int = 0,
    start: dict[int, tuple[int, int, int]] | None = None,
    check_every: int | None = None,
) -> AnnealResult:
    """Minimize the energy of a placement of ``t`` on the grid {0..extent-1}^3.

    Moves pick a uniform vertex and a uniform grid point other than its own;
    an occupied target swaps the two vertices. Returns
    as soon as the energy hits 0 (the result then passes ``verify``) or when
    the move/time budget runs out, with the best placement seen.

    ``check_every`` (test mode) recomputes the energy from scratch with the
    pure-Python predicates at that move interval and raises on any drift.
    """
    n = t.vertex_count
    if extent < 2:
        raise ValueError("annealing needs extent >= 2")
    if extent > MAX_KERNEL_EXTENT:
        raise ValueError(f"extent above {MAX_KERNEL_EXTENT} is outside the kernel's exact range")
    npts = extent**3
    if n > npts:
        raise ValueError(f"{n} vertices do not fit on {npts} grid points")
    rng = _seed_state(seed)
    P = np.zeros((n, 3), dtype=np.int64)
    # occ[g] = 1 + index of the vertex at grid point g, 0 when free
    occ = np.zeros(npts, dtype=np.int64)
    if start is None:
        cells = _sample_distinct(rng, npts, n)
    else:
        cells = [(x * extent + y) * extent + z for x, y, z in (start[v] for v in t.labels)]
        if len(set(cells)) != n:
            raise ValueError("start placement is not injective")
    for v, g in enumerate(cells):
        P[v] = (g // (extent * extent), (g // extent) % extent, g % extent)
        occ[g] = v + 1
    pairs, vptr, vidx = _pair_tables(t)
    penalty = default_penalty(t) if schedule.penalty is None else schedule.penalty
    crossed = np.zeros(len(pairs), dtype=np.int64)
    touched = np.zeros(len(pairs), dtype=np.int64)
    fresh = np.zeros(len(pairs), dtype=np.int64)
    e0 = int(_total_energy(P, pairs, crossed, penalty))
    fstate = np.array([schedule.t0], dtype=np.float64)
    istate = np.array([e0, e0, 0, 0, 0, 0], dtype=np.int64)
    best_P = P.copy()
    trace = [(0, e0)]
    trace_buf = np.zeros((4096, 2), dtype=np.int64)
    restart_after = schedule.restart_threshold(n, extent)
    began = time.monotonic()
    step = schedule.chunk if check_every is None else check_every
    while istate[0] > 0 and istate[2] < schedule.max_moves:
        if schedule.max_seconds is not None and time.monotonic() - began >= schedule.max_seconds:
            break
        todo = min(step, schedule.max_moves - int(istate[2]))
        istate[5] = 0
        _run_chunk(P, occ, extent, pairs, vptr, vidx, crossed, touched, fresh, penalty,
                   rng, fstate, istate, best_P, todo, restart_after, schedule.t0,
                   schedule.cooling, trace_buf)
        trace.extend((int(m), int(e)) for m, e in trace_buf[: istate[5]])
        if check_every is not None:
            current = Realization(t, {v + 1: tuple(int(c) for c in P[v]) for v in range(n)})
            recount = energy(current, penalty)
            if recount != istate[0]:
                raise AssertionError(
                    f"incremental energy {istate[0]} != recount {recount} after {istate[2]} moves"
                )
    placement = {v + 1: tuple(int(c) for c in best_P[v]) for v in range(n)}
    r = Realization(t, placement)
    best = int(istate[1])
    if best == 0 and not verify(r).is_valid_embedding:
        raise AssertionError("annealer reported energy 0 for a placement verify rejects")
    return AnnealResult(r, best, int(istate[2]), seed, int(istate[4]), trace)


def _sample_distinct(rng: np.ndarray, npts: int, k: int) -> list[int]:
    chosen: list[int] = []
    while len(chosen) < k:
        g = int(_randint(rng, npts))
        if g not in chosen:
            chosen.append(g)
    return chosen
