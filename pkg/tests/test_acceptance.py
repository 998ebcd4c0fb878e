"""Acceptance criteria, one test each. Every test records a PASS/FAIL line that
is printed in the terminal summary (and immediately with ``-s``)."""

import os
import random
import time
from contextlib import contextmanager
from itertools import combinations, product
from math import comb

import pytest

from surfreal.anneal import Schedule, anneal
from surfreal.formats import (
    certificate_from,
    export_mesh,
    load_catalog,
    parse_catalog,
    read_certificate,
    serialize_catalog,
    write_certificate,
)
from surfreal.geom import segment_triangle_crossing
from surfreal.realizer import verify
from surfreal.search import (
    Checkpoint,
    Search,
    SearchConfig,
    SearchStats,
    enumerate_realizations,
    shard,
)
from surfreal.surface import heawood_bound, validate_closed_surface
from surfreal.symmetry import is_canonical, orbit_size

from conftest import ACCEPTANCE
from oracles import brute_conflicts, brute_general_position, brute_realizations, rational_crossing
from test_formats import coherent, off_facets, random_catalog, random_certificate
from test_search import expand


@contextmanager
def criterion(num, title):
    started = time.monotonic()
    info = {"detail": ""}
    try:
        yield info
    except pytest.skip.Exception:
        ACCEPTANCE.append((num, title, "SKIP", info["detail"] or "not requested"))
        print(f"[SKIP] {num}. {title}")
        raise
    except BaseException as exc:
        detail = f"{info['detail']} {type(exc).__name__}: {exc}".strip()
        ACCEPTANCE.append((num, title, "FAIL", detail.splitlines()[0][:200]))
        print(f"[FAIL] {num}. {title}: {detail}")
        raise
    took = time.monotonic() - started
    detail = f"{info['detail']} ({took:.1f}s)".strip()
    ACCEPTANCE.append((num, title, "PASS", detail))
    print(f"[PASS] {num}. {title}: {detail}")


def _heawood_ok(n, chi):
    return 2 * n - 7 >= 0 and (2 * n - 7) ** 2 >= 49 - 24 * chi


def test_1_heawood_bound():
    with criterion(1, "Heawood bound") as info:
        assert (heawood_bound(2), heawood_bound(0), heawood_bound(-4)) == (4, 7, 10)
        # far beyond float precision the integer path must still be exact
        for chi in (-(10**40), -(10**40) - 7, -(2**200) + 2):
            n = heawood_bound(chi)
            assert _heawood_ok(n, chi) and not _heawood_ok(n - 1, chi)
        info["detail"] = "4, 7, 10"


def test_2_topology_census(genus3):
    with criterion(2, "Topology census") as info:
        started = time.monotonic()
        assert len(genus3) == 20
        for t in genus3:
            r = validate_closed_surface(t)
            assert r.is_closed_surface and r.is_orientable
            assert (r.V, r.E, r.F, r.euler_characteristic, r.genus) == (10, 42, 28, -4, 3)
        took = time.monotonic() - started
        assert took < 1.0
        info["detail"] = "20 entries, V=10 E=42 F=28 chi=-4 genus 3"


def test_3_predicate_oracle():
    with criterion(3, "Predicate oracle") as info:
        rnd = random.Random(2024)
        started = time.monotonic()
        n = hits = 0
        while n < 100_000:
            pts = [tuple(rnd.randint(0, 9) for _ in range(3)) for _ in range(5)]
            if not brute_general_position(pts):
                continue
            a = segment_triangle_crossing(*pts)
            assert a == rational_crossing(*pts), pts
            n += 1
            hits += a
        took = time.monotonic() - started
        assert took < 60
        info["detail"] = f"{n} quintuples, {hits} crossings, 100% agreement"


def test_4_brute_force_equivalence(tetra):
    with criterion(4, "Brute-force enumeration equivalence") as info:
        out = enumerate_realizations(SearchConfig(tetra, 2))
        expanded = expand(out.realizations, 2)
        brute = brute_realizations(tetra, 2)
        assert len(expanded) == len(set(expanded))
        assert set(expanded) == brute
        info["detail"] = f"{len(out.realizations)} canonical -> {len(expanded)} = brute force {len(brute)}"


def test_5_symmetry_accounting():
    with criterion(5, "Symmetry accounting") as info:
        for extent in (2, 3):
            pts = list(product(range(extent), repeat=3))
            for k in range(1, 5):
                total = sum(orbit_size(s, extent) for s in combinations(pts, k)
                            if is_canonical(s, extent))
                assert total == comb(len(pts), k), (extent, k)
        info["detail"] = "C(8,k) and C(27,k) for k=1..4"


def test_6_small_grid_impossibility(genus3):
    with criterion(6, "Small-grid impossibility (extent 3)") as info:
        started = time.monotonic()
        out = enumerate_realizations(SearchConfig(genus3[0], 3))
        took = time.monotonic() - started
        assert out.complete and out.realizations == []
        assert took < 600
        info["detail"] = f"{genus3[0].name}: 0 realizations, {out.stats.summary()}"


@pytest.mark.slow
def test_7_stretch_extent_4(genus3, tmp_path):
    with criterion(7, "Stretch run (extent 4)") as info:
        if not os.environ.get("SURFREAL_STRETCH"):
            info["detail"] = "optional; set SURFREAL_STRETCH=1 to run (hours to days)"
            pytest.skip("set SURFREAL_STRETCH=1")
        slice_seconds = float(os.environ.get("SURFREAL_STRETCH_SLICE", "600"))
        cfg = SearchConfig(genus3[0], 4)
        total, found, interruptions = SearchStats(), [], 0
        for part in shard(cfg, 1):
            ck = None
            while True:
                s = Search(SearchConfig(**{**part.__dict__, "max_seconds": slice_seconds}), resume=ck)
                found.extend(s)
                ck = Checkpoint.from_json(s.checkpoint.to_json())
                if ck.done:
                    break
                interruptions += 1
            total = total + ck.stats
        assert found == []
        info["detail"] = f"0 realizations, {interruptions} resumes, {total.summary()}"


# Annealer witness. The triangulation and schedule were chosen by tuning runs;
# the search is still fully determined by the 20 seeds below.
WITNESS_SURFACE = "manifold_lex_d2_n10_o1_g3_#1"
WITNESS_SCHEDULE = Schedule(t0=1.2, cooling=0.99999993, restart_after=10**12,
                            max_moves=20_000_000, max_seconds=355.0, penalty=3)
WITNESS_BUDGET = 2 * 3600


@pytest.mark.slow
def test_8_annealer_witness(catalog):
    with criterion(8, "Annealer witness (extent 5)") as info:
        t = catalog[WITNESS_SURFACE]
        started = time.monotonic()
        best = None
        for seed in range(20):
            res = anneal(t, 5, WITNESS_SCHEDULE, seed=seed)
            if best is None or res.energy < best.energy:
                best = res
            print(f"  seed {seed}: energy {res.energy} after {res.moves} moves", flush=True)
            if res.success:
                break
        took = time.monotonic() - started
        info["detail"] = f"{t.name}, best energy {best.energy} (seed {best.seed})"
        assert best.success, "no zero-energy placement in 20 restarts"
        assert verify(best.realization).is_valid_embedding
        assert brute_conflicts(t, best.realization.placement) == []
        assert brute_general_position(best.realization.points())
        assert took <= WITNESS_BUDGET
        info["detail"] += f", placement {sorted(best.realization.placement.items())}"


def test_9_determinism_and_continuation(genus3, tetra):
    with criterion(9, "Determinism and exact continuation") as info:
        s = Schedule(max_moves=200_000, restart_after=20_000, t0=1.5, cooling=0.9999, penalty=3)
        a = anneal(genus3[1], 5, s, seed=7)
        b = anneal(genus3[1], 5, s, seed=7)
        assert a.trace == b.trace and a.realization == b.realization
        cfg = SearchConfig(tetra, 2)
        plain = [write_certificate(certificate_from(r, 2, "search")) for r in enumerate_realizations(cfg).realizations]
        pieces, ck, stops = [], None, 0
        while ck is None or not ck.done:
            run = Search(SearchConfig(tetra, 2, max_nodes=1), resume=ck)
            pieces += [write_certificate(certificate_from(r, 2, "search")) for r in run]
            ck = Checkpoint.from_json(run.checkpoint.to_json())
            stops += 1
        assert "".join(pieces).encode() == "".join(plain).encode()
        info["detail"] = f"trace of {len(a.trace)} improvements repeated; {stops} interruptions, identical output"


def test_10_round_trips(g3_witness, genus3):
    with criterion(10, "Round-trips and OFF export") as info:
        rnd = random.Random(10)
        pool = [e.triangulation for e in load_catalog()]
        for _ in range(1000):
            entries = random_catalog(rnd, pool)
            assert parse_catalog(serialize_catalog(entries)) == entries
            c = random_certificate(rnd)
            assert read_certificate(write_certificate(c)) == c
        cert = certificate_from(g3_witness.realization, 16, "anneal")
        facets, lines = off_facets(export_mesh(cert, genus3[0]))
        assert lines[1] == "10 28 42" and coherent(facets)
        info["detail"] = "1000 catalogs, 1000 certificates, OFF '10 28 42' coherent"
