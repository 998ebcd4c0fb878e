import random
from collections import Counter

import pytest

from surfreal.formats import (
    CatalogEntry,
    Certificate,
    FormatError,
    UnverifiedCertificate,
    certificate_from,
    export_mesh,
    find_entry,
    load_catalog,
    parse_catalog,
    read_certificate,
    serialize_catalog,
    write_certificate,
)
from surfreal.realizer import Realization, verify

from conftest import UNIT_SIMPLEX
from oracles import brute_conflicts

NAME_CHARS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_#.-"


def random_catalog(rnd, pool):
    entries, names = [], set()
    for _ in range(rnd.randint(1, 4)):
        t = rnd.choice(pool)
        perm = list(t.labels)
        rnd.shuffle(perm)
        u = t.relabel(dict(zip(t.labels, perm)))
        facets = list(u.facets)
        rnd.shuffle(facets)
        name = rnd.choice("abcxyz") + "".join(rnd.choice(NAME_CHARS) for _ in range(rnd.randint(0, 12)))
        if name in names:
            continue
        names.add(name)
        entries.append(CatalogEntry(name, type(u)(name, u.vertex_count, facets)))
    return entries


def test_parse_single_entry():
    (e,) = parse_catalog("tetra=[[1,2,3],[1,2,4],[1,3,4],[2,3,4]]")
    assert e.name == "tetra" and len(e.triangulation.facets) == 4


def test_parse_whitespace_comments_and_order():
    text = "# a comment\n\n  tetra = [ [1, 2,3] ,[2,3,4],[1,3,4], [1,2,4] ]  \n"
    (e,) = parse_catalog(text)
    assert e.triangulation.facets == ((1, 2, 3), (2, 3, 4), (1, 3, 4), (1, 2, 4))


@pytest.mark.parametrize(
    "text, line, column",
    [
        ("x=[[1,2]]", 1, 4),
        ("ok=[[1,2,3],[1,2,4],[1,3,4],[2,3,4]]\nbad=[[1,2,3],[1,2,4],[1,3,4],[2,3,4]", 2, None),
        ("t=[[1,2,3],[1,2,4],[1,3,4],[2;3,4]]", 1, 30),
        ("no equals sign", 1, 1),
    ],
)
def test_parse_errors_located(text, line, column):
    with pytest.raises(FormatError) as info:
        parse_catalog(text)
    assert info.value.line == line
    if column is not None:
        assert info.value.column == column


def test_parse_rejects_duplicates_and_non_surfaces():
    t = "t=[[1,2,3],[1,2,4],[1,3,4],[2,3,4]]"
    with pytest.raises(FormatError, match="duplicate"):
        parse_catalog(t + "\n" + t)
    with pytest.raises(FormatError, match="closed surface"):
        parse_catalog("disk=[[1,2,3],[1,2,4]]")
    assert len(parse_catalog("disk=[[1,2,3],[1,2,4]]", validate=False)) == 1


def test_bundled_catalog(catalog):
    entries = load_catalog()
    assert [e.name for e in entries][:3] == ["tetrahedron", "octahedron", "torus_7"]
    assert find_entry(entries, "manifold_lex_d2_n10_o1_g3_#1").triangulation.vertex_count == 10
    with pytest.raises(KeyError):
        find_entry(entries, "nope")
    assert len(catalog) == 23


def test_catalog_round_trip_random():
    rnd = random.Random(21)
    pool = [e.triangulation for e in load_catalog()]
    for _ in range(1000):
        entries = random_catalog(rnd, pool)
        text = serialize_catalog(entries)
        back = parse_catalog(text)
        assert back == entries
        assert serialize_catalog(back) == text


def random_certificate(rnd):
    extent = rnd.randint(1, 12)
    n = rnd.randint(1, min(12, extent**3))
    cells = rnd.sample(range(extent**3), n)
    placement = {v + 1: (g // extent**2, (g // extent) % extent, g % extent)
                 for v, g in enumerate(cells)}
    return Certificate(
        "s" + "".join(rnd.choice(NAME_CHARS) for _ in range(rnd.randint(0, 10))),
        extent,
        placement,
        rnd.choice(("search", "anneal", "external")),
        rnd.choice((None, rnd.randint(0, 2**40))),
        rnd.choice((None, f"{rnd.randint(1, 9)}of9")),
        rnd.choice((None, True, False)),
    )


def test_certificate_round_trip_random():
    rnd = random.Random(22)
    for _ in range(1000):
        c = random_certificate(rnd)
        text = write_certificate(c)
        assert read_certificate(text) == c
        assert write_certificate(read_certificate(text)) == text


def test_tetrahedron_certificate(tetra):
    r = Realization(tetra, dict(zip(tetra.labels, UNIT_SIMPLEX)))
    text = write_certificate(certificate_from(r, 2, "external"))
    body = [ln for ln in text.splitlines() if ln[0].isdigit()]
    assert body == ["1 0 0 0", "2 1 0 0", "3 0 1 0", "4 0 0 1"]
    assert "verdict: valid" in text


@pytest.mark.parametrize(
    "body, message",
    [
        ("1 0 0 0\n1 1 0 0\n", "duplicate vertex"),
        ("1 0 0 0\n3 1 0 0\n", "out of range"),
        ("1 0 0 0\n2 2 0 0\n", "outside"),
        ("1 0 0 0\n2 1 0\n", "label x y z"),
        ("color: red\n1 0 0 0\n", "unknown headers"),
    ],
)
def test_certificate_errors(body, message):
    text = "surface: s\nextent: 2\nprovenance: external\n" + body
    with pytest.raises(FormatError, match=message):
        read_certificate(text)


def test_missing_header():
    with pytest.raises(FormatError, match="extent"):
        read_certificate("surface: s\nprovenance: search\n1 0 0 0\n")


def test_genus3_witness_and_stored_verdict(genus3, g3_witness):
    t = genus3[0]
    r = g3_witness.realization
    assert brute_conflicts(t, r.placement) == []
    c = certificate_from(r, 16, "anneal", seed=g3_witness.seed)
    back = read_certificate(write_certificate(c))
    assert back.verdict is True
    assert verify(back.realization(t)).is_valid_embedding == back.verdict
    # swapping two vertex positions breaks it
    p = dict(r.placement)
    for a, b in ((1, 2), (1, 5), (3, 8), (4, 10)):
        q = dict(p)
        q[a], q[b] = q[b], q[a]
        bad = read_certificate(write_certificate(certificate_from(Realization(t, q), 16, "external")))
        rep = verify(bad.realization(t))
        assert bad.verdict is False and not rep.is_valid_embedding
        assert list(rep.conflicts) == brute_conflicts(t, q)


def off_facets(text):
    lines = text.splitlines()
    assert lines[0] == "OFF"
    nv, nf, _ = map(int, lines[1].split())
    return [tuple(int(x) for x in ln.split()[1:4]) for ln in lines[2 + nv: 2 + nv + nf]], lines


def coherent(facets):
    directed = Counter((f[i], f[(i + 1) % 3]) for f in facets for i in range(3))
    return all(c == 1 and directed[(b, a)] == 1 for (a, b), c in directed.items())


def signed_volume6(facets, coords):
    def det(a, b, c):
        return (a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
                + a[2] * (b[0] * c[1] - b[1] * c[0]))
    return sum(det(coords[a], coords[b], coords[c]) for a, b, c in facets)


def test_off_export_genus3(genus3, g3_witness):
    t = genus3[0]
    c = certificate_from(g3_witness.realization, 16, "anneal")
    facets, lines = off_facets(export_mesh(c, t))
    assert lines[1] == "10 28 42"
    assert coherent(facets)
    coords = [tuple(map(int, ln.split())) for ln in lines[2:12]]
    assert signed_volume6(facets, coords) > 0


def test_off_tetrahedron_and_highlight(tetra):
    c = certificate_from(Realization(tetra, dict(zip(tetra.labels, UNIT_SIMPLEX))), 2, "external")
    facets, lines = off_facets(export_mesh(c, tetra))
    assert lines[1] == "4 4 6" and coherent(facets)
    colored = export_mesh(c, tetra, highlight_vertex=1).splitlines()[6:]
    assert sum(ln.endswith("255 64 0") for ln in colored) == 3


def test_obj_highlight(tetra):
    c = certificate_from(Realization(tetra, dict(zip(tetra.labels, UNIT_SIMPLEX))), 2, "external")
    text = export_mesh(c, tetra, highlight_vertex=1, fmt="obj")
    lines = text.splitlines()
    group = lines.index("g link_1")
    star = [ln for ln in lines[group + 1:] if ln.startswith("f ")]
    assert len(star) == 3 and all("1" in ln.split()[1:] for ln in star)
    (poly,) = [ln for ln in lines if ln.startswith("l ")]
    assert poly.split()[1:] == ["2", "3", "4", "2"]
    assert sum(ln.startswith("v ") for ln in lines) == 4


def test_export_refuses_invalid(octa):
    p = {1: (0, 0, 0), 2: (1, 0, 0), 3: (0, 1, 0), 4: (1, 1, 0), 5: (0, 0, 1), 6: (1, 1, 1)}
    c = Certificate("octahedron", 2, p)
    with pytest.raises(UnverifiedCertificate):
        export_mesh(c, octa)
    assert export_mesh(c, octa, force=True).startswith("OFF")
