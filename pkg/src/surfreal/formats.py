"""Catalog files, realization certificates and OFF/OBJ mesh export.

Catalog lines look like ``NAME=[[1,2,3],[1,2,4],...]`` with 1-based labels.
Blank lines and lines whose first non-blank character is ``#`` are skipped;
``#`` inside a name is allowed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable

from .geom import det3
from .realizer import Realization, verify
from .surface import Triangulation, TriangulationError, coherent_orientation, validate_closed_surface, vertex_link

PROVENANCES = ("search", "anneal", "external")


class FormatError(ValueError):
    """Malformed input. ``line`` and ``column`` are 1-based when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


# -- catalogs ---------------------------------------------------------------


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    triangulation: Triangulation


_TOKEN = re.compile(r"\s*(?:(\[)|(\])|(,)|(-?\d+)|(\S))")


def _parse_facets(text: str, lineno: int, offset: int) -> list[list[int]]:
    tokens: list[tuple[str, int]] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # only trailing whitespace left
            break
        col = offset + m.start(m.lastindex) + 1
        if m.group(5) is not None:
            raise FormatError(f"unexpected character {m.group(5)!r}", lineno, col)
        tokens.append((m.group(m.lastindex), col))
        pos = m.end()
    it = iter(tokens + [("<end>", offset + len(text) + 1)])
    tok, col = next(it)

    def expect(what: str) -> None:
        nonlocal tok, col
        if tok != what:
            raise FormatError(f"expected {what!r}, found {tok!r}", lineno, col)
        tok, col = next(it)

    facets: list[list[int]] = []
    expect("[")
    while True:
        fcol = col
        expect("[")
        facet: list[int] = []
        while True:
            if not re.fullmatch(r"-?\d+", tok):
                raise FormatError(f"expected a label, found {tok!r}", lineno, col)
            facet.append(int(tok))
            tok, col = next(it)
            if tok == ",":
                tok, col = next(it)
                continue
            break
        expect("]")
        if len(facet) != 3:
            raise FormatError(f"facet has {len(facet)} labels, expected 3", lineno, fcol)
        facets.append(facet)
        if tok == ",":
            tok, col = next(it)
            continue
        break
    expect("]")
    if tok != "<end>":
        raise FormatError(f"trailing input {tok!r}", lineno, col)
    return facets


def parse_catalog(text: str, validate: bool = True) -> list[CatalogEntry]:
    """Parse catalog text. With ``validate`` every entry must be a connected
    closed surface."""
    entries: list[CatalogEntry] = []
    names: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in line:
            raise FormatError("expected NAME=[[...],...]", lineno, len(line) - len(line.lstrip()) + 1)
        eq = line.index("=")
        name = line[:eq].strip()
        if not name or any(c.isspace() for c in name):
            raise FormatError(f"invalid name {name!r}", lineno, 1)
        if name in names:
            raise FormatError(f"duplicate name {name!r}", lineno, 1)
        facets = _parse_facets(line[eq + 1 :], lineno, eq + 1)
        labels = [v for f in facets for v in f]
        if min(labels) < 1:
            raise FormatError(f"{name}: labels must be >= 1", lineno)
        try:
            t = Triangulation(name, max(labels), facets)
        except TriangulationError as exc:
            raise FormatError(f"{name}: {exc}", lineno) from exc
        if validate:
            report = validate_closed_surface(t)
            if not report.is_closed_surface:
                raise FormatError(f"{name} is not a closed surface: {report.summary()}", lineno)
        names.add(name)
        entries.append(CatalogEntry(name, t))
    return entries


def serialize_catalog(entries: Iterable[CatalogEntry]) -> str:
    lines = []
    for e in entries:
        body = ",".join(f"[{a},{b},{c}]" for a, b, c in e.triangulation.facets)
        lines.append(f"{e.name}=[{body}]")
    return "\n".join(lines) + "\n"


def bundled_catalog_text() -> str:
    return resources.files("surfreal").joinpath("data/surfaces.txt").read_text()


def load_catalog(path: str | Path | None = None, validate: bool = True) -> list[CatalogEntry]:
    text = bundled_catalog_text() if path is None else Path(path).read_text()
    return parse_catalog(text, validate=validate)


def find_entry(entries: list[CatalogEntry], name: str) -> CatalogEntry:
    for e in entries:
        if e.name == name:
            return e
    raise KeyError(f"no surface named {name!r} in catalog")


# -- certificates -----------------------------------------------------------


@dataclass(frozen=True)
class Certificate:
    surface: str
    extent: int
    placement: dict[int, tuple[int, int, int]]
    provenance: str = "external"
    seed: int | None = None
    shard: str | None = None
    # verify() outcome recorded when the certificate was written
    verdict: bool | None = None
    notes: tuple[str, ...] = field(default=())

    def realization(self, t: Triangulation) -> Realization:
        if t.name != self.surface:
            raise ValueError(f"certificate is for {self.surface!r}, not {t.name!r}")
        if len(self.placement) != t.vertex_count:
            raise ValueError(
                f"certificate places {len(self.placement)} vertices, {t.name} has {t.vertex_count}"
            )
        return Realization(t, self.placement)


def certificate_from(r: Realization, extent: int, provenance: str, **kw) -> Certificate:
    return Certificate(
        r.triangulation.name,
        extent,
        dict(r.placement),
        provenance,
        verdict=verify(r).is_valid_embedding,
        **kw,
    )


def write_certificate(c: Certificate) -> str:
    if c.provenance not in PROVENANCES:
        raise ValueError(f"unknown provenance {c.provenance!r}")
    lines = [f"surface: {c.surface}", f"extent: {c.extent}", f"provenance: {c.provenance}"]
    if c.seed is not None:
        lines.append(f"seed: {c.seed}")
    if c.shard is not None:
        lines.append(f"shard: {c.shard}")
    if c.verdict is not None:
        lines.append(f"verdict: {'valid' if c.verdict else 'invalid'}")
    for v in sorted(c.placement):
        x, y, z = c.placement[v]
        lines.append(f"{v} {x} {y} {z}")
    return "\n".join(lines) + "\n"


_HEADER = re.compile(r"([a-z]+):\s*(.*?)\s*$")


def read_certificate(text: str) -> Certificate:
    header: dict[str, str] = {}
    placement: dict[int, tuple[int, int, int]] = {}
    vertex_lines: dict[int, int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        m = _HEADER.fullmatch(s)
        if m:
            if placement:
                raise FormatError("header line after vertex lines", lineno)
            key, value = m.groups()
            if key in header:
                raise FormatError(f"duplicate header {key!r}", lineno)
            header[key] = value
            continue
        parts = s.split()
        if len(parts) != 4 or not all(re.fullmatch(r"-?\d+", p) for p in parts):
            raise FormatError("expected 'label x y z'", lineno)
        v, x, y, z = map(int, parts)
        if v in placement:
            raise FormatError(f"duplicate vertex {v}", lineno)
        placement[v] = (x, y, z)
        vertex_lines[v] = lineno
    for key in ("surface", "extent", "provenance"):
        if key not in header:
            raise FormatError(f"missing header {key!r}")
    unknown = set(header) - {"surface", "extent", "provenance", "seed", "shard", "verdict"}
    if unknown:
        raise FormatError(f"unknown headers {sorted(unknown)}")
    try:
        extent = int(header["extent"])
    except ValueError:
        raise FormatError(f"extent {header['extent']!r} is not an integer") from None
    if extent < 1:
        raise FormatError("extent must be positive")
    if header["provenance"] not in PROVENANCES:
        raise FormatError(f"unknown provenance {header['provenance']!r}")
    if not placement:
        raise FormatError("no vertex lines")
    n = len(placement)
    for v, p in placement.items():
        if not 1 <= v <= n:
            raise FormatError(f"label {v} out of range 1..{n}", vertex_lines[v])
        if not all(0 <= c < extent for c in p):
            raise FormatError(f"coordinates {p} outside 0..{extent - 1}", vertex_lines[v])
    verdict = None
    if "verdict" in header:
        if header["verdict"] not in ("valid", "invalid"):
            raise FormatError(f"verdict must be valid or invalid, got {header['verdict']!r}")
        verdict = header["verdict"] == "valid"
    seed = None
    if "seed" in header:
        try:
            seed = int(header["seed"])
        except ValueError:
            raise FormatError(f"seed {header['seed']!r} is not an integer") from None
    return Certificate(
        header["surface"],
        extent,
        dict(sorted(placement.items())),
        header["provenance"],
        seed,
        header.get("shard"),
        verdict,
    )


# -- mesh export ------------------------------------------------------------


class UnverifiedCertificate(ValueError):
    pass


def oriented_facets(r: Realization) -> list[tuple[int, int, int]]:
    """Coherently oriented facets, flipped as a whole so that the enclosed
    signed volume is positive (normals point outward)."""
    facets = coherent_orientation(r.triangulation)
    if facets is None:
        raise ValueError(f"{r.triangulation.name} is not orientable")
    P = r.placement
    origin = (0, 0, 0)
    volume6 = sum(det3(origin, P[a], P[b], P[c]) for a, b, c in facets)
    if volume6 < 0:
        facets = [(a, c, b) for a, b, c in facets]
    return facets


HIGHLIGHT_RGB = (255, 64, 0)
BASE_RGB = (200, 200, 200)


def export_mesh(
    c: Certificate,
    t: Triangulation,
    highlight_vertex: int | None = None,
    fmt: str = "off",
    force: bool = False,
) -> str:
    """OFF (0-based indices) or OBJ (1-based) text of the realized surface.

    OFF marks the facets around ``highlight_vertex`` with a face color; OBJ
    puts them in group ``link_<v>`` and adds the link cycle as a polyline.
    """
    r = c.realization(t)
    if not force and not verify(r).is_valid_embedding:
        raise UnverifiedCertificate(
            f"placement for {c.surface} is not a valid embedding; pass force to export anyway"
        )
    if highlight_vertex is not None and highlight_vertex not in t.labels:
        raise ValueError(f"highlight vertex {highlight_vertex} not in 1..{t.vertex_count}")
    facets = oriented_facets(r)
    labels = list(t.labels)
    index = {v: i for i, v in enumerate(labels)}
    if fmt == "off":
        out = ["OFF", f"{len(labels)} {len(facets)} {len(t.edge_list)}"]
        out += [" ".join(str(x) for x in c.placement[v]) for v in labels]
        for f in facets:
            line = "3 " + " ".join(str(index[v]) for v in f)
            if highlight_vertex is not None:
                rgb = HIGHLIGHT_RGB if highlight_vertex in f else BASE_RGB
                line += " " + " ".join(map(str, rgb))
            out.append(line)
        return "\n".join(out) + "\n"
    if fmt == "obj":
        out = [f"# {c.surface} extent {c.extent}", f"o {_obj_name(c.surface)}"]
        out += ["v " + " ".join(str(x) for x in c.placement[v]) for v in labels]
        rest = [f for f in facets if highlight_vertex not in f]
        star = [f for f in facets if highlight_vertex is not None and highlight_vertex in f]
        out.append("g surface")
        out += ["f " + " ".join(str(index[v] + 1) for v in f) for f in rest]
        if highlight_vertex is not None:
            out.append(f"g link_{highlight_vertex}")
            out += ["f " + " ".join(str(index[v] + 1) for v in f) for f in star]
            cycle = vertex_link(t, highlight_vertex)
            out.append("l " + " ".join(str(index[v] + 1) for v in (*cycle, cycle[0])))
        return "\n".join(out) + "\n"
    raise ValueError(f"unknown mesh format {fmt!r}")


def _obj_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_]", "_", name)
