"""Command line entry point: ``surfreal <command> ...``.

Exit codes: 0 success / valid, 1 well-formed but invalid or not found,
2 malformed input or usage error. Errors are reported on stderr as a single
``error: kind=<Kind> message=<text>`` line.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .formats import (
    Certificate,
    CatalogEntry,
    FormatError,
    UnverifiedCertificate,
    certificate_from,
    export_mesh,
    find_entry,
    load_catalog,
    parse_catalog,
    read_certificate,
    write_certificate,
)
from .realizer import verify
from .search import (
    Checkpoint,
    CheckpointMismatch,
    Search,
    SearchConfig,
    SearchStats,
    shard,
    stderr_progress,
)
from .surface import validate_closed_surface

CATALOG_ENV = "SURFREAL_CATALOG"


class UsageError(Exception):
    pass


def _fail(kind: str, message: str, code: int) -> int:
    print(f"error: kind={kind} message={json.dumps(str(message))}", file=sys.stderr)
    return code


def _catalog(args, validate: bool = True) -> list[CatalogEntry]:
    path = args.catalog or os.environ.get(CATALOG_ENV)
    return load_catalog(path, validate=validate)


def _surface(args):
    return find_entry(_catalog(args), args.surface).triangulation


# -- topology / verify / export --------------------------------------------


def cmd_topology(args) -> int:
    if args.file:
        entries = parse_catalog(Path(args.file).read_text(), validate=False)
    else:
        entries = _catalog(args, validate=False)
    ok = True
    for e in entries:
        rep = validate_closed_surface(e.triangulation)
        ok &= rep.is_closed_surface
        print(f"{e.name}: {rep.summary()}")
    return 0 if ok else 1


def cmd_verify(args) -> int:
    cert = read_certificate(Path(args.cert).read_text())
    t = find_entry(_catalog(args), cert.surface).triangulation
    report = verify(cert.realization(t))
    print(f"surface: {cert.surface}")
    for line in report.lines():
        print(line)
    return 0 if report.is_valid_embedding else 1


def cmd_export(args) -> int:
    cert = read_certificate(Path(args.cert).read_text())
    t = find_entry(_catalog(args), cert.surface).triangulation
    text = export_mesh(cert, t, args.highlight, args.format, force=args.force)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


# -- search -----------------------------------------------------------------


def _write_cert(outdir: Path, cert: Certificate, index: int) -> Path:
    outdir.mkdir(parents=True, exist_ok=True)
    tag = cert.shard or "all"
    safe = "".join(c if c.isalnum() or c in "-_" else "_" for c in cert.surface)
    path = outdir / f"{safe}_e{cert.extent}_{tag}_{index:06d}.cert"
    path.write_text(write_certificate(cert))
    return path


def _config_json(cfg: SearchConfig) -> dict:
    return {
        "surface": cfg.triangulation.name,
        "extent": cfg.extent,
        "shard_lower": None if cfg.shard_lower is None else [list(p) for p in cfg.shard_lower],
        "shard_upper": None if cfg.shard_upper is None else [list(p) for p in cfg.shard_upper],
        "shard_id": cfg.shard_id,
    }


def _points(v):
    return None if v is None else tuple(tuple(p) for p in v)


def _config_from_json(d: dict, args) -> SearchConfig:
    t = find_entry(_catalog(args), d["surface"]).triangulation
    return SearchConfig(
        t,
        int(d["extent"]),
        shard_lower=_points(d.get("shard_lower")),
        shard_upper=_points(d.get("shard_upper")),
        shard_id=d.get("shard_id"),
    )


def _budgeted(cfg: SearchConfig, args) -> SearchConfig:
    from dataclasses import replace

    return replace(
        cfg,
        max_nodes=args.max_nodes,
        max_seconds=args.max_seconds,
        report_interval=args.report_interval,
        frontier_cap=args.frontier_cap,
    )


def _run_search(cfg: SearchConfig, args, resume: Checkpoint | None = None) -> tuple[int, SearchStats, Checkpoint]:
    outdir = Path(args.out)
    s = Search(cfg, resume, stderr_progress if cfg.report_interval else None)
    count = resume.stats.realizations_found if resume else 0
    for r in s:
        count += 1
        _write_cert(outdir, certificate_from(r, cfg.extent, "search", shard=cfg.shard_id), count)
    assert s.checkpoint is not None
    return count, s.stats, s.checkpoint


def _save_checkpoint(path: str, cfg: SearchConfig, ck: Checkpoint) -> None:
    payload = json.loads(ck.to_json())
    payload["config"] = _config_json(cfg)
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")


def _finish(cfg: SearchConfig, stats: SearchStats, ck: Checkpoint, args) -> int:
    print(f"stats {stats.summary()}", file=sys.stderr)
    if ck.done:
        print(f"status: complete extent={cfg.extent} realizations={stats.realizations_found}", file=sys.stderr)
        if args.checkpoint:
            _save_checkpoint(args.checkpoint, cfg, ck)
        return 0
    if args.checkpoint:
        _save_checkpoint(args.checkpoint, cfg, ck)
        print(f"status: interrupted checkpoint={args.checkpoint}", file=sys.stderr)
    else:
        print("status: interrupted (no --checkpoint given, progress lost)", file=sys.stderr)
    return 0


def _shard_worker(payload):
    cfg, out = payload
    from types import SimpleNamespace

    ns = SimpleNamespace(out=out)
    count, stats, ck = _run_search(cfg, ns)
    return stats, ck.done


def cmd_search(args) -> int:
    if args.shard:
        d = json.loads(Path(args.shard).read_text())
        cfg = _budgeted(_config_from_json(d, args), args)
        count, stats, ck = _run_search(cfg, args)
        return _finish(cfg, stats, ck, args)
    t = _surface(args)
    if args.sweep:
        extent = 2
        while extent <= args.extent:
            cfg = _budgeted(SearchConfig(t, extent), args)
            count, stats, ck = _run_search(cfg, args)
            print(f"sweep extent={extent} realizations={stats.realizations_found} complete={ck.done}", file=sys.stderr)
            if stats.realizations_found or not ck.done:
                return _finish(cfg, stats, ck, args)
            extent += 1
        return 0
    cfg = _budgeted(SearchConfig(t, args.extent), args)
    if args.shard_depth:
        shards = shard(cfg, args.shard_depth)
        total = SearchStats()
        jobs = max(1, args.jobs)
        payloads = [(s, args.out) for s in shards]
        if jobs == 1:
            results = [_shard_worker(p) for p in payloads]
        else:
            with ProcessPoolExecutor(jobs) as pool:
                results = list(pool.map(_shard_worker, payloads))
        for stats, done in results:
            total = total + stats
        print(f"stats {total.summary()}", file=sys.stderr)
        complete = all(done for _, done in results)
        print(f"status: {'complete' if complete else 'interrupted'} shards={len(shards)} realizations={total.realizations_found}", file=sys.stderr)
        return 0
    count, stats, ck = _run_search(cfg, args)
    return _finish(cfg, stats, ck, args)


def cmd_shard(args) -> int:
    t = _surface(args)
    cfg = SearchConfig(t, args.extent)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    shards = shard(cfg, args.depth)
    for i, s in enumerate(shards):
        (outdir / f"shard_{i + 1:05d}.json").write_text(json.dumps(_config_json(s), indent=1) + "\n")
    print(f"{len(shards)} shards written to {outdir}")
    return 0


def cmd_resume(args) -> int:
    d = json.loads(Path(args.checkpoint).read_text())
    cfg = _budgeted(_config_from_json(d["config"], args), args)
    d.pop("config")
    ck = Checkpoint.from_json(json.dumps(d))
    count, stats, ck2 = _run_search(cfg, args, resume=ck)
    return _finish(cfg, stats, ck2, args)


# -- anneal -----------------------------------------------------------------


def cmd_anneal(args) -> int:
    from .anneal import Schedule, anneal

    t = _surface(args)
    cooling = args.cooling
    if cooling is None and args.t_end is not None:
        cooling = math.exp(math.log(args.t_end / args.t0) / args.max_moves)
    sched = Schedule(
        t0=args.t0,
        cooling=Schedule.cooling if cooling is None else cooling,
        restart_after=args.restart_after,
        max_moves=args.max_moves,
        max_seconds=args.max_seconds,
        penalty=args.penalty,
    )
    best = None
    for seed in range(args.seed, args.seed + args.restarts):
        started = time.monotonic()
        res = anneal(t, args.extent, sched, seed)
        print(
            f"seed={seed} energy={res.energy} moves={res.moves} restarts={res.restarts} "
            f"seconds={time.monotonic() - started:.1f}",
            file=sys.stderr,
        )
        if best is None or res.energy < best.energy:
            best = res
        if res.success:
            break
    assert best is not None
    cert = certificate_from(best.realization, args.extent, "anneal", seed=best.seed)
    text = write_certificate(cert)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0 if best.success else 1


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="surfreal", description=__doc__.splitlines()[0])
    p.add_argument("--catalog", help=f"catalog file (default: ${CATALOG_ENV} or the bundled one)")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--catalog", default=argparse.SUPPRESS, help="catalog file")

    sp = sub.add_parser("topology", help="topology report for every catalog entry")
    common(sp)
    sp.add_argument("file", nargs="?", help="catalog file to inspect (default: --catalog)")
    sp.set_defaults(func=cmd_topology)

    sp = sub.add_parser("verify", help="check a realization certificate")
    common(sp)
    sp.add_argument("cert")
    sp.set_defaults(func=cmd_verify)

    def search_opts(sp):
        sp.add_argument("--out", default="certificates", help="directory for found certificates")
        sp.add_argument("--checkpoint", help="checkpoint file written when the budget runs out")
        sp.add_argument("--max-nodes", type=int)
        sp.add_argument("--max-seconds", type=float)
        sp.add_argument("--report-interval", type=int, default=0)
        sp.add_argument("--frontier-cap", type=int, default=100_000)

    sp = sub.add_parser("search", help="exhaustive enumeration on a grid")
    common(sp)
    sp.add_argument("--surface")
    sp.add_argument("--extent", type=int)
    sp.add_argument("--shard", help="shard file written by the shard command")
    sp.add_argument("--sweep", action="store_true", help="try extents 2..EXTENT until one succeeds")
    sp.add_argument("--shard-depth", type=int, help="split into shards at this depth and run them all")
    sp.add_argument("--jobs", type=int, default=1)
    search_opts(sp)
    sp.set_defaults(func=cmd_search)

    sp = sub.add_parser("shard", help="write shard files for a search")
    common(sp)
    sp.add_argument("--surface", required=True)
    sp.add_argument("--extent", type=int, required=True)
    sp.add_argument("--depth", type=int, default=1)
    sp.add_argument("--out", default="shards")
    sp.set_defaults(func=cmd_shard)

    sp = sub.add_parser("resume", help="continue a search from a checkpoint")
    common(sp)
    sp.add_argument("checkpoint_file", metavar="CHECKPOINT")
    search_opts(sp)
    sp.set_defaults(func=cmd_resume)

    sp = sub.add_parser("anneal", help="simulated annealing for one surface")
    common(sp)
    sp.add_argument("--surface", required=True)
    sp.add_argument("--extent", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--restarts", type=int, default=1, help="number of consecutive seeds to try")
    sp.add_argument("--t0", type=float, default=3.0)
    sp.add_argument("--cooling", type=float)
    sp.add_argument("--t-end", type=float, help="derive geometric cooling to reach this temperature")
    sp.add_argument("--restart-after", type=int)
    sp.add_argument("--max-moves", type=int, default=2_000_000)
    sp.add_argument("--max-seconds", type=float)
    sp.add_argument("--penalty", type=int)
    sp.add_argument("--out", help="certificate output file (default: stdout)")
    sp.set_defaults(func=cmd_anneal)

    sp = sub.add_parser("export", help="write OFF or OBJ mesh of a certificate")
    common(sp)
    sp.add_argument("cert")
    sp.add_argument("--highlight", type=int, help="vertex whose star and link are marked")
    sp.add_argument("--format", choices=("off", "obj"), default="off")
    sp.add_argument("--force", action="store_true", help="export even if the placement is invalid")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_export)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "resume":
        args.checkpoint = args.checkpoint_file
    if args.command == "search" and not args.shard and (args.surface is None or args.extent is None):
        return _fail("UsageError", "search needs --surface and --extent, or --shard", 2)
    try:
        return args.func(args)
    except FormatError as exc:
        return _fail("FormatError", exc, 2)
    except CheckpointMismatch as exc:
        return _fail("CheckpointMismatch", exc, 2)
    except UnverifiedCertificate as exc:
        return _fail("UnverifiedCertificate", exc, 1)
    except KeyError as exc:
        return _fail("UnknownSurface", exc.args[0], 2)
    except (OSError, ValueError) as exc:
        return _fail(type(exc).__name__, exc, 2)


if __name__ == "__main__":
    sys.exit(main())
