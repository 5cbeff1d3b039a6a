"""Command line entry point: ``pfspec <subcommand> ...``.

Exit codes: 0 success, 1 negative verdict, 2 usage error, 3 resource limit.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import random
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import __version__
from .algebra import TABLE_VERSION, ClosureTable, Limits, closure, random_violations
from .enumeration import enumerate_class, enumerate_upto
from .epsets import EPSet, EPSetError, least_period, normalize, strict_threshold, sumset, union
from .mso import ParseError, TranslationError, dialect_of, eliminate_functions, evaluate, parse, to_text
from .mso import ast as A
from .pfgraph import GraphError, Kind, PFGraph, StructureClass, load, to_json
from .spectra import (NotApplicable, SpectrumCertificate, Status, Thresholds, as_graph_sentence,
                      minimal_threshold, period_of, pump, satisfiable, spectrum_prefix)
from .theory import ResourceLimit, TheoryEngine, TheoryError, ef_equal

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_LIMIT = 0, 1, 2, 3

CLASSES = {
    "fn": StructureClass.FUNCTION_GRAPH,
    "forest": StructureClass.FOREST,
    "tree": StructureClass.TREE,
    "general": StructureClass.GENERAL,
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    args: argparse.Namespace
    fmt: str = "json"
    seed: int = 0
    stdout: io.TextIOBase = field(default_factory=lambda: sys.stdout)


def _emit(cfg: RunConfig, obj) -> None:
    cfg.stdout.write(json.dumps(obj, sort_keys=True) + "\n")


def _palette(text: str | None) -> tuple[str, ...] | None:
    if text is None:
        return None
    return tuple(sorted(filter(None, (c.strip() for c in text.split(",")))))


def _read_formula(path: str):
    try:
        return parse(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _read_graph(path: str, palette=None):
    try:
        return load(path, palette)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _positive(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _natural(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return v


# ---------------------------------------------------------------------------
# closure cache

def cache_dir() -> Path:
    root = os.environ.get("PFSPEC_CACHE_DIR")
    return Path(root) if root else Path.home() / ".cache" / "pfspec"


def _cache_path(d: int, palette: Sequence[str]) -> Path:
    key = hashlib.sha256(json.dumps([TABLE_VERSION, d, list(palette)]).encode()).hexdigest()[:16]
    return cache_dir() / f"closure-v{TABLE_VERSION}-d{d}-{key}.json"


def cached_closure(d: int, palette: Sequence[str], engine: TheoryEngine, use_cache: bool = True,
                   limits: Limits | None = None) -> ClosureTable:
    path = _cache_path(d, palette)
    if use_cache and path.exists():
        try:
            return ClosureTable.from_json(json.loads(path.read_text()), engine)
        except (ValueError, KeyError):
            pass  # stale or corrupt, rebuild
    table = closure(d, palette, engine, limits=limits)
    if use_cache:
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            tmp.write_text(table.dumps())
            tmp.replace(path)
        except OSError:
            pass
    return table


# ---------------------------------------------------------------------------
# subcommands

def cmd_translate(cfg: RunConfig) -> int:
    phi = _read_formula(cfg.args.file)
    chi = eliminate_functions(phi) if dialect_of(phi) == "f" else phi
    if cfg.fmt == "json":
        _emit(cfg, {"formula": to_text(chi), "depth": A.depth(chi)})
    else:
        cfg.stdout.write(to_text(chi) + "\n")
    return EXIT_OK


def cmd_check(cfg: RunConfig) -> int:
    phi = _read_formula(cfg.args.formula)
    x = _read_graph(cfg.args.graph)
    ok = evaluate(phi, x)
    if cfg.fmt == "json":
        _emit(cfg, {"result": ok})
    else:
        cfg.stdout.write(("true" if ok else "false") + "\n")
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_theory(cfg: RunConfig) -> int:
    x = _read_graph(cfg.args.graph)
    engine = TheoryEngine()
    cfg.stdout.write(engine.digest(engine.theory(x, cfg.args.d)) + "\n")
    return EXIT_OK


def cmd_eq(cfg: RunConfig) -> int:
    a, b = _read_graph(cfg.args.a), _read_graph(cfg.args.b)
    if cfg.args.oracle == "ef":
        same = ef_equal(a, b, cfg.args.d)
    else:
        same = TheoryEngine().equal(a, b, cfg.args.d)
    cfg.stdout.write(("equal" if same else "different") + "\n")
    return EXIT_OK if same else EXIT_NEGATIVE


def cmd_closure(cfg: RunConfig) -> int:
    engine = TheoryEngine()
    palette = _palette(cfg.args.palette) or ()
    table = cached_closure(cfg.args.d, palette, engine, not cfg.args.no_cache)
    if cfg.args.eager:
        table.fill_ops()
    text = table.dumps()
    if cfg.args.out:
        Path(cfg.args.out).write_text(text + "\n")
    if cfg.fmt == "csv":
        w = csv.writer(cfg.stdout, lineterminator="\n")
        w.writerow(["digest", "class", "size", "confirmed"])
        for t in table.order:
            e = table.entries[t]
            w.writerow([engine.digest(t), e.cls.value, e.size, int(e.confirmed)])
    elif not cfg.args.out:
        cfg.stdout.write(text + "\n")
    else:
        _emit(cfg, {"theories": len(table), "max_witness_size": table.max_witness_size(),
                    "all_confirmed": table.all_confirmed, "out": cfg.args.out})
    return EXIT_OK


def _verdict_json(v) -> dict:
    return {
        "status": v.status.value,
        "depth": v.depth,
        "palette": list(v.palette),
        "witness": to_json(v.witness) if v.witness is not None else None,
        "size": v.witness.n if v.witness is not None else None,
        "detail": v.detail,
    }


def cmd_sat(cfg: RunConfig) -> int:
    phi = _read_formula(cfg.args.file)
    limits = Limits(max_theories=cfg.args.max_theories, max_size=cfg.args.max_size)
    v = satisfiable(phi, TheoryEngine(), limits, palette=_palette(cfg.args.palette))
    _emit(cfg, _verdict_json(v))
    return {Status.SAT: EXIT_OK, Status.UNSAT: EXIT_NEGATIVE, Status.RESOURCE_LIMIT: EXIT_LIMIT}[v.status]


def _sentence_period(chi, prefix: list[bool], engine: TheoryEngine, args) -> tuple[int, list[str]]:
    if args.p is not None:
        return args.p, ["period_given"]
    d = A.depth(chi)
    if d <= 1:
        table = cached_closure(d, _palette(args.palette) or tuple(sorted(A.colors_used(chi))), engine,
                               not args.no_cache)
        return period_of(table), ["period_from_closure"]
    # deeper closures are out of reach: take the shortest period seen on the prefix
    N = len(prefix) - 1
    best = min(range(1, N // 2 + 1), key=lambda q: (minimal_threshold(prefix, q) + q, q))
    return best, ["period_empirical"]


def cmd_spectrum(cfg: RunConfig) -> int:
    phi = _read_formula(cfg.args.file)
    engine = TheoryEngine()
    palette = _palette(cfg.args.palette)
    prefix = spectrum_prefix(phi, cfg.args.N, path=cfg.args.path, engine=engine, palette=palette)
    if cfg.fmt == "csv":
        w = csv.writer(cfg.stdout, lineterminator="\n")
        w.writerow(["n", "member"])
        for n, b in enumerate(prefix):
            w.writerow([n, int(b)])
    elif cfg.fmt == "text":
        cfg.stdout.write(" ".join(str(n) for n, b in enumerate(prefix) if b) + "\n")
    else:
        _emit(cfg, {"N": cfg.args.N, "prefix": prefix})
    if cfg.args.cert:
        chi = as_graph_sentence(phi)
        p, flags = _sentence_period(chi, prefix, engine, cfg.args)
        cert = SpectrumCertificate(A.depth(chi), p, minimal_threshold(prefix, p), prefix, flags,
                                   sentence=to_text(phi))
        Path(cfg.args.cert).write_text(json.dumps(cert.to_json(), sort_keys=True) + "\n")
    return EXIT_OK


def cmd_pump(cfg: RunConfig) -> int:
    x = _read_graph(cfg.args.graph)
    if not isinstance(x, PFGraph):
        raise UsageError("pump needs an undotted function graph")
    engine = TheoryEngine()
    table = cached_closure(cfg.args.d, x.palette, engine, not cfg.args.no_cache)
    th = Thresholds.parse(cfg.args.thresholds or "", Thresholds.from_table(table))
    try:
        r = pump(x, table, th)
    except NotApplicable as exc:
        _emit(cfg, {"case": None, "detail": str(exc)})
        return EXIT_NEGATIVE
    _emit(cfg, {"case": r.case, "p": r.p, "size": r.graph.n, "graph": to_json(r.graph),
                "detail": r.detail})
    return EXIT_OK


def cmd_enum(cfg: RunConfig) -> int:
    palette = _palette(cfg.args.palette) or ()
    tag = CLASSES[cfg.args.cls]
    count = 0
    for x in enumerate_class(tag, cfg.args.n, palette):
        _emit(cfg, to_json(x))
        count += 1
    _emit(cfg, {"count": count})
    return EXIT_OK


EPSET_OPS = ("normalize", "union", "sumset", "least_period", "strict_threshold", "expand")


def cmd_epset(cfg: RunConfig) -> int:
    sets = []
    for path in cfg.args.inputs:
        try:
            sets.append(EPSet.from_json(_read_json(path)))
        except (TypeError, ValueError, AttributeError) as exc:
            raise UsageError(f"{path}: not an EPSet ({exc})") from None
    op = cfg.args.op
    if op in ("union", "sumset"):
        res = union(sets) if op == "union" else sumset(sets)
        _emit(cfg, res.to_json())
        return EXIT_OK
    if len(sets) != 1:
        raise UsageError(f"{op} takes exactly one set")
    s = sets[0]
    if op == "normalize":
        _emit(cfg, normalize(s).to_json())
    elif op == "least_period":
        _emit(cfg, {"least_period": least_period(s)})
    elif op == "strict_threshold":
        p = cfg.args.p if cfg.args.p is not None else least_period(s)
        _emit(cfg, {"p": p, "strict_threshold": strict_threshold(s, p)})
    else:
        members = sorted(s.expand(cfg.args.horizon))
        if cfg.fmt == "csv":
            w = csv.writer(cfg.stdout, lineterminator="\n")
            w.writerow(["n"])
            for n in members:
                w.writerow([n])
        else:
            _emit(cfg, {"horizon": cfg.args.horizon, "members": members})
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    """Randomized agreement runs: theory vs game, and composition well-definedness."""
    seed = cfg.seed
    sys.stderr.write(f"seed {seed}\n")
    rng = random.Random(seed)
    engine = TheoryEngine()
    graphs = list(enumerate_upto(StructureClass.GENERAL, cfg.args.n))
    pairs = [(rng.choice(graphs), rng.choice(graphs)) for _ in range(cfg.args.samples)]
    mismatches = 0
    for x, y in pairs:
        for d in (0, 1):
            if engine.equal(x, y, d) != ef_equal(x, y, d):
                mismatches += 1
    report = {"seed": seed, "game_pairs": len(pairs), "game_mismatches": mismatches, "composition": {}}
    bad = mismatches
    for kind in Kind:
        tested, violations = random_violations(kind, 1, cfg.args.n, cfg.args.samples,
                                               rng.randrange(1 << 30), engine)
        report["composition"][kind.value] = {"tested": tested, "violations": len(violations)}
        bad += len(violations)
    _emit(cfg, report)
    return EXIT_OK if bad == 0 else EXIT_NEGATIVE


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pfspec", description="MSO theories and spectra of PF-graphs")
    ap.add_argument("--version", action="version", version=f"pfspec {__version__}")
    ap.add_argument("--format", dest="fmt", choices=("json", "text", "csv"), default="json")
    ap.add_argument("--seed", type=int, default=0)
    sub = ap.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("translate", help="eliminate the function symbol")
    p.add_argument("file")

    p = sub.add_parser("check", help="evaluate a formula on a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--formula", required=True)

    p = sub.add_parser("theory", help="digest of a graph's d-theory")
    p.add_argument("--graph", required=True)
    p.add_argument("--d", type=_natural, required=True)

    p = sub.add_parser("eq", help="compare two graphs' d-theories")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--d", type=_natural, required=True)
    p.add_argument("--oracle", choices=("theory", "ef"), default="theory")

    p = sub.add_parser("closure", help="closure table of realizable theories")
    p.add_argument("--d", type=_natural, required=True)
    p.add_argument("--palette", default="")
    p.add_argument("--out")
    p.add_argument("--no-cache", action="store_true")
    p.add_argument("--eager", action="store_true", help="fill every operation table entry")

    p = sub.add_parser("sat", help="finite satisfiability over function graphs")
    p.add_argument("file")
    p.add_argument("--palette")
    p.add_argument("--max-theories", type=_positive, default=Limits.max_theories)
    p.add_argument("--max-size", type=_positive, default=Limits.max_size)

    p = sub.add_parser("spectrum", help="spectrum prefix and certificate")
    p.add_argument("file")
    p.add_argument("--N", type=_positive, default=8)
    p.add_argument("--path", choices=("eval", "theory"), default="eval")
    p.add_argument("--palette")
    p.add_argument("--cert")
    p.add_argument("--p", type=_positive)
    p.add_argument("--no-cache", action="store_true")

    p = sub.add_parser("pump", help="grow a function graph by the period, keeping its theory")
    p.add_argument("--graph", required=True)
    p.add_argument("--d", type=_natural, default=0)
    p.add_argument("--thresholds")
    p.add_argument("--no-cache", action="store_true")

    p = sub.add_parser("enum", help="unlabeled structures of one size")
    p.add_argument("--class", dest="cls", choices=sorted(CLASSES), default="fn")
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--palette", default="")

    p = sub.add_parser("epset", help="eventually periodic set arithmetic")
    p.add_argument("op", choices=EPSET_OPS)
    p.add_argument("inputs", nargs="+")
    p.add_argument("--p", type=_positive)
    p.add_argument("--horizon", type=_natural, default=100)

    p = sub.add_parser("verify", help="randomized agreement checks")
    p.add_argument("--n", type=_positive, default=3)
    p.add_argument("--samples", type=_positive, default=50)
    return ap


COMMANDS = {
    "translate": cmd_translate, "check": cmd_check, "theory": cmd_theory, "eq": cmd_eq,
    "closure": cmd_closure, "sat": cmd_sat, "spectrum": cmd_spectrum, "pump": cmd_pump,
    "enum": cmd_enum, "epset": cmd_epset, "verify": cmd_verify,
}


def run(cfg: RunConfig) -> int:
    try:
        return COMMANDS[cfg.subcommand](cfg)
    except ResourceLimit as exc:
        sys.stderr.write(f"resource limit: {exc}\n")
        return EXIT_LIMIT
    except (UsageError, ParseError, TranslationError, GraphError, TheoryError, EPSetError,
            ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    cfg = RunConfig(args.subcommand, args, args.fmt, args.seed)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
