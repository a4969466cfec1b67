"""Command line interface.

    twisted-kzb verify --config run.ini [--suite NAME ...] [--seed N] [--out report.jsonl]
    twisted-kzb list-checks
    twisted-kzb transport --config run.ini --path "z1: 0.3+0.2i, 0.35+0.25i" --out end.jsonl

Exit status: 0 when every check passes, 1 when a check fails, 2 on
configuration or validation errors.
"""
from __future__ import annotations

import argparse
import json
import platform
import re
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .checks import CHECK_IDS, RunContext, catalog_lines, run_checks
from .config import SUITES, ConfigError, RunConfig, format_complex, load_config, parse_complex
from .kzb import RegimeError, TransportError, transport
from .lie import UnsupportedAlgebraError

__all__ = ["main", "parse_path_spec"]

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _dumps(obj) -> str:
    # json writes floats with repr, the shortest round-trip form
    return json.dumps(obj, ensure_ascii=False, separators=(", ", ": "), allow_nan=False)


def _manifest(cfg: RunConfig, command: str) -> dict:
    return {
        "record": "manifest",
        "command": command,
        "tool": "twisted_kzb",
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "seed": cfg.seed,
        "config": cfg.canonical(),
    }


def _write(lines: list[str], out: str | None) -> None:
    text = "\n".join(lines) + "\n"
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _load(args) -> RunConfig:
    cfg = load_config(args.config, CHECK_IDS, seed_override=args.seed, suite_override=getattr(args, "suite", None))
    # surface unsupported algebra/twist combinations before any computation
    ctx = RunContext(cfg)
    ctx.twist
    return cfg


def cmd_verify(args) -> int:
    cfg = _load(args)
    start = time.perf_counter()
    records = run_checks(cfg)
    failed = sum(not r["pass"] for r in records)
    summary = {
        "record": "summary",
        "suites": list(cfg.suites),
        "checks": len(records),
        "passed": len(records) - failed,
        "failed": failed,
        "errors": sum("error" in r["params"] for r in records),
        "status": "pass" if failed == 0 else "fail",
        "wall_time": time.perf_counter() - start,
    }
    lines = [_dumps(_manifest(cfg, "verify"))] + [_dumps(r) for r in records] + [_dumps(summary)]
    _write(lines, args.out)
    for r in records:
        if not r["pass"]:
            print(f"FAIL {r['id']} residual={r['residual']!r} tolerance={r['tolerance']!r}", file=sys.stderr)
    print(f"{summary['passed']}/{summary['checks']} checks passed", file=sys.stderr)
    return EXIT_OK if failed == 0 else EXIT_FAIL


def cmd_list_checks(args) -> int:
    sys.stdout.write("\n".join(catalog_lines()) + "\n")
    return EXIT_OK


_TARGET = re.compile(r"^\s*(?P<target>z\d+|tau)\s*:(?P<rest>.*)$", re.S)


def parse_path_spec(spec: str):
    """Parse ``"<target>: w1, w2, ..."`` where target is ``z<k>`` (1-based) or ``tau``.

    The path starts at the current position of the target and visits the
    listed vertices.  Returns ``(which, vertices)`` with ``which`` a 0-based
    site index or ``"tau"``.
    """
    m = _TARGET.match(spec)
    if m is None:
        raise ValueError("path spec must look like 'z1: 0.3+0.2i, 0.4+0.2i' or 'tau: 0.1+1.1i'")
    target = m.group("target")
    parts = [p for p in re.split(r"[,;\n]", m.group("rest")) if p.strip()]
    if not parts:
        raise ValueError("path spec lists no vertices")
    vertices = [parse_complex(p) for p in parts]
    which = "tau" if target == "tau" else int(target[1:]) - 1
    if which != "tau" and which < 0:
        raise ValueError("marked points are numbered from 1")
    return which, vertices


def cmd_transport(args) -> int:
    cfg = _load(args)
    spec = args.path
    if Path(spec).is_file():
        spec = Path(spec).read_text(encoding="utf-8")
    try:
        which, vertices = parse_path_spec(spec)
    except ValueError as err:
        raise ConfigError(f"--path: {err}") from err
    ctx = RunContext(cfg)
    if ctx.twist.dim_h0 != 0:
        raise ConfigError("transport needs a twist without dynamical parameters (h̃_0 = 0)")
    from .checks import initial_vector
    from .rmatrix import ModuliPoint

    marked = ctx.marked(ModuliPoint((), cfg.tau))
    if which != "tau" and which >= marked.n:
        raise ConfigError(f"--path: marked point z{which + 1} does not exist (n = {marked.n})")
    start = marked.point.tau if which == "tau" else marked.z[which]
    path = [start] + vertices
    dim = int(np.prod(marked.dims))
    try:
        f0 = initial_vector(ctx, dim)
    except ValueError as err:
        raise ConfigError(str(err), "transport", "f0") from err
    t0 = time.perf_counter()
    f1 = transport(ctx.ev, marked, which, path, f0, rtol=cfg.rtol)
    record = {
        "record": "transport",
        "target": "tau" if which == "tau" else f"z{which + 1}",
        "positions": [format_complex(z) for z in marked.z],
        "path": [format_complex(p) for p in path],
        "f0": [format_complex(x) for x in f0],
        "f1": [format_complex(x) for x in f1],
        "norm_ratio": float(np.linalg.norm(f1) / np.linalg.norm(f0)),
        "wall_time": time.perf_counter() - t0,
    }
    _write([_dumps(_manifest(cfg, "transport")), _dumps(record)], args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twisted-kzb", description="Numerical verification of the twisted elliptic KZB system.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run check suites and write a JSON-lines report")
    v.add_argument("--config", required=True)
    v.add_argument("--suite", action="append", choices=SUITES, help="restrict to a suite (repeatable)")
    v.add_argument("--seed", type=int, default=None, help="override the configured seed")
    v.add_argument("--out", default=None, help="report path (default: stdout)")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("list-checks", help="print the check catalog")
    c.set_defaults(func=cmd_list_checks)

    t = sub.add_parser("transport", help="parallel transport along a polyline")
    t.add_argument("--config", required=True)
    t.add_argument("--path", required=True, help="'z<k>: w1, w2, ...', 'tau: ...', or a file holding it")
    t.add_argument("--out", required=True)
    t.add_argument("--seed", type=int, default=None)
    t.set_defaults(func=cmd_transport)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits with 2 on usage errors
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigError, UnsupportedAlgebraError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (RegimeError, TransportError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
