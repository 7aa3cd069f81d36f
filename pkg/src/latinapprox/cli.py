"""Command-line front end: ``python -m latinapprox <command> [options]``.

Every flag has a matching key in the optional JSON config (``--config``);
flags given on the command line win. Exit status is 0 on success, 2 when a
probe finds the line laws broken, and 1 on any error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, fields
from fractions import Fraction
from pathlib import Path

from . import io as lio
from .groups import CompactWindow, model_from_spec
from .latin import complete_partial, realize_amalgamation, realize_partial
from .partitioning import lattice_partition, singleton_partition
from .pipeline import (
    approximate_compact,
    approximate_locally_compact,
    loop_approximate,
    unimodularity_probe,
)
from .tensor import w_exact, w_montecarlo

log = logging.getLogger("latinapprox")

COMMANDS = ("approximate", "loop", "probe", "realize", "complete", "tensor")
EXIT_OK, EXIT_ERROR, EXIT_VIOLATION = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    group: str | None = None
    cells: int | None = None
    t: int | None = None
    samples: int | None = None
    seed: int = 0
    out: str | None = None
    format: str | None = None
    window: str | None = None
    inner: str | None = None
    amalgam: str | None = None
    square: str | None = None
    threads: int = 1

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"field 'command': expected one of {', '.join(COMMANDS)}, got {self.command!r}")
        if self.format not in (None, "json", "csv"):
            raise ConfigError(f"field 'format': expected 'json' or 'csv', got {self.format!r}")
        for name in ("cells", "t", "threads"):
            v = getattr(self, name)
            if v is not None and (not isinstance(v, int) or v < 1):
                raise ConfigError(f"field '{name}': expected a positive integer, got {v!r}")
        if self.samples is not None and (not isinstance(self.samples, int) or self.samples < 0):
            raise ConfigError(f"field 'samples': expected a non-negative integer, got {self.samples!r}")
        if self.samples and self.seed is None:
            raise ConfigError("field 'seed': required whenever samples > 0")
        if self.command in ("approximate", "loop", "probe", "tensor") and not self.group:
            raise ConfigError(f"field 'group': required by '{self.command}'")
        if self.command == "realize" and not self.amalgam:
            raise ConfigError("field 'amalgam': required by 'realize'")
        if self.command == "complete" and not self.square:
            raise ConfigError("field 'square': required by 'complete'")


def parse_box(text: str):
    """``"lo:hi"`` per axis, axes separated by commas; rationals allowed."""
    box = []
    for part in text.split(","):
        lo, sep, hi = part.partition(":")
        if not sep:
            raise ConfigError(f"bad box {text!r}; expected lo:hi[,lo:hi]")
        box.append((Fraction(lo.strip()), Fraction(hi.strip())))
    return tuple(box)


def load_config_file(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    known = {f.name for f in fields(RunConfig)}
    for key in data:
        if key not in known:
            raise ConfigError(f"{path}: unknown field {key!r}")
    return data


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="latinapprox",
                                 description="Finite quasigroup approximations of groups.")
    ap.add_argument("--verbose", "-v", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file whose keys mirror these flags")
        p.add_argument("--group", help="torus:D, Z6, cyclic:N, S3, real_line, affine, cayley:FILE.csv")
        p.add_argument("--cells", type=int, help="cells per axis (total for affine)")
        p.add_argument("--t", type=int, help="starting group size")
        p.add_argument("--samples", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--format", choices=("json", "csv"))
        p.add_argument("--window", help="window box, e.g. -3:3 or 1/2:2,-1:1")
        p.add_argument("--inner", help="target box B inside the window")
        p.add_argument("--amalgam", help="amalgam JSON for 'realize'")
        p.add_argument("--square", help="partial square CSV for 'complete'")
    return ap


def config_from_args(args: argparse.Namespace, env=os.environ) -> RunConfig:
    data = load_config_file(args.config) if args.config else {}
    data["command"] = args.command
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if f.name != "command" and v is not None:
            data[f.name] = v
    threads = env.get("LATINAPPROX_THREADS")
    if threads is not None and "threads" not in data:
        try:
            data["threads"] = int(threads)
        except ValueError as exc:
            raise ConfigError(f"LATINAPPROX_THREADS: expected a positive integer, got {threads!r}") from exc
    cfg = RunConfig(**data)
    cfg.validate()
    return cfg


def _fmt(cfg: RunConfig) -> str:
    """Explicit ``format`` wins, then the output suffix, then JSON."""
    if cfg.format:
        return cfg.format
    return "csv" if (cfg.out or "").endswith(".csv") else "json"


def _emit(cfg: RunConfig, payload: str) -> None:
    if cfg.out:
        Path(cfg.out).write_text(payload)
    else:
        sys.stdout.write(payload)


def _summary(rows) -> str:
    width = max(len(k) for k, _ in rows)
    return "".join(f"{k.ljust(width)}  {v}\n" for k, v in rows)


def _run_approximate(cfg: RunConfig, loop: bool) -> int:
    model = model_from_spec(cfg.group)
    if model.compact:
        fn = loop_approximate if loop else approximate_compact
        amap, report = fn(model, cfg.cells, cfg.t, seed=None)
    else:
        if loop:
            raise ConfigError("field 'group': loop approximation needs a compact group")
        inner = parse_box(cfg.inner) if cfg.inner else ((Fraction(-1), Fraction(1)),)
        B = CompactWindow(model, parse_box(cfg.window), inner) if cfg.window else inner
        amap, report = approximate_locally_compact(model, B, cfg.cells or 12, cfg.t)
    if _fmt(cfg) == "csv":
        _emit(cfg, lio.square_to_csv(amap.square))
    else:
        _emit(cfg, lio.dumps({"report": lio.report_to_dict(report), **lio.amap_to_dict(amap)}))
    rows = [("group", cfg.group), ("cells", report.n), ("t", report.t), ("order", report.order),
            ("max error", f"{report.max_product_error:.6g}"), ("bound", f"{report.epsilon_bound:.6g}"),
            ("density ok", report.density_ok)]
    if loop:
        rows += [("unit", report.unit), ("unit laws", report.unit_laws_hold),
                 ("displacement", f"{report.displacement:.6g}")]
    sys.stderr.write(_summary(rows))
    return EXIT_OK


def _run_probe(cfg: RunConfig) -> int:
    model = model_from_spec(cfg.group)
    window = CompactWindow(model, parse_box(cfg.window)) if cfg.window else None
    report = unimodularity_probe(model, window, cfg.cells or 9,
                                 samples=cfg.samples or 10**6, seed=cfg.seed)
    _emit(cfg, lio.dumps(lio.report_to_dict(report)))
    sys.stderr.write(_summary([("group", cfg.group), ("lines", report.lines_checked),
                               ("disparity", f"{report.disparity:.6g}"),
                               ("noise floor", f"{report.noise_floor:.6g}"),
                               ("obstruction", report.obstruction)]))
    return EXIT_VIOLATION if report.obstruction else EXIT_OK


def _run_realize(cfg: RunConfig) -> int:
    m = lio.amalgam_from_dict(lio.read_json(cfg.amalgam))
    if m.mode == "partial":
        sq, groups = realize_partial(m)
    else:
        sq, groups = realize_amalgamation(m)
    payload = lio.square_to_csv(sq) if _fmt(cfg) == "csv" else lio.dumps(lio.square_to_dict(sq, groups))
    _emit(cfg, payload)
    return EXIT_OK


def _run_complete(cfg: RunConfig) -> int:
    p = lio.read_square_csv(cfg.square)
    sq = complete_partial(p)
    payload = lio.square_to_csv(sq) if _fmt(cfg) == "csv" else lio.dumps(lio.square_to_dict(sq))
    _emit(cfg, payload)
    return EXIT_OK


def _run_tensor(cfg: RunConfig) -> int:
    model = model_from_spec(cfg.group)
    if model.kind == "finite":
        p = singleton_partition(model)
    else:
        window = CompactWindow(model, parse_box(cfg.window)) if cfg.window else None
        p = lattice_partition(model, cfg.cells or 4, window)
    if cfg.samples:
        w = w_montecarlo(p, samples=cfg.samples, seed=cfg.seed)
    else:
        w = w_exact(p)
    _emit(cfg, lio.dumps(lio.tensor_to_dict(w)))
    return EXIT_OK


def run(cfg: RunConfig) -> int:
    """Execute one validated configuration and return the exit status."""
    log.debug("running %s with %d thread(s)", cfg.command, cfg.threads)
    if cfg.command in ("approximate", "loop"):
        return _run_approximate(cfg, cfg.command == "loop")
    if cfg.command == "probe":
        return _run_probe(cfg)
    if cfg.command == "realize":
        return _run_realize(cfg)
    if cfg.command == "complete":
        return _run_complete(cfg)
    return _run_tensor(cfg)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(args)
        return run(cfg)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_ERROR
    except Exception as exc:  # every failure becomes exit status 1
        log.debug("failure", exc_info=True)
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
