"""Command-line entry point: ``verify <suite> [options]``."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import replace
from fractions import Fraction

from .report import FAIL, SKIPPED
from .suites import SUITES, Options, expand, run_suite

CONFIG_ENV = "FREEFIELD_CONFIG"
CONFIG_KEYS = ("truncation", "k_samples", "excluded_k", "report_format", "seed", "suites")


class ConfigError(ValueError):
    pass


def _nonneg_int(key, text):
    try:
        v = int(text)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {text!r}") from None
    if v < 0:
        raise ConfigError(f"{key}: must be non-negative")
    return v


def parse_config(text: str, base: Options | None = None) -> Options:
    """Read ``key = value`` lines; blank lines and ``#`` comments are ignored."""
    opts = base or Options()
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)
        if key in ("truncation", "k_samples", "seed"):
            opts = replace(opts, **{key: _nonneg_int(key, value)})
        elif key == "excluded_k":
            try:
                ks = tuple(Fraction(s.strip()) for s in value.split(",") if s.strip())
            except (ValueError, ZeroDivisionError):
                raise ConfigError(f"excluded_k: expected rationals, got {value!r}") from None
            opts = replace(opts, excluded_k=ks)
        elif key == "report_format":
            if value not in ("text", "ndjson"):
                raise ConfigError(f"report_format: expected text or ndjson, got {value!r}")
            opts = replace(opts, report_format=value)
        else:
            names = tuple(s.strip() for s in value.split(",") if s.strip())
            bad = [n for n in names if n != "all" and n not in SUITES]
            if bad:
                raise ConfigError(f"suites: unknown suite {bad[0]!r}")
            opts = replace(opts, suites=names)
    return opts


def load_config(path: str | None) -> Options:
    if path is None:
        return Options()
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="verify",
        description="Verify free-field realizations of affine vertex algebras and their modules.")
    ap.add_argument("suite", nargs="*", help="suite ids, or 'all'; 'list' prints the known ids")
    ap.add_argument("--truncation", type=int, metavar="N")
    ap.add_argument("--k-samples", type=int, metavar="M")
    ap.add_argument("--field", choices=("symbolic-k", "samples"))
    ap.add_argument("--report", metavar="PATH", help="write an NDJSON report to PATH")
    ap.add_argument("--format", choices=("text", "ndjson"))
    ap.add_argument("--seed", type=int, metavar="S")
    ap.add_argument("--config", metavar="PATH", help=f"config file (default: ${CONFIG_ENV})")
    ap.add_argument("--timings", action="store_true", help="include per-row seconds in the output")
    return ap


def resolve(args) -> tuple[Options, list[str]]:
    opts = load_config(args.config or os.environ.get(CONFIG_ENV) or None)
    for flag, key in (("truncation", "truncation"), ("k_samples", "k_samples"), ("seed", "seed")):
        v = getattr(args, flag)
        if v is not None:
            if v < 0:
                raise ConfigError(f"--{flag.replace('_', '-')} must be non-negative")
            opts = replace(opts, **{key: v})
    if args.field is not None:
        opts = replace(opts, field=args.field)
    if args.format is not None:
        opts = replace(opts, report_format=args.format)
    names = args.suite or list(opts.suites)
    if not names:
        raise ConfigError("no suite given")
    try:
        return opts, expand(names)
    except KeyError as exc:
        raise ConfigError(f"unknown suite {exc.args[0]!r}; try 'verify list'") from None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.suite == ["list"]:
        print("\n".join(SUITES))
        return 0
    try:
        opts, names = resolve(args)
    except ConfigError as exc:
        print(f"verify: error: {exc}", file=sys.stderr)
        return 2

    rows = []
    out = sys.stdout
    for name in names:
        t0 = time.perf_counter()
        rep = run_suite(name, opts)
        rows.extend(rep.rows)
        if opts.report_format == "ndjson":
            out.write(rep.ndjson(args.timings))
        else:
            if rep.text():
                out.write(rep.text() + "\n")
            tail = f" in {time.perf_counter() - t0:.2f}s" if args.timings else ""
            out.write(f"# {name}: {sum(r.status != FAIL for r in rep.rows)}/{len(rep.rows)} ok{tail}\n")
        out.flush()

    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            for r in rows:
                fh.write(json.dumps(r.record(args.timings), sort_keys=True, ensure_ascii=False) + "\n")

    n_fail = sum(r.status == FAIL for r in rows)
    n_skip = sum(r.status == SKIPPED for r in rows)
    if opts.report_format == "text":
        print(f"# total: {len(rows)} rows, {n_fail} failed, {n_skip} skipped")
    return 1 if n_fail else 0


if __name__ == "__main__":
    sys.exit(main())
