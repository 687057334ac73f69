"""Check records, collection helpers and serialization."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .fields import render
from .states import State

SCHEMA_VERSION = 1

PASS = "pass"
FAIL = "fail"
SKIPPED = "skipped-excluded-parameter"


@dataclass
class CheckRow:
    suite: str
    check: str
    identity: str
    field: str
    truncation: int | None
    params: dict
    status: str
    witness: str | None = None
    seconds: float = 0.0

    def record(self, timings: bool = False) -> dict:
        out = {
            "schema": SCHEMA_VERSION,
            "suite": self.suite,
            "check": self.check,
            "identity": self.identity,
            "field": self.field,
            "truncation": self.truncation,
            "params": {k: _plain(v) for k, v in sorted(self.params.items())},
            "status": self.status,
            "witness": self.witness,
        }
        if timings:
            out["seconds"] = round(self.seconds, 3)
        return out

    def line(self) -> str:
        text = f"[{self.status.upper():4}] {self.suite} :: {self.check}  ({self.identity})"
        if self.witness and self.status == FAIL:
            text += f"\n        witness: {self.witness}"
        return text


def _plain(v):
    if isinstance(v, (int, str, bool)) or v is None:
        return v
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return render(v)


@dataclass
class CheckReport:
    """All rows produced by one suite run."""

    suite: str
    field: str = "Q"
    truncation: int | None = None
    rows: list = dc_field(default_factory=list)

    # recording -----------------------------------------------------------
    def _add(self, check, identity, ok, witness, params, started, status=None):
        if status is None:
            status = PASS if ok else FAIL
        if status == FAIL and not witness:
            witness = "identity does not hold"
        row = CheckRow(self.suite, check, identity, self.field, self.truncation,
                       dict(params or {}), status, witness if status == FAIL else None,
                       time.perf_counter() - started)
        self.rows.append(row)
        return row

    def states(self, check: str, identity: str, lhs: State, rhs: State, params=None, started=None):
        """Record lhs == rhs; the witness is the rendered difference."""
        started = time.perf_counter() if started is None else started
        diff = lhs - rhs
        return self._add(check, identity, not diff, diff.render() if diff else None, params, started)

    def zero(self, check: str, identity: str, value: State, params=None, started=None):
        started = time.perf_counter() if started is None else started
        return self._add(check, identity, not value, value.render() if value else None, params, started)

    def scalars(self, check: str, identity: str, lhs, rhs, params=None, started=None):
        started = time.perf_counter() if started is None else started
        ok = lhs == rhs
        witness = None if ok else f"{render(lhs)} != {render(rhs)}"
        return self._add(check, identity, ok, witness, params, started)

    def truth(self, check: str, identity: str, ok: bool, witness: str | None = None, params=None,
              started=None):
        started = time.perf_counter() if started is None else started
        return self._add(check, identity, bool(ok), witness, params, started)

    def skipped(self, check: str, identity: str, reason: str, params=None):
        return self._add(check, identity, True, reason, params, time.perf_counter(), SKIPPED)

    def extend(self, other: "CheckReport"):
        self.rows.extend(other.rows)

    # summary -------------------------------------------------------------
    @property
    def failed(self) -> list:
        return [r for r in self.rows if r.status == FAIL]

    @property
    def ok(self) -> bool:
        return bool(self.rows) and not self.failed

    def ndjson(self, timings: bool = False) -> str:
        return "".join(json.dumps(r.record(timings), sort_keys=True, ensure_ascii=False) + "\n"
                       for r in self.rows)

    def text(self) -> str:
        return "\n".join(r.line() for r in self.rows)


def parse_ndjson(text: str) -> list[dict]:
    return [json.loads(line) for line in text.splitlines() if line.strip()]
