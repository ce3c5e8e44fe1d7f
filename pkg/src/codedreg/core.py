"""Shared vocabulary: timestamps, chunks, operation records, histories.

Logical time is the simulator's global action index; there are no wall clocks.
Client id 0 is reserved for the fictional writer of the initial value, so
every timestamp picked by a real client compares strictly greater than
TS_ZERO. Operation precedence is the usual interval order on
(invoke_time, return_time], with outstanding operations preceding nothing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .codec import Value

WRITE = "write"
READ = "read"


class TimeStamp(NamedTuple):
    """Lexicographically ordered (sequence number, client id) pair."""

    num: int
    client: int


TS_ZERO = TimeStamp(0, 0)


def ts_less(a: TimeStamp, b: TimeStamp) -> bool:
    """Strict lexicographic order, num first, client id as tiebreak."""
    return (a.num, a.client) < (b.num, b.client)


def ts_max(a: TimeStamp, b: TimeStamp) -> TimeStamp:
    return b if ts_less(a, b) else a


class Chunk(NamedTuple):
    """A timestamped coded piece, the unit every base object stores."""

    ts: TimeStamp
    piece: "Piece"  # codedreg.codec.Piece


@dataclass
class OperationRecord:
    """One high-level register operation as recorded in a run's history.

    value is the written value for writes and the returned value for reads
    (None while a read is outstanding). ts is the protocol annotation: the
    timestamp a write chose, or the timestamp whose decode a read returned
    (TS_ZERO when a read returned the initial value). rounds collects
    (round_no, step, label) diagnostics.
    """

    op_id: int
    client: int
    kind: str
    value: Optional[Value]
    invoke_time: int
    return_time: Optional[int] = None
    ts: Optional[TimeStamp] = None
    rounds: list = field(default_factory=list)

    @property
    def returned(self) -> bool:
        return self.return_time is not None


@dataclass
class History:
    """Recorded operations of one run plus the run metadata checkers need.

    meta carries the run parameters (protocol, n, f, k, policy, crash info)
    so a history file is checkable on its own.
    """

    ops: list
    steps: int
    data_bytes: int
    crashed_clients: frozenset = frozenset()
    truncated: bool = False
    capped_readers: frozenset = frozenset()
    meta: dict = field(default_factory=dict)

    def v0(self) -> Value:
        return Value(bytes(self.data_bytes))

    def writes(self) -> list:
        return [op for op in self.ops if op.kind == WRITE]

    def reads(self) -> list:
        return [op for op in self.ops if op.kind == READ]

    # -- text format -------------------------------------------------------
    # One JSON object per line: a header line, then one line per operation
    # in op_id order. Values are hex payloads, timestamps [num, client] pairs.

    FORMAT = "codedreg-history/1"

    def to_text(self) -> str:
        lines = [
            json.dumps(
                {
                    "format": self.FORMAT,
                    "steps": self.steps,
                    "data_bytes": self.data_bytes,
                    "crashed_clients": sorted(self.crashed_clients),
                    "truncated": self.truncated,
                    "capped_readers": sorted(self.capped_readers),
                    "meta": self.meta,
                },
                sort_keys=True,
            )
        ]
        for op in sorted(self.ops, key=lambda o: o.op_id):
            lines.append(
                json.dumps(
                    {
                        "op_id": op.op_id,
                        "client": op.client,
                        "kind": op.kind,
                        "value": op.value.payload.hex() if op.value is not None else None,
                        "invoke": op.invoke_time,
                        "return": op.return_time,
                        "ts": list(op.ts) if op.ts is not None else None,
                        "rounds": [list(r) for r in op.rounds],
                    },
                    sort_keys=True,
                )
            )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "History":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty history file")
        header = json.loads(lines[0])
        if header.get("format") != cls.FORMAT:
            raise ValueError(f"unknown history format {header.get('format')!r}")
        ops = []
        for ln in lines[1:]:
            rec = json.loads(ln)
            ops.append(
                OperationRecord(
                    op_id=rec["op_id"],
                    client=rec["client"],
                    kind=rec["kind"],
                    value=Value(bytes.fromhex(rec["value"])) if rec["value"] is not None else None,
                    invoke_time=rec["invoke"],
                    return_time=rec["return"],
                    ts=TimeStamp(*rec["ts"]) if rec["ts"] is not None else None,
                    rounds=[tuple(r) for r in rec["rounds"]],
                )
            )
        return cls(
            ops=ops,
            steps=header["steps"],
            data_bytes=header["data_bytes"],
            crashed_clients=frozenset(header["crashed_clients"]),
            truncated=header["truncated"],
            capped_readers=frozenset(header["capped_readers"]),
            meta=header.get("meta", {}),
        )


def precedes(a: OperationRecord, b: OperationRecord) -> bool:
    """True iff a returned before b was invoked (strict precedence)."""
    return a.return_time is not None and a.return_time < b.invoke_time
