"""Client state machines, advanced one RMW response at a time by the simulator.

A machine never blocks: begin() returns the first round of RMWs to trigger,
and deliver() consumes one response and either keeps waiting, starts the next
round (Wants), or finishes the operation (Return). The simulator guarantees
deliver() is only called with responses belonging to the machine's current
(operation, round); stale responses from earlier rounds are dropped at the
engine level, matching the protocols' assumption that only current-invocation
responses are received.

Machines expose held_write_ts, the timestamps of chunks currently sitting in
their local round state — what the accounting counts as "stored in another
correct client".

This module also houses the two demo client programs: the append-only
strawman writer whose storage grows without bound under the starving
scheduler, and the raw-bit generic client used to drive that scheduler's
bookkeeping in isolation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

from .codec import Value, decode, encode
from .core import READ, TS_ZERO, WRITE, Chunk, TimeStamp


@dataclass(frozen=True)
class RmwSpec:
    """One RMW the client wants triggered: target object, kind, payload."""

    obj: int
    kind: str  # "read" | "update" | "gc" | "append" | "store"
    payload: tuple = ()


class Wants(NamedTuple):
    """Start a new round of RMWs (ts set when the round fixes the write ts)."""

    specs: tuple
    label: str
    ts: Optional[TimeStamp] = None


class Return(NamedTuple):
    """Operation completes: value is the read result (None for writes)."""

    value: Optional[Value]
    ts: Optional[TimeStamp]


class Capped(NamedTuple):
    """A read exhausted max_read_rounds; the operation stays outstanding."""

    rounds: int


class ClientMachine:
    """Shared round bookkeeping for quorum-based protocols."""

    def __init__(self, cid: int, n: int, f: int, k: int, data_bytes: int):
        self.cid = cid
        self.n = n
        self.f = f
        self.k = k
        self.data_bytes = data_bytes
        self.needed = n - f
        self.op_id: Optional[int] = None
        self.op_kind: Optional[str] = None
        self.round_no = 0
        self.acked: set = set()
        self.held_write_ts: set = set()

    @property
    def idle(self) -> bool:
        return self.op_id is None

    def _reset_op(self, op_id: int, kind: str, value) -> None:
        self.op_id = op_id
        self.op_kind = kind
        self.value = value
        self.round_no = 0
        self.acked = set()
        self.held_write_ts = set()

    def _new_round(self, specs, label, ts=None) -> Wants:
        self.round_no += 1
        self.acked = set()
        return Wants(tuple(specs), label, ts)

    def _reads_all(self) -> list:
        return [RmwSpec(i, "read") for i in range(1, self.n + 1)]

    def _finish(self, value, ts) -> Return:
        self.op_id = None
        self.op_kind = None
        self.held_write_ts = set()
        return Return(value, ts)

    def v0(self) -> Value:
        return Value(bytes(self.data_bytes))

    def begin(self, op_id: int, kind: str, value: Optional[Value]):
        raise NotImplementedError

    def deliver(self, obj: int, result):
        raise NotImplementedError


def best_decodable(chunks, k: int):
    """Max timestamp holding >= k distinct pieces, with those pieces.

    Returns (ts, pieces) or None. Distinct chunks of one timestamp always
    carry distinct piece indices, so any >= k group is decodable.
    """
    by_ts: dict = {}
    for c in chunks:
        by_ts.setdefault(c.ts, set()).add(c.piece)
    candidates = [ts for ts, pieces in by_ts.items() if len(pieces) >= k]
    if not candidates:
        return None
    best = max(candidates)
    return best, sorted(by_ts[best])


class StrawmanClient(ClientMachine):
    """Safe-protocol writer that appends instead of overwriting.

    The write returns after n-f append acks, exactly like the safe writer;
    what changes is the base object transition (nothing is ever deleted), so
    concurrent stalled writers accumulate one piece each forever.
    """

    def begin(self, op_id, kind, value):
        self._reset_op(op_id, kind, value)
        self.read_chunks: set = set()
        if kind == WRITE:
            self.wset = tuple(encode(value, self.n, self.k))
        return self._new_round(self._reads_all(), "readValue")

    def deliver(self, obj, result):
        if self.round_no == 1:  # readValue round
            self.read_chunks |= set(result.chunks)
            self.held_write_ts = {c.ts for c in self.read_chunks if c.ts != TS_ZERO}
            self.acked.add(obj)
            if len(self.acked) < self.needed:
                return None
            if self.op_kind == READ:
                found = best_decodable(self.read_chunks, self.k)
                if found is None:
                    return self._finish(self.v0(), TS_ZERO)
                ts, pieces = found
                return self._finish(decode(pieces, self.n, self.k), ts)
            num = max((c.ts.num for c in self.read_chunks), default=0)
            self.ts = TimeStamp(num + 1, self.cid)
            self.held_write_ts = set()
            specs = [
                RmwSpec(i, "append", (self.wset[i - 1], self.ts))
                for i in range(1, self.n + 1)
            ]
            return self._new_round(specs, "append", ts=self.ts)
        self.acked.add(obj)
        if len(self.acked) >= self.needed:
            return self._finish(None, self.ts)
        return None


class GenericClient(ClientMachine):
    """Raw-bit write program for scheduler demos.

    The script is a list of (obj, bits, overwrite) store intents; the write
    triggers them all and never returns, keeping the client in C(t) so the
    adversary's set bookkeeping can be exercised directly.
    """

    def begin(self, op_id, kind, value):
        self._reset_op(op_id, kind, value)
        self.ts = TimeStamp(1, self.cid)
        specs = [
            RmwSpec(obj, "store", (self.ts, bits, overwrite))
            for obj, bits, overwrite in self.intents
        ]
        return self._new_round(specs, "store", ts=self.ts)

    def deliver(self, obj, result):
        self.acked.add(obj)
        return None
