"""FW-terminating strongly regular register client.

A write runs three quorum rounds: readValue to learn the highest storedTS and
pick a timestamp above everything read, update to place pieces (or, once an
object's piece set is full, a whole replica), and GC to delete older chunks
and shrink its own replica to a single piece. A read repeats readValue rounds
until some timestamp at least as high as the quorum's storedTS has k matching
pieces; returning anything older could predate a completed write and break
regularity, which is exactly why reads are only FW-terminating.

max_read_rounds bounds the retry loop for tests that intentionally starve a
reader; the default None never gives up.
"""

from __future__ import annotations

from typing import Optional

from .clients import Capped, ClientMachine, RmwSpec
from .codec import decode, encode
from .core import READ, TS_ZERO, WRITE, TimeStamp, ts_max


class RegularClient(ClientMachine):
    ROUND_LABELS = {1: "readValue", 2: "update", 3: "gc"}

    def __init__(self, cid, n, f, k, data_bytes, max_read_rounds: Optional[int] = None):
        super().__init__(cid, n, f, k, data_bytes)
        self.max_read_rounds = max_read_rounds

    def begin(self, op_id, kind, value):
        self._reset_op(op_id, kind, value)
        self.read_rounds = 0
        if kind == WRITE:
            self.wset = tuple(encode(value, self.n, self.k))
        return self._start_read_value()

    def _start_read_value(self):
        self.read_set: set = set()
        self.stored_ts = TS_ZERO
        self.read_rounds += 1
        return self._new_round(self._reads_all(), "readValue")

    def deliver(self, obj, result):
        if self.op_kind == WRITE:
            return self._deliver_write(obj, result)
        return self._deliver_read(obj, result)

    def _collect(self, obj, result):
        self.read_set |= result.vp | result.vf
        self.stored_ts = ts_max(self.stored_ts, result.stored_ts)
        self.held_write_ts = {c.ts for c in self.read_set if c.ts != TS_ZERO}
        self.acked.add(obj)
        return len(self.acked) >= self.needed

    def _deliver_write(self, obj, result):
        if self.round_no % 3 == 1:  # readValue
            if not self._collect(obj, result):
                return None
            num = max(
                self.stored_ts.num,
                max((c.ts.num for c in self.read_set), default=0),
            )
            self.ts = TimeStamp(num + 1, self.cid)
            self.held_write_ts = set()
            specs = [
                RmwSpec(i, "update", (self.wset, self.ts, self.stored_ts))
                for i in range(1, self.n + 1)
            ]
            return self._new_round(specs, "update", ts=self.ts)
        if self.round_no % 3 == 2:  # update
            self.acked.add(obj)
            if len(self.acked) < self.needed:
                return None
            specs = [
                RmwSpec(i, "gc", (self.wset, self.ts)) for i in range(1, self.n + 1)
            ]
            return self._new_round(specs, "gc")
        self.acked.add(obj)  # gc
        if len(self.acked) >= self.needed:
            return self._finish(None, self.ts)
        return None

    def _deliver_read(self, obj, result):
        if not self._collect(obj, result):
            return None
        found = self._decodable_at_or_above(self.stored_ts)
        if found is not None:
            ts, pieces = found
            return self._finish(decode(pieces, self.n, self.k), ts)
        if self.max_read_rounds is not None and self.read_rounds >= self.max_read_rounds:
            return Capped(self.read_rounds)
        return self._start_read_value()

    def _decodable_at_or_above(self, floor: TimeStamp):
        by_ts: dict = {}
        for c in self.read_set:
            if c.ts >= floor:
                by_ts.setdefault(c.ts, set()).add(c.piece)
        candidates = [ts for ts, pieces in by_ts.items() if len(pieces) >= self.k]
        if not candidates:
            return None
        best = max(candidates)
        return best, sorted(by_ts[best])
