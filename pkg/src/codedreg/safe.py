"""Wait-free strongly safe register client.

Writes encode the value, read n-f objects to pick a fresh timestamp, then
push one piece per object and return after n-f acks. Reads collect n-f
snapshots and decode any timestamp with >= k matching pieces (the newest such
timestamp — the protocol's nondeterministic choice is refined to max), falling
back to the initial value when no timestamp is decodable, which can only
happen under concurrent writes and is allowed by safe semantics.

Total storage is constant at n pieces: every object always holds exactly one
chunk, crash or no crash.
"""

from __future__ import annotations

from .clients import ClientMachine, Return, RmwSpec, best_decodable
from .codec import decode, encode
from .core import READ, TS_ZERO, WRITE, TimeStamp


class SafeClient(ClientMachine):
    ROUND_READ = 1
    ROUND_UPDATE = 2

    def begin(self, op_id, kind, value):
        self._reset_op(op_id, kind, value)
        self.read_chunks: set = set()
        if kind == WRITE:
            self.wset = tuple(encode(value, self.n, self.k))
        return self._new_round(self._reads_all(), "readValue")

    def deliver(self, obj, result):
        if self.round_no == self.ROUND_READ:
            self.read_chunks.add(result.chunk)
            self.held_write_ts = {c.ts for c in self.read_chunks if c.ts != TS_ZERO}
            self.acked.add(obj)
            if len(self.acked) < self.needed:
                return None
            if self.op_kind == READ:
                return self._read_result()
            num = max(c.ts.num for c in self.read_chunks)
            self.ts = TimeStamp(num + 1, self.cid)
            self.held_write_ts = set()
            specs = [
                RmwSpec(i, "update", (self.wset[i - 1], self.ts))
                for i in range(1, self.n + 1)
            ]
            return self._new_round(specs, "update", ts=self.ts)
        self.acked.add(obj)
        if len(self.acked) >= self.needed:
            return self._finish(None, self.ts)
        return None

    def _read_result(self) -> Return:
        found = best_decodable(self.read_chunks, self.k)
        if found is None:
            return self._finish(self.v0(), TS_ZERO)
        ts, pieces = found
        return self._finish(decode(pieces, self.n, self.k), ts)
