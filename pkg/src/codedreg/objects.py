"""Base object states and their atomic RMW transition functions.

All states are frozen dataclasses: an RMW is a pure transition old -> new
applied by the simulator at a single step, and a read RMW simply returns the
(immutable) state. Transitions assert the per-object invariants on every
application: storedTS never decreases, |V_p| <= k with at most one piece per
write, V_f holds chunks of at most one timestamp, and V_p only ever holds the
object's own piece index.

Storage accounting is idealized: a chunk costs exactly D/k bits (a full
replica of k chunks therefore costs D); metadata (indices, timestamps, the
codec's length header) is excluded. write_bits() attributes every stored bit
to the write that stored it, keyed by the chunk timestamp — the accounting
rule the lower-bound machinery relies on. The fictional initial write
(TS_ZERO) is excluded from attribution.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .codec import Piece, Value, encode, ideal_piece_bits
from .core import TS_ZERO, Chunk, TimeStamp, ts_less, ts_max


@dataclass(frozen=True)
class SafeObject:
    """Safe-protocol base object: exactly one chunk."""

    index: int
    chunk: Chunk


@dataclass(frozen=True)
class RegularObject:
    """Regular-protocol base object: storedTS plus piece set and replica slot."""

    index: int
    stored_ts: TimeStamp
    vp: frozenset  # coded pieces of distinct writes, own index only, <= k
    vf: frozenset  # full replica of a single write (k chunks), or 1 after GC


@dataclass(frozen=True)
class StrawmanObject:
    """Append-only chunk set for the unbounded-storage strawman."""

    index: int
    chunks: frozenset


@dataclass(frozen=True)
class GenericObject:
    """Raw bit store for scheduler demos: (write ts -> stored bits), sorted."""

    index: int
    bits_by_write: tuple


def initial_states(protocol: str, n: int, k: int, v0: Value) -> dict:
    """Initial configuration: object i holds piece i of v0 at TS_ZERO."""
    if protocol == "generic":
        return {i: GenericObject(i, ()) for i in range(1, n + 1)}
    pieces = encode(v0, n, k)
    states = {}
    for i in range(1, n + 1):
        chunk = Chunk(TS_ZERO, pieces[i - 1])
        if protocol == "safe":
            states[i] = SafeObject(i, chunk)
        elif protocol == "regular":
            states[i] = RegularObject(i, TS_ZERO, frozenset({chunk}), frozenset())
        elif protocol == "strawman":
            states[i] = StrawmanObject(i, frozenset({chunk}))
        else:
            raise ValueError(f"unknown protocol {protocol!r}")
    return states


# ---------------------------------------------------------------------------
# Transitions


def safe_update(state: SafeObject, piece: Piece, ts: TimeStamp) -> SafeObject:
    """Overwrite the stored chunk iff ts is strictly newer."""
    assert piece.index == state.index
    if ts_less(state.chunk.ts, ts):
        return SafeObject(state.index, Chunk(ts, piece))
    return state


def regular_update(
    state: RegularObject,
    write_set: tuple,
    ts: TimeStamp,
    stored_ts_in: TimeStamp,
    k: int,
) -> RegularObject:
    """Update round RMW: store a piece, or a full replica once V_p is full.

    Order matters and follows the protocol exactly: the staleness early-exit
    first, then the capacity check (which also drops pieces older than the
    writer's storedTS), then the replica slot, and finally the storedTS
    propagation (skipped entirely on early exit).
    """
    i = state.index
    if not ts_less(state.stored_ts, ts):  # ts <= storedTS: stale write
        return state
    vp, vf = state.vp, state.vf
    if len(vp) < k:
        mine = Chunk(ts, write_set[i - 1])
        vp = frozenset(c for c in vp if not ts_less(c.ts, stored_ts_in)) | {mine}
    elif not vf or any(ts_less(c.ts, ts) for c in vf):
        vf = frozenset(Chunk(ts, write_set[j]) for j in range(k))
    new = RegularObject(i, ts_max(state.stored_ts, stored_ts_in), vp, vf)
    _check_regular(state, new, k)
    return new


def regular_gc(
    state: RegularObject, write_set: tuple, ts: TimeStamp, k: int
) -> RegularObject:
    """GC round RMW: drop chunks older than ts, shrink own replica to 1 piece."""
    i = state.index
    vp = frozenset(c for c in state.vp if not ts_less(c.ts, ts))
    vf = frozenset(c for c in state.vf if not ts_less(c.ts, ts))
    if any(c.ts == ts for c in vf):
        vf = frozenset({Chunk(ts, write_set[i - 1])})
    new = RegularObject(i, ts_max(state.stored_ts, ts), vp, vf)
    _check_regular(state, new, k)
    return new


def strawman_append(state: StrawmanObject, piece: Piece, ts: TimeStamp) -> StrawmanObject:
    """Append-only variant of safe_update: nothing is ever overwritten."""
    assert piece.index == state.index
    return StrawmanObject(state.index, state.chunks | {Chunk(ts, piece)})


def generic_store(
    state: GenericObject, write_ts: TimeStamp, bits: int, overwrite: bool
) -> GenericObject:
    """Raw store RMW: add bits for one write, optionally erasing all others."""
    table = dict(state.bits_by_write)
    if overwrite:
        table = {w: b for w, b in table.items() if w == write_ts}
    table[write_ts] = table.get(write_ts, 0) + bits
    return GenericObject(state.index, tuple(sorted(table.items())))


def _check_regular(old: RegularObject, new: RegularObject, k: int) -> None:
    assert not ts_less(new.stored_ts, old.stored_ts), "storedTS went backwards"
    assert len(new.vp) <= k, "V_p over capacity"
    assert len(new.vf) <= k, "V_f over capacity"
    assert len({c.ts for c in new.vp}) == len(new.vp), "duplicate write in V_p"
    assert len({c.ts for c in new.vf}) <= 1, "V_f mixes timestamps"
    assert all(c.piece.index == new.index for c in new.vp), "foreign piece in V_p"


# ---------------------------------------------------------------------------
# Accounting


def chunk_count(state) -> int:
    if isinstance(state, SafeObject):
        return 1
    if isinstance(state, RegularObject):
        return len(state.vp) + len(state.vf)
    if isinstance(state, StrawmanObject):
        return len(state.chunks)
    raise TypeError(f"no chunk count for {type(state).__name__}")


def storage_bits(state, data_bits: int, k: int) -> Fraction:
    """Idealized stored bits: chunks x D/k, or the raw sum for generic stores."""
    if isinstance(state, GenericObject):
        return Fraction(sum(b for _, b in state.bits_by_write))
    return chunk_count(state) * ideal_piece_bits(data_bits, k)


def write_bits(state, data_bits: int, k: int) -> dict:
    """Bits stored per client write (keyed by timestamp; TS_ZERO excluded)."""
    if isinstance(state, GenericObject):
        return {w: Fraction(b) for w, b in state.bits_by_write if w != TS_ZERO}
    if isinstance(state, SafeObject):
        chunks = [state.chunk]
    elif isinstance(state, RegularObject):
        chunks = list(state.vp) + list(state.vf)
    elif isinstance(state, StrawmanObject):
        chunks = list(state.chunks)
    else:
        raise TypeError(f"no attribution for {type(state).__name__}")
    piece_bits = ideal_piece_bits(data_bits, k)
    out: dict = {}
    for c in chunks:
        if c.ts == TS_ZERO:
            continue
        out[c.ts] = out.get(c.ts, Fraction(0)) + piece_bits
    return out
