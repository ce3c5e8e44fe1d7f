"""Offline verification of histories and traces.

Safety checks come in two modes. Witness mode validates the protocol
annotations: the timestamp order is the candidate write linearization
(exactly the order the correctness argument constructs), and each read is
checked for a legal insertion point next to the write carrying its returned
timestamp. Brute-force mode ignores the timestamp order and searches all
write linearizations (inclusion choices for outstanding writes times linear
extensions of precedence); it is the independent oracle for small histories
and is capped at BRUTE_WRITE_CAP writes. When a read carries a timestamp
annotation both modes pin it to that write; bare histories fall back to value
matching.

Reads returning the initial value are modeled as reading a fictional write at
the origin: their legal insertion point is before every write.

Storage audits work on idealized bit counts only (exact rationals, D/k per
chunk); the codec's on-wire overhead never enters bound math.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .codec import ideal_piece_bits
from .core import READ, TS_ZERO, WRITE, History, OperationRecord, precedes
from .objects import RegularObject

BRUTE_WRITE_CAP = 8

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class CheckReport:
    prop: str
    verdict: str
    witness: Optional[str] = None
    mode: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.verdict == PASS

    def line(self) -> str:
        out = f"{self.verdict.upper():12s} {self.prop}"
        if self.witness:
            out += f"  [{self.witness}]"
        return out


def rel_writes(h: History, rd: OperationRecord) -> list:
    """All writes relevant to rd: those rd does not precede."""
    return [w for w in h.writes() if not precedes(rd, w)]


def max_write_concurrency(h: History) -> int:
    """Max simultaneously outstanding writes; unreturned writes count forever."""
    events = []
    for w in h.writes():
        events.append((w.invoke_time, 1))
        if w.return_time is not None:
            events.append((w.return_time, -1))
    depth = best = 0
    for _, delta in sorted(events):
        depth += delta
        best = max(best, depth)
    return best


# ---------------------------------------------------------------------------
# Linearization machinery


def _ts_writes(h: History) -> list:
    return sorted((w for w in h.writes() if w.ts is not None), key=lambda w: w.ts)


def _order_violation(sigma) -> Optional[str]:
    for w1, w2 in itertools.combinations(sigma, 2):  # sigma sorted by ts
        if precedes(w2, w1):
            return f"write op{w2.op_id} precedes op{w1.op_id} but has smaller ts"
    return None


def _pinned_write(h: History, rd: OperationRecord):
    """The write rd claims to have read: ts-matched, value-matched, or v0.

    Returns ("v0", None), ("write", w) or ("bad", reason).
    """
    if rd.ts is not None:
        if rd.ts == TS_ZERO:
            if rd.value != h.v0():
                return "bad", f"read op{rd.op_id} returned non-initial value at ts 0"
            return "v0", None
        hits = [w for w in h.writes() if w.ts == rd.ts]
        if not hits:
            return "bad", f"read op{rd.op_id} returned unknown ts {tuple(rd.ts)}"
        w = hits[0]
        if w.value != rd.value:
            return "bad", f"read op{rd.op_id} value does not match write op{w.op_id}"
        return "write", w
    if rd.value == h.v0():
        return "v0", None
    hits = [w for w in h.writes() if w.value == rd.value]
    if not hits:
        return "bad", f"read op{rd.op_id} returned a never-written value"
    return "candidates", hits


def _insertable(h: History, perm, rd: OperationRecord) -> bool:
    """Can rd be inserted into the write order perm legally?

    Legal: all writes preceding rd sit before the insertion point, all writes
    rd precedes sit after it, and the write just before the point (or the
    initial value for position 0) supplies rd's value — pinned to rd's
    annotated write when present.
    """
    max_p = -1
    min_f = len(perm)
    for idx, w in enumerate(perm):
        if precedes(w, rd):
            max_p = max(max_p, idx)
        elif precedes(rd, w):
            min_f = min(min_f, idx)
    if max_p >= min_f:
        return False
    kind, pinned = _pinned_write(h, rd)
    if kind == "bad":
        return False
    for pos in range(max_p + 1, min_f + 1):
        before = perm[pos - 1] if pos > 0 else None
        if kind == "v0":
            if before is None:
                return True
        elif kind == "write":
            if before is pinned:
                return True
        else:  # unannotated: any value-matching candidate
            if before is not None and before.value == rd.value:
                return True
    return False


def _linear_extensions(items):
    """All orderings of items consistent with operation precedence."""
    items = list(items)
    if not items:
        yield ()
        return
    for i, x in enumerate(items):
        rest = items[:i] + items[i + 1 :]
        if any(precedes(y, x) for y in rest):
            continue
        for tail in _linear_extensions(rest):
            yield (x,) + tail


def _write_orders(h: History):
    """(subset, extension) candidates: completed writes plus any subset of
    outstanding ones, in every precedence-respecting order."""
    writes = h.writes()
    if len(writes) > BRUTE_WRITE_CAP:
        raise ValueError(f"brute-force capped at {BRUTE_WRITE_CAP} writes, got {len(writes)}")
    completed = [w for w in writes if w.returned]
    outstanding = [w for w in writes if not w.returned]
    for r in range(len(outstanding) + 1):
        for extra in itertools.combinations(outstanding, r):
            yield from _linear_extensions(completed + list(extra))


def _has_concurrent_write(h: History, rd: OperationRecord) -> bool:
    return any(
        not precedes(w, rd) and not precedes(rd, w) for w in h.writes()
    )


# ---------------------------------------------------------------------------
# Safety checks


def check_strongly_safe(h: History, mode: str = "witness") -> CheckReport:
    """One writes-only linearization; reads without concurrent writes insert."""
    prop = "strongly-safe"
    constrained = [
        rd for rd in h.reads() if rd.returned and not _has_concurrent_write(h, rd)
    ]
    if mode == "witness":
        sigma = _ts_writes(h)
        bad = _order_violation(sigma)
        if bad:
            return CheckReport(prop, FAIL, bad, mode)
        for rd in constrained:
            if not _insertable(h, tuple(sigma), rd):
                return CheckReport(prop, FAIL, f"read op{rd.op_id} has no legal position", mode)
        return CheckReport(prop, PASS, None, mode)
    if mode == "brute":
        for perm in _write_orders(h):
            if all(_insertable(h, perm, rd) for rd in constrained):
                return CheckReport(prop, PASS, None, mode)
        return CheckReport(prop, FAIL, "no writes-only linearization admits every read", mode)
    raise ValueError(f"unknown mode {mode!r}")


def check_weak_regularity(h: History, mode: str = "witness") -> CheckReport:
    """Each returned read has its own linearization of all writes plus it."""
    prop = "weak-regularity"
    reads = [rd for rd in h.reads() if rd.returned]
    if mode == "witness":
        for rd in reads:
            kind, pinned = _pinned_write(h, rd)
            if kind == "bad":
                return CheckReport(prop, FAIL, pinned, mode)
            if kind == "v0":
                blocker = next((w for w in h.writes() if precedes(w, rd)), None)
                if blocker is not None:
                    return CheckReport(
                        prop, FAIL,
                        f"read op{rd.op_id} returned initial value after write op{blocker.op_id}",
                        mode,
                    )
                continue
            candidates = [pinned] if kind == "write" else pinned
            if not any(_read_legal(h, w, rd) for w in candidates):
                return CheckReport(prop, FAIL, f"read op{rd.op_id} is stale", mode)
        return CheckReport(prop, PASS, None, mode)
    if mode == "brute":
        for rd in reads:
            if not any(_insertable(h, perm, rd) for perm in _write_orders(h)):
                return CheckReport(
                    prop, FAIL, f"no linearization of writes + read op{rd.op_id}", mode
                )
        return CheckReport(prop, PASS, None, mode)
    raise ValueError(f"unknown mode {mode!r}")


def _read_legal(h: History, w: OperationRecord, rd: OperationRecord) -> bool:
    """rd may return w: w relevant and no write strictly between w and rd."""
    if precedes(rd, w):
        return False
    return not any(precedes(w, w2) and precedes(w2, rd) for w2 in h.writes())


def check_strong_regularity(h: History, mode: str = "witness") -> CheckReport:
    """A single global write order validates every returned read."""
    prop = "strong-regularity"
    reads = [rd for rd in h.reads() if rd.returned]
    if mode == "witness":
        sigma = _ts_writes(h)
        bad = _order_violation(sigma)
        if bad:
            return CheckReport(prop, FAIL, bad, mode)
        for rd in reads:
            if not _insertable(h, tuple(sigma), rd):
                return CheckReport(
                    prop, FAIL, f"read op{rd.op_id} has no position in the ts order", mode
                )
        return CheckReport(prop, PASS, None, mode)
    if mode == "brute":
        for perm in _write_orders(h):
            if all(_insertable(h, perm, rd) for rd in reads):
                return CheckReport(prop, PASS, None, mode)
        return CheckReport(prop, FAIL, "no single write order admits every read", mode)
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# Liveness


def check_liveness(h: History, mode: str) -> CheckReport:
    """wait-free: every correct client's op returned. fw-terminating: correct
    writes returned, and correct reads returned once writes are finite —
    intentionally capped readers are reported, not failed."""
    prop = f"liveness[{mode}]"
    correct_ops = [op for op in h.ops if op.client not in h.crashed_clients]
    missing = [op for op in correct_ops if not op.returned]
    if mode == "wait-free":
        pending = missing
    elif mode == "fw-terminating":
        pending = [
            op
            for op in missing
            if not (op.kind == READ and op.client in h.capped_readers)
        ]
        capped = [op for op in missing if op.kind == READ and op.client in h.capped_readers]
        if not pending and capped:
            return CheckReport(
                prop, PASS,
                f"reader cap hit by design for clients {sorted({o.client for o in capped})}",
                None,
            )
    else:
        raise ValueError(f"unknown liveness mode {mode!r}")
    if not pending:
        return CheckReport(prop, PASS)
    witness = f"op{pending[0].op_id} ({pending[0].kind} by client {pending[0].client}) never returned"
    if h.truncated:
        return CheckReport(prop, INCONCLUSIVE, witness + " before truncation")
    return CheckReport(prop, FAIL, witness)


# ---------------------------------------------------------------------------
# Storage bounds


def _bound_violation(rows, bound: Fraction) -> Optional[str]:
    for r in rows:
        if r.total_bits > bound:
            return f"step {r.step}: {r.total_bits} bits > bound {bound}"
    return None


def check_storage_bounds(
    trace,
    config,
    c_observed: Optional[int] = None,
    history: Optional[History] = None,
    expect_quiescent: bool = False,
    crashed_objects: frozenset = frozenset(),
) -> CheckReport:
    """Protocol-specific storage audits over a full trace.

    safe: total is exactly n*D/k at every step. regular: worst case
    (2f+k)*2D always; the adaptive bound (2f+k)(c+1)D/k when c_observed <=
    k-2; terminal live storage of live*D/k when expect_quiescent. strawman /
    generic: the lower-bound accounting — while F never exceeds f no write
    returns, and total storage is at least |C+(t)| bits and monotone.
    """
    n, f, k, D = config.n, config.f, config.k, Fraction(config.data_bits)
    piece = ideal_piece_bits(config.data_bits, k)
    prop = f"storage-bounds[{config.protocol}]"
    rows = trace.rows
    if config.protocol == "safe":
        want = n * piece
        for r in rows:
            if r.total_bits != want:
                return CheckReport(prop, FAIL, f"step {r.step}: {r.total_bits} != {want}")
        return CheckReport(prop, PASS, f"constant {want} bits over {len(rows)} steps")
    if config.protocol == "regular":
        bad = _bound_violation(rows, (2 * f + k) * 2 * D)
        if bad:
            return CheckReport(prop, FAIL, "worst-case: " + bad)
        if c_observed is not None and c_observed <= k - 2:
            bad = _bound_violation(rows, (2 * f + k) * (c_observed + 1) * piece)
            if bad:
                return CheckReport(prop, FAIL, f"adaptive (c={c_observed}): " + bad)
        if expect_quiescent:
            live = [i for i in range(1, n + 1) if i not in crashed_objects]
            final = rows[-1]
            live_bits = sum((final.per_object[i - 1] for i in live), Fraction(0))
            want = len(live) * piece
            if live_bits != want:
                return CheckReport(
                    prop, FAIL, f"quiescent: live storage {live_bits} != {want}"
                )
        return CheckReport(prop, PASS, f"max {trace.max_total()} bits")
    if config.protocol in ("strawman", "generic"):
        if all(r.f_size <= f for r in rows):
            if history is not None:
                done = [w for w in history.writes() if w.returned]
                if done:
                    return CheckReport(
                        prop, FAIL, f"|F| <= f throughout but write op{done[0].op_id} returned"
                    )
            for r in rows:
                if r.total_bits < r.c_plus:
                    return CheckReport(
                        prop, FAIL, f"step {r.step}: total {r.total_bits} < |C+| = {r.c_plus}"
                    )
        for prev, cur in zip(rows, rows[1:]):
            if cur.total_bits < prev.total_bits:
                return CheckReport(prop, FAIL, f"step {cur.step}: storage shrank")
        return CheckReport(prop, PASS, f"final {rows[-1].total_bits} bits")
    return CheckReport(prop, FAIL, f"no bounds known for protocol {config.protocol!r}")


def audit_availability_invariant(states: dict, n: int, f: int, k: int) -> Optional[str]:
    """The regular protocol's key invariant, quantified over all (n-f)-subsets.

    For every subset S: some timestamp at least as high as S's max storedTS
    has >= k distinct pieces stored across S. Returns a witness string on
    violation, None when the invariant holds.
    """
    indices = sorted(states)
    for subset in itertools.combinations(indices, n - f):
        ts_hat = max(states[i].stored_ts for i in subset)
        pieces_by_ts: dict = {}
        for i in subset:
            st: RegularObject = states[i]
            for c in st.vp | st.vf:
                if not c.ts < ts_hat:
                    pieces_by_ts.setdefault(c.ts, set()).add(c.piece.index)
        if not any(len(p) >= k for p in pieces_by_ts.values()):
            return f"subset {subset}: no ts >= {tuple(ts_hat)} with {k} pieces"
    return None
