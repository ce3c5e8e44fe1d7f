"""Deterministic discrete-event executor for the register emulations.

The simulator is an explicit transition system. One *action* is applied per
step, chosen by a scheduling policy from the enabled set:

* invoke   — an idle client starts its next scripted operation,
* trigger  — a client places one wanted RMW onto an object's pending queue
             (no effect on the object yet),
* deliver  — a pending RMW takes effect on its object and the response is
             handed to the client's state machine,
* crash    — a client or object stops for good (forced by the crash plan or
             issued by a scripted policy).

RMW effects land at delivery, which the model allows (any point between
trigger and response); pending RMWs from the same client on the same object
take effect in trigger order, the shared-memory analogue of FIFO channels —
see README model notes. Crashed objects keep their state but never deliver;
crashed clients never act again, though their already-triggered RMWs may
still take effect.

Every step appends a storage-trace row: idealized bits total and per object,
the outstanding-writer sets C/C+/C-, and the set F of objects holding a full
write's worth of bits — the bookkeeping the lower-bound scheduler Ad runs on.
Everything is driven by the config seed; a run replays bit-identically.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import NamedTuple, Optional

from .clients import Capped, GenericClient, Return, StrawmanClient, Wants
from .codec import Value
from .core import READ, TS_ZERO, WRITE, History, OperationRecord
from .objects import (
    GenericObject,
    RegularObject,
    generic_store,
    initial_states,
    regular_gc,
    regular_update,
    safe_update,
    storage_bits,
    strawman_append,
    write_bits,
)
from .regular import RegularClient
from .safe import SafeClient

PROTOCOLS = ("safe", "regular", "strawman", "generic")
POLICIES = ("fair", "ad", "scripted")

DEFAULT_STEP_LIMIT = 100_000
DEFAULT_FAIRNESS_WINDOW = 64


class ConfigError(ValueError):
    pass


class ScenarioError(RuntimeError):
    """A scripted directive did not match any enabled action."""


@dataclass(frozen=True)
class Config:
    n: int
    f: int
    k: int
    data_bytes: int
    protocol: str
    programs: dict  # client id -> tuple of ops: ("write", Value) | ("read",) | ("generic", intents)
    seed: int = 0
    policy: str = "fair"
    crash_plan: tuple = ()  # (("object"|"client", id, step), ...) sorted by step
    step_limit: int = DEFAULT_STEP_LIMIT
    max_read_rounds: Optional[int] = None
    fairness_window: int = DEFAULT_FAIRNESS_WINDOW
    script: tuple = ()  # directives for policy == "scripted"
    script_tail: str = "fair"  # "fair" | "ad" | "halt"

    @property
    def data_bits(self) -> int:
        return 8 * self.data_bytes

    def validate(self) -> None:
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"unknown protocol {self.protocol!r}")
        if self.policy not in POLICIES:
            raise ConfigError(f"unknown policy {self.policy!r}")
        if self.n != 2 * self.f + self.k or self.k < 1 or self.f < 0:
            raise ConfigError(f"need n = 2f + k with k >= 1, got n={self.n} f={self.f} k={self.k}")
        if self.data_bytes < 1:
            raise ConfigError("data_bytes must be >= 1")
        if self.step_limit < 1:
            raise ConfigError("step_limit must be >= 1")
        if any(cid < 1 for cid in self.programs):
            raise ConfigError("client ids start at 1 (0 is the initial-value writer)")
        crashed_objs = {i for kind, i, _ in self.crash_plan if kind == "object"}
        if len(crashed_objs) > self.f:
            raise ConfigError(f"crash plan kills {len(crashed_objs)} objects, tolerance is f={self.f}")
        if not all(1 <= i <= self.n for i in crashed_objs):
            raise ConfigError("crash plan names an unknown object")
        if list(self.crash_plan) != sorted(self.crash_plan, key=lambda e: e[2]):
            raise ConfigError("crash plan must be sorted by step")

    # -- text format: flat key=value plus client script lines ---------------

    def to_text(self) -> str:
        if self.policy == "scripted" or self.protocol == "generic":
            raise ConfigError("scripted/generic configs are not representable as text")
        lines = [
            f"protocol={self.protocol}",
            f"n={self.n}",
            f"f={self.f}",
            f"k={self.k}",
            f"data_bytes={self.data_bytes}",
            f"seed={self.seed}",
            f"policy={self.policy}",
            f"step_limit={self.step_limit}",
            f"fairness_window={self.fairness_window}",
            f"max_read_rounds={self.max_read_rounds or 0}",
        ]
        for kind, ident, step in self.crash_plan:
            lines.append(f"crash={kind}:{ident}:{step}")
        for cid in sorted(self.programs):
            ops = " ".join(op[0] for op in self.programs[cid])
            lines.append(f"client {cid} {ops}".rstrip())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Config":
        kv: dict = {}
        crash = []
        scripts: dict = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("client "):
                parts = line.split()
                cid = int(parts[1])
                scripts[cid] = parts[2:]
            elif "=" in line:
                key, val = line.split("=", 1)
                if key.strip() == "crash":
                    kind, ident, step = val.strip().split(":")
                    crash.append((kind, int(ident), int(step)))
                else:
                    kv[key.strip()] = val.strip()
            else:
                raise ConfigError(f"unparseable config line: {raw!r}")
        seed = int(kv.get("seed", "0"))
        data_bytes = int(kv.get("data_bytes", "128"))
        programs = {}
        for cid, ops in scripts.items():
            prog = []
            for idx, op in enumerate(ops):
                if op == "write":
                    prog.append(("write", script_value(seed, cid, idx, data_bytes)))
                elif op == "read":
                    prog.append(("read",))
                else:
                    raise ConfigError(f"unknown script op {op!r} for client {cid}")
            programs[cid] = tuple(prog)
        cfg = cls(
            n=int(kv["n"]),
            f=int(kv["f"]),
            k=int(kv["k"]),
            data_bytes=data_bytes,
            protocol=kv.get("protocol", "safe"),
            programs=programs,
            seed=seed,
            policy=kv.get("policy", "fair"),
            crash_plan=tuple(sorted(crash, key=lambda e: e[2])),
            step_limit=int(kv.get("step_limit", str(DEFAULT_STEP_LIMIT))),
            max_read_rounds=int(kv.get("max_read_rounds", "0")) or None,
            fairness_window=int(kv.get("fairness_window", str(DEFAULT_FAIRNESS_WINDOW))),
        )
        cfg.validate()
        return cfg


def script_value(seed: int, client: int, idx: int, data_bytes: int) -> Value:
    """Deterministic per-(seed, client, op) write payload."""
    return Value(random.Random(f"v:{seed}:{client}:{idx}").randbytes(data_bytes))


class Event(NamedTuple):
    step: int
    kind: str
    client: int
    obj: int
    note: str


class TraceRow(NamedTuple):
    step: int
    total_bits: Fraction
    per_object: tuple
    c_size: int
    c_plus: int
    c_minus: int
    f_size: int
    f_members: tuple
    outstanding_bits: Optional[Fraction]


@dataclass
class StorageTrace:
    """Per-step storage accounting; CSV column order is frozen."""

    n: int
    f: int
    k: int
    data_bits: int
    rows: list

    def max_total(self) -> Fraction:
        return max(r.total_bits for r in self.rows)

    def to_csv(self) -> str:
        header = (
            ["step", "total_bits"]
            + [f"obj{i}" for i in range(1, self.n + 1)]
            + ["C", "Cplus", "Cminus", "F_size", "F_members"]
        )
        lines = [",".join(header)]
        for r in self.rows:
            cells = [str(r.step), str(r.total_bits)]
            cells += [str(b) for b in r.per_object]
            cells += [
                str(r.c_size),
                str(r.c_plus),
                str(r.c_minus),
                str(r.f_size),
                ";".join(str(i) for i in r.f_members),
            ]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str, f: int = 0, k: int = 1, data_bits: int = 0) -> "StorageTrace":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        header = lines[0].split(",")
        n = sum(1 for c in header if c.startswith("obj"))
        rows = []
        for ln in lines[1:]:
            cells = ln.split(",")
            per_obj = tuple(Fraction(c) for c in cells[2 : 2 + n])
            f_members = tuple(int(x) for x in cells[6 + n].split(";") if x)
            rows.append(
                TraceRow(
                    step=int(cells[0]),
                    total_bits=Fraction(cells[1]),
                    per_object=per_obj,
                    c_size=int(cells[2 + n]),
                    c_plus=int(cells[3 + n]),
                    c_minus=int(cells[4 + n]),
                    f_size=int(cells[5 + n]),
                    f_members=f_members,
                    outstanding_bits=None,
                )
            )
        return cls(n=n, f=f, k=k, data_bits=data_bits, rows=rows)


@dataclass
class PendingRmw:
    rmw_id: int
    client: int
    obj: int
    op_id: int
    round_no: int
    kind: str
    payload: tuple
    want_step: int
    trigger_step: int = -1


@dataclass
class RunResult:
    config: Config
    history: History
    trace: StorageTrace
    events: list
    quiesced: bool
    truncated: bool
    stalled: bool
    crashed_objects: frozenset
    crashed_clients: frozenset
    capped_readers: frozenset
    unapplied_crashes: tuple
    final_states: dict

    @property
    def live_object_count(self) -> int:
        return self.config.n - len(self.crashed_objects)


def _make_machine(cfg: Config, cid: int):
    if cfg.protocol == "safe":
        return SafeClient(cid, cfg.n, cfg.f, cfg.k, cfg.data_bytes)
    if cfg.protocol == "regular":
        return RegularClient(cid, cfg.n, cfg.f, cfg.k, cfg.data_bytes, cfg.max_read_rounds)
    if cfg.protocol == "strawman":
        return StrawmanClient(cid, cfg.n, cfg.f, cfg.k, cfg.data_bytes)
    if cfg.protocol == "generic":
        return GenericClient(cid, cfg.n, cfg.f, cfg.k, cfg.data_bytes)
    raise ConfigError(f"unknown protocol {cfg.protocol!r}")


class Simulator:
    """Explorable transition system; policies are strategies over enabled()."""

    def __init__(self, config: Config, invariant_hook=None):
        config.validate()
        self.cfg = config
        self.invariant_hook = invariant_hook
        self.v0 = Value(bytes(config.data_bytes))
        self.states = initial_states(config.protocol, config.n, config.k, self.v0)
        self.machines = {cid: _make_machine(config, cid) for cid in sorted(config.programs)}
        self.scripts = {cid: list(config.programs[cid]) for cid in config.programs}
        self.script_pos = {cid: 0 for cid in config.programs}
        self.ready_since = {cid: 0 for cid in config.programs}
        self.crashed_clients: set = set()
        self.crashed_objects: set = set()
        self.capped: set = set()
        self.wants = {cid: [] for cid in config.programs}
        self.pending = {i: [] for i in range(1, config.n + 1)}
        self.step = 0
        self._next_rmw = 0
        self._next_op = 0
        self.op_records: list = []
        self.current_op = {cid: None for cid in config.programs}
        self.events: list = []
        self.rows: list = []
        self._sets_step = -1
        self._sets = None
        self._wb_cache: dict = {}
        self._record_row(recompute=True)

    # -- enabled actions ----------------------------------------------------

    def enabled(self) -> list:
        actions = []
        for cid in sorted(self.machines):
            if cid in self.crashed_clients or cid in self.capped:
                continue
            m = self.machines[cid]
            if m.idle and self.script_pos[cid] < len(self.scripts[cid]):
                actions.append(("invoke", cid))
            for w in self.wants[cid]:
                actions.append(("trigger", cid, w.obj, w.rmw_id))
        for obj in sorted(self.pending):
            if obj in self.crashed_objects:
                continue
            seen = set()
            for rmw in self.pending[obj]:
                if rmw.client in seen:
                    continue  # FIFO per (client, object): only the oldest is deliverable
                seen.add(rmw.client)
                actions.append(("deliver", obj, rmw.client, rmw.rmw_id))
        return actions

    def action_enabled_step(self, action) -> int:
        if action[0] == "invoke":
            return self.ready_since[action[1]]
        if action[0] == "trigger":
            return self._find_want(action[1], action[3]).want_step
        if action[0] == "deliver":
            return self._find_pending(action[1], action[3]).trigger_step
        return self.step

    def _find_want(self, cid, rmw_id) -> PendingRmw:
        for w in self.wants[cid]:
            if w.rmw_id == rmw_id:
                return w
        raise KeyError(f"no wanted RMW {rmw_id} for client {cid}")

    def _find_pending(self, obj, rmw_id) -> PendingRmw:
        for r in self.pending[obj]:
            if r.rmw_id == rmw_id:
                return r
        raise KeyError(f"no pending RMW {rmw_id} on object {obj}")

    # -- applying actions ----------------------------------------------------

    def apply(self, action) -> None:
        self.step += 1
        kind = action[0]
        if kind == "invoke":
            self._apply_invoke(action[1])
            self._record_row(recompute=True)
        elif kind == "trigger":
            self._apply_trigger(action[1], action[3])
            self._record_row(recompute=False)
        elif kind == "deliver":
            self._apply_deliver(action[1], action[3])
            self._record_row(recompute=True)
        elif kind == "crash-object":
            self.crashed_objects.add(action[1])
            self._log("crash", 0, action[1], "object crashed")
            self._record_row(recompute=True)
        elif kind == "crash-client":
            cid = action[1]
            self.crashed_clients.add(cid)
            self.wants[cid] = []
            self._log("crash", cid, 0, "client crashed")
            self._record_row(recompute=True)
        else:
            raise ValueError(f"unknown action {action!r}")
        if self.invariant_hook is not None:
            self.invariant_hook(self)

    def _apply_invoke(self, cid) -> None:
        op = self.scripts[cid][self.script_pos[cid]]
        self.script_pos[cid] += 1
        op_id = self._next_op
        self._next_op += 1
        machine = self.machines[cid]
        if op[0] == "write":
            rec = OperationRecord(op_id, cid, WRITE, op[1], self.step)
            wants = machine.begin(op_id, WRITE, op[1])
        elif op[0] == "read":
            rec = OperationRecord(op_id, cid, READ, None, self.step)
            wants = machine.begin(op_id, READ, None)
        elif op[0] == "generic":
            machine.intents = op[1]
            rec = OperationRecord(op_id, cid, WRITE, None, self.step)
            wants = machine.begin(op_id, WRITE, None)
        else:
            raise ConfigError(f"unknown script op {op[0]!r}")
        self.op_records.append(rec)
        self.current_op[cid] = op_id
        self._log("invoke", cid, 0, f"{rec.kind} op{op_id}")
        self._enqueue_wants(cid, rec, wants)

    def _enqueue_wants(self, cid, rec, wants: Wants) -> None:
        machine = self.machines[cid]
        if wants.ts is not None:
            rec.ts = wants.ts
        rec.rounds.append((machine.round_no, self.step, wants.label))
        for spec in wants.specs:
            self.wants[cid].append(
                PendingRmw(
                    rmw_id=self._next_rmw,
                    client=cid,
                    obj=spec.obj,
                    op_id=rec.op_id,
                    round_no=machine.round_no,
                    kind=spec.kind,
                    payload=spec.payload,
                    want_step=self.step,
                )
            )
            self._next_rmw += 1

    def _apply_trigger(self, cid, rmw_id) -> None:
        rmw = self._find_want(cid, rmw_id)
        self.wants[cid].remove(rmw)
        rmw.trigger_step = self.step
        self.pending[rmw.obj].append(rmw)
        self._log("trigger", cid, rmw.obj, f"{rmw.kind} op{rmw.op_id} r{rmw.round_no}")

    def _apply_deliver(self, obj, rmw_id) -> None:
        rmw = self._find_pending(obj, rmw_id)
        self.pending[obj].remove(rmw)
        state = self.states[obj]
        new_state, result = self._apply_rmw(state, rmw)
        self.states[obj] = new_state
        self._log("response", rmw.client, obj, f"{rmw.kind} op{rmw.op_id} r{rmw.round_no}")
        cid = rmw.client
        if cid in self.crashed_clients or cid in self.capped:
            return
        machine = self.machines[cid]
        if machine.op_id != rmw.op_id or machine.round_no != rmw.round_no:
            self._log("stale", cid, obj, f"op{rmw.op_id} r{rmw.round_no} dropped")
            return
        outcome = machine.deliver(obj, result)
        rec = self.op_records[rmw.op_id]
        if outcome is None:
            return
        if isinstance(outcome, Wants):
            self._enqueue_wants(cid, rec, outcome)
        elif isinstance(outcome, Return):
            rec.return_time = self.step
            if rec.kind == READ:
                rec.value = outcome.value
            rec.ts = outcome.ts if outcome.ts is not None else rec.ts
            self.current_op[cid] = None
            self.ready_since[cid] = self.step
            self._log("return", cid, 0, f"{rec.kind} op{rec.op_id}")
        elif isinstance(outcome, Capped):
            self.capped.add(cid)
            self._log("capped", cid, 0, f"read op{rec.op_id} after {outcome.rounds} rounds")
        else:
            raise TypeError(f"unexpected machine outcome {outcome!r}")

    def _apply_rmw(self, state, rmw: PendingRmw):
        kind = rmw.kind
        if kind == "read":
            return state, state
        if kind == "update" and self.cfg.protocol == "safe":
            piece, ts = rmw.payload
            return safe_update(state, piece, ts), "ack"
        if kind == "update":
            wset, ts, stored_in = rmw.payload
            return regular_update(state, wset, ts, stored_in, self.cfg.k), "ack"
        if kind == "gc":
            wset, ts = rmw.payload
            return regular_gc(state, wset, ts, self.cfg.k), "ack"
        if kind == "append":
            piece, ts = rmw.payload
            return strawman_append(state, piece, ts), "ack"
        if kind == "store":
            write_ts, bits, overwrite = rmw.payload
            return generic_store(state, write_ts, bits, overwrite), "ack"
        raise ValueError(f"unknown RMW kind {kind!r}")

    def _log(self, kind, client, obj, note) -> None:
        self.events.append(Event(self.step, kind, client, obj, note))

    # -- accounting -----------------------------------------------------------

    def _object_write_bits(self, obj) -> dict:
        state = self.states[obj]
        cached = self._wb_cache.get(obj)
        if cached is not None and cached[0] is state:
            return cached[1]
        wb = write_bits(state, self.cfg.data_bits, self.cfg.k)
        self._wb_cache[obj] = (state, wb)
        return wb

    def current_sets(self):
        """C(t), C+(t), C-(t), F(t) for the current configuration."""
        if self._sets_step == self.step:
            return self._sets
        D = Fraction(self.cfg.data_bits)
        stored: dict = {}
        f_members = []
        for obj in sorted(self.states):
            wb = self._object_write_bits(obj)
            for ts, bits in wb.items():
                stored[ts] = stored.get(ts, Fraction(0)) + bits
            if any(bits >= D for bits in wb.values()):
                f_members.append(obj)
        held: set = set()
        for cid, m in self.machines.items():
            if cid not in self.crashed_clients:
                held |= {(cid, ts) for ts in m.held_write_ts}
        c_set, c_plus = [], []
        outstanding_bits = Fraction(0)
        for rec in self.op_records:
            if rec.kind != WRITE or rec.returned:
                continue
            c_set.append(rec.client)
            if rec.ts is None:
                continue
            in_objects = rec.ts in stored
            in_clients = any(cid != rec.client and ts == rec.ts for cid, ts in held)
            if in_objects or in_clients:
                c_plus.append(rec.client)
            if in_objects:
                outstanding_bits += stored[rec.ts]
        sets = (
            tuple(sorted(c_set)),
            tuple(sorted(c_plus)),
            tuple(sorted(set(c_set) - set(c_plus))),
            tuple(f_members),
            outstanding_bits,
        )
        self._sets_step = self.step
        self._sets = sets
        return sets

    def _record_row(self, recompute: bool) -> None:
        if not recompute and self.rows:
            prev = self.rows[-1]
            self.rows.append(prev._replace(step=self.step))
            self._sets_step = self.step
            return
        per_obj = tuple(
            storage_bits(self.states[i], self.cfg.data_bits, self.cfg.k)
            for i in range(1, self.cfg.n + 1)
        )
        c_set, c_plus, c_minus, f_members, outstanding = self.current_sets()
        self.rows.append(
            TraceRow(
                step=self.step,
                total_bits=sum(per_obj, Fraction(0)),
                per_object=per_obj,
                c_size=len(c_set),
                c_plus=len(c_plus),
                c_minus=len(c_minus),
                f_size=len(f_members),
                f_members=f_members,
                outstanding_bits=outstanding,
            )
        )

    # -- main loop -------------------------------------------------------------

    def run_loop(self, policy) -> RunResult:
        plan = list(self.cfg.crash_plan)
        plan_pos = 0
        quiesced = truncated = stalled = False
        while True:
            if plan_pos < len(plan) and plan[plan_pos][2] <= self.step + 1:
                kind, ident, _ = plan[plan_pos]
                plan_pos += 1
                self.apply((f"crash-{kind}", ident))
                continue
            if self.step >= self.cfg.step_limit:
                truncated = bool(self.enabled())
                break
            actions = self.enabled()
            if not actions:
                quiesced = True
                break
            choice = policy.choose(self, actions)
            if choice is None:
                stalled = True
                break
            self.apply(choice)
        unapplied = tuple(plan[plan_pos:])
        for entry in unapplied:
            self._log("crash-skipped", 0, 0, f"{entry[0]}:{entry[1]}@{entry[2]} beyond run end")
        history = History(
            ops=self.op_records,
            steps=self.step,
            data_bytes=self.cfg.data_bytes,
            crashed_clients=frozenset(self.crashed_clients),
            truncated=truncated,
            capped_readers=frozenset(self.capped),
            meta={
                "protocol": self.cfg.protocol,
                "n": self.cfg.n,
                "f": self.cfg.f,
                "k": self.cfg.k,
                "policy": self.cfg.policy,
                "seed": self.cfg.seed,
                "quiesced": quiesced,
                "crashed_objects": sorted(self.crashed_objects),
            },
        )
        trace = StorageTrace(
            n=self.cfg.n,
            f=self.cfg.f,
            k=self.cfg.k,
            data_bits=self.cfg.data_bits,
            rows=self.rows,
        )
        return RunResult(
            config=self.cfg,
            history=history,
            trace=trace,
            events=self.events,
            quiesced=quiesced,
            truncated=truncated,
            stalled=stalled,
            crashed_objects=frozenset(self.crashed_objects),
            crashed_clients=frozenset(self.crashed_clients),
            capped_readers=frozenset(self.capped),
            unapplied_crashes=unapplied,
            final_states=dict(self.states),
        )


# ---------------------------------------------------------------------------
# Policies


class FairRandomPolicy:
    """Seeded uniform choice with an aging window bounding starvation.

    Any enabled action older than the window is served oldest-first, so every
    pending response is delivered within a bounded number of steps — a finite
    refinement of the fairness conditions.
    """

    def __init__(self, seed: int, window: int = DEFAULT_FAIRNESS_WINDOW):
        self.rng = random.Random(f"fair:{seed}")
        self.window = window

    def choose(self, sim: Simulator, actions):
        aged = [(sim.action_enabled_step(a), idx) for idx, a in enumerate(actions)]
        oldest_step, oldest_idx = min(aged)
        if sim.step - oldest_step >= self.window:
            return actions[oldest_idx]
        return actions[self.rng.randrange(len(actions))]


class AdversaryAdPolicy:
    """The lower-bound scheduler Ad.

    Rule 1: if any pending RMW targets an object outside F(t) and was
    triggered by a client without stored bits (not in C+(t)), deliver the
    longest-pending such RMW (ties by object index then client id).
    Rule 2: otherwise give the round-robin-next client one trigger or invoke.
    RMWs of C+ clients and RMWs on F objects are thereby delayed forever,
    while every correct client still gets infinitely many trigger turns.
    """

    def __init__(self):
        self.rr = 0

    def choose(self, sim: Simulator, actions):
        _, c_plus, _, f_members, _ = sim.current_sets()
        c_plus = set(c_plus)
        f_set = set(f_members)
        delivers = []
        for a in actions:
            if a[0] != "deliver" or a[1] in f_set or a[2] in c_plus:
                continue
            rmw = sim._find_pending(a[1], a[3])
            delivers.append(((rmw.trigger_step, a[1], a[2]), a))
        if delivers:
            return min(delivers)[1]
        by_client: dict = {}
        for a in actions:
            if a[0] in ("invoke", "trigger"):
                by_client.setdefault(a[1], []).append(a)
        if not by_client:
            return None
        ids = sorted(by_client)
        nxt = min((c for c in ids if c > self.rr), default=ids[0])
        self.rr = nxt
        acts = by_client[nxt]
        invokes = [a for a in acts if a[0] == "invoke"]
        if invokes:
            return invokes[0]
        return min(acts, key=lambda a: a[3])


class ScriptedPolicy:
    """Replay an explicit directive list, then hand off to a tail policy.

    Directives: ("invoke", client), ("trigger", client, obj),
    ("deliver", client, obj), ("crash-object", obj), ("crash-client", client).
    A directive that matches no enabled action raises ScenarioError; with
    tail "halt" the run stops when the script is exhausted.
    """

    def __init__(self, directives, tail: str = "fair", seed: int = 0, window: int = DEFAULT_FAIRNESS_WINDOW):
        self.queue = list(directives)
        self.tail = tail
        self._tail_policy = None
        if tail == "fair":
            self._tail_policy = FairRandomPolicy(seed, window)
        elif tail == "ad":
            self._tail_policy = AdversaryAdPolicy()
        elif tail != "halt":
            raise ConfigError(f"unknown script tail {tail!r}")

    def choose(self, sim: Simulator, actions):
        if self.queue:
            d = self.queue.pop(0)
            return self._match(d, actions)
        if self._tail_policy is None:
            return None
        return self._tail_policy.choose(sim, actions)

    @staticmethod
    def _match(d, actions):
        if d[0] in ("crash-object", "crash-client"):
            return d
        if d[0] == "invoke":
            want = ("invoke", d[1])
            if want in actions:
                return want
        elif d[0] == "trigger":
            hits = [a for a in actions if a[0] == "trigger" and a[1] == d[1] and a[2] == d[2]]
            if hits:
                return min(hits, key=lambda a: a[3])
        elif d[0] == "deliver":
            hits = [a for a in actions if a[0] == "deliver" and a[2] == d[1] and a[1] == d[2]]
            if hits:
                return min(hits, key=lambda a: a[3])
        else:
            raise ScenarioError(f"unknown directive {d!r}")
        raise ScenarioError(f"directive {d!r} matches no enabled action")


def make_policy(cfg: Config):
    if cfg.policy == "fair":
        return FairRandomPolicy(cfg.seed, cfg.fairness_window)
    if cfg.policy == "ad":
        return AdversaryAdPolicy()
    return ScriptedPolicy(cfg.script, cfg.script_tail, cfg.seed, cfg.fairness_window)


def run(config: Config, invariant_hook=None) -> RunResult:
    """Execute one run; deterministic for a fixed (config, seed)."""
    sim = Simulator(config, invariant_hook=invariant_hook)
    return sim.run_loop(make_policy(config))
