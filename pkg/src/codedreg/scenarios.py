"""Named experiment scenarios and seeded fuzz-config generators.

Scenario names expand to full Configs so runs are reproducible from
(name, overrides, seed) alone:

* safe-basic         seeded safe-protocol fuzz with object and client crashes
* regular-adaptive   c concurrent writers, no crashes, adaptive-bound regime
* regular-worstcase  many writers racing into the replica slot, crashes on
* lowerbound-demo    strawman writers starved by adversary Ad
* figure1            scripted append-only scenario: two stalled writers fail,
                     a third appends, three writers' pieces coexist
* figure2            generic raw-bit clients driving Ad's set bookkeeping

crafted_adaptive_max builds a scripted schedule that provably attains the
adaptive storage bound (2f+k)(c+1)D/k: one writer completes a write, c-1
more writers push pieces everywhere but hold their GC round, then the first
writer's next write lands its piece on every object before any GC effect.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .sim import DEFAULT_STEP_LIMIT, Config, ConfigError, script_value

DATA_BYTES = 128  # D = 1024 bits, the paper-scale default

SCENARIOS = (
    "safe-basic",
    "regular-adaptive",
    "regular-worstcase",
    "lowerbound-demo",
    "figure1",
    "figure2",
)


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    overrides: dict = field(default_factory=dict)

    def config(self) -> Config:
        return build_scenario(self.name, **self.overrides)


def _fuzz_programs(rng, writers, readers, seed, data_bytes, max_ops=2):
    programs = {}
    cid = 1
    for _ in range(writers):
        ops = []
        for idx in range(rng.randint(1, max_ops)):
            ops.append(("write", script_value(seed, cid, idx, data_bytes)))
        if rng.random() < 0.3:
            ops.append(("read",))
        programs[cid] = tuple(ops)
        cid += 1
    for _ in range(readers):
        programs[cid] = tuple(("read",) for _ in range(rng.randint(1, max_ops)))
        cid += 1
    return programs


def _fuzz_crashes(rng, n, f, clients, allow_objects, client_victims):
    plan = []
    if allow_objects and f > 0 and rng.random() < 0.5:
        objs = rng.sample(range(1, n + 1), rng.randint(1, f))
        for o in objs:
            plan.append(("object", o, rng.randint(1, 200)))
    for cid in client_victims:
        if rng.random() < 0.2:
            plan.append(("client", cid, rng.randint(1, 200)))
    return tuple(sorted(plan, key=lambda e: e[2]))


def safe_basic_config(seed: int, n=4, f=1, k=2, data_bytes=DATA_BYTES) -> Config:
    """Safe-protocol fuzz: random clients and ops, up to f object crashes and
    random client crashes."""
    rng = random.Random(f"safe-fuzz:{seed}")
    programs = _fuzz_programs(rng, rng.randint(1, 3), rng.randint(1, 3), seed, data_bytes)
    plan = _fuzz_crashes(rng, n, f, programs, allow_objects=True,
                         client_victims=sorted(programs))
    return Config(n=n, f=f, k=k, data_bytes=data_bytes, protocol="safe",
                  programs=programs, seed=seed, policy="fair", crash_plan=plan)


def regular_fuzz_config(
    seed: int,
    n=4,
    f=1,
    k=2,
    data_bytes=DATA_BYTES,
    writers=None,
    readers=None,
    allow_object_crashes=True,
    allow_writer_crashes=True,
    allow_reader_crashes=True,
) -> Config:
    """Regular-protocol fuzz; crash classes are switchable because different
    acceptance criteria constrain different ones."""
    rng = random.Random(f"regular-fuzz:{n}:{f}:{k}:{seed}")
    w = writers if writers is not None else rng.randint(1, 3)
    r = readers if readers is not None else rng.randint(1, 3)
    programs = _fuzz_programs(rng, w, r, seed, data_bytes)
    writer_ids = [cid for cid in programs if any(op[0] == "write" for op in programs[cid])]
    victims = []
    if allow_writer_crashes:
        victims += writer_ids
    if allow_reader_crashes:
        victims += [cid for cid in programs if cid not in writer_ids]
    plan = _fuzz_crashes(rng, n, f, programs, allow_objects=allow_object_crashes,
                         client_victims=sorted(victims))
    return Config(n=n, f=f, k=k, data_bytes=data_bytes, protocol="regular",
                  programs=programs, seed=seed, policy="fair", crash_plan=plan)


def adaptive_config(c: int, seed: int, f=1, k=4, data_bytes=DATA_BYTES, writes_each=2) -> Config:
    """c concurrent writers (c=0: one reader only), one reader, no crashes.

    Max simultaneous outstanding writes is capped at c by construction, so
    c_observed <= c and the adaptive bound applies whenever c <= k-2.
    """
    n = 2 * f + k
    if c == 0:
        programs = {1: (("read",),)}
    else:
        programs = {
            cid: tuple(
                ("write", script_value(seed, cid, idx, data_bytes))
                for idx in range(writes_each)
            )
            for cid in range(1, c + 1)
        }
        programs[c + 1] = (("read",),)
    return Config(n=n, f=f, k=k, data_bytes=data_bytes, protocol="regular",
                  programs=programs, seed=seed, policy="fair")


def worstcase_config(seed: int, f: int, k: int, data_bytes=DATA_BYTES) -> Config:
    """High write concurrency (> k writers) so objects fill V_p and take
    replicas; crashes everywhere the model allows."""
    n = 2 * f + k
    rng = random.Random(f"worst:{f}:{k}:{seed}")
    writers = rng.randint(k + 1, k + 3)
    readers = rng.randint(1, 2)
    programs = _fuzz_programs(rng, writers, readers, seed, data_bytes, max_ops=2)
    plan = _fuzz_crashes(rng, n, f, programs, allow_objects=True,
                         client_victims=sorted(programs))
    return Config(n=n, f=f, k=k, data_bytes=data_bytes, protocol="regular",
                  programs=programs, seed=seed, policy="fair", crash_plan=plan)


def lowerbound_config(m: int, seed: int = 0, n=4, f=1, k=2,
                      data_bytes=DATA_BYTES, steps=20_000) -> Config:
    """m strawman writers under adversary Ad; no write ever completes."""
    programs = {cid: (("write", script_value(seed, cid, 0, data_bytes)),)
                for cid in range(1, m + 1)}
    return Config(n=n, f=f, k=k, data_bytes=data_bytes, protocol="strawman",
                  programs=programs, seed=seed, policy="ad", step_limit=steps)


def _round_trip(cid: int, n: int, skip_delivery_of=()) -> list:
    """Trigger the client's current round on all n objects, then deliver."""
    dirs = [("trigger", cid, o) for o in range(1, n + 1)]
    dirs += [("deliver", cid, o) for o in range(1, n + 1) if o not in skip_delivery_of]
    return dirs


def crafted_adaptive_max(c: int, seed: int = 0, f=1, k=4, data_bytes=DATA_BYTES) -> Config:
    """Deterministic schedule attaining the adaptive bound (2f+k)(c+1)D/k."""
    n = 2 * f + k
    if not 0 <= c <= k - 2:
        raise ConfigError(f"crafted schedule needs 0 <= c <= k-2, got c={c}")
    if c == 0:
        return adaptive_config(0, seed, f=f, k=k, data_bytes=data_bytes)
    writer_a = 1
    helpers = list(range(2, c + 1))
    programs = {
        writer_a: (
            ("write", script_value(seed, writer_a, 0, data_bytes)),
            ("write", script_value(seed, writer_a, 1, data_bytes)),
        )
    }
    for cid in helpers:
        programs[cid] = (("write", script_value(seed, cid, 0, data_bytes)),)
    script: list = []
    # writer A completes a write, all effects delivered: every object holds 1 piece
    script += [("invoke", writer_a)]
    script += _round_trip(writer_a, n)  # readValue
    script += _round_trip(writer_a, n)  # update
    script += _round_trip(writer_a, n)  # gc
    # each helper lands its piece everywhere but its GC round stays pending
    for cid in helpers:
        script += [("invoke", cid)]
        script += _round_trip(cid, n)  # readValue
        script += _round_trip(cid, n)  # update
        script += [("trigger", cid, o) for o in range(1, n + 1)]  # gc triggered only
    # writer A's second write lands its piece everywhere: c+1 pieces per object
    script += [("invoke", writer_a)]
    script += _round_trip(writer_a, n)  # readValue
    script += _round_trip(writer_a, n)  # update -> peak storage
    return Config(n=n, f=f, k=k, data_bytes=data_bytes, protocol="regular",
                  programs=programs, seed=seed, policy="scripted",
                  script=tuple(script), script_tail="fair")


def figure1_config(seed: int = 0, data_bytes=DATA_BYTES) -> Config:
    """Append-only scenario: b1 faulty, two writers land one piece each and
    crash, a third writer can only append."""
    n, f, k = 4, 1, 2
    programs = {cid: (("write", script_value(seed, cid, 0, data_bytes)),)
                for cid in (1, 2, 3)}
    live = (2, 3, 4)
    script: list = [("crash-object", 1)]
    for cid in (1, 2):
        script += [("invoke", cid)]
        script += [("trigger", cid, o) for o in range(1, n + 1)]
        script += [("deliver", cid, o) for o in live]
    script += [("trigger", 1, o) for o in range(1, n + 1)]  # c1 update round
    script += [("trigger", 2, o) for o in range(1, n + 1)]  # c2 update round
    script += [("deliver", 1, 2), ("deliver", 2, 3)]  # one piece each lands
    script += [("crash-client", 1), ("crash-client", 2)]
    script += [("invoke", 3)]
    script += [("trigger", 3, o) for o in range(1, n + 1)]
    script += [("deliver", 3, o) for o in live]
    script += [("trigger", 3, o) for o in range(1, n + 1)]  # c3 update round
    script += [("deliver", 3, 4)]  # c3 appends on b4
    return Config(n=n, f=f, k=k, data_bytes=data_bytes, protocol="strawman",
                  programs=programs, seed=seed, policy="scripted",
                  script=tuple(script), script_tail="halt")


def figure2_config(seed: int = 0, data_bytes=DATA_BYTES) -> Config:
    """Four generic clients under Ad, reproducing the worked adversary steps:
    c1 stores a replica on b1 (b1 joins F), c3 stores a piece on b3, then
    c2's RMW on b3 is delivered first (erasing c3's piece) and c3's on b2
    second."""
    bits = 8 * data_bytes
    piece = bits // 2
    programs = {
        1: (("generic", ((1, bits, False), (2, piece, False))),),
        2: (("generic", ((1, piece, False), (3, piece, True))),),
        3: (("generic", ((3, piece, False), (2, piece, False))),),
        4: (("generic", ()),),
    }
    return Config(n=4, f=1, k=2, data_bytes=data_bytes, protocol="generic",
                  programs=programs, seed=seed, policy="ad", step_limit=500)


def build_scenario(name: str, **overrides) -> Config:
    seed = overrides.pop("seed", 0)
    if name == "safe-basic":
        return safe_basic_config(
            seed,
            n=overrides.pop("n", 4),
            f=overrides.pop("f", 1),
            k=overrides.pop("k", 2),
            data_bytes=overrides.pop("data_bytes", DATA_BYTES),
        )
    if name == "regular-adaptive":
        return adaptive_config(
            overrides.pop("writers", 1),
            seed,
            f=overrides.pop("f", 1),
            k=overrides.pop("k", 4),
            data_bytes=overrides.pop("data_bytes", DATA_BYTES),
        )
    if name == "regular-worstcase":
        return worstcase_config(
            seed,
            f=overrides.pop("f", 1),
            k=overrides.pop("k", 2),
            data_bytes=overrides.pop("data_bytes", DATA_BYTES),
        )
    if name == "lowerbound-demo":
        return lowerbound_config(
            overrides.pop("writers", 8),
            seed,
            n=overrides.pop("n", 4),
            f=overrides.pop("f", 1),
            k=overrides.pop("k", 2),
            data_bytes=overrides.pop("data_bytes", DATA_BYTES),
            steps=overrides.pop("steps", 20_000),
        )
    if name == "figure1":
        return figure1_config(seed, data_bytes=overrides.pop("data_bytes", DATA_BYTES))
    if name == "figure2":
        return figure2_config(seed, data_bytes=overrides.pop("data_bytes", DATA_BYTES))
    raise ConfigError(f"unknown scenario {name!r}; choose from {SCENARIOS}")
