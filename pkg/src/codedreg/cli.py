"""Command-line front end: run scenarios, check recorded runs, sweep parameters.

Exit codes: 0 all checks pass, 1 a property check failed, 2 usage or parse
error. Output files (trace.csv, history.txt, report.txt, config.txt when the
config is text-representable) are byte-identical across repeated runs with
identical arguments.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from fractions import Fraction
from pathlib import Path
from types import SimpleNamespace

from .checker import (
    FAIL,
    CheckReport,
    audit_availability_invariant,
    check_liveness,
    check_storage_bounds,
    check_strong_regularity,
    check_strongly_safe,
    check_weak_regularity,
    max_write_concurrency,
)
from .core import History
from .scenarios import SCENARIOS, build_scenario, crafted_adaptive_max, adaptive_config
from .sim import Config, ConfigError, Simulator, StorageTrace, make_policy, run


def _writer_clients(history: History) -> set:
    return {op.client for op in history.ops if op.kind == "write"}


def _expect_quiescent(history: History, quiesced: bool, policy: str) -> bool:
    writers = _writer_clients(history)
    return (
        quiesced
        and policy == "fair"
        and not (writers & history.crashed_clients)
        and not history.capped_readers
    )


def run_with_checks(cfg: Config):
    """Execute a run and its protocol-appropriate inline checks."""
    audit_failures: list = []
    hook = None
    if cfg.protocol == "regular" and cfg.n <= 6:
        def hook(sim: Simulator):
            witness = audit_availability_invariant(sim.states, cfg.n, cfg.f, cfg.k)
            if witness:
                audit_failures.append(f"step {sim.step}: {witness}")

    res = run(cfg, invariant_hook=hook)
    reports = []
    h = res.history
    if cfg.protocol == "safe":
        reports.append(check_strongly_safe(h, mode="witness"))
        reports.append(check_liveness(h, "wait-free"))
        reports.append(check_storage_bounds(res.trace, cfg))
    elif cfg.protocol == "regular":
        reports.append(check_strong_regularity(h, mode="witness"))
        reports.append(check_weak_regularity(h, mode="witness"))
        reports.append(check_liveness(h, "fw-terminating"))
        reports.append(
            check_storage_bounds(
                res.trace,
                cfg,
                c_observed=max_write_concurrency(h),
                expect_quiescent=_expect_quiescent(h, res.quiesced, cfg.policy),
                crashed_objects=res.crashed_objects,
            )
        )
        if hook is not None:
            if audit_failures:
                reports.append(
                    CheckReport("availability-invariant", FAIL, audit_failures[0])
                )
            else:
                reports.append(
                    CheckReport("availability-invariant", "pass",
                                f"all (n-f)-subsets at every step")
                )
    else:  # strawman / generic lower-bound runs
        reports.append(check_storage_bounds(res.trace, cfg, history=h))
    return res, reports


def _write_outputs(res, reports, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "trace.csv").write_text(res.trace.to_csv())
    (out_dir / "history.txt").write_text(res.history.to_text())
    lines = [r.line() for r in reports]
    verdict = "FAIL" if any(r.verdict == FAIL for r in reports) else "OK"
    lines.append(f"result: {verdict}")
    (out_dir / "report.txt").write_text("\n".join(lines) + "\n")
    try:
        (out_dir / "config.txt").write_text(res.config.to_text())
    except ConfigError:
        pass  # scripted/generic configs have no text form


def _parse_crash(texts) -> tuple:
    plan = []
    for t in texts or ():
        parts = t.split(":")
        if len(parts) == 2:
            kind, ident, step = "object", parts[0], parts[1]
        elif len(parts) == 3:
            kind, ident, step = parts
        else:
            raise ConfigError(f"bad --crash spec {t!r}, want [kind:]id:step")
        if kind not in ("object", "client"):
            raise ConfigError(f"bad crash kind {kind!r}")
        plan.append((kind, int(ident), int(step)))
    return tuple(sorted(plan, key=lambda e: e[2]))


def cmd_run(args) -> int:
    try:
        if args.config:
            cfg = Config.from_text(Path(args.config).read_text())
        else:
            overrides = {}
            for name in ("n", "f", "k", "seed", "writers", "readers", "steps"):
                val = getattr(args, name, None)
                if val is not None:
                    overrides[name] = val
            cfg = build_scenario(args.scenario, **overrides)
        if args.policy:
            cfg = replace(cfg, policy=args.policy)
        crash = _parse_crash(args.crash)
        if crash:
            cfg = replace(cfg, crash_plan=tuple(sorted(cfg.crash_plan + crash, key=lambda e: e[2])))
        cfg.validate()
    except (ConfigError, KeyError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    res, reports = run_with_checks(cfg)
    if args.out:
        _write_outputs(res, reports, Path(args.out))
    for r in reports:
        print(r.line())
    return 1 if any(r.verdict == FAIL for r in reports) else 0


def cmd_check(args) -> int:
    try:
        history = History.from_text(Path(args.history).read_text())
        meta = history.meta
        cfg = SimpleNamespace(
            protocol=meta["protocol"],
            n=meta["n"],
            f=meta["f"],
            k=meta["k"],
            data_bits=8 * history.data_bytes,
        )
        trace = StorageTrace.from_csv(
            Path(args.trace).read_text(), f=cfg.f, k=cfg.k, data_bits=cfg.data_bits
        )
        if trace.n != cfg.n:
            raise ValueError(f"trace has {trace.n} objects, history says {cfg.n}")
    except (KeyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    reports = []
    if cfg.protocol == "safe":
        reports.append(check_strongly_safe(history, mode="witness"))
        if len(history.ops) <= 6:
            reports.append(check_strongly_safe(history, mode="brute"))
        reports.append(check_liveness(history, "wait-free"))
        reports.append(check_storage_bounds(trace, cfg))
    elif cfg.protocol == "regular":
        reports.append(check_strong_regularity(history, mode="witness"))
        reports.append(check_weak_regularity(history, mode="witness"))
        if len(history.ops) <= 6:
            reports.append(check_strong_regularity(history, mode="brute"))
        reports.append(check_liveness(history, "fw-terminating"))
        reports.append(
            check_storage_bounds(
                trace,
                cfg,
                c_observed=max_write_concurrency(history),
                expect_quiescent=_expect_quiescent(
                    history, history.meta.get("quiesced", False), meta.get("policy", "")
                ),
                crashed_objects=frozenset(meta.get("crashed_objects", ())),
            )
        )
    else:
        reports.append(check_storage_bounds(trace, cfg, history=history))
    for r in reports:
        print(r.line())
    return 1 if any(r.verdict == FAIL for r in reports) else 0


def cmd_sweep(args) -> int:
    values = [int(v) for v in args.values.split(",")]
    rows = []
    failed = False
    for value in values:
        configs = []
        if args.param == "c":
            configs.append(crafted_adaptive_max(value, f=args.f or 1, k=args.k or 4))
            for s in range(args.seeds):
                configs.append(adaptive_config(value, s, f=args.f or 1, k=args.k or 4))
        elif args.param == "writers":
            configs.append(build_scenario(args.scenario, writers=value, seed=args.seed or 0))
        elif args.param == "seed":
            configs.append(build_scenario(args.scenario, seed=value))
        else:
            print(f"error: unknown sweep param {args.param!r}", file=sys.stderr)
            return 2
        max_bits = Fraction(0)
        bound = ""
        for cfg in configs:
            res, reports = run_with_checks(cfg)
            failed |= any(r.verdict == FAIL for r in reports)
            max_bits = max(max_bits, res.trace.max_total())
            if args.param == "c":
                bound = str((2 * cfg.f + cfg.k) * (value + 1) * Fraction(cfg.data_bits, cfg.k))
        rows.append((args.param, value, str(max_bits), bound))
    table = ["param,value,max_total_bits,bound_bits"]
    table += [",".join(str(c) for c in row) for row in rows]
    text = "\n".join(table) + "\n"
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "sweep.csv").write_text(text)
    print(text, end="")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="codedreg", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="run a named scenario or a config file")
    runp.add_argument("scenario", nargs="?", choices=SCENARIOS, help="named scenario")
    runp.add_argument("--config", help="config file (key=value plus client lines)")
    runp.add_argument("--n", type=int)
    runp.add_argument("--f", type=int)
    runp.add_argument("--k", type=int)
    runp.add_argument("--seed", type=int)
    runp.add_argument("--steps", type=int)
    runp.add_argument("--policy", choices=("fair", "ad"))
    runp.add_argument("--writers", type=int)
    runp.add_argument("--readers", type=int)
    runp.add_argument("--crash", action="append", metavar="[KIND:]ID:STEP")
    runp.add_argument("--out", metavar="DIR")
    runp.set_defaults(func=cmd_run)

    checkp = sub.add_parser("check", help="check a recorded history + trace")
    checkp.add_argument("history")
    checkp.add_argument("trace")
    checkp.set_defaults(func=cmd_check)

    sweepp = sub.add_parser("sweep", help="run a scenario per parameter value")
    sweepp.add_argument("--param", required=True, choices=("c", "writers", "seed"))
    sweepp.add_argument("--values", required=True, help="comma-separated values")
    sweepp.add_argument("--scenario", default="regular-adaptive", choices=SCENARIOS)
    sweepp.add_argument("--seeds", type=int, default=5, help="fuzz seeds per value (c sweep)")
    sweepp.add_argument("--seed", type=int)
    sweepp.add_argument("--f", type=int)
    sweepp.add_argument("--k", type=int)
    sweepp.add_argument("--out", metavar="DIR")
    sweepp.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run" and not args.scenario and not args.config:
        print("error: give a scenario name or --config FILE", file=sys.stderr)
        return 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
