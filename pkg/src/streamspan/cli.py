"""Command-line front end.

Two subcommands: `run` executes a scheduling pass over a machine config
and a job stream; `generate` writes a seeded random instance.  Reports go
to stdout as `key: value` lines; schedules to a CSV file.  Every error
class has its own exit code so pipelines can branch on failures:

    0  success
    1  internal contract violation (should not happen)
    2  bad usage, config file, or machine park
    3  bad job value (position reported)
    4  declared maximum or estimate contract violated
    5  enumeration budget exceeded
    6  second pass saw a different stream than the first
"""

from __future__ import annotations

import argparse
import csv
import random
import sys
from dataclasses import replace
from typing import Iterator, Sequence, TextIO

import numpy as np

from .capacity import MachinePark, MachineTimeline
from .errors import (
    BudgetExceededError,
    ConfigError,
    JobValueError,
    PmaxContractError,
    StreamspanError,
    TwoPassMismatchError,
)
from .grouping import KnownPmaxLedger, UnknownPmaxLedger, derive_params
from .oracle import exact_optimum
from .pipeline import REGIMES, make_ledger, run_stream
from .schedule import Schedule, second_pass
from .search import DEFAULT_BUDGET

__all__ = [
    "EXIT_CODES",
    "parse_machine_config",
    "parse_machine_config_text",
    "generate_instance",
    "write_schedule_csv",
    "main",
]

MODES = ("one-pass", "two-pass", "offline", "oracle")

EXIT_CODES = {
    ConfigError: 2,
    JobValueError: 3,
    PmaxContractError: 4,
    BudgetExceededError: 5,
    TwoPassMismatchError: 6,
}

_READ_CHARS = 1 << 16


# --- machine config ---------------------------------------------------------


def parse_machine_config_text(text: str, source: str = "<config>") -> MachinePark:
    """Build a MachinePark from the structured text format.

    Scalar lines `m N`, `m1 N`, `e0 X` in any order, then one
    `machine <index> <breakpoint> <ratio> ...` line per machine; `#`
    starts a comment.  Every machine 1..m must appear exactly once.
    """
    m = m1 = None
    e0 = None
    machine_lines: dict[int, tuple[int, list[str]]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        field, args = toks[0], toks[1:]

        def bad(msg: str):
            return ConfigError(f"{source}:{lineno}: {msg}")

        if field in ("m", "m1"):
            if len(args) != 1:
                raise bad(f"{field} takes exactly one value")
            try:
                val = int(args[0])
            except ValueError:
                raise bad(f"{field} must be an integer, got {args[0]!r}") from None
            if field == "m":
                if m is not None:
                    raise bad("duplicate m line")
                m = val
            else:
                if m1 is not None:
                    raise bad("duplicate m1 line")
                m1 = val
        elif field == "e0":
            if len(args) != 1:
                raise bad("e0 takes exactly one value")
            try:
                val = float(args[0])
            except ValueError:
                raise bad(f"e0 must be a number, got {args[0]!r}") from None
            if e0 is not None:
                raise bad("duplicate e0 line")
            e0 = val
        elif field == "machine":
            if not args:
                raise bad("machine line needs an index")
            try:
                idx = int(args[0])
            except ValueError:
                raise bad(f"machine index must be an integer, got {args[0]!r}") from None
            if idx in machine_lines:
                raise bad(f"duplicate machine {idx} line")
            machine_lines[idx] = (lineno, args[1:])
        else:
            raise bad(f"unknown field {field!r}")
    if m is None:
        raise ConfigError(f"{source}: missing m line")
    if m1 is None:
        raise ConfigError(f"{source}: missing m1 line")
    if e0 is None:
        raise ConfigError(f"{source}: missing e0 line")
    missing = [i for i in range(1, m + 1) if i not in machine_lines]
    if missing:
        raise ConfigError(f"{source}: missing machine line(s) for {missing}")
    extra = [i for i in machine_lines if not (1 <= i <= m)]
    if extra:
        raise ConfigError(f"{source}: machine index(es) {sorted(extra)} outside 1..{m}")
    timelines = []
    for idx in range(1, m + 1):
        lineno, rest = machine_lines[idx]
        if len(rest) % 2:
            raise ConfigError(
                f"{source}:{lineno}: machine {idx} needs (breakpoint, ratio) pairs, "
                f"got {len(rest)} values"
            )
        try:
            nums = [float(tok) for tok in rest]
        except ValueError:
            raise ConfigError(
                f"{source}:{lineno}: machine {idx} has a non-numeric value"
            ) from None
        timelines.append(
            MachineTimeline(
                machine_index=idx,
                breakpoints=tuple(nums[0::2]),
                ratios=tuple(nums[1::2]),
            )
        )
    return MachinePark(machines=tuple(timelines), floor_machines=m1, ratio_floor=e0)


def parse_machine_config(path: str) -> MachinePark:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_machine_config_text(fh.read(), source=path)


# --- job streams -------------------------------------------------------------


def _token_chunks(fh: TextIO) -> Iterator[list[str]]:
    """Whitespace-separated tokens in bounded-size batches."""
    carry = ""
    while True:
        block = fh.read(_READ_CHARS)
        if not block:
            break
        block = carry + block
        toks = block.split()
        if toks and not block[-1].isspace():
            carry = toks.pop()
        else:
            carry = ""
        if toks:
            yield toks
    if carry:
        yield [carry]


def _parse_job(tok: str, position: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise JobValueError(
            f"unparsable job value {tok!r} at position {position}", position=position
        ) from None


def _float_chunks(fh: TextIO) -> Iterator[np.ndarray]:
    position = 0
    for toks in _token_chunks(fh):
        vals = np.empty(len(toks), np.float64)
        for i, tok in enumerate(toks):
            vals[i] = _parse_job(tok, position + i)
        position += len(toks)
        yield vals


def _iter_floats(fh: TextIO) -> Iterator[float]:
    position = 0
    for toks in _token_chunks(fh):
        for tok in toks:
            yield _parse_job(tok, position)
            position += 1


def _read_all_jobs(fh: TextIO) -> np.ndarray:
    chunks = list(_float_chunks(fh))
    if not chunks:
        return np.empty(0, np.float64)
    return np.concatenate(chunks)


# --- schedule output ----------------------------------------------------------


def write_schedule_csv(path: str, schedule: Schedule) -> None:
    """One row per job plus a trailing makespan row."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["job_id", "machine", "start", "completion"])
        for pl in schedule.placements:
            w.writerow([pl.job_id, pl.machine, repr(pl.start), repr(pl.completion)])
        w.writerow(["makespan", repr(schedule.makespan)])


# --- instance generator --------------------------------------------------------


def generate_instance(
    seed: int,
    m: int,
    m1: int,
    e0: float,
    n: int,
    intervals: tuple[int, int] = (0, 3),
    breakpoint_max: int = 20,
    ratio_choices: Sequence[float] = (0.25, 0.5, 1.0),
    jobs_max: int = 16,
) -> tuple[str, str]:
    """Seed-determined (config text, jobs text) pair.

    Breakpoints are distinct integers in [1, breakpoint_max]; ratios come
    from ratio_choices, restricted to >= e0 on machines 1..m1; job times
    are integers in [1, jobs_max].
    """
    lo, hi = intervals
    if not (0 <= lo <= hi):
        raise ConfigError(f"interval count range must satisfy 0 <= lo <= hi, got {lo}:{hi}")
    if hi > breakpoint_max:
        raise ConfigError(
            f"up to {hi} distinct integer breakpoints cannot fit in [1, {breakpoint_max}]"
        )
    if jobs_max < 1:
        raise ConfigError(f"jobs-max must be >= 1, got {jobs_max}")
    if not ratio_choices:
        raise ConfigError("need at least one ratio choice")
    for r in ratio_choices:
        if not (0.0 < r <= 1.0):
            raise ConfigError(f"ratio choice {r} outside (0, 1]")
    floor_choices = [r for r in ratio_choices if r >= e0]
    if not floor_choices:
        raise ConfigError(f"no ratio choice is >= e0 ({e0})")
    rng = random.Random(seed)
    lines = [f"m {m}", f"m1 {m1}", f"e0 {e0!r}"]
    for i in range(1, m + 1):
        k = rng.randint(lo, hi)
        bps = sorted(rng.sample(range(1, breakpoint_max + 1), k))
        pool = floor_choices if i <= m1 else list(ratio_choices)
        parts = [f"machine {i}"]
        for b in bps:
            parts.append(str(b))
            parts.append(repr(float(rng.choice(pool))))
        lines.append(" ".join(parts))
    config_text = "\n".join(lines) + "\n"
    jobs = [str(rng.randint(1, jobs_max)) for _ in range(n)]
    rows = [" ".join(jobs[i : i + 16]) for i in range(0, len(jobs), 16)]
    jobs_text = "\n".join(rows) + ("\n" if rows else "")
    return config_text, jobs_text


# --- run subcommand -------------------------------------------------------------


def _open_jobs(path: str) -> TextIO:
    if path == "-":
        return sys.stdin
    return open(path, "r", encoding="utf-8")


def _cmd_run(args) -> int:
    park = parse_machine_config(args.config)
    params = derive_params(
        m=park.m,
        floor_machines=park.floor_machines,
        ratio_floor=park.ratio_floor,
        epsilon=args.epsilon,
        top_band_override=args.gamma0_override,
        retain_limit_override=args.n0_override,
    )
    needs_schedule = args.mode in ("two-pass", "offline")
    if needs_schedule and not args.schedule_out:
        raise ConfigError(f"mode {args.mode} writes a schedule; pass --schedule-out")
    if args.schedule_out and not needs_schedule:
        raise ConfigError("--schedule-out only applies to two-pass and offline modes")
    if args.mode == "two-pass" and args.jobs == "-":
        raise ConfigError("two-pass reads the stream twice; pass a file, not stdin")

    if args.mode == "oracle":
        fh = _open_jobs(args.jobs)
        try:
            jobs = _read_all_jobs(fh)
        finally:
            if fh is not sys.stdin:
                fh.close()
        bad = np.flatnonzero(~(np.isfinite(jobs) & (jobs > 0)))
        if bad.size:
            pos = int(bad[0])
            raise JobValueError(
                f"processing time must be finite and > 0, got {jobs[pos]} "
                f"at position {pos}",
                position=pos,
            )
        result = exact_optimum(park, jobs, budget=args.budget)
        print(f"mode: {args.mode!r}")
        print(f"job_count: {len(jobs)}")
        print(f"optimal_makespan: {result.makespan}")
        if args.stats:
            print(f"witness_ordinal: {result.ordinal}")
        return 0

    if args.mode == "offline":
        fh = _open_jobs(args.jobs)
        try:
            jobs = _read_all_jobs(fh)
        finally:
            if fh is not sys.stdin:
                fh.close()
        if jobs.size:
            ledger = KnownPmaxLedger(params, float(jobs.max()))
        else:
            ledger = UnknownPmaxLedger(params)
        report, artifacts = run_stream(
            park, params, ledger, [jobs], mode="offline",
            regime="pmax-given", budget=args.budget,
        )
        schedule = second_pass(park, artifacts, (float(p) for p in jobs))
        write_schedule_csv(args.schedule_out, schedule)
        report = _with_schedule(report, schedule, args.schedule_out)
        for line in report.as_lines(stats=args.stats):
            print(line)
        return 0

    ledger = make_ledger(
        params, args.regime,
        pmax=args.pmax, pmax_estimate=args.pmax_estimate, alpha=args.alpha,
    )
    fh = _open_jobs(args.jobs)
    try:
        report, artifacts = run_stream(
            park, params, ledger, _float_chunks(fh),
            mode=args.mode, regime=args.regime, budget=args.budget,
        )
    finally:
        if fh is not sys.stdin:
            fh.close()

    if args.mode == "two-pass":
        with open(args.jobs, "r", encoding="utf-8") as fh2:
            schedule = second_pass(park, artifacts, _iter_floats(fh2))
        write_schedule_csv(args.schedule_out, schedule)
        report = _with_schedule(report, schedule, args.schedule_out)

    for line in report.as_lines(stats=args.stats):
        print(line)
    return 0


def _with_schedule(report, schedule: Schedule, path: str):
    return replace(report, makespan=schedule.makespan, schedule_path=path)


def _cmd_generate(args) -> int:
    try:
        lo_s, hi_s = args.intervals.split(":")
        intervals = (int(lo_s), int(hi_s))
    except ValueError:
        raise ConfigError(
            f"--intervals must look like LO:HI, got {args.intervals!r}"
        ) from None
    try:
        ratio_choices = tuple(float(tok) for tok in args.ratios.split(","))
    except ValueError:
        raise ConfigError(f"--ratios must be comma-separated numbers, got {args.ratios!r}") from None
    if not (1 <= args.m1 <= args.m):
        raise ConfigError(f"m1 must be in [1, {args.m}], got {args.m1}")
    config_text, jobs_text = generate_instance(
        seed=args.seed,
        m=args.m,
        m1=args.m1,
        e0=args.e0,
        n=args.n,
        intervals=intervals,
        breakpoint_max=args.breakpoint_max,
        ratio_choices=ratio_choices,
        jobs_max=args.jobs_max,
    )
    with open(args.config_out, "w", encoding="utf-8") as fh:
        fh.write(config_text)
    with open(args.jobs_out, "w", encoding="utf-8") as fh:
        fh.write(jobs_text)
    print(f"config: {args.config_out}")
    print(f"jobs: {args.jobs_out}")
    return 0


# --- argument parsing -------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="streamspan",
        description="Streaming approximate makespan for machines with shared intervals.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scheduling pass over a job stream")
    run.add_argument("--config", required=True, help="machine config file")
    run.add_argument("--jobs", default="-", help="job stream file, or - for stdin")
    run.add_argument("--mode", choices=MODES, default="one-pass")
    run.add_argument("--regime", choices=REGIMES, default="pmax-unknown")
    run.add_argument("--epsilon", type=float, default=0.5, help="approximation slack")
    run.add_argument("--pmax", type=float, default=None,
                     help="exact largest processing time (regime pmax-given)")
    run.add_argument("--pmax-estimate", type=float, default=None,
                     help="overestimate of the largest processing time")
    run.add_argument("--alpha", type=float, default=1.0,
                     help="estimate is at most alpha times the true maximum")
    run.add_argument("--gamma0-override", type=int, default=None,
                     help="override the derived band count (drops the guarantee)")
    run.add_argument("--n0-override", type=int, default=None,
                     help="override the derived retain limit (drops the guarantee)")
    run.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                     help="max assignments the search may enumerate")
    run.add_argument("--schedule-out", default=None,
                     help="schedule CSV path (two-pass and offline modes)")
    run.add_argument("--stats", action="store_true",
                     help="print derived parameters, bounds, and split timings")
    run.set_defaults(func=_cmd_run)

    gen = sub.add_parser("generate", help="write a seeded random instance")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--m", type=int, required=True, help="machine count")
    gen.add_argument("--m1", type=int, required=True, help="leading machines with ratio >= e0")
    gen.add_argument("--e0", type=float, required=True, help="ratio floor on machines 1..m1")
    gen.add_argument("--n", type=int, required=True, help="job count")
    gen.add_argument("--config-out", required=True)
    gen.add_argument("--jobs-out", required=True)
    gen.add_argument("--intervals", default="0:3", help="shared intervals per machine, LO:HI")
    gen.add_argument("--breakpoint-max", type=int, default=20)
    gen.add_argument("--ratios", default="0.25,0.5,1", help="comma-separated ratio choices")
    gen.add_argument("--jobs-max", type=int, default=16)
    gen.set_defaults(func=_cmd_generate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except StreamspanError as exc:
        print(f"streamspan: error: {exc}", file=sys.stderr)
        for cls in type(exc).__mro__:
            if cls in EXIT_CODES:
                return EXIT_CODES[cls]
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
