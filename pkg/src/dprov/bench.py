"""Benchmark harness: batch verification scaling and warrant traffic costs.

Rows are written as CSV with a fixed column set so downstream tooling can
consume them without knowing which benchmark produced them:

    phase,param_name,param_value,wall_time_ns,group_mults,bytes,reps

wall_time_ns is the median over `reps` timed repetitions of one invocation.
group_mults comes from the instrumented group layer, so it is exact and
deterministic; bytes is the serialized traffic the measured operation covers.
"""

from __future__ import annotations

import csv
import statistics
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from .batchsig import UploadSignature, pbvm_batch_verify, pbvm_sign
from .group import count_group_ops
from .messages import encode_upload
from .policycrypt import dacm_encrypt
from .sim import (
    SimConfig,
    SystemState,
    phase_issue_warrant,
    phase_update,
    setup_system,
)

MIN_REPS = 10

CSV_COLUMNS = ("phase", "param_name", "param_value", "wall_time_ns", "group_mults", "bytes", "reps")


@dataclass(frozen=True)
class BenchRow:
    phase: str
    param_name: str
    param_value: int
    wall_time_ns: int
    group_mults: int
    bytes: int
    reps: int


def write_csv(path: "str | Path", rows: Sequence[BenchRow]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in rows:
            writer.writerow(
                [r.phase, r.param_name, r.param_value, r.wall_time_ns, r.group_mults, r.bytes, r.reps]
            )
    return path


def read_csv(path: "str | Path") -> list[BenchRow]:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV columns: {reader.fieldnames}")
        return [
            BenchRow(
                phase=row["phase"],
                param_name=row["param_name"],
                param_value=int(row["param_value"]),
                wall_time_ns=int(row["wall_time_ns"]),
                group_mults=int(row["group_mults"]),
                bytes=int(row["bytes"]),
                reps=int(row["reps"]),
            )
            for row in reader
        ]


def _median_ns(fn: Callable[[], object], reps: int) -> int:
    samples = []
    for _ in range(reps):
        t0 = time.perf_counter_ns()
        fn()
        samples.append(time.perf_counter_ns() - t0)
    return int(statistics.median(samples))


def batch_sizes(max_batch: int) -> list[int]:
    """Doubling sequence 1, 2, 4, ... capped at and including max_batch."""
    if max_batch < 1:
        raise ValueError("max_batch must be positive")
    sizes = []
    b = 1
    while b <= max_batch:
        sizes.append(b)
        b *= 2
    if sizes[-1] != max_batch:
        sizes.append(max_batch)
    return sizes


def _make_uploads(
    system: SystemState, count: int, accident_id: bytes
) -> tuple[list[tuple[bytes, UploadSignature]], int]:
    """Prepare `count` signed uploads and the bytes they occupy on the wire."""
    dp = next(iter(system.dps.values()))
    items = []
    total = 0
    for i in range(count):
        payload = b"bench record %08d" % i
        core = dacm_encrypt(system.pp, dp.policy, payload, accident_id, system.rng)
        usig = pbvm_sign(
            dp.token, dp.rsu_pks[0], system.pp.pk_ta, core.c2, accident_id, system.rng
        )
        total += len(encode_upload(core, usig))
        items.append((core.c2, usig))
    return items, total


def bench_batch(config: SimConfig, max_batch: int, reps: int) -> list[BenchRow]:
    """Compare one batched verification against per-item verification."""
    if reps < MIN_REPS:
        raise ValueError(f"reps must be at least {MIN_REPS}")
    system = setup_system(config)
    rsu = next(iter(system.rsus.values()))
    rows = []
    for b in batch_sizes(max_batch):
        items, wire = _make_uploads(system, b, b"BENCH-%04d" % b)

        def run_batched():
            if not pbvm_batch_verify(rsu.sk, items):
                raise AssertionError("benchmark uploads failed batch verification")

        def run_single():
            for item in items:
                if not pbvm_batch_verify(rsu.sk, [item]):
                    raise AssertionError("benchmark upload failed single verification")

        with count_group_ops() as ops:
            run_batched()
        rows.append(
            BenchRow("batch-verify", "batch_size", b, _median_ns(run_batched, reps),
                     ops.scalar_mults, wire, reps)
        )
        with count_group_ops() as ops:
            run_single()
        rows.append(
            BenchRow("single-verify", "batch_size", b, _median_ns(run_single, reps),
                     ops.scalar_mults, wire, reps)
        )
    return rows


def bench_warrant(config: SimConfig, reps: int) -> list[BenchRow]:
    """Measure full issuance, then updates touching 1..n_wi issuers.

    Timed repetitions re-assert the bits the system already holds, so state
    is identical before and after every run and repetitions stay comparable.
    """
    if reps < MIN_REPS:
        raise ValueError(f"reps must be at least {MIN_REPS}")
    system = setup_system(config)
    in_name = next(iter(system.ins))
    rows = []

    def issue():
        report = phase_issue_warrant(system, in_name)
        if report.status != "ok":
            raise AssertionError(f"issuance failed in benchmark: {report.reason}")
        return report

    with count_group_ops() as ops:
        report = issue()
    rows.append(
        BenchRow("warrant-issue", "n_wi", config.n_wi, _median_ns(issue, reps),
                 ops.scalar_mults, report.wire_bytes, reps)
    )

    for n_u in range(1, config.n_wi + 1):
        delta = [(i, config.permissions[i - 1]) for i in range(1, n_u + 1)]

        def update():
            report = phase_update(system, in_name, delta)
            if report.status != "ok":
                raise AssertionError(f"update failed in benchmark: {report.reason}")
            return report

        with count_group_ops() as ops:
            report = update()
        rows.append(
            BenchRow("warrant-update", "n_u", n_u, _median_ns(update, reps),
                     ops.scalar_mults, report.wire_bytes, reps)
        )
    return rows
