"""Command-line front end.

Subcommands:
    run            drive one full simulated scenario from a JSON config
    bench-batch    benchmark batched vs per-item upload verification
    bench-warrant  benchmark warrant issuance and delta updates
    selftest       deterministic protocol battery, no config required

Exit codes: 0 success, 1 protocol or verification failure, 2 bad usage/config.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import sys
from pathlib import Path

from .bench import bench_batch, bench_warrant, write_csv
from .bus import FaultRule
from .polynomials import PolicyNotSatisfied, quotient_mask
from .sim import (
    ConfigError,
    SimConfig,
    phase_access,
    phase_issue_warrant,
    phase_trace,
    phase_update,
    phase_upload,
    setup_system,
)

TRAFFIC_COLUMNS = ("phase", "msg_type", "sender", "receiver", "wire_bytes", "payload_bytes")


def _load_config(args) -> SimConfig:
    config = SimConfig.from_json(args.config)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    return config


def _expected_access(policy, permissions) -> str:
    try:
        quotient_mask(tuple(policy), tuple(permissions))
        return "ok"
    except PolicyNotSatisfied:
        return "denied"


def _write_traffic_csv(records, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRAFFIC_COLUMNS)
        for r in records:
            writer.writerow(
                [r.phase, f"{r.msg_type:#04x}", r.sender, r.receiver, r.wire_bytes, r.payload_bytes]
            )
    return path


def cmd_run(args) -> int:
    config = _load_config(args)
    out_dir = Path(args.out)
    system = setup_system(config)
    failures: list[str] = []
    print(f"setup: {config.n_wi} issuers, {config.n_dp} providers, "
          f"{config.n_rsu} units, {config.n_in} requesters (seed {config.seed})")

    for name in system.ins:
        report = phase_issue_warrant(system, name)
        print(f"warrant {name}: {report.status}"
              + (f" ({report.reason})" if report.reason else ""))
        if report.status != "ok":
            failures.append(f"issuance for {name}: {report.reason}")

    accident = b"ACC-0001"
    dp_names = list(system.dps)
    payloads = [f"sensor record from {n}".encode() for n in dp_names]
    up = phase_upload(system, dp_names, accident, payloads)
    print(f"upload: {len(up.accepted)} accepted, {len(up.rejected)} rejected, "
          f"{up.wire_bytes} wire bytes")
    if up.rejected:
        failures.append(f"valid uploads rejected: {up.rejected}")

    requester = next(iter(system.ins))
    want = _expected_access(config.policy, config.permissions)
    got_plain: dict[int, bytes] = {}
    for idx in up.record_indices:
        report = phase_access(system, requester, accident, idx)
        print(f"access {requester} record {idx}: {report.status}"
              + (f" ({report.reason})" if report.reason else ""))
        if report.status != want:
            failures.append(f"record {idx}: expected {want}, got {report.status}")
        if report.plaintext is not None:
            got_plain[idx] = report.plaintext
    for idx, plain in got_plain.items():
        if plain != payloads[idx]:
            failures.append(f"record {idx}: plaintext mismatch")

    in_e = system.ins[requester]
    if in_e.last_response is not None and up.record_indices:
        leak = phase_trace(system, in_e.last_response.masked_body, accident,
                           up.record_indices[-1])
        print(f"trace of leaked response: {leak.status}"
              + (f" -> {leak.identity}" if leak.identity else ""))
        if leak.status != "identified" or leak.identity != requester:
            failures.append("trace did not identify the leaking requester")

    granted = [i for i in range(1, config.n_wi + 1) if config.permissions[i - 1] == 1]
    if granted and up.record_indices:
        idx = granted[0]
        retired = list(config.permissions)
        retired[idx - 1] = 0
        want_retired = _expected_access(config.policy, retired)
        for bit, expect in ((0, want_retired), (1, want)):
            rep = phase_update(system, requester, [(idx, bit)])
            verb = "retire" if bit == 0 else "re-grant"
            acc = phase_access(system, requester, accident, up.record_indices[0])
            print(f"update ({verb} issuer {idx}): {rep.status}; access now {acc.status}")
            if rep.status != "ok":
                failures.append(f"update {verb} issuer {idx}: {rep.reason}")
            if acc.status != expect:
                failures.append(f"after {verb}: expected {expect}, got {acc.status}")

    csv_path = _write_traffic_csv(system.bus.log, out_dir / "run_traffic.csv")
    print(f"traffic log: {csv_path} ({len(system.bus.log)} messages)")
    if not args.no_figures:
        from .plots import plot_traffic

        png = plot_traffic(system.bus.log, out_dir / "run_traffic.png")
        print(f"figure: {png}")

    if failures:
        for f in failures:
            print(f"FAILURE: {f}", file=sys.stderr)
        return 1
    print("run complete: all phases behaved as the config predicts")
    return 0


def cmd_bench_batch(args) -> int:
    config = _load_config(args)
    rows = bench_batch(config, args.max_batch, args.reps)
    out_dir = Path(args.out)
    csv_path = write_csv(out_dir / "bench_batch.csv", rows)
    print(f"wrote {csv_path} ({len(rows)} rows)")
    for r in rows:
        print(f"  {r.phase:>13} B={r.param_value:<4} {r.wall_time_ns/1e6:9.3f} ms "
              f"{r.group_mults:5d} mults {r.bytes:8d} bytes")
    if not args.no_figures:
        from .plots import plot_batch

        png = plot_batch(rows, out_dir / "bench_batch.png")
        print(f"figure: {png}")
    return 0


def cmd_bench_warrant(args) -> int:
    config = _load_config(args)
    rows = bench_warrant(config, args.reps)
    out_dir = Path(args.out)
    csv_path = write_csv(out_dir / "bench_warrant.csv", rows)
    print(f"wrote {csv_path} ({len(rows)} rows)")
    for r in rows:
        print(f"  {r.phase:>15} {r.param_name}={r.param_value:<3} "
              f"{r.wall_time_ns/1e6:9.3f} ms {r.group_mults:5d} mults {r.bytes:8d} bytes")
    if not args.no_figures:
        from .plots import plot_warrant

        png = plot_warrant(rows, out_dir / "bench_warrant.png")
        print(f"figure: {png}")
    return 0


def cmd_selftest(args) -> int:
    seed = args.seed if args.seed is not None else 7
    checks: list[tuple[str, bool]] = []

    def check(name: str, ok: bool) -> None:
        checks.append((name, ok))
        print(f"{'PASS' if ok else 'FAIL'}  {name}")

    base = SimConfig(n_wi=4, n_dp=3, n_rsu=1, n_in=2, batch_size=2,
                     policy=(1, 0, 1, 0), permissions=(1, 1, 1, 0), seed=seed)

    system = setup_system(base)
    issue = phase_issue_warrant(system, "IN-1")
    check("warrant issuance completes", issue.status == "ok")

    payloads = [b"alpha", b"bravo", b"charlie"]
    up = phase_upload(system, list(system.dps), b"SELFTEST", payloads)
    check("batch upload accepted", up.accepted == [0, 1, 2] and not up.rejected)

    acc = phase_access(system, "IN-1", b"SELFTEST", 0)
    check("authorized access decrypts", acc.status == "ok" and acc.plaintext == b"alpha")

    leak = phase_trace(system, system.ins["IN-1"].last_response.masked_body, b"SELFTEST", 0)
    check("leaked response traces to requester",
          leak.status == "identified" and leak.identity == "IN-1")

    rep = phase_update(system, "IN-1", [(1, 0)])
    after = phase_access(system, "IN-1", b"SELFTEST", 0)
    check("retiring a required permission denies access",
          rep.status == "ok" and after.status == "denied")
    rep = phase_update(system, "IN-1", [(1, 1)])
    again = phase_access(system, "IN-1", b"SELFTEST", 0)
    check("re-granting restores access",
          rep.status == "ok" and again.status == "ok" and again.plaintext == b"alpha")

    denied_cfg = dataclasses.replace(base, permissions=(1, 1, 0, 0), seed=seed + 1)
    d_system = setup_system(denied_cfg)
    phase_issue_warrant(d_system, "IN-1")
    phase_upload(d_system, list(d_system.dps), b"SELFTEST", payloads)
    d_acc = phase_access(d_system, "IN-1", b"SELFTEST", 0)
    check("insufficient permissions fail closed", d_acc.status == "denied")

    t_system = setup_system(dataclasses.replace(base, seed=seed + 2))
    phase_issue_warrant(t_system, "IN-1")
    t_system.bus.faults.append(FaultRule(kind="tamper", sender="DP-2", count=1))
    t_up = phase_upload(t_system, list(t_system.dps), b"SELFTEST", payloads)
    check("tampered upload isolated, rest accepted",
          len(t_up.accepted) == 2 and len(t_up.rejected) == 1)

    failures = [name for name, ok in checks if not ok]
    print(f"{len(checks) - len(failures)}/{len(checks)} selftest checks passed")
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dprov",
        description="Privacy-preserving accident-data provision: simulation and benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config: bool) -> None:
        if needs_config:
            p.add_argument("--config", required=True, help="scenario JSON file")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")

    p_run = sub.add_parser("run", help="run one full scenario")
    common(p_run, needs_config=True)
    p_run.set_defaults(func=cmd_run)

    p_bb = sub.add_parser("bench-batch", help="benchmark upload verification")
    common(p_bb, needs_config=True)
    p_bb.add_argument("--reps", type=int, default=10, help="timed repetitions (min 10)")
    p_bb.add_argument("--max-batch", type=int, default=64, help="largest batch size")
    p_bb.set_defaults(func=cmd_bench_batch)

    p_bw = sub.add_parser("bench-warrant", help="benchmark warrant issuance/update")
    common(p_bw, needs_config=True)
    p_bw.add_argument("--reps", type=int, default=10, help="timed repetitions (min 10)")
    p_bw.set_defaults(func=cmd_bench_warrant)

    p_st = sub.add_parser("selftest", help="deterministic protocol battery")
    p_st.add_argument("--seed", type=int, default=None)
    p_st.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
