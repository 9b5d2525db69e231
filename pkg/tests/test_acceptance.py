"""Acceptance battery: eight system-level criteria, one pass/fail line each.

Every criterion is deterministic (fixed seeds) and prints its verdict directly
to the terminal, bypassing pytest capture, so a full run always shows the
eight lines.  Time budgets are generous on purpose; the group layer is pure
Python.
"""

import random
import statistics
import sys
import time

from conftest import record_verdict

from dprov import messages as msg
from dprov.batchsig import pbvm_batch_verify, pbvm_isolate_invalid, pbvm_sign, rsu_keypair
from dprov.envelope import env_keygen
from dprov.group import count_group_ops, get_curve, h1
from dprov.params import build_public_params, generate_master_secrets
from dprov.policycrypt import (
    AccessDenied,
    AccessPolicy,
    AccessResponse,
    DecryptionError,
    dacm_decrypt,
    dacm_encrypt,
    ta_mask,
)
from dprov.polynomials import ShareSet, shamir_recover, shamir_split
from dprov.sim import (
    SimConfig,
    phase_access,
    phase_issue_warrant,
    phase_trace,
    phase_update,
    phase_upload,
    setup_system,
)
from dprov.store import RecordStore
from dprov.warrants import (
    WIState,
    in_aggregate,
    wi_blind_exchange,
    wi_issue_partial,
)

CURVE = get_curve("brainpoolp160r1")


def _verdict(num: int, label: str, fn) -> None:
    try:
        fn()
    except BaseException:
        record_verdict(f"criterion {num} ({label}): FAIL")
        print(f"criterion {num} ({label}): FAIL", file=sys.stderr, flush=True)
        raise
    record_verdict(f"criterion {num} ({label}): PASS")
    print(f"criterion {num} ({label}): PASS", file=sys.stderr, flush=True)


# -- shared direct-construction helpers ---------------------------------------


def _issuer_states(secrets, n_wi, permissions, pid, rng):
    ids = [b"ISS-%d" % i for i in range(1, n_wi + 1)]
    xs = tuple(h1(CURVE, i) for i in ids)
    shares = shamir_split(n_wi, n_wi, secrets.s3, rng, xs=xs)
    return [
        WIState(
            index=i + 1,
            identity=ids[i],
            keypair=env_keygen(CURVE, rng),
            s1=secrets.s1,
            s2=secrets.s2,
            s2_i=secrets.s2_parts[i],
            s3_i=xs[i],
            share=shares.points[i][1],
            published_xs=xs,
            permission_table={pid.v: permissions[i]},
        )
        for i in range(n_wi)
    ]


def _direct_warrant(secrets, n_wi, permissions, pid, rng):
    wis = _issuer_states(secrets, n_wi, permissions, pid, rng)
    blinded = wi_blind_exchange(wis, rng)
    partials = [wi_issue_partial(wi, pid, *blinded[wi.index]) for wi in wis]
    return in_aggregate(partials, expected=n_wi)


# -- criterion 1 ---------------------------------------------------------------


def test_criterion_1_batch_verification_matches_per_item_oracle():
    def body():
        rng = random.Random(1001)
        deadline = 30.0
        start = time.perf_counter()
        secrets = generate_master_secrets(CURVE, 2, rng)
        pk_ta = secrets.sk_ta * CURVE.generator
        sk_rsu, pk_rsu = rsu_keypair(CURVE, secrets.sk_ta, secrets.token, rng)
        pool = []
        for i in range(12):
            c2 = bytes([i]) * 48
            pool.append((c2, pbvm_sign(secrets.token, pk_rsu, pk_ta, c2, b"A", rng)))

        for round_no in range(1000):
            size = rng.randint(1, 6)
            items = [pool[rng.randrange(len(pool))] for _ in range(size)]
            bad = sorted(i for i in range(size) if rng.random() < 0.25)
            for i in bad:
                c2, usig = items[i]
                items[i] = (c2[:-1] + bytes([c2[-1] ^ 0xA5]), usig)
            oracle = [pbvm_batch_verify(sk_rsu, [item]) for item in items]
            batched = pbvm_batch_verify(sk_rsu, items)
            assert batched == all(oracle), f"round {round_no}: batch != oracle"
            if not batched:
                assert pbvm_isolate_invalid(sk_rsu, items) == bad, (
                    f"round {round_no}: isolation missed the tampered set"
                )
        elapsed = time.perf_counter() - start
        assert elapsed < deadline, f"{elapsed:.1f}s over the {deadline:.0f}s budget"

    _verdict(1, "1000 random batches agree with the per-item oracle", body)


# -- criterion 2 ---------------------------------------------------------------


def test_criterion_2_end_to_end_encrypt_store_warrant_decrypt():
    def body():
        rng = random.Random(2002)
        deadline = 60.0
        start = time.perf_counter()
        setups = {}
        for n_wi in range(1, 9):
            secrets = generate_master_secrets(CURVE, n_wi, rng)
            setups[n_wi] = (secrets, build_public_params(CURVE, secrets, n_wi))

        store = RecordStore()
        for round_no in range(1000):
            n_wi = round_no % 8 + 1
            secrets, pp = setups[n_wi]
            permissions = [rng.randint(0, 1) for _ in range(n_wi)]
            policy = [b if rng.random() < 0.7 else 0 for b in permissions]
            pid = CURVE.random_scalar(rng, nonzero=True)
            sk_in = CURVE.random_scalar(rng, nonzero=True)
            warrant = _direct_warrant(secrets, n_wi, permissions, pid, rng)
            payload = rng.randbytes(rng.randint(0, 60))
            accident = b"E2E-%04d" % round_no
            core = dacm_encrypt(pp, AccessPolicy.of(policy), payload, accident, rng)
            idx = store.append(core)
            stored = store.get(accident, idx).core
            resp = AccessResponse(
                AccessPolicy.of(policy), stored.l_points, stored.n1, stored.n2,
                stored.c1, ta_mask(stored.c2, pid, sk_in),
            )
            out = dacm_decrypt(pp, warrant, warrant.permissions, resp, pid, sk_in)
            assert out == payload, f"round {round_no}: plaintext mismatch"

        # fail-closed: insufficient permissions deny, foreign warrants break
        for round_no in range(1000):
            n_wi = round_no % 7 + 2  # need at least one deniable position
            secrets, pp = setups[n_wi]
            pid = CURVE.random_scalar(rng, nonzero=True)
            sk_in = CURVE.random_scalar(rng, nonzero=True)
            if round_no % 2 == 0:
                # permissions miss one policy bit
                policy = [1] * n_wi
                permissions = [1] * n_wi
                permissions[rng.randrange(n_wi)] = 0
                warrant = _direct_warrant(secrets, n_wi, permissions, pid, rng)
                core = dacm_encrypt(pp, AccessPolicy.of(policy), b"x", b"F", rng)
                resp = AccessResponse(
                    AccessPolicy.of(policy), core.l_points, core.n1, core.n2,
                    core.c1, ta_mask(core.c2, pid, sk_in),
                )
                try:
                    dacm_decrypt(pp, warrant, warrant.permissions, resp, pid, sk_in)
                    raise AssertionError(f"round {round_no}: denial did not trigger")
                except AccessDenied:
                    pass
            else:
                # response masked for someone else entirely
                policy = permissions = [1] * n_wi
                warrant = _direct_warrant(secrets, n_wi, permissions, pid, rng)
                pid2 = CURVE.random_scalar(rng, nonzero=True)
                sk2 = CURVE.random_scalar(rng, nonzero=True)
                core = dacm_encrypt(pp, AccessPolicy.of(policy), b"x", b"F", rng)
                resp = AccessResponse(
                    AccessPolicy.of(policy), core.l_points, core.n1, core.n2,
                    core.c1, ta_mask(core.c2, pid2, sk2),
                )
                try:
                    dacm_decrypt(pp, warrant, warrant.permissions, resp, pid, sk_in)
                    raise AssertionError(f"round {round_no}: foreign mask decrypted")
                except DecryptionError:
                    pass
        elapsed = time.perf_counter() - start
        assert elapsed < deadline, f"{elapsed:.1f}s over the {deadline:.0f}s budget"

    _verdict(2, "1000 e2e cycles recover plaintext, 1000 fail closed", body)


# -- criterion 3 ---------------------------------------------------------------


def test_criterion_3_batched_verification_is_cheaper():
    def body():
        rng = random.Random(3003)
        secrets = generate_master_secrets(CURVE, 2, rng)
        pk_ta = secrets.sk_ta * CURVE.generator
        sk_rsu, pk_rsu = rsu_keypair(CURVE, secrets.sk_ta, secrets.token, rng)

        def items_of(b):
            out = []
            for i in range(b):
                c2 = b"%04d" % i * 12
                out.append((c2, pbvm_sign(secrets.token, pk_rsu, pk_ta, c2, b"A", rng)))
            return out

        for b in (2, 8, 64):
            items = items_of(b)
            with count_group_ops() as batched:
                assert pbvm_batch_verify(sk_rsu, items)
            assert batched.scalar_mults == b + 1, f"B={b}: {batched.scalar_mults} mults"
            assert batched.inversions == 1
            with count_group_ops() as single:
                for item in items:
                    assert pbvm_batch_verify(sk_rsu, [item])
            assert single.scalar_mults == 2 * b
            assert single.inversions == b

        items = items_of(64)
        t_batch = []
        t_single = []
        for _ in range(5):
            t0 = time.perf_counter_ns()
            pbvm_batch_verify(sk_rsu, items)
            t_batch.append(time.perf_counter_ns() - t0)
            t0 = time.perf_counter_ns()
            for item in items:
                pbvm_batch_verify(sk_rsu, [item])
            t_single.append(time.perf_counter_ns() - t0)
        ratio = statistics.median(t_batch) / statistics.median(t_single)
        assert ratio <= 0.75, f"batch/individual wall ratio {ratio:.2f} > 0.75"

    _verdict(3, "batch verify costs B+1 mults and <= 0.75x the wall time", body)


# -- criterion 4 ---------------------------------------------------------------


def test_criterion_4_updates_are_delta_priced():
    def body():
        config = SimConfig(
            n_wi=6, n_dp=1, n_rsu=1, n_in=1, batch_size=1,
            policy=(1, 0, 1, 0, 0, 0), permissions=(1, 1, 1, 1, 0, 0), seed=404,
        )
        system = setup_system(config)
        issue = phase_issue_warrant(system, "IN-1")
        assert issue.status == "ok"

        xs, ys = [], []
        for n_u in range(1, config.n_wi + 1):
            delta = [(i, config.permissions[i - 1]) for i in range(1, n_u + 1)]
            report = phase_update(system, "IN-1", delta)
            assert report.status == "ok"
            xs.append(n_u)
            ys.append(report.wire_bytes)
        slope, intercept = statistics.linear_regression(xs, ys)
        assert slope > 0
        for x, y in zip(xs, ys):
            assert abs(intercept + slope * x - y) < 1e-6, "update bytes not linear in n_u"
        assert ys[0] < issue.wire_bytes, (
            f"single update ({ys[0]} B) should undercut issuance ({issue.wire_bytes} B)"
        )

        # semantic effect: the refreshed warrant opens what the new bits allow
        phase_upload(system, ["DP-1"], b"ACC", [b"payload"])
        assert phase_access(system, "IN-1", b"ACC", 0).status == "ok"
        assert phase_update(system, "IN-1", [(3, 0)]).status == "ok"
        assert phase_access(system, "IN-1", b"ACC", 0).status == "denied"
        assert phase_update(system, "IN-1", [(3, 1)]).status == "ok"
        after = phase_access(system, "IN-1", b"ACC", 0)
        assert after.status == "ok" and after.plaintext == b"payload"

    _verdict(4, "update traffic linear in issuers touched and below issuance", body)


# -- criterion 5 ---------------------------------------------------------------


def test_criterion_5_blinding_exchange_is_two_scalars_per_peer():
    def body():
        config = SimConfig(
            n_wi=5, n_dp=1, n_rsu=1, n_in=1, batch_size=1,
            policy=(1, 0, 0, 0, 0), permissions=(1, 1, 1, 1, 1), seed=505,
        )
        system = setup_system(config)
        report = phase_issue_warrant(system, "IN-1")
        assert report.status == "ok"
        expected_bits = 2 * (config.n_wi - 1) * system.curve.scalar_bytes * 8
        assert expected_bits == 1280
        for index, got in sorted(report.blinding_payload_bytes.items()):
            assert got * 8 == expected_bits, (
                f"issuer {index} received {got * 8} blinding bits, want {expected_bits}"
            )

    _verdict(5, "each of 5 issuers receives exactly 1280 blinding bits", body)


# -- criterion 6 ---------------------------------------------------------------


def test_criterion_6_leaks_always_trace_to_the_leaker():
    def body():
        config = SimConfig(
            n_wi=3, n_dp=1, n_rsu=1, n_in=10, batch_size=1,
            policy=(1, 0, 0), permissions=(1, 1, 1), seed=606,
        )
        system = setup_system(config)
        names = list(system.ins)
        for name in names:
            assert phase_issue_warrant(system, name).status == "ok"
        phase_upload(system, ["DP-1"], b"ACC", [b"the record"])

        rng = random.Random(6006)
        for round_no in range(100):
            name = names[rng.randrange(len(names))]
            rep = phase_access(system, name, b"ACC", 0)
            assert rep.status == "ok"
            verdict = phase_trace(system, rep.response.masked_body, b"ACC", 0)
            assert verdict.status == "identified", f"round {round_no}: no identification"
            assert verdict.identity == name, (
                f"round {round_no}: leak by {name} traced to {verdict.identity}"
            )

    _verdict(6, "100 leaks across 10 requesters all trace correctly", body)


# -- criterion 7 ---------------------------------------------------------------


def test_criterion_7_uploads_are_anonymous_and_unlinkable():
    def body():
        assert "sender" not in msg.UPLOAD_FIELDS and "identity" not in msg.UPLOAD_FIELDS

        config = SimConfig(
            n_wi=3, n_dp=2, n_rsu=1, n_in=1, batch_size=4,
            policy=(1, 0, 0), permissions=(1, 1, 1), seed=707,
        )
        system = setup_system(config)
        rng = system.rng
        dps = list(system.dps.values())
        payload, accident = b"identical payload", b"ACC"

        raw, fields, parity = [], [], {dp.name: [] for dp in dps}
        for i in range(1000):
            dp = dps[i % 2]
            core = dacm_encrypt(system.pp, dp.policy, payload, accident, rng)
            usig = pbvm_sign(dp.token, dp.rsu_pks[0], system.pp.pk_ta, core.c2,
                             accident, rng)
            data = msg.encode_upload(core, usig)
            raw.append((dp.name, data))
            fields.append(
                (core.l_points, core.n1, core.n2, core.c1, core.c2,
                 usig.sig, usig.commitment)
            )
            parity[dp.name].append(usig.sig.encode()[0] & 1)

        # identity scan: no provider name or secret shows up in any upload
        for dp in dps:
            markers = (dp.name.encode(), dp.sk.to_bytes(), dp.token.to_bytes())
            for _, data in raw:
                for marker in markers:
                    assert marker not in data

        # unlinkability: every randomized field is globally distinct, so no
        # value can pair two uploads, let alone attribute them to a provider
        for slot in range(7):
            values = [f[slot] for f in fields]
            assert len(set(values)) == len(values), f"field {slot} repeats"

        # and a cheap distinguisher (point parity) cannot split the providers
        means = [statistics.mean(parity[dp.name]) for dp in dps]
        assert abs(means[0] - means[1]) < 0.15, f"parity means {means} separable"

    _verdict(7, "1000 uploads: no identity bytes, no linkable fields", body)


# -- criterion 8 ---------------------------------------------------------------


def test_criterion_8_secret_sharing_and_issuance_identities():
    def body():
        rng = random.Random(808)
        # full Shamir grid up to 8 custodians
        for n in range(1, 9):
            secret = CURVE.random_scalar(rng)
            for t in range(1, n + 1):
                shares = shamir_split(n, t, secret, rng)
                picks = sorted(rng.sample(range(n), t))
                assert shamir_recover(shares.subset(picks)) == secret
                if t > 1:
                    forced = ShareSet(shares.points[: t - 1], t - 1, n)
                    assert shamir_recover(forced) != secret

        # 1000 random issuance runs satisfy the aggregation identities
        for round_no in range(1000):
            n_wi = round_no % 8 + 1
            secrets = generate_master_secrets(CURVE, n_wi, rng)
            permissions = [rng.randint(0, 1) for _ in range(n_wi)]
            pid = CURVE.random_scalar(rng, nonzero=True)
            wis = _issuer_states(secrets, n_wi, permissions, pid, rng)
            blinded = wi_blind_exchange(wis, rng)
            d1, d2 = blinded[1]
            warrant = in_aggregate(
                [wi_issue_partial(wi, pid, *blinded[wi.index]) for wi in wis],
                expected=n_wi,
            )
            assert warrant.w_in_1 == d1 + secrets.s2 * d2
            assert warrant.w2_sum == -(d2 * secrets.s3)
            assert warrant.w4_sum == -(d1 * secrets.s3) / secrets.s2
            assert warrant.permissions.bits == tuple(permissions)

    _verdict(8, "Shamir grid n<=8 plus 1000 issuance identity checks", body)
