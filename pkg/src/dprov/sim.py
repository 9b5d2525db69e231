"""Deterministic multi-entity simulation of the data-provision protocol.

One authority (TA), n_wi warrant issuers (WI), providers (DP), roadside
verification units (RSU), and requesting investigators (IN) exchange framed
messages over an in-process bus.  Every run is a pure function of the
scenario config, including its seed: keys, clock ticks, and byte counts all
reproduce exactly.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import messages as msg
from .batchsig import pbvm_batch_verify, pbvm_isolate_invalid, pbvm_sign, rsu_keypair
from .bus import SimBus
from .envelope import (
    Envelope,
    IntegrityError,
    KeyPair,
    Signature,
    env_decrypt,
    env_encrypt,
    env_keygen,
    env_sign,
    env_verify,
)
from .group import Curve, InvalidPointError, Point, Scalar, get_curve, h1
from .params import (
    MasterSecrets,
    PublicParams,
    build_public_params,
    generate_master_secrets,
)
from .policycrypt import (
    AccessDenied,
    AccessPolicy,
    AccessResponse,
    DecryptionError,
    MalformedLeak,
    PermissionSet,
    dacm_decrypt,
    dacm_encrypt,
    ta_mask,
    trace,
)
from .polynomials import shamir_split
from .store import RecordStore
from .warrants import (
    IssuanceError,
    PartialWarrant,
    UnknownPseudonym,
    Warrant,
    WIState,
    combine_blinding,
    draw_blinding,
    in_aggregate,
    in_apply_update,
    wi_issue_partial,
    wi_update_partial,
)
from .wire import WireError

PHASE_REGISTER = "register"
PHASE_ISSUE = "warrant-issue"
PHASE_UPLOAD = "upload"
PHASE_ACCESS = "access"
PHASE_UPDATE = "warrant-update"

DEFAULT_FRESHNESS_WINDOW = 120


class ConfigError(ValueError):
    """Scenario config missing, malformed, or inconsistent."""


@dataclass(frozen=True)
class SimConfig:
    n_wi: int
    n_dp: int
    n_rsu: int
    n_in: int
    batch_size: int
    policy: tuple[int, ...]
    permissions: tuple[int, ...]
    seed: int
    curve: str = "brainpoolp160r1"
    freshness_window: int = DEFAULT_FRESHNESS_WINDOW

    def __post_init__(self) -> None:
        for name in ("n_wi", "n_dp", "n_rsu", "n_in", "batch_size"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ConfigError(f"{name} must be a positive integer")
        for name in ("policy", "permissions"):
            bits = getattr(self, name)
            if len(bits) != self.n_wi:
                raise ConfigError(f"{name} must have exactly n_wi = {self.n_wi} bits")
            if any(b not in (0, 1) for b in bits):
                raise ConfigError(f"{name} bits must be 0 or 1")
        if not isinstance(self.seed, int):
            raise ConfigError("seed must be an integer")
        if self.freshness_window < 1:
            raise ConfigError("freshness_window must be positive")

    @classmethod
    def from_dict(cls, raw: dict) -> "SimConfig":
        required = {"n_wi", "n_dp", "n_rsu", "n_in", "batch_size", "policy", "permissions", "seed"}
        missing = required - raw.keys()
        if missing:
            raise ConfigError(f"config missing keys: {sorted(missing)}")
        unknown = raw.keys() - required - {"curve", "freshness_window"}
        if unknown:
            raise ConfigError(f"config has unknown keys: {sorted(unknown)}")
        try:
            return cls(
                n_wi=raw["n_wi"],
                n_dp=raw["n_dp"],
                n_rsu=raw["n_rsu"],
                n_in=raw["n_in"],
                batch_size=raw["batch_size"],
                policy=tuple(raw["policy"]),
                permissions=tuple(raw["permissions"]),
                seed=raw["seed"],
                curve=raw.get("curve", "brainpoolp160r1"),
                freshness_window=raw.get("freshness_window", DEFAULT_FRESHNESS_WINDOW),
            )
        except TypeError as exc:
            raise ConfigError(f"bad config field type: {exc}") from exc

    @classmethod
    def from_json(cls, path: "str | Path") -> "SimConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(raw)


class SimClock:
    """Tick counter standing in for wall time; one tick per bus send."""

    def __init__(self) -> None:
        self.now = 0

    def tick(self) -> None:
        self.now += 1

    def advance(self, ticks: int) -> None:
        self.now += ticks


def is_fresh(ts: int, now: int, window: int) -> bool:
    return abs(now - ts) <= window


# -- entities ----------------------------------------------------------------


@dataclass
class INRecord:
    identity: bytes
    pk: Point
    sk: Scalar


class TAEntity:
    def __init__(
        self,
        curve: Curve,
        secrets: MasterSecrets,
        pp: PublicParams,
        policy: AccessPolicy,
        window: int,
        store: RecordStore,
    ) -> None:
        self.name = "TA"
        self.curve = curve
        self.secrets = secrets
        self.pp = pp
        self.policy = policy
        self.window = window
        self.store = store
        self.wi_ids: dict[int, bytes] = {}
        self.wi_keys: dict[int, KeyPair] = {}
        self.in_directory: dict[int, INRecord] = {}
        self.rsu_pks: list[Point] = []


class WIEntity:
    def __init__(self, name: str, index: int) -> None:
        self.name = name
        self.index = index
        self.transport: KeyPair | None = None
        self.state: WIState | None = None
        self.peer_pks: tuple[Point, ...] = ()
        self.in_pks: dict[int, Point] = {}
        self.pending: dict[int, dict[int, tuple[Scalar, Scalar]]] = {}


class DPEntity:
    def __init__(self, name: str) -> None:
        self.name = name
        self.transport: KeyPair | None = None
        self.sk: Scalar | None = None
        self.token: Scalar | None = None
        self.policy: AccessPolicy | None = None
        self.rsu_pks: tuple[Point, ...] = ()


class RSUEntity:
    def __init__(self, name: str) -> None:
        self.name = name
        self.transport: KeyPair | None = None
        self.sk: Scalar | None = None
        self.pk: Point | None = None


class INEntity:
    def __init__(self, name: str) -> None:
        self.name = name
        self.transport: KeyPair | None = None
        self.keypair: KeyPair | None = None
        self.pid: Scalar | None = None
        self.wi_pks: tuple[Point, ...] = ()
        self.warrant: Warrant | None = None
        self.last_response: AccessResponse | None = None


@dataclass
class SystemState:
    config: SimConfig
    curve: Curve
    pp: PublicParams
    rng: random.Random
    clock: SimClock
    bus: SimBus
    store: RecordStore
    ta: TAEntity
    wis: dict[int, WIEntity]
    dps: dict[str, DPEntity]
    rsus: dict[str, RSUEntity]
    ins: dict[str, INEntity]

    def wi_names(self) -> list[str]:
        return [w.name for w in self.wis.values()]


# -- reports -----------------------------------------------------------------


@dataclass
class WarrantReport:
    status: str  # "ok" | "aborted"
    reason: str = ""
    wire_bytes: int = 0
    blinding_payload_bytes: dict[int, int] = field(default_factory=dict)


@dataclass
class UploadReport:
    accepted: list[int] = field(default_factory=list)
    rejected: list[int] = field(default_factory=list)
    record_indices: list[int] = field(default_factory=list)
    wire_bytes: int = 0


@dataclass
class AccessReport:
    status: str  # "ok" | "denied" | "integrity-error" | "refused"
    reason: str = ""
    plaintext: bytes | None = None
    response: AccessResponse | None = None
    wire_bytes: int = 0


@dataclass
class TraceReport:
    status: str  # "identified" | "unknown"
    identity: str | None = None


@dataclass
class UpdateReport:
    status: str  # "ok" | "aborted"
    reason: str = ""
    contacted: list[int] = field(default_factory=list)
    messages: int = 0
    wire_bytes: int = 0


# -- registration ------------------------------------------------------------


def _register_request(system: SystemState, entity, kind: str) -> None:
    entity.transport = env_keygen(system.curve, system.rng)
    env = env_encrypt(system.pp.pk_ta, entity.name.encode(), system.rng)
    data = msg.encode_register_req(kind, env.to_bytes(), entity.transport.pk)
    system.bus.send(entity.name, "TA", PHASE_REGISTER, msg.MSG_REGISTER_REQ, data)


def _ta_collect_registrations(system: SystemState) -> list[tuple[str, bytes, Point]]:
    """TA side: decrypt and order pending registration requests."""
    out = []
    for d in system.bus.take("TA"):
        kind, env_bytes, reply_pk = msg.decode_register_req(system.curve, d.data)
        env = Envelope.from_bytes(system.curve, env_bytes)
        identity = env_decrypt(system.ta.secrets.sk_ta, env)
        if identity != d.sender.encode():
            raise ConfigError("registration identity does not match bus sender")
        out.append((kind, identity, reply_pk))
    return out


def _ta_respond(system: SystemState, receiver: str, reply_pk: Point, blob: bytes) -> None:
    env = env_encrypt(reply_pk, blob, system.rng)
    data = msg.encode_register_resp(env.to_bytes())
    system.bus.send("TA", receiver, PHASE_REGISTER, msg.MSG_REGISTER_RESP, data)


def _open_credential(system: SystemState, entity) -> bytes:
    deliveries = system.bus.take(entity.name)
    if len(deliveries) != 1:
        raise ConfigError(f"{entity.name} expected one registration response")
    env_bytes = msg.decode_register_resp(deliveries[0].data)
    env = Envelope.from_bytes(system.curve, env_bytes)
    return env_decrypt(entity.transport.sk, env)


def setup_system(config: SimConfig, persist_dir: "str | Path | None" = None) -> SystemState:
    """Build and register every entity; deterministic under config.seed."""
    curve = get_curve(config.curve)
    rng = random.Random(config.seed)
    clock = SimClock()
    bus = SimBus(clock)
    secrets = generate_master_secrets(curve, config.n_wi, rng)
    pp = build_public_params(curve, secrets, config.n_wi)
    policy = AccessPolicy.of(config.policy)
    ta = TAEntity(curve, secrets, pp, policy, config.freshness_window, RecordStore(persist_dir))

    system = SystemState(
        config=config,
        curve=curve,
        pp=pp,
        rng=rng,
        clock=clock,
        bus=bus,
        store=ta.store,
        ta=ta,
        wis={i: WIEntity(f"WI-{i}", i) for i in range(1, config.n_wi + 1)},
        dps={f"DP-{i}": DPEntity(f"DP-{i}") for i in range(1, config.n_dp + 1)},
        rsus={f"RSU-{i}": RSUEntity(f"RSU-{i}") for i in range(1, config.n_rsu + 1)},
        ins={f"IN-{i}": INEntity(f"IN-{i}") for i in range(1, config.n_in + 1)},
    )

    # Warrant issuers first: the authority needs every issuer identity before
    # it can fix the share polynomial's evaluation points.
    for wi in system.wis.values():
        _register_request(system, wi, "wi")
    requests = _ta_collect_registrations(system)
    ids = [identity for _, identity, _ in requests]
    xs = tuple(h1(curve, identity) for identity in ids)
    shares = shamir_split(config.n_wi, config.n_wi, secrets.s3, rng, xs=xs)
    wi_keys = [env_keygen(curve, rng) for _ in range(config.n_wi)]
    for i, (kind, identity, reply_pk) in enumerate(requests, start=1):
        ta.wi_ids[i] = identity
        ta.wi_keys[i] = wi_keys[i - 1]
        blob = msg.encode_wi_credential(
            i,
            wi_keys[i - 1].sk,
            secrets.s1,
            secrets.s2,
            secrets.s2_parts[i - 1],
            xs[i - 1],
            shares.points[i - 1][1],
            xs,
            [kp.pk for kp in wi_keys],
        )
        _ta_respond(system, identity.decode(), reply_pk, blob)
    for wi in system.wis.values():
        blob = _open_credential(system, wi)
        index, sk, s1, s2, s2_i, s3_i, share, xs_got, peer_pks = msg.decode_wi_credential(
            curve, blob
        )
        wi.state = WIState(
            index=index,
            identity=wi.name.encode(),
            keypair=KeyPair(sk, sk * curve.generator),
            s1=s1,
            s2=s2,
            s2_i=s2_i,
            s3_i=s3_i,
            share=share,
            published_xs=xs_got,
            permission_table={},
        )
        wi.peer_pks = peer_pks

    # Roadside units next: providers receive unit keys with their credential.
    for rsu in system.rsus.values():
        _register_request(system, rsu, "rsu")
    for kind, identity, reply_pk in _ta_collect_registrations(system):
        sk, pk = rsu_keypair(curve, secrets.sk_ta, secrets.token, rng)
        ta.rsu_pks.append(pk)
        _ta_respond(system, identity.decode(), reply_pk, msg.encode_rsu_credential(sk, pk))
    for rsu in system.rsus.values():
        sk, pk = msg.decode_rsu_credential(curve, _open_credential(system, rsu))
        rsu.sk, rsu.pk = sk, pk

    # Providers.
    for dp in system.dps.values():
        _register_request(system, dp, "dp")
    for kind, identity, reply_pk in _ta_collect_registrations(system):
        kp = env_keygen(curve, rng)
        blob = msg.encode_dp_credential(kp.sk, secrets.token, policy, ta.rsu_pks)
        _ta_respond(system, identity.decode(), reply_pk, blob)
    for dp in system.dps.values():
        sk, token, pol, rsu_pks = msg.decode_dp_credential(
            curve, _open_credential(system, dp)
        )
        dp.sk, dp.token, dp.policy, dp.rsu_pks = sk, token, pol, rsu_pks

    # Investigators; each registration also pushes a directory notice (pseudonym,
    # verification key, permission bit) to every issuer.
    for in_e in system.ins.values():
        _register_request(system, in_e, "in")
    for kind, identity, reply_pk in _ta_collect_registrations(system):
        kp = env_keygen(curve, rng)
        pid = h1(curve, identity)
        ta.in_directory[pid.v] = INRecord(identity, kp.pk, kp.sk)
        blob = msg.encode_in_credential(kp.sk, pid, [ta.wi_keys[i].pk for i in sorted(ta.wi_keys)])
        _ta_respond(system, identity.decode(), reply_pk, blob)
        for i, wi in system.wis.items():
            notice = msg.encode_directory(pid, kp.pk, config.permissions[i - 1])
            system.bus.send("TA", wi.name, PHASE_REGISTER, msg.MSG_DIRECTORY, notice)
    for in_e in system.ins.values():
        sk, pid, wi_pks = msg.decode_in_credential(curve, _open_credential(system, in_e))
        in_e.keypair = KeyPair(sk, sk * curve.generator)
        in_e.pid = pid
        in_e.wi_pks = wi_pks
    for wi in system.wis.values():
        for d in system.bus.take(wi.name):
            pid, pk, bit = msg.decode_directory(curve, d.data)
            wi.in_pks[pid.v] = pk
            wi.state.permission_table[pid.v] = bit

    return system


# -- warrant issuance --------------------------------------------------------


def phase_issue_warrant(system: SystemState, in_name: str) -> WarrantReport:
    """Run the full issuance exchange for one investigator."""
    in_e = system.ins[in_name]
    curve, bus, clock, rng = system.curve, system.bus, system.clock, system.rng
    wis = system.wis
    mark = bus.mark()

    ts = clock.now
    sig = env_sign(in_e.keypair.sk, msg.warrant_req_body(in_e.pid, ts), rng)
    request = msg.encode_warrant_req(in_e.pid, ts, sig.to_bytes())
    for wi in wis.values():
        bus.send(in_name, wi.name, PHASE_ISSUE, msg.MSG_WARRANT_REQ, request)

    # Pass 1: issuers validate the request and exchange blinding pairs.
    # Peer blinding envelopes can already be in flight while later issuers are
    # still reading their request, so stash anything that is not a request.
    def refuse(wi: WIEntity, reason: str) -> None:
        bus.send(wi.name, in_name, PHASE_ISSUE, msg.MSG_REFUSAL, msg.encode_refusal(reason))

    stashed: dict[str, list] = {wi.name: [] for wi in wis.values()}
    for wi in wis.values():
        for d in bus.take(wi.name):
            if d.msg_type != msg.MSG_WARRANT_REQ:
                stashed[wi.name].append(d)
                continue
            try:
                pid, req_ts, sig_bytes = msg.decode_warrant_req(curve, d.data)
            except (WireError, InvalidPointError, ValueError):
                refuse(wi, "malformed request")
                continue
            if not is_fresh(req_ts, clock.now, system.ta.window):
                refuse(wi, "stale request")
                continue
            in_pk = wi.in_pks.get(pid.v)
            if in_pk is None or pid.v not in wi.state.permission_table:
                refuse(wi, "unknown pseudonym")
                continue
            if not env_verify(in_pk, msg.warrant_req_body(pid, req_ts), sig_bytes):
                refuse(wi, "bad signature")
                continue
            pair = draw_blinding(curve, rng)
            wi.pending[pid.v] = {wi.index: pair}
            payload = msg.blinding_payload(*pair)
            for peer in wis.values():
                if peer.index == wi.index:
                    continue
                env = env_encrypt(wi.peer_pks[peer.index - 1], payload, rng)
                data = msg.encode_blinding(wi.index, env.to_bytes())
                bus.send(
                    wi.name,
                    peer.name,
                    PHASE_ISSUE,
                    msg.MSG_BLINDING,
                    data,
                    payload_bytes=len(payload),
                )

    # Pass 2: issuers combine pairs and send partial warrants.
    pid = in_e.pid
    for wi in wis.values():
        inbox = stashed[wi.name] + bus.take(wi.name)
        if pid.v not in wi.pending:
            continue  # already refused
        collected = wi.pending[pid.v]
        for d in inbox:
            if d.msg_type != msg.MSG_BLINDING:
                continue
            try:
                from_index, env_bytes = msg.decode_blinding(d.data)
                env = Envelope.from_bytes(curve, env_bytes)
                payload = env_decrypt(wi.state.keypair.sk, env)
                collected[from_index] = msg.split_blinding_payload(curve, payload)
            except (WireError, IntegrityError, InvalidPointError, ValueError):
                continue
        if len(collected) != len(wis):
            refuse(wi, "missing blinding contribution")
            del wi.pending[pid.v]
            continue
        d1, d2 = combine_blinding(
            [collected[i] for i in sorted(collected)], len(wis)
        )
        try:
            partial = wi_issue_partial(wi.state, pid, d1, d2)
        except UnknownPseudonym:
            refuse(wi, "unknown pseudonym")
            del wi.pending[pid.v]
            continue
        blob = msg.partial_blob(
            partial.index, partial.w1, partial.w2, partial.w3, partial.w4,
            partial.permission_bit,
        )
        env = env_encrypt(wi.in_pks[pid.v], blob, rng)
        send_ts = clock.now
        psig = env_sign(
            wi.state.keypair.sk,
            msg.partial_sig_body(wi.index, send_ts, env.to_bytes()),
            rng,
        )
        data = msg.encode_partial(wi.index, send_ts, env.to_bytes(), psig.to_bytes())
        bus.send(wi.name, in_name, PHASE_ISSUE, msg.MSG_PARTIAL, data)
        del wi.pending[pid.v]

    # Aggregation at the investigator.
    partials: list[PartialWarrant] = []
    refusals: list[str] = []
    for d in bus.take(in_name):
        if d.msg_type == msg.MSG_REFUSAL:
            refusals.append(msg.decode_refusal(d.data))
            continue
        try:
            index, ts2, env_bytes, sig_bytes = msg.decode_partial(d.data)
            if not is_fresh(ts2, clock.now, system.ta.window):
                refusals.append(f"stale partial from issuer {index}")
                continue
            if not 1 <= index <= len(in_e.wi_pks):
                refusals.append("partial with out-of-range index")
                continue
            if not env_verify(
                in_e.wi_pks[index - 1], msg.partial_sig_body(index, ts2, env_bytes), sig_bytes
            ):
                refusals.append(f"bad signature on partial from issuer {index}")
                continue
            blob = env_decrypt(in_e.keypair.sk, Envelope.from_bytes(curve, env_bytes))
            got_index, w1, w2, w3, w4, bit = msg.split_partial_blob(curve, blob)
            if got_index != index:
                refusals.append("partial index mismatch")
                continue
            partials.append(PartialWarrant(index, w1, w2, w3, w4, bit))
        except (WireError, IntegrityError, InvalidPointError, ValueError):
            refusals.append("undecodable partial")

    def finish(status: str, reason: str = "") -> WarrantReport:
        per_wi = {
            wi.index: system.bus.total_bytes(
                kind="payload",
                since=mark,
                phase=PHASE_ISSUE,
                msg_type=msg.MSG_BLINDING,
                receiver=wi.name,
            )
            for wi in wis.values()
        }
        return WarrantReport(
            status=status,
            reason=reason,
            wire_bytes=bus.total_bytes(since=mark, phase=PHASE_ISSUE),
            blinding_payload_bytes=per_wi,
        )

    if refusals:
        return finish("aborted", "; ".join(refusals))
    try:
        warrant = in_aggregate(partials, expected=len(in_e.wi_pks))
    except IssuanceError as exc:
        return finish("aborted", str(exc))
    in_e.warrant = warrant
    return finish("ok")


# -- upload ------------------------------------------------------------------


def phase_upload(
    system: SystemState,
    dp_names: Sequence[str],
    accident_id: bytes,
    payloads: Sequence[bytes],
    batch_size: int | None = None,
    rsu_name: str | None = None,
) -> UploadReport:
    """Providers encrypt, sign, and upload; the unit batch-verifies and stores."""
    if len(dp_names) != len(payloads):
        raise ValueError("need one payload per provider")
    b = batch_size if batch_size is not None else system.config.batch_size
    if b < 1:
        raise ValueError("batch size must be positive")
    rsu = system.rsus[rsu_name] if rsu_name else next(iter(system.rsus.values()))
    rsu_index = int(rsu.name.split("-")[1]) - 1  # registration order == name order
    bus, curve, rng = system.bus, system.curve, system.rng
    mark = bus.mark()

    for name, payload in zip(dp_names, payloads):
        dp = system.dps[name]
        core = dacm_encrypt(system.pp, dp.policy, payload, accident_id, rng)
        usig = pbvm_sign(
            dp.token, dp.rsu_pks[rsu_index], system.pp.pk_ta, core.c2, accident_id, rng
        )
        bus.send(name, rsu.name, PHASE_UPLOAD, msg.MSG_UPLOAD, msg.encode_upload(core, usig))

    report = UploadReport()
    decoded = []  # (delivery index, core, usig)
    for i, d in enumerate(bus.take(rsu.name)):
        try:
            core, usig = msg.decode_upload(curve, d.data)
            if usig.accident_id != accident_id:
                raise WireError("accident id mismatch")
            decoded.append((i, core, usig))
        except (WireError, InvalidPointError, ValueError):
            report.rejected.append(i)

    for start in range(0, len(decoded), b):
        chunk = decoded[start : start + b]
        items = [(core.c2, usig) for _, core, usig in chunk]
        bad: set[int] = set()
        if not pbvm_batch_verify(rsu.sk, items):
            bad = set(pbvm_isolate_invalid(rsu.sk, items))
        for offset, (i, core, usig) in enumerate(chunk):
            if offset in bad:
                report.rejected.append(i)
            else:
                report.accepted.append(i)
                report.record_indices.append(
                    system.store.append(core, system.clock.now, rsu.name)
                )
    report.rejected.sort()
    report.wire_bytes = bus.total_bytes(since=mark, phase=PHASE_UPLOAD)
    return report


# -- access ------------------------------------------------------------------


def phase_access(
    system: SystemState, in_name: str, accident_id: bytes, record_index: int
) -> AccessReport:
    """One investigator requests one stored record through the authority."""
    in_e = system.ins[in_name]
    if in_e.warrant is None:
        raise ValueError(f"{in_name} holds no warrant; run issuance first")
    bus, curve, clock, rng, ta = system.bus, system.curve, system.clock, system.rng, system.ta
    mark = bus.mark()

    blob = msg.access_req_blob(in_e.pid, accident_id, record_index, clock.now)
    env = env_encrypt(system.pp.pk_ta, blob, rng)
    bus.send(
        in_name,
        "TA",
        PHASE_ACCESS,
        msg.MSG_ACCESS_REQ,
        msg.encode_access_req(env.to_bytes()),
        payload_bytes=len(blob),
    )

    def refuse(reason: str) -> AccessReport:
        bus.send("TA", in_name, PHASE_ACCESS, msg.MSG_REFUSAL, msg.encode_refusal(reason))
        for _ in bus.take(in_name):
            pass
        return AccessReport(
            status="refused",
            reason=reason,
            wire_bytes=bus.total_bytes(since=mark, phase=PHASE_ACCESS),
        )

    # authority side
    for d in bus.take("TA"):
        try:
            env_bytes = msg.decode_access_req(d.data)
            blob_in = env_decrypt(
                ta.secrets.sk_ta, Envelope.from_bytes(curve, env_bytes)
            )
            pid, got_accident, got_index, ts = msg.split_access_req_blob(curve, blob_in)
        except (WireError, IntegrityError, InvalidPointError, ValueError):
            return refuse("undecodable request")
        if not is_fresh(ts, clock.now, ta.window):
            return refuse("stale request")
        entry = ta.in_directory.get(pid.v)
        if entry is None:
            return refuse("unknown pseudonym")
        try:
            rec = ta.store.get(got_accident, got_index)
        except (KeyError, IndexError):
            return refuse("no such record")
        core = rec.core
        resp = AccessResponse(
            policy=ta.policy,
            l_points=core.l_points,
            n1=core.n1,
            n2=core.n2,
            c1=core.c1,
            masked_body=ta_mask(core.c2, pid, entry.sk),
        )
        bus.send(
            "TA",
            in_name,
            PHASE_ACCESS,
            msg.MSG_ACCESS_RESP,
            msg.encode_access_resp(got_accident, resp),
        )

    # investigator side
    report = AccessReport(status="refused", reason="no response")
    for d in bus.take(in_name):
        if d.msg_type == msg.MSG_REFUSAL:
            report = AccessReport(status="refused", reason=msg.decode_refusal(d.data))
            continue
        _, resp = msg.decode_access_resp(curve, d.data)
        in_e.last_response = resp
        try:
            plaintext = dacm_decrypt(
                system.pp,
                in_e.warrant,
                in_e.warrant.permissions,
                resp,
                in_e.pid,
                in_e.keypair.sk,
            )
            report = AccessReport(status="ok", plaintext=plaintext, response=resp)
        except AccessDenied as exc:
            report = AccessReport(status="denied", reason=str(exc), response=resp)
        except DecryptionError as exc:
            report = AccessReport(status="integrity-error", reason=str(exc), response=resp)
    report.wire_bytes = bus.total_bytes(since=mark, phase=PHASE_ACCESS)
    return report


# -- trace -------------------------------------------------------------------


def phase_trace(
    system: SystemState, leaked: bytes, accident_id: bytes, record_index: int
) -> TraceReport:
    """Authority-side identification of a leaked masked payload."""
    ta = system.ta
    try:
        rec = ta.store.get(accident_id, record_index)
    except (KeyError, IndexError):
        return TraceReport(status="unknown")
    try:
        pid, sk = trace(system.curve, leaked, rec.core.c2)
    except (MalformedLeak, ValueError):
        return TraceReport(status="unknown")
    entry = ta.in_directory.get(pid.v)
    if entry is None or entry.sk != sk:
        return TraceReport(status="unknown")
    return TraceReport(status="identified", identity=entry.identity.decode())


# -- warrant update ----------------------------------------------------------


def phase_update(
    system: SystemState, in_name: str, delta: Sequence[tuple[int, int]]
) -> UpdateReport:
    """Flip permission bits at exactly the issuers named in delta."""
    in_e = system.ins[in_name]
    if in_e.warrant is None:
        raise ValueError(f"{in_name} holds no warrant; run issuance first")
    for index, bit in delta:
        if index not in system.wis:
            raise ValueError(f"no issuer with index {index}")
        if bit not in (0, 1):
            raise ValueError("permission bit must be 0 or 1")
    bus, curve, clock, rng = system.bus, system.curve, system.clock, system.rng
    mark = bus.mark()
    report = UpdateReport(status="ok", contacted=sorted(i for i, _ in delta))

    for index, bit in delta:
        ts = clock.now
        sig = env_sign(
            in_e.keypair.sk, msg.update_req_body(in_e.pid, index, bit, ts), rng
        )
        data = msg.encode_update_req(in_e.pid, index, bit, ts, sig.to_bytes())
        bus.send(in_name, f"WI-{index}", PHASE_UPDATE, msg.MSG_UPDATE_REQ, data)

    for index, _ in delta:
        wi = system.wis[index]
        for d in bus.take(wi.name):
            try:
                pid, got_index, bit, ts, sig_bytes = msg.decode_update_req(curve, d.data)
            except (WireError, InvalidPointError, ValueError):
                bus.send(wi.name, in_name, PHASE_UPDATE, msg.MSG_REFUSAL,
                         msg.encode_refusal("malformed update request"))
                continue
            in_pk = wi.in_pks.get(pid.v)
            if (
                in_pk is None
                or got_index != wi.index
                or not is_fresh(ts, clock.now, system.ta.window)
                or not env_verify(in_pk, msg.update_req_body(pid, got_index, bit, ts), sig_bytes)
            ):
                bus.send(wi.name, in_name, PHASE_UPDATE, msg.MSG_REFUSAL,
                         msg.encode_refusal("rejected update request"))
                continue
            new_index, new_w3 = wi_update_partial(wi.state, pid, bit)
            blob = msg.update_blob(new_index, new_w3, bit)
            env = env_encrypt(in_pk, blob, rng)
            send_ts = clock.now
            rsig = env_sign(
                wi.state.keypair.sk,
                msg.update_sig_body(new_index, send_ts, env.to_bytes()),
                rng,
            )
            bus.send(
                wi.name,
                in_name,
                PHASE_UPDATE,
                msg.MSG_UPDATE_RESP,
                msg.encode_update_resp(new_index, send_ts, env.to_bytes(), rsig.to_bytes()),
            )

    updates: list[tuple[int, Scalar, int]] = []
    reasons: list[str] = []
    for d in bus.take(in_name):
        if d.msg_type == msg.MSG_REFUSAL:
            reasons.append(msg.decode_refusal(d.data))
            continue
        try:
            index, ts2, env_bytes, sig_bytes = msg.decode_update_resp(d.data)
            if not is_fresh(ts2, clock.now, system.ta.window):
                reasons.append("stale update response")
                continue
            if not env_verify(
                in_e.wi_pks[index - 1], msg.update_sig_body(index, ts2, env_bytes), sig_bytes
            ):
                reasons.append("bad signature on update response")
                continue
            blob = env_decrypt(in_e.keypair.sk, Envelope.from_bytes(curve, env_bytes))
            got_index, w3, bit = msg.split_update_blob(curve, blob)
            if got_index != index:
                reasons.append("update index mismatch")
                continue
            updates.append((got_index, w3, bit))
        except (WireError, IntegrityError, InvalidPointError, ValueError):
            reasons.append("undecodable update response")

    if reasons or len(updates) != len(delta):
        report.status = "aborted"
        report.reason = "; ".join(reasons) if reasons else "missing update responses"
    else:
        in_e.warrant = in_apply_update(in_e.warrant, updates)
    report.messages = bus.message_count(since=mark, phase=PHASE_UPDATE)
    report.wire_bytes = bus.total_bytes(since=mark, phase=PHASE_UPDATE)
    return report
