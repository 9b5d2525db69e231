"""Concrete message schemas for everything that crosses the simulation bus.

Every codec returns/accepts the full framed message (version header, type
byte, TLV fields).  Decoders validate strictly and raise WireError on any
structural surprise.
"""

from __future__ import annotations

from dataclasses import dataclass

from .group import Curve, Point, Scalar
from .policycrypt import AccessPolicy, AccessResponse, CipherCore
from .batchsig import UploadSignature
from . import wire
from .wire import (
    T_BITS,
    T_BYTES,
    T_POINT,
    T_POINT_LIST,
    T_SCALAR,
    T_SCALAR_LIST,
    FieldReader,
    WireError,
    open_message,
    pack_field,
    pack_message,
    pack_u64,
)

MSG_REGISTER_REQ = 0x10
MSG_REGISTER_RESP = 0x11
MSG_DIRECTORY = 0x12
MSG_WARRANT_REQ = 0x20
MSG_BLINDING = 0x21
MSG_PARTIAL = 0x22
MSG_REFUSAL = 0x2F
MSG_UPLOAD = 0x30
MSG_RECORD = 0x31
MSG_ACCESS_REQ = 0x40
MSG_ACCESS_RESP = 0x41
MSG_UPDATE_REQ = 0x50
MSG_UPDATE_RESP = 0x51

# slot names, in wire order, for the structural anonymity scan
UPLOAD_FIELDS = ("accident_id", "l_points", "n1", "n2", "c1", "c2", "sig", "commitment")
ACCESS_REQ_FIELDS = ("envelope",)


def _expect_type(data: bytes, msg_type: int) -> FieldReader:
    got, reader = open_message(data)
    if got != msg_type:
        raise WireError(f"expected message type {msg_type:#x}, got {got:#x}")
    return reader


def _point_list(points) -> bytes:
    return pack_field(T_POINT_LIST, b"".join(p.encode() for p in points))


def _read_point_list(curve: Curve, value: bytes) -> tuple[Point, ...]:
    step = curve.point_bytes
    if len(value) % step:
        raise WireError("point list length not a multiple of the point size")
    return tuple(
        curve.point_from_bytes(value[i : i + step]) for i in range(0, len(value), step)
    )


def _scalar_list(scalars) -> bytes:
    return pack_field(T_SCALAR_LIST, b"".join(s.to_bytes() for s in scalars))


def _read_scalar_list(curve: Curve, value: bytes) -> tuple[Scalar, ...]:
    step = curve.scalar_bytes
    if len(value) % step:
        raise WireError("scalar list length not a multiple of the scalar size")
    return tuple(
        curve.scalar_from_bytes(value[i : i + step]) for i in range(0, len(value), step)
    )


# -- registration ------------------------------------------------------------


def encode_register_req(kind: str, identity_env: bytes, reply_pk: Point) -> bytes:
    fields = (
        pack_field(T_BYTES, kind.encode())
        + pack_field(T_BYTES, identity_env)
        + pack_field(T_POINT, reply_pk.encode())
    )
    return pack_message(MSG_REGISTER_REQ, fields)


def decode_register_req(curve: Curve, data: bytes) -> tuple[str, bytes, Point]:
    r = _expect_type(data, MSG_REGISTER_REQ)
    kind = r.expect(T_BYTES).decode()
    env = r.expect(T_BYTES)
    pk = curve.point_from_bytes(r.expect(T_POINT))
    if not r.done():
        raise WireError("trailing bytes in register request")
    return kind, env, pk


def encode_register_resp(credential_env: bytes) -> bytes:
    return pack_message(MSG_REGISTER_RESP, pack_field(T_BYTES, credential_env))


def decode_register_resp(data: bytes) -> bytes:
    r = _expect_type(data, MSG_REGISTER_RESP)
    env = r.expect(T_BYTES)
    if not r.done():
        raise WireError("trailing bytes in register response")
    return env


def encode_directory(pid: Scalar, pk: Point, bit: int) -> bytes:
    """Authority -> issuer notice of a new requester pseudonym and its bit."""
    fields = (
        pack_field(T_SCALAR, pid.to_bytes())
        + pack_field(T_POINT, pk.encode())
        + pack_u64(bit)
    )
    return pack_message(MSG_DIRECTORY, fields)


def decode_directory(curve: Curve, data: bytes) -> tuple[Scalar, Point, int]:
    r = _expect_type(data, MSG_DIRECTORY)
    pid = curve.scalar_from_bytes(r.expect(T_SCALAR))
    pk = curve.point_from_bytes(r.expect(T_POINT))
    bit = r.expect_u64()
    if bit not in (0, 1) or not r.done():
        raise WireError("bad directory notice")
    return pid, pk, bit


# -- credential blobs (always carried inside envelopes) ----------------------


def encode_wi_credential(
    index: int,
    sk: Scalar,
    s1: Scalar,
    s2: Scalar,
    s2_i: Scalar,
    s3_i: Scalar,
    share: Scalar,
    published_xs,
    peer_pks,
) -> bytes:
    return (
        pack_u64(index)
        + pack_field(T_SCALAR, sk.to_bytes())
        + pack_field(T_SCALAR, s1.to_bytes())
        + pack_field(T_SCALAR, s2.to_bytes())
        + pack_field(T_SCALAR, s2_i.to_bytes())
        + pack_field(T_SCALAR, s3_i.to_bytes())
        + pack_field(T_SCALAR, share.to_bytes())
        + _scalar_list(published_xs)
        + _point_list(peer_pks)
    )


def decode_wi_credential(curve: Curve, blob: bytes):
    r = FieldReader(blob)
    index = r.expect_u64()
    vals = [curve.scalar_from_bytes(r.expect(T_SCALAR)) for _ in range(6)]
    xs = _read_scalar_list(curve, r.expect(T_SCALAR_LIST))
    peer_pks = _read_point_list(curve, r.expect(T_POINT_LIST))
    if not r.done():
        raise WireError("trailing bytes in issuer credential")
    return index, *vals, xs, peer_pks


def encode_dp_credential(sk: Scalar, token: Scalar, policy: AccessPolicy, rsu_pks) -> bytes:
    return (
        pack_field(T_SCALAR, sk.to_bytes())
        + pack_field(T_SCALAR, token.to_bytes())
        + wire.pack_bits(policy.bits)
        + _point_list(rsu_pks)
    )


def decode_dp_credential(curve: Curve, blob: bytes):
    r = FieldReader(blob)
    sk = curve.scalar_from_bytes(r.expect(T_SCALAR))
    token = curve.scalar_from_bytes(r.expect(T_SCALAR))
    policy = AccessPolicy.of(r.expect_bits())
    rsu_pks = _read_point_list(curve, r.expect(T_POINT_LIST))
    if not r.done():
        raise WireError("trailing bytes in provider credential")
    return sk, token, policy, rsu_pks


def encode_rsu_credential(sk: Scalar, pk: Point) -> bytes:
    return pack_field(T_SCALAR, sk.to_bytes()) + pack_field(T_POINT, pk.encode())


def decode_rsu_credential(curve: Curve, blob: bytes) -> tuple[Scalar, Point]:
    r = FieldReader(blob)
    sk = curve.scalar_from_bytes(r.expect(T_SCALAR))
    pk = curve.point_from_bytes(r.expect(T_POINT))
    if not r.done():
        raise WireError("trailing bytes in unit credential")
    return sk, pk


def encode_in_credential(sk: Scalar, pid: Scalar, wi_pks) -> bytes:
    return (
        pack_field(T_SCALAR, sk.to_bytes())
        + pack_field(T_SCALAR, pid.to_bytes())
        + _point_list(wi_pks)
    )


def decode_in_credential(curve: Curve, blob: bytes):
    r = FieldReader(blob)
    sk = curve.scalar_from_bytes(r.expect(T_SCALAR))
    pid = curve.scalar_from_bytes(r.expect(T_SCALAR))
    wi_pks = _read_point_list(curve, r.expect(T_POINT_LIST))
    if not r.done():
        raise WireError("trailing bytes in requester credential")
    return sk, pid, wi_pks


# -- warrant issuance --------------------------------------------------------


def warrant_req_body(pid: Scalar, ts: int) -> bytes:
    """The byte string a warrant request signature covers."""
    return b"warrant-request" + pid.to_bytes() + ts.to_bytes(8, "big")


def encode_warrant_req(pid: Scalar, ts: int, sig: bytes) -> bytes:
    fields = (
        pack_field(T_SCALAR, pid.to_bytes()) + pack_u64(ts) + pack_field(T_BYTES, sig)
    )
    return pack_message(MSG_WARRANT_REQ, fields)


def decode_warrant_req(curve: Curve, data: bytes) -> tuple[Scalar, int, bytes]:
    r = _expect_type(data, MSG_WARRANT_REQ)
    pid = curve.scalar_from_bytes(r.expect(T_SCALAR))
    ts = r.expect_u64()
    sig = r.expect(T_BYTES)
    if not r.done():
        raise WireError("trailing bytes in warrant request")
    return pid, ts, sig


def blinding_payload(d1: Scalar, d2: Scalar) -> bytes:
    """Exactly two field elements; the wire-overhead guarantee counts these bytes."""
    return d1.to_bytes() + d2.to_bytes()


def split_blinding_payload(curve: Curve, payload: bytes) -> tuple[Scalar, Scalar]:
    w = curve.scalar_bytes
    if len(payload) != 2 * w:
        raise WireError("blinding payload must be exactly two scalars")
    return curve.scalar_from_bytes(payload[:w]), curve.scalar_from_bytes(payload[w:])


def encode_blinding(from_index: int, env: bytes) -> bytes:
    return pack_message(MSG_BLINDING, pack_u64(from_index) + pack_field(T_BYTES, env))


def decode_blinding(data: bytes) -> tuple[int, bytes]:
    r = _expect_type(data, MSG_BLINDING)
    idx = r.expect_u64()
    env = r.expect(T_BYTES)
    if not r.done():
        raise WireError("trailing bytes in blinding message")
    return idx, env


def partial_blob(index: int, w1: Scalar, w2: Scalar, w3: Scalar, w4: Scalar, bit: int) -> bytes:
    return (
        pack_u64(index)
        + pack_field(T_SCALAR, w1.to_bytes())
        + pack_field(T_SCALAR, w2.to_bytes())
        + pack_field(T_SCALAR, w3.to_bytes())
        + pack_field(T_SCALAR, w4.to_bytes())
        + pack_u64(bit)
    )


def split_partial_blob(curve: Curve, blob: bytes):
    r = FieldReader(blob)
    index = r.expect_u64()
    ws = [curve.scalar_from_bytes(r.expect(T_SCALAR)) for _ in range(4)]
    bit = r.expect_u64()
    if bit not in (0, 1) or not r.done():
        raise WireError("bad partial warrant blob")
    return index, *ws, bit


def partial_sig_body(index: int, ts: int, env: bytes) -> bytes:
    return b"partial-warrant" + index.to_bytes(8, "big") + ts.to_bytes(8, "big") + env


def encode_partial(index: int, ts: int, env: bytes, sig: bytes) -> bytes:
    fields = (
        pack_u64(index)
        + pack_u64(ts)
        + pack_field(T_BYTES, env)
        + pack_field(T_BYTES, sig)
    )
    return pack_message(MSG_PARTIAL, fields)


def decode_partial(data: bytes) -> tuple[int, int, bytes, bytes]:
    r = _expect_type(data, MSG_PARTIAL)
    index = r.expect_u64()
    ts = r.expect_u64()
    env = r.expect(T_BYTES)
    sig = r.expect(T_BYTES)
    if not r.done():
        raise WireError("trailing bytes in partial warrant message")
    return index, ts, env, sig


def encode_refusal(reason: str) -> bytes:
    return pack_message(MSG_REFUSAL, pack_field(T_BYTES, reason.encode()))


def decode_refusal(data: bytes) -> str:
    r = _expect_type(data, MSG_REFUSAL)
    reason = r.expect(T_BYTES).decode()
    if not r.done():
        raise WireError("trailing bytes in refusal")
    return reason


# -- upload ------------------------------------------------------------------


def encode_upload(core: CipherCore, usig: UploadSignature) -> bytes:
    """The anonymous upload: ciphertext plus signature, no provider identity."""
    fields = (
        pack_field(T_BYTES, core.accident_id)
        + _point_list(core.l_points)
        + pack_field(T_POINT, core.n1.encode())
        + pack_field(T_POINT, core.n2.encode())
        + pack_field(T_BYTES, core.c1)
        + pack_field(T_BYTES, core.c2)
        + pack_field(T_POINT, usig.sig.encode())
        + pack_field(T_POINT, usig.commitment.encode())
    )
    return pack_message(MSG_UPLOAD, fields)


def decode_upload(curve: Curve, data: bytes) -> tuple[CipherCore, UploadSignature]:
    r = _expect_type(data, MSG_UPLOAD)
    accident_id = r.expect(T_BYTES)
    l_points = _read_point_list(curve, r.expect(T_POINT_LIST))
    n1 = curve.point_from_bytes(r.expect(T_POINT))
    n2 = curve.point_from_bytes(r.expect(T_POINT))
    c1 = r.expect(T_BYTES)
    c2 = r.expect(T_BYTES)
    sig = curve.point_from_bytes(r.expect(T_POINT))
    commitment = curve.point_from_bytes(r.expect(T_POINT))
    if not r.done():
        raise WireError("trailing bytes in upload")
    core = CipherCore(accident_id, l_points, n1, n2, c1, c2)
    return core, UploadSignature(sig, commitment, accident_id)


# -- access ------------------------------------------------------------------


def access_req_blob(pid: Scalar, accident_id: bytes, index: int, ts: int) -> bytes:
    return (
        pack_field(T_BYTES, b"data-request")
        + pack_field(T_SCALAR, pid.to_bytes())
        + pack_field(T_BYTES, accident_id)
        + pack_u64(index)
        + pack_u64(ts)
    )


def split_access_req_blob(curve: Curve, blob: bytes):
    r = FieldReader(blob)
    if r.expect(T_BYTES) != b"data-request":
        raise WireError("not a data request")
    pid = curve.scalar_from_bytes(r.expect(T_SCALAR))
    accident_id = r.expect(T_BYTES)
    index = r.expect_u64()
    ts = r.expect_u64()
    if not r.done():
        raise WireError("trailing bytes in data request")
    return pid, accident_id, index, ts


def encode_access_req(env: bytes) -> bytes:
    return pack_message(MSG_ACCESS_REQ, pack_field(T_BYTES, env))


def decode_access_req(data: bytes) -> bytes:
    r = _expect_type(data, MSG_ACCESS_REQ)
    env = r.expect(T_BYTES)
    if not r.done():
        raise WireError("trailing bytes in access request")
    return env


def encode_access_resp(accident_id: bytes, resp: AccessResponse) -> bytes:
    fields = (
        pack_field(T_BYTES, accident_id)
        + wire.pack_bits(resp.policy.bits)
        + _point_list(resp.l_points)
        + pack_field(T_POINT, resp.n1.encode())
        + pack_field(T_POINT, resp.n2.encode())
        + pack_field(T_BYTES, resp.c1)
        + pack_field(T_BYTES, resp.masked_body)
    )
    return pack_message(MSG_ACCESS_RESP, fields)


def decode_access_resp(curve: Curve, data: bytes) -> tuple[bytes, AccessResponse]:
    r = _expect_type(data, MSG_ACCESS_RESP)
    accident_id = r.expect(T_BYTES)
    policy = AccessPolicy.of(r.expect_bits())
    l_points = _read_point_list(curve, r.expect(T_POINT_LIST))
    n1 = curve.point_from_bytes(r.expect(T_POINT))
    n2 = curve.point_from_bytes(r.expect(T_POINT))
    c1 = r.expect(T_BYTES)
    body = r.expect(T_BYTES)
    if not r.done():
        raise WireError("trailing bytes in access response")
    return accident_id, AccessResponse(policy, l_points, n1, n2, c1, body)


# -- warrant update ----------------------------------------------------------


def update_req_body(pid: Scalar, index: int, bit: int, ts: int) -> bytes:
    return (
        b"update-request"
        + pid.to_bytes()
        + index.to_bytes(8, "big")
        + bytes([bit])
        + ts.to_bytes(8, "big")
    )


def encode_update_req(pid: Scalar, index: int, bit: int, ts: int, sig: bytes) -> bytes:
    fields = (
        pack_field(T_SCALAR, pid.to_bytes())
        + pack_u64(index)
        + pack_u64(bit)
        + pack_u64(ts)
        + pack_field(T_BYTES, sig)
    )
    return pack_message(MSG_UPDATE_REQ, fields)


def decode_update_req(curve: Curve, data: bytes):
    r = _expect_type(data, MSG_UPDATE_REQ)
    pid = curve.scalar_from_bytes(r.expect(T_SCALAR))
    index = r.expect_u64()
    bit = r.expect_u64()
    ts = r.expect_u64()
    sig = r.expect(T_BYTES)
    if bit not in (0, 1) or not r.done():
        raise WireError("bad update request")
    return pid, index, bit, ts, sig


def update_sig_body(index: int, ts: int, env: bytes) -> bytes:
    return b"update-response" + index.to_bytes(8, "big") + ts.to_bytes(8, "big") + env


def update_blob(index: int, w3: Scalar, bit: int) -> bytes:
    return pack_u64(index) + pack_field(T_SCALAR, w3.to_bytes()) + pack_u64(bit)


def split_update_blob(curve: Curve, blob: bytes) -> tuple[int, Scalar, int]:
    r = FieldReader(blob)
    index = r.expect_u64()
    w3 = curve.scalar_from_bytes(r.expect(T_SCALAR))
    bit = r.expect_u64()
    if bit not in (0, 1) or not r.done():
        raise WireError("bad update blob")
    return index, w3, bit


def encode_update_resp(index: int, ts: int, env: bytes, sig: bytes) -> bytes:
    fields = (
        pack_u64(index)
        + pack_u64(ts)
        + pack_field(T_BYTES, env)
        + pack_field(T_BYTES, sig)
    )
    return pack_message(MSG_UPDATE_RESP, fields)


def decode_update_resp(data: bytes) -> tuple[int, int, bytes, bytes]:
    r = _expect_type(data, MSG_UPDATE_RESP)
    index = r.expect_u64()
    ts = r.expect_u64()
    env = r.expect(T_BYTES)
    sig = r.expect(T_BYTES)
    if not r.done():
        raise WireError("trailing bytes in update response")
    return index, ts, env, sig


# -- stored records ----------------------------------------------------------


def encode_record(core: CipherCore) -> bytes:
    """Serialization used by the record store (same field layout as uploads)."""
    fields = (
        pack_field(T_BYTES, core.accident_id)
        + _point_list(core.l_points)
        + pack_field(T_POINT, core.n1.encode())
        + pack_field(T_POINT, core.n2.encode())
        + pack_field(T_BYTES, core.c1)
        + pack_field(T_BYTES, core.c2)
    )
    return pack_message(MSG_RECORD, fields)


def decode_record(curve: Curve, data: bytes) -> CipherCore:
    r = _expect_type(data, MSG_RECORD)
    accident_id = r.expect(T_BYTES)
    l_points = _read_point_list(curve, r.expect(T_POINT_LIST))
    n1 = curve.point_from_bytes(r.expect(T_POINT))
    n2 = curve.point_from_bytes(r.expect(T_POINT))
    c1 = r.expect(T_BYTES)
    c2 = r.expect(T_BYTES)
    if not r.done():
        raise WireError("trailing bytes in stored record")
    return CipherCore(accident_id, l_points, n1, n2, c1, c2)
