"""TLV framing and every concrete message codec."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from dprov import messages as msg
from dprov.batchsig import UploadSignature, pbvm_sign, rsu_keypair
from dprov.group import get_curve
from dprov.params import build_public_params, generate_master_secrets
from dprov.policycrypt import AccessPolicy, AccessResponse, dacm_encrypt
from dprov.wire import (
    T_BYTES,
    T_SCALAR,
    WIRE_VERSION,
    FieldReader,
    WireError,
    open_message,
    pack_bits,
    pack_field,
    pack_message,
    pack_u64,
)

CURVE = get_curve("brainpoolp160r1")
RNG = random.Random(2024)
SECRETS = generate_master_secrets(CURVE, 3, RNG)
PP = build_public_params(CURVE, SECRETS, 3)


@given(payload=st.binary(max_size=100), tag=st.integers(1, 7))
@settings(max_examples=30, deadline=None)
def test_field_roundtrip(payload, tag):
    r = FieldReader(pack_field(tag, payload))
    assert r.expect(tag) == payload
    assert r.done()


def test_message_header():
    data = pack_message(0x42, pack_u64(5))
    assert data[:2] == WIRE_VERSION
    mtype, reader = open_message(data)
    assert mtype == 0x42
    assert reader.expect_u64() == 5
    assert reader.done()


def test_open_message_rejects_bad_version():
    data = pack_message(0x10, b"")
    with pytest.raises(WireError):
        open_message(b"\xde\xad" + data[2:])
    with pytest.raises(WireError):
        open_message(b"")


def test_reader_strictness():
    blob = pack_field(T_BYTES, b"abc")
    r = FieldReader(blob)
    with pytest.raises(WireError):
        r.expect(T_SCALAR)  # wrong tag
    r2 = FieldReader(blob[:-1])  # truncated value
    with pytest.raises(WireError):
        r2.expect(T_BYTES)
    r3 = FieldReader(blob + b"\x00")
    r3.expect(T_BYTES)
    assert not r3.done()


def test_pack_bits_roundtrip():
    r = FieldReader(pack_bits((1, 0, 1, 1)))
    assert r.expect_bits() == (1, 0, 1, 1)


def _upload():
    policy = AccessPolicy.of((1, 0, 1))
    core = dacm_encrypt(PP, policy, b"evidence", b"ACC", RNG)
    sk, pk = rsu_keypair(CURVE, SECRETS.sk_ta, SECRETS.token, RNG)
    usig = pbvm_sign(SECRETS.token, pk, PP.pk_ta, core.c2, b"ACC", RNG)
    return core, usig


def test_upload_roundtrip():
    core, usig = _upload()
    data = msg.encode_upload(core, usig)
    core2, usig2 = msg.decode_upload(CURVE, data)
    assert core2 == core
    assert usig2.sig == usig.sig and usig2.commitment == usig.commitment
    assert usig2.accident_id == b"ACC"


def test_upload_schema_carries_no_identity_slot():
    assert "sender" not in msg.UPLOAD_FIELDS
    assert "identity" not in msg.UPLOAD_FIELDS
    assert len(msg.UPLOAD_FIELDS) == 8


def test_decode_upload_rejects_wrong_type():
    core, usig = _upload()
    data = msg.encode_record(core)
    with pytest.raises(WireError):
        msg.decode_upload(CURVE, data)


def test_record_roundtrip():
    core, _ = _upload()
    assert msg.decode_record(CURVE, msg.encode_record(core)) == core


def test_register_roundtrip():
    kp_pk = CURVE.scalar(4) * CURVE.generator
    data = msg.encode_register_req("dp", b"\x01\x02", kp_pk)
    kind, env, pk = msg.decode_register_req(CURVE, data)
    assert (kind, env, pk) == ("dp", b"\x01\x02", kp_pk)
    resp = msg.encode_register_resp(b"blob")
    assert msg.decode_register_resp(resp) == b"blob"


def test_directory_roundtrip():
    pid = CURVE.scalar(77)
    pk = CURVE.scalar(6) * CURVE.generator
    pid2, pk2, bit = msg.decode_directory(CURVE, msg.encode_directory(pid, pk, 1))
    assert (pid2, pk2, bit) == (pid, pk, 1)
    with pytest.raises(WireError):
        msg.decode_directory(CURVE, msg.encode_directory(pid, pk, 1)[:-1])


def test_wi_credential_roundtrip():
    s = [CURVE.scalar(i + 2) for i in range(6)]
    xs = (CURVE.scalar(10), CURVE.scalar(11))
    pks = [CURVE.scalar(k) * CURVE.generator for k in (3, 4)]
    blob = msg.encode_wi_credential(2, *s, xs, pks)
    index, *vals, xs2, pks2 = msg.decode_wi_credential(CURVE, blob)
    assert index == 2
    assert vals == s
    assert xs2 == xs
    assert pks2 == tuple(pks)


def test_blinding_payload_is_exactly_two_scalars():
    d1, d2 = CURVE.scalar(5), CURVE.scalar(6)
    payload = msg.blinding_payload(d1, d2)
    assert len(payload) == 2 * CURVE.scalar_bytes
    assert msg.split_blinding_payload(CURVE, payload) == (d1, d2)
    with pytest.raises(WireError):
        msg.split_blinding_payload(CURVE, payload + b"\x00")


def test_partial_blob_roundtrip():
    ws = [CURVE.scalar(i + 1) for i in range(4)]
    blob = msg.partial_blob(3, *ws, 1)
    index, *ws2, bit = msg.split_partial_blob(CURVE, blob)
    assert (index, ws2, bit) == (3, ws, 1)
    with pytest.raises(WireError):
        msg.split_partial_blob(CURVE, blob[:-1])


def test_access_request_blob_roundtrip():
    pid = CURVE.scalar(88)
    blob = msg.access_req_blob(pid, b"ACC-9", 4, 1000)
    assert msg.split_access_req_blob(CURVE, blob) == (pid, b"ACC-9", 4, 1000)
    with pytest.raises(WireError):
        msg.split_access_req_blob(CURVE, b"\x01\x00\x00\x00\x03odd" + blob)


def test_access_response_roundtrip():
    core, _ = _upload()
    resp = AccessResponse(
        AccessPolicy.of((1, 0, 1)), core.l_points, core.n1, core.n2, core.c1, b"masked"
    )
    acc, resp2 = msg.decode_access_resp(CURVE, msg.encode_access_resp(b"ACC", resp))
    assert acc == b"ACC"
    assert resp2 == resp


def test_update_messages_roundtrip():
    pid = CURVE.scalar(44)
    data = msg.encode_update_req(pid, 2, 0, 55, b"sig")
    assert msg.decode_update_req(CURVE, data) == (pid, 2, 0, 55, b"sig")
    blob = msg.update_blob(2, CURVE.scalar(9), 0)
    assert msg.split_update_blob(CURVE, blob) == (2, CURVE.scalar(9), 0)
    resp = msg.encode_update_resp(2, 60, b"env", b"sig")
    assert msg.decode_update_resp(resp) == (2, 60, b"env", b"sig")


def test_sig_bodies_are_domain_separated():
    pid = CURVE.scalar(1)
    assert msg.warrant_req_body(pid, 5)[:7] != msg.update_req_body(pid, 1, 0, 5)[:7]
    assert msg.partial_sig_body(1, 5, b"e") != msg.update_sig_body(1, 5, b"e")


def test_refusal_roundtrip():
    assert msg.decode_refusal(msg.encode_refusal("why not")) == "why not"
