"""Hybrid public-key envelopes and Schnorr signatures over the protocol curve.

An envelope is ephemeral-static Diffie-Hellman: a fresh point r*G rides along
with the body, the shared secret r*pk feeds the key derivation, and the body
is stream-XORed and authenticated with XOF-derived material.
"""

from __future__ import annotations

import hmac
from dataclasses import dataclass

from .group import Curve, Point, Scalar, h1, kdf_point, xof, xor_bytes
from . import wire


class IntegrityError(Exception):
    """Envelope failed authentication (wrong key or tampered bytes)."""


TAG_BYTES = 16

_STREAM = b"env/stream:"
_MAC = b"env/mac:"
_SIG = b"env/sig:"


@dataclass(frozen=True)
class KeyPair:
    sk: Scalar
    pk: Point


def env_keygen(curve: Curve, rng) -> KeyPair:
    sk = curve.random_scalar(rng, nonzero=True)
    return KeyPair(sk, sk * curve.generator)


@dataclass(frozen=True)
class Envelope:
    ephemeral: Point
    body: bytes
    tag: bytes

    def to_bytes(self) -> bytes:
        return (
            wire.pack_field(wire.T_POINT, self.ephemeral.encode())
            + wire.pack_field(wire.T_BYTES, self.body)
            + wire.pack_field(wire.T_BYTES, self.tag)
        )

    @classmethod
    def from_bytes(cls, curve: Curve, data: bytes) -> "Envelope":
        reader = wire.FieldReader(data)
        ephemeral = curve.point_from_bytes(reader.expect(wire.T_POINT))
        body = reader.expect(wire.T_BYTES)
        tag = reader.expect(wire.T_BYTES)
        if len(tag) != TAG_BYTES or not reader.done():
            raise wire.WireError("malformed envelope")
        return cls(ephemeral, body, tag)


def _keystream(key: bytes, length: int) -> bytes:
    if length == 0:
        return b""
    return xof(_STREAM + key, length)


def _auth_tag(key: bytes, ephemeral: Point, body: bytes) -> bytes:
    return xof(_MAC + key + ephemeral.encode() + body, TAG_BYTES)


def env_encrypt(pk: Point, message: bytes, rng) -> Envelope:
    """Encrypt message to the holder of pk."""
    if pk.is_identity():
        raise ValueError("cannot encrypt to the identity point")
    curve = pk.curve
    r = curve.random_scalar(rng, nonzero=True)
    ephemeral = r * curve.generator
    key = kdf_point(r * pk)
    body = xor_bytes(message, _keystream(key, len(message)))
    return Envelope(ephemeral, body, _auth_tag(key, ephemeral, body))


def env_decrypt(sk: Scalar, env: Envelope) -> bytes:
    """Open an envelope; IntegrityError if the tag does not check out."""
    key = kdf_point(sk * env.ephemeral)
    expected = _auth_tag(key, env.ephemeral, env.body)
    if not hmac.compare_digest(expected, env.tag):
        raise IntegrityError("envelope tag mismatch")
    return xor_bytes(env.body, _keystream(key, len(env.body)))


@dataclass(frozen=True)
class Signature:
    """Schnorr signature: nonce commitment R and response s = r + e*sk."""

    commitment: Point
    response: Scalar

    def to_bytes(self) -> bytes:
        return wire.pack_field(wire.T_POINT, self.commitment.encode()) + wire.pack_field(
            wire.T_SCALAR, self.response.to_bytes()
        )

    @classmethod
    def from_bytes(cls, curve: Curve, data: bytes) -> "Signature":
        reader = wire.FieldReader(data)
        commitment = curve.point_from_bytes(reader.expect(wire.T_POINT))
        response = curve.scalar_from_bytes(reader.expect(wire.T_SCALAR))
        if not reader.done():
            raise wire.WireError("trailing bytes after signature")
        return cls(commitment, response)


def _challenge(curve: Curve, commitment: Point, pk: Point, message: bytes) -> Scalar:
    return h1(curve, _SIG + commitment.encode() + pk.encode() + message)


def env_sign(sk: Scalar, message: bytes, rng) -> Signature:
    curve = sk.curve
    pk = sk * curve.generator
    r = curve.random_scalar(rng, nonzero=True)
    commitment = r * curve.generator
    e = _challenge(curve, commitment, pk, message)
    return Signature(commitment, r + e * sk)


def env_verify(pk: Point, message: bytes, sig: "Signature | bytes") -> bool:
    """Check a signature; malformed encodings verify false, never raise."""
    curve = pk.curve
    if isinstance(sig, (bytes, bytearray)):
        try:
            sig = Signature.from_bytes(curve, bytes(sig))
        except ValueError:
            return False
    e = _challenge(curve, sig.commitment, pk, message)
    return sig.response * curve.generator == sig.commitment + e * pk
