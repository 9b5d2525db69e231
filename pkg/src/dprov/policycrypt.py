"""Policy-gated encryption of upload payloads, response masking, and leak tracing.

Encryption binds a payload to a policy bit vector: the key point n1 * G is
recoverable only by holders of a warrant whose permission vector covers the
policy.  The authority masks every relayed payload with the requester's
pseudonym and key so that a leaked copy identifies the leaker by XOR against
the stored original.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .group import Curve, Point, Scalar, h1, kdf_point, xof, xor_bytes
from .params import PublicParams, attribute_scalar
from .polynomials import PolicyNotSatisfied, expand_roots, quotient_mask


class AccessDenied(Exception):
    """Permissions do not cover the record's policy."""


class DecryptionError(Exception):
    """Warrant/response mismatch: wrong warrant, stale permissions, or tampering."""


class MalformedLeak(Exception):
    """A leaked payload does not decode to a registered-looking identity pair."""


@dataclass(frozen=True)
class AccessPolicy:
    """A bit per attribute index; bit i (1-based index i+1) set means required."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.bits:
            raise ValueError("empty policy")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("policy bits must be 0 or 1")

    @classmethod
    def of(cls, bits: Iterable[int]) -> "AccessPolicy":
        return cls(tuple(bits))

    def __len__(self) -> int:
        return len(self.bits)

    @property
    def ones(self) -> int:
        return sum(self.bits)

    def to_bytes(self) -> bytes:
        return bytes(self.bits)


# A permission vector has the same shape as a policy; granted attributes set.
PermissionSet = AccessPolicy


# -- payload padding ---------------------------------------------------------

_PAD_BLOCK = 16
_LEN_PREFIX = 4


def padded_length(payload_len: int, scalar_bytes: int) -> int:
    """Padded size: 16-byte multiple, never below two scalar widths."""
    raw = max(_LEN_PREFIX + payload_len, 2 * scalar_bytes)
    return (raw + _PAD_BLOCK - 1) // _PAD_BLOCK * _PAD_BLOCK


def pad_message(payload: bytes, scalar_bytes: int) -> bytes:
    total = padded_length(len(payload), scalar_bytes)
    out = len(payload).to_bytes(_LEN_PREFIX, "big") + payload
    return out + bytes(total - len(out))


def unpad_message(padded: bytes) -> bytes:
    if len(padded) < _LEN_PREFIX:
        raise ValueError("padded message too short")
    n = int.from_bytes(padded[:_LEN_PREFIX], "big")
    if _LEN_PREFIX + n > len(padded):
        raise ValueError("declared length overruns padding")
    if any(padded[_LEN_PREFIX + n :]):
        raise ValueError("nonzero padding bytes")
    return padded[_LEN_PREFIX : _LEN_PREFIX + n]


# -- ciphertexts -------------------------------------------------------------


@dataclass(frozen=True)
class CipherCore:
    """The policy-bound ciphertext a provider uploads.

    l_points carries n1 * X_j for j = 1..(n_wi - |policy|); n1/n2 are the
    blinded policy aggregates; c1 boxes the symmetric key; c2 is the masked
    padded payload.
    """

    accident_id: bytes
    l_points: tuple[Point, ...]
    n1: Point
    n2: Point
    c1: bytes
    c2: bytes


@dataclass(frozen=True)
class AccessResponse:
    """What the authority relays to a requester: core fields with c2 re-masked."""

    policy: AccessPolicy
    l_points: tuple[Point, ...]
    n1: Point
    n2: Point
    c1: bytes
    masked_body: bytes


def _policy_roots(curve: Curve, n: int) -> list[Scalar]:
    return [attribute_scalar(curve, i) for i in range(1, n + 1)]


def _binding_scalar(
    curve: Curve, policy: AccessPolicy, padded: bytes, key: bytes
) -> Scalar:
    pbits = policy.to_bytes()
    return h1(
        curve,
        len(pbits).to_bytes(4, "big")
        + pbits
        + len(padded).to_bytes(4, "big")
        + padded
        + key,
    )


_KEY_BYTES = 32


def dacm_encrypt(
    pp: PublicParams,
    policy: AccessPolicy,
    message: bytes,
    accident_id: bytes,
    rng,
) -> CipherCore:
    """Encrypt message under the policy, bound to the accident id."""
    if len(policy) != pp.n_wi:
        raise ValueError("policy length must match the issuer count")
    curve = pp.curve
    key = rng.randbytes(_KEY_BYTES)
    padded = pad_message(message, curve.scalar_bytes)
    n1_scalar = _binding_scalar(curve, policy, padded, key)
    g1 = expand_roots(_policy_roots(curve, pp.n_wi), policy.bits)
    free = pp.n_wi - policy.ones  # number of unset policy bits = deg g1
    l_points = tuple(n1_scalar * pp.x_points[j] for j in range(1, free + 1))
    # n1 * sum g1_j Y_j folded into the coefficients: sum (n1 g1_j) Y_j
    agg1 = curve.identity
    agg2 = curve.identity
    for j, coeff in enumerate(g1.coeffs):
        scaled = n1_scalar * coeff
        agg1 = agg1 + scaled * pp.y_points[j]
        agg2 = agg2 + scaled * pp.z_points[j]
    c1 = xor_bytes(xof(kdf_point(n1_scalar * curve.generator), _KEY_BYTES), key)
    c2 = xor_bytes(xof(key, len(padded)), padded)
    return CipherCore(accident_id, l_points, agg1, agg2, c1, c2)


def _trace_pad(pid: Scalar, sk: Scalar, length: int) -> bytes:
    ident = pid.to_bytes() + sk.to_bytes()
    if length < len(ident):
        raise ValueError("payload too short to carry the trace mask")
    return ident + bytes(length - len(ident))


def ta_mask(c2: bytes, pid: Scalar, sk_in: Scalar) -> bytes:
    """Authority-side re-mask of c2 with the requester's pseudonym and key."""
    return xor_bytes(c2, _trace_pad(pid, sk_in, len(c2)))


def dacm_decrypt(
    pp: PublicParams,
    warrant,
    permissions: PermissionSet,
    resp: AccessResponse,
    pid: Scalar,
    sk_in: Scalar,
) -> bytes:
    """Recover the payload from a masked response using an aggregated warrant.

    Raises AccessDenied when the permissions cannot cover the policy, and
    DecryptionError when the warrant does not actually open the record (stale
    or foreign warrant, tampered response).
    """
    curve = pp.curve
    if len(resp.policy) != pp.n_wi or len(permissions) != pp.n_wi:
        raise ValueError("policy/permission length must match the issuer count")
    try:
        h = quotient_mask(resp.policy.bits, permissions.bits)
    except PolicyNotSatisfied as exc:
        raise AccessDenied(str(exc)) from exc
    roots = _policy_roots(curve, pp.n_wi)
    g2 = expand_roots(roots, tuple(1 - b for b in h))
    y_prime = warrant.w_in_2 * resp.n1
    z_prime = warrant.w_in_1 * resp.n2
    correction = curve.identity
    for i in range(1, g2.degree + 1):
        correction = correction + g2.coeffs[i] * resp.l_points[i - 1]
    denom = curve.scalar(1)
    for i, bit in enumerate(h):
        if bit:
            denom = denom * roots[i]
    candidate = denom.inverse() * (y_prime + z_prime - correction)
    if candidate.is_identity():
        raise DecryptionError("recovered key point is the identity")
    key = xor_bytes(xof(kdf_point(candidate), _KEY_BYTES), resp.c1)
    padded = xor_bytes(
        xor_bytes(xof(key, len(resp.masked_body)), resp.masked_body),
        _trace_pad(pid, sk_in, len(resp.masked_body)),
    )
    if _binding_scalar(curve, resp.policy, padded, key) * curve.generator != candidate:
        raise DecryptionError("binding check failed: wrong warrant or tampered data")
    try:
        return unpad_message(padded)
    except ValueError as exc:
        raise DecryptionError(f"bad padding after decryption: {exc}") from exc


def trace(curve: Curve, leaked: bytes, stored_c2: bytes) -> tuple[Scalar, Scalar]:
    """Identify the leaker of a masked payload by XOR against the stored c2.

    Returns the (pseudonym, secret key) pair baked into the mask.  Raises
    MalformedLeak when the XOR prefix does not decode to in-range nonzero
    scalars, i.e. the leak did not come from a response we produced.
    """
    if len(leaked) != len(stored_c2):
        raise ValueError("leaked payload and stored c2 differ in length")
    width = curve.scalar_bytes
    if len(leaked) < 2 * width:
        raise ValueError("payload too short to carry the trace mask")
    prefix = xor_bytes(leaked[: 2 * width], stored_c2[: 2 * width])
    pid_v = int.from_bytes(prefix[:width], "big")
    sk_v = int.from_bytes(prefix[width:], "big")
    if not 0 < pid_v < curve.order or not 0 < sk_v < curve.order:
        raise MalformedLeak("decoded identity pair out of range")
    return curve.scalar(pid_v), curve.scalar(sk_v)
