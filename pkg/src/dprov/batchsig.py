"""Token-bound upload signatures with aggregated batch verification.

A provider binds its masked payload and accident id to the roadside unit's
credential: sig = r * H1(c2, A) * (pk_RSU + H1(t) * pk_TA), published next to
the nonce commitment R = r * G.  The verifier holds sk_RSU = sk_TA * H1(t) +
r_RSU, so a whole batch collapses to one comparison:

    (sum sig_i) * sk_RSU^-1  ==  sum H1(c2_i, A) * R_i

costing B+1 scalar multiplications and a single inversion for B items, against
2B multiplications and B inversions for one-at-a-time checking.
"""

from __future__ import annotations

from dataclasses import dataclass

from .group import Curve, Point, Scalar, h1


@dataclass(frozen=True)
class UploadSignature:
    """What a provider attaches to an upload: sig point, nonce commitment, accident id."""

    sig: Point
    commitment: Point
    accident_id: bytes


def upload_digest(curve: Curve, c2: bytes, accident_id: bytes) -> Scalar:
    """H1 over the masked payload and accident id, length-prefixed."""
    return h1(curve, len(c2).to_bytes(4, "big") + c2 + accident_id)


def rsu_keypair(curve: Curve, sk_ta: Scalar, token: Scalar, rng) -> tuple[Scalar, Point]:
    """Draw a roadside-unit credential: returns (sk_rsu, pk_rsu).

    pk_rsu commits only to the unit's own randomness; the token binding lives
    in sk_rsu = sk_ta * H1(t) + r.
    """
    r = curve.random_scalar(rng, nonzero=True)
    sk = sk_ta * h1(curve, token.to_bytes()) + r
    return sk, r * curve.generator


def pbvm_sign(
    token: Scalar,
    pk_rsu: Point,
    pk_ta: Point,
    c2: bytes,
    accident_id: bytes,
    rng,
) -> UploadSignature:
    """Sign a masked payload for upload under a fresh nonce."""
    curve = token.curve
    r = curve.random_scalar(rng, nonzero=True)
    digest = upload_digest(curve, c2, accident_id)
    base = pk_rsu + h1(curve, token.to_bytes()) * pk_ta
    return UploadSignature(
        sig=(r * digest) * base,
        commitment=r * curve.generator,
        accident_id=accident_id,
    )


def pbvm_batch_verify(sk_rsu: Scalar, items: list[tuple[bytes, UploadSignature]]) -> bool:
    """Verify a batch of (c2, signature) pairs for one accident in one shot."""
    if not items:
        raise ValueError("empty batch")
    accident_id = items[0][1].accident_id
    if any(s.accident_id != accident_id for _, s in items):
        raise ValueError("batch mixes accident ids")
    curve = sk_rsu.curve
    sig_sum = curve.identity
    rhs = curve.identity
    for c2, s in items:
        sig_sum = sig_sum + s.sig
        rhs = rhs + upload_digest(curve, c2, accident_id) * s.commitment
    return sk_rsu.inverse() * sig_sum == rhs


def pbvm_isolate_invalid(
    sk_rsu: Scalar, items: list[tuple[bytes, UploadSignature]]
) -> list[int]:
    """Indices of items failing verification, located by recursive halving."""
    if not items:
        raise ValueError("empty batch")

    bad: list[int] = []

    def scan(lo: int, hi: int) -> None:
        if pbvm_batch_verify(sk_rsu, items[lo:hi]):
            return
        if hi - lo == 1:
            bad.append(lo)
            return
        mid = (lo + hi) // 2
        scan(lo, mid)
        scan(mid, hi)

    scan(0, len(items))
    return bad
