"""System-wide public parameters and the authority's master secrets.

The published parameters carry three point series X_i = s1^i * G,
Y_i = s1^i * s2 * G, Z_i = s1^i * s3 * G for i = 0..n_wi (index 0 holds the
plain G, s2*G, s3*G entries), plus the authority public key.  The secrets
behind them never leave the authority.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .group import HASH_SUITE_ID, Curve, Point, Scalar, h3
from . import wire


@lru_cache(maxsize=4096)
def _attribute_scalar_cached(curve: Curve, index: int) -> Scalar:
    return h3(curve, index.to_bytes(4, "big"))


def attribute_scalar(curve: Curve, index: int) -> Scalar:
    """The field element tied to attribute/issuer index i (1-based)."""
    if index < 1:
        raise ValueError("attribute indices are 1-based")
    return _attribute_scalar_cached(curve, index)


@dataclass(frozen=True)
class MasterSecrets:
    """Authority-held secrets: series exponent, issuer blinds, share secret, key."""

    s1: Scalar
    s2_parts: tuple[Scalar, ...]  # one multiplicative share per warrant issuer
    s2: Scalar
    s3: Scalar
    sk_ta: Scalar
    token: Scalar  # system token bound into every upload signature


def generate_master_secrets(curve: Curve, n_wi: int, rng) -> MasterSecrets:
    if n_wi < 1:
        raise ValueError("need at least one warrant issuer")
    s1 = curve.random_scalar(rng)
    parts = tuple(curve.random_scalar(rng) for _ in range(n_wi))
    s2 = curve.scalar(1)
    for p in parts:
        s2 = s2 * p
    s3 = curve.random_scalar(rng)
    sk_ta = curve.random_scalar(rng)
    token = curve.random_scalar(rng)
    return MasterSecrets(s1, parts, s2, s3, sk_ta, token)


@dataclass(frozen=True)
class PublicParams:
    curve: Curve
    n_wi: int
    x_points: tuple[Point, ...]  # x_points[0] is the generator
    y_points: tuple[Point, ...]
    z_points: tuple[Point, ...]
    pk_ta: Point
    hash_suite: str = HASH_SUITE_ID

    def to_bytes(self) -> bytes:
        """Canonical serialization (used for publication and determinism checks)."""
        out = [
            wire.pack_field(wire.T_BYTES, self.curve.name.encode()),
            wire.pack_u64(self.n_wi),
        ]
        for series in (self.x_points, self.y_points, self.z_points):
            out.append(
                wire.pack_field(wire.T_POINT_LIST, b"".join(p.encode() for p in series))
            )
        out.append(wire.pack_field(wire.T_POINT, self.pk_ta.encode()))
        out.append(wire.pack_field(wire.T_BYTES, self.hash_suite.encode()))
        return b"".join(out)


def build_public_params(curve: Curve, secrets: MasterSecrets, n_wi: int) -> PublicParams:
    if len(secrets.s2_parts) != n_wi:
        raise ValueError("secrets were generated for a different issuer count")
    g = curve.generator
    xs, ys, zs = [], [], []
    power = curve.scalar(1)  # s1^i, accumulated
    for _ in range(n_wi + 1):
        xs.append(power * g)
        ys.append((power * secrets.s2) * g)
        zs.append((power * secrets.s3) * g)
        power = power * secrets.s1
    return PublicParams(
        curve=curve,
        n_wi=n_wi,
        x_points=tuple(xs),
        y_points=tuple(ys),
        z_points=tuple(zs),
        pk_ta=secrets.sk_ta * g,
    )
