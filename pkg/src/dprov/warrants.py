"""Decentralized warrant issuance, aggregation, and partial update.

Each warrant issuer holds one multiplicative share s2_i of the blinding
secret and one Shamir share f(s3_i) of the tracing secret.  From a common
blinding pair (d1, d2) - the product of per-issuer draws - issuer i derives
four scalars; the requester aggregates all of them into a warrant whose two
working values open policy-bound ciphertexts.  Updating one permission bit
touches exactly one issuer and replaces one multiplicative component.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .envelope import KeyPair
from .group import Curve, Scalar
from .params import attribute_scalar
from .policycrypt import PermissionSet
from .polynomials import lagrange_zero_coefficient


class IssuanceError(Exception):
    """Warrant issuance cannot complete (missing/duplicate/inconsistent pieces)."""


class UnknownPseudonym(Exception):
    """The issuer has no permission entry for the requesting pseudonym."""


@dataclass(frozen=True)
class PartialWarrant:
    """One issuer's contribution: index, four scalars, and the permission bit used."""

    index: int
    w1: Scalar
    w2: Scalar
    w3: Scalar
    w4: Scalar
    permission_bit: int


@dataclass(frozen=True)
class Warrant:
    """An aggregated warrant.

    Only (w_in_1, w_in_2) travel with a decryption; the summed/multiplied
    components stay with the holder so single-issuer updates stay local.
    """

    w_in_1: Scalar
    w2_sum: Scalar
    w3_components: tuple[Scalar, ...]
    w4_sum: Scalar
    permissions: PermissionSet

    @property
    def w_in_2(self) -> Scalar:
        acc = self.w3_components[0].curve.scalar(1)
        for w3 in self.w3_components:
            acc = acc * w3
        return self.w2_sum + acc + self.w4_sum


@dataclass
class WIState:
    """A warrant issuer's registered credential and permission table."""

    index: int  # 1-based
    identity: bytes
    keypair: KeyPair
    s1: Scalar
    s2: Scalar
    s2_i: Scalar
    s3_i: Scalar
    share: Scalar  # f(s3_i), the issuer's Shamir share
    published_xs: tuple[Scalar, ...]  # every issuer's s3_j, ordered by index
    permission_table: dict[int, int]  # pseudonym value -> permission bit

    def permission_for(self, pid: Scalar) -> int:
        try:
            return self.permission_table[pid.v]
        except KeyError:
            raise UnknownPseudonym("no permission entry for this pseudonym") from None

    def _gate_scalar(self, bit: int) -> Scalar:
        """(s1 + H3(i)) when the bit is off, 1 when granted."""
        curve = self.s1.curve
        if bit:
            return curve.scalar(1)
        return self.s1 + attribute_scalar(curve, self.index)

def wi_issue_partial(wi: WIState, pid: Scalar, d1: Scalar, d2: Scalar) -> PartialWarrant:
    """Derive one issuer's four warrant scalars for the pseudonym."""
    bit = wi.permission_for(pid)
    lam = lagrange_zero_coefficient(wi.index - 1, wi.published_xs)
    fl = wi.share * lam
    return PartialWarrant(
        index=wi.index,
        w1=d1 + wi.s2 * d2,
        w2=-(d2 * fl),
        w3=(wi.s2_i * wi._gate_scalar(bit)).inverse(),
        w4=-(d1 * fl) / wi.s2,
        permission_bit=bit,
    )


def wi_update_partial(wi: WIState, pid: Scalar, new_bit: int) -> tuple[int, Scalar]:
    """Record a changed permission bit; return the replacement w3 component."""
    if new_bit not in (0, 1):
        raise ValueError("permission bit must be 0 or 1")
    wi.permission_for(pid)  # must already be registered
    wi.permission_table[pid.v] = new_bit
    return wi.index, (wi.s2_i * wi._gate_scalar(new_bit)).inverse()


def draw_blinding(curve: Curve, rng) -> tuple[Scalar, Scalar]:
    return curve.random_scalar(rng), curve.random_scalar(rng)


def combine_blinding(
    pairs: Iterable[tuple[Scalar, Scalar]], expected: int
) -> tuple[Scalar, Scalar]:
    """Multiply per-issuer draws into the common (d1, d2); all must be present."""
    pairs = list(pairs)
    if len(pairs) != expected:
        raise IssuanceError(f"have {len(pairs)} blinding pairs, need {expected}")
    curve = pairs[0][0].curve
    d1 = curve.scalar(1)
    d2 = curve.scalar(1)
    for a, b in pairs:
        d1 = d1 * a
        d2 = d2 * b
    return d1, d2


def wi_blind_exchange(wis: Sequence[WIState], rng) -> dict[int, tuple[Scalar, Scalar]]:
    """Full-mesh blinding exchange without transport: every issuer draws a
    pair, sees everyone else's, and lands on the same (d1, d2) product."""
    if not wis:
        raise ValueError("no issuers")
    curve = wis[0].s1.curve
    draws = {wi.index: draw_blinding(curve, rng) for wi in wis}
    return {
        wi.index: combine_blinding(draws.values(), len(wis)) for wi in wis
    }


def in_aggregate(
    partials: Sequence[PartialWarrant], expected: int | None = None
) -> Warrant:
    """Aggregate every issuer's partial into a warrant.

    Requires exactly the index set 1..n with consistent w1 values; anything
    else aborts issuance.  Pass the known issuer count as `expected` so a
    quorum that merely looks complete (indices 1..k of a larger system)
    cannot slip through.
    """
    if not partials:
        raise IssuanceError("no partial warrants")
    if expected is not None and len(partials) != expected:
        raise IssuanceError(
            f"have {len(partials)} partial warrants, need {expected}"
        )
    n = len(partials)
    by_index = {p.index: p for p in partials}
    if sorted(by_index) != list(range(1, n + 1)):
        raise IssuanceError("partial warrants do not cover indices 1..n exactly")
    curve = partials[0].w1.curve
    w1 = by_index[1].w1
    if any(p.w1 != w1 for p in partials):
        raise IssuanceError("issuers disagree on w1; aborting")
    w2_sum = curve.scalar(0)
    w4_sum = curve.scalar(0)
    w3 = []
    bits = []
    for i in range(1, n + 1):
        p = by_index[i]
        w2_sum = w2_sum + p.w2
        w4_sum = w4_sum + p.w4
        w3.append(p.w3)
        bits.append(p.permission_bit)
    return Warrant(w1, w2_sum, tuple(w3), w4_sum, PermissionSet.of(bits))


def in_apply_update(
    warrant: Warrant, updates: Sequence[tuple[int, Scalar, int]]
) -> Warrant:
    """Apply (index, new w3, new bit) replacements to a warrant."""
    n = len(warrant.w3_components)
    w3 = list(warrant.w3_components)
    bits = list(warrant.permissions.bits)
    for index, new_w3, new_bit in updates:
        if not 1 <= index <= n:
            raise ValueError(f"issuer index {index} out of range 1..{n}")
        if new_bit not in (0, 1):
            raise ValueError("permission bit must be 0 or 1")
        w3[index - 1] = new_w3
        bits[index - 1] = new_bit
    return Warrant(
        warrant.w_in_1,
        warrant.w2_sum,
        tuple(w3),
        warrant.w4_sum,
        PermissionSet.of(bits),
    )
