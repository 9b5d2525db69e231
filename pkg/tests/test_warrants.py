"""Decentralized issuance algebra, aggregation rules, and delta updates."""

import random

import pytest

from dprov.envelope import env_keygen
from dprov.group import get_curve, h1
from dprov.params import attribute_scalar, generate_master_secrets
from dprov.polynomials import shamir_split
from dprov.warrants import (
    IssuanceError,
    PartialWarrant,
    UnknownPseudonym,
    WIState,
    combine_blinding,
    draw_blinding,
    in_aggregate,
    in_apply_update,
    wi_blind_exchange,
    wi_issue_partial,
    wi_update_partial,
)

CURVE = get_curve("brainpoolp160r1")


def _issuers(n, permissions, seed=5):
    rng = random.Random(seed)
    secrets = generate_master_secrets(CURVE, n, rng)
    ids = [b"WI-%d" % i for i in range(1, n + 1)]
    xs = tuple(h1(CURVE, i) for i in ids)
    shares = shamir_split(n, n, secrets.s3, rng, xs=xs)
    pid = h1(CURVE, b"IN-1")
    wis = [
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
        for i in range(n)
    ]
    return rng, secrets, wis, pid


@pytest.mark.parametrize("n", [1, 2, 4, 6])
def test_issuance_identities(n):
    """Aggregated components satisfy the issuance equations exactly."""
    permissions = [1] * n
    rng, secrets, wis, pid = _issuers(n, permissions)
    blinded = wi_blind_exchange(wis, rng)
    # every issuer independently lands on the same (d1, d2)
    d1, d2 = blinded[1]
    assert all(blinded[i] == (d1, d2) for i in blinded)

    partials = [wi_issue_partial(wi, pid, d1, d2) for wi in wis]
    warrant = in_aggregate(partials)

    assert warrant.w_in_1 == d1 + secrets.s2 * d2
    assert warrant.w2_sum == -(d2 * secrets.s3)
    assert warrant.w4_sum == -(d1 * secrets.s3) / secrets.s2
    # with every permission granted each w3 component is 1/s2_i
    prod = CURVE.scalar(1)
    for part in secrets.s2_parts:
        prod = prod * part
    w3_prod = CURVE.scalar(1)
    for c in warrant.w3_components:
        w3_prod = w3_prod * c
    assert w3_prod == prod.inverse()
    assert warrant.w_in_2 == warrant.w2_sum + w3_prod + warrant.w4_sum


def test_denied_bit_gates_w3():
    rng, secrets, wis, pid = _issuers(3, [1, 0, 1])
    blinded = wi_blind_exchange(wis, rng)
    partials = [wi_issue_partial(wi, pid, *blinded[wi.index]) for wi in wis]
    # issuer 2 withheld: its w3 carries the (s1 + H3(2)) gate
    gate = secrets.s1 + attribute_scalar(CURVE, 2)
    expected = (secrets.s2_parts[1] * gate).inverse()
    assert partials[1].w3 == expected
    assert partials[0].w3 == secrets.s2_parts[0].inverse()


def test_unknown_pseudonym_refused():
    rng, secrets, wis, pid = _issuers(2, [1, 1])
    stranger = h1(CURVE, b"IN-stranger")
    d1, d2 = draw_blinding(CURVE, rng)
    with pytest.raises(UnknownPseudonym):
        wi_issue_partial(wis[0], stranger, d1, d2)


def test_combine_blinding_requires_all_pairs():
    rng = random.Random(1)
    pairs = [draw_blinding(CURVE, rng) for _ in range(3)]
    d1, d2 = combine_blinding(pairs, 3)
    check1 = CURVE.scalar(1)
    for a, _ in pairs:
        check1 = check1 * a
    assert d1 == check1
    with pytest.raises(IssuanceError):
        combine_blinding(pairs[:2], 3)


def test_aggregate_rejects_gaps_and_duplicates():
    rng, secrets, wis, pid = _issuers(3, [1, 1, 1])
    blinded = wi_blind_exchange(wis, rng)
    partials = [wi_issue_partial(wi, pid, *blinded[wi.index]) for wi in wis]
    with pytest.raises(IssuanceError):
        in_aggregate(partials[:2], expected=3)  # known quorum short one
    with pytest.raises(IssuanceError):
        in_aggregate([partials[0], partials[2]])  # index gap
    with pytest.raises(IssuanceError):
        in_aggregate([partials[0], partials[0], partials[2]])  # duplicate 1
    with pytest.raises(IssuanceError):
        in_aggregate([])


def test_aggregate_rejects_inconsistent_w1():
    rng, secrets, wis, pid = _issuers(2, [1, 1])
    blinded = wi_blind_exchange(wis, rng)
    partials = [wi_issue_partial(wi, pid, *blinded[wi.index]) for wi in wis]
    forged = PartialWarrant(
        partials[1].index,
        partials[1].w1 + CURVE.scalar(1),
        partials[1].w2,
        partials[1].w3,
        partials[1].w4,
        partials[1].permission_bit,
    )
    with pytest.raises(IssuanceError):
        in_aggregate([partials[0], forged])


def test_update_touches_only_named_component():
    rng, secrets, wis, pid = _issuers(3, [1, 1, 1])
    blinded = wi_blind_exchange(wis, rng)
    partials = [wi_issue_partial(wi, pid, *blinded[wi.index]) for wi in wis]
    warrant = in_aggregate(partials)

    index, new_w3 = wi_update_partial(wis[1], pid, 0)
    updated = in_apply_update(warrant, [(index, new_w3, 0)])

    assert updated.w_in_1 == warrant.w_in_1
    assert updated.w2_sum == warrant.w2_sum
    assert updated.w4_sum == warrant.w4_sum
    assert updated.w3_components[0] == warrant.w3_components[0]
    assert updated.w3_components[2] == warrant.w3_components[2]
    assert updated.w3_components[1] != warrant.w3_components[1]
    assert updated.permissions.bits == (1, 0, 1)
    # issuer-side table reflects the change
    assert wis[1].permission_for(pid) == 0

    # re-granting restores the original component exactly
    index, back_w3 = wi_update_partial(wis[1], pid, 1)
    restored = in_apply_update(updated, [(index, back_w3, 1)])
    assert restored.w3_components == warrant.w3_components
    assert restored.permissions.bits == (1, 1, 1)


def test_update_validation():
    rng, secrets, wis, pid = _issuers(2, [1, 1])
    blinded = wi_blind_exchange(wis, rng)
    warrant = in_aggregate([wi_issue_partial(wi, pid, *blinded[wi.index]) for wi in wis])
    with pytest.raises(ValueError):
        in_apply_update(warrant, [(3, CURVE.scalar(1), 1)])  # out of range
    with pytest.raises(ValueError):
        in_apply_update(warrant, [(1, CURVE.scalar(1), 2)])  # bad bit
    with pytest.raises(ValueError):
        wi_update_partial(wis[0], pid, 7)
    with pytest.raises(UnknownPseudonym):
        wi_update_partial(wis[0], h1(CURVE, b"nobody"), 1)


def test_warrant_is_constant_size_in_scalars():
    """Warrant payload: 3 scalars + one w3 component per issuer, nothing else."""
    for n in (1, 4, 8):
        rng, secrets, wis, pid = _issuers(n, [1] * n)
        blinded = wi_blind_exchange(wis, rng)
        warrant = in_aggregate([wi_issue_partial(wi, pid, *blinded[wi.index]) for wi in wis])
        assert len(warrant.w3_components) == n
        # the aggregate used for decryption is a single scalar regardless of n
        assert warrant.w_in_2.curve is CURVE
