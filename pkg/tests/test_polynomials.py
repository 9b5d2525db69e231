"""Masked root products, quotient masks, Lagrange recovery, Shamir sharing."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from dprov.group import get_curve
from dprov.polynomials import (
    PolicyNotSatisfied,
    expand_roots,
    lagrange_zero_coefficient,
    quotient_mask,
    shamir_recover,
    shamir_split,
)

CURVE = get_curve("brainpoolp160r1")

bit_vectors = st.lists(st.integers(0, 1), min_size=1, max_size=8)


def _roots(seed: int, count: int):
    rng = random.Random(seed)
    return [CURVE.random_scalar(rng, nonzero=True) for _ in range(count)]


@given(mask=bit_vectors, seed=st.integers(0, 2**16))
@settings(max_examples=40, deadline=None)
def test_expand_roots_vanishes_exactly_on_unmasked_roots(mask, seed):
    roots = _roots(seed, len(mask))
    poly = expand_roots(roots, mask)
    assert poly.degree == mask.count(0)
    for root, bit in zip(roots, mask):
        value = poly.evaluate(-root)
        if bit == 0:
            assert value.v == 0
        # masked-out roots are (almost surely) not roots of the product;
        # with random field elements a collision has negligible probability
        else:
            assert value.v != 0


@given(mask=bit_vectors, seed=st.integers(0, 2**16))
@settings(max_examples=30, deadline=None)
def test_expand_roots_matches_naive_product(mask, seed):
    roots = _roots(seed, len(mask))
    poly = expand_roots(roots, mask)
    rng = random.Random(seed ^ 0x5A5A)
    x = CURVE.random_scalar(rng)
    expected = CURVE.scalar(1)
    for root, bit in zip(roots, mask):
        if bit == 0:
            expected = expected * (x + root)
    assert poly.evaluate(x) == expected


def test_expand_roots_all_masked_is_constant_one():
    roots = _roots(3, 4)
    poly = expand_roots(roots, [1, 1, 1, 1])
    assert poly.degree == 0
    assert poly.constant == CURVE.scalar(1)


def test_expand_roots_validates_inputs():
    roots = _roots(1, 2)
    with pytest.raises(ValueError):
        expand_roots(roots, [0])
    with pytest.raises(ValueError):
        expand_roots(roots, [0, 2])
    with pytest.raises(ValueError):
        expand_roots([], [])


def test_quotient_mask_basic():
    assert quotient_mask((1, 0, 1), (1, 1, 1)) == (0, 1, 0)
    assert quotient_mask((0, 0), (0, 0)) == (0, 0)
    with pytest.raises(PolicyNotSatisfied):
        quotient_mask((1, 1), (1, 0))
    with pytest.raises(ValueError):
        quotient_mask((1,), (1, 0))
    with pytest.raises(ValueError):
        quotient_mask((2,), (1,))


@given(bits=st.lists(st.integers(0, 1), min_size=1, max_size=10))
@settings(max_examples=30, deadline=None)
def test_quotient_mask_covers_iff_pointwise_le(bits):
    policy = tuple(bits)
    full = tuple(1 for _ in bits)
    assert quotient_mask(policy, full) == tuple(1 - b for b in bits)
    if any(bits):
        none = tuple(0 for _ in bits)
        with pytest.raises(PolicyNotSatisfied):
            quotient_mask(policy, none)


@given(seed=st.integers(0, 2**16), degree=st.integers(0, 5))
@settings(max_examples=30, deadline=None)
def test_lagrange_recovers_constant_term(seed, degree):
    rng = random.Random(seed)
    coeffs = [CURVE.random_scalar(rng) for _ in range(degree + 1)]
    xs = []
    while len(xs) < degree + 1:
        x = CURVE.random_scalar(rng, nonzero=True)
        if x not in xs:
            xs.append(x)

    def f(x):
        acc = CURVE.scalar(0)
        for c in reversed(coeffs):
            acc = acc * x + c
        return acc

    total = CURVE.scalar(0)
    for i, x in enumerate(xs):
        total = total + lagrange_zero_coefficient(i, xs) * f(x)
    assert total == coeffs[-1] if degree == 0 else total == f(CURVE.scalar(0))


def test_lagrange_rejects_duplicate_points():
    x = CURVE.scalar(5)
    with pytest.raises(ValueError):
        lagrange_zero_coefficient(0, [x, x])


@pytest.mark.parametrize("n", range(1, 6))
def test_shamir_full_grid(n):
    rng = random.Random(99)
    secret = CURVE.random_scalar(rng)
    for t in range(1, n + 1):
        shares = shamir_split(n, t, secret, rng)
        assert shamir_recover(shares.subset(list(range(t)))) == secret
        assert shamir_recover(shares.subset(list(range(n - t, n)))) == secret
        if t > 1:
            # recovery refuses to even try below the threshold ...
            with pytest.raises(ValueError):
                shamir_recover(shares.subset(list(range(t - 1))))
            # ... and forcing an interpolation through t-1 points lands on
            # a different value, so the refusal hides an actual undetermination
            from dprov.polynomials import ShareSet

            forced = ShareSet(shares.points[: t - 1], t - 1, n)
            assert shamir_recover(forced) != secret


def test_shamir_respects_caller_xs():
    rng = random.Random(7)
    secret = CURVE.scalar(424242)
    xs = [CURVE.scalar(i) for i in (11, 22, 33)]
    shares = shamir_split(3, 3, secret, rng, xs=xs)
    assert [p[0] for p in shares.points] == xs
    assert shamir_recover(shares) == secret


def test_shamir_validates():
    rng = random.Random(0)
    secret = CURVE.scalar(1)
    with pytest.raises(ValueError):
        shamir_split(2, 3, secret, rng)  # t > n
    with pytest.raises(ValueError):
        shamir_split(0, 0, secret, rng)
    with pytest.raises(ValueError):
        shamir_split(2, 2, secret, rng, xs=[CURVE.scalar(1)])  # wrong count
    with pytest.raises(ValueError):
        shamir_split(2, 2, secret, rng, xs=[CURVE.scalar(0), CURVE.scalar(1)])  # zero x
    with pytest.raises(ValueError):
        shamir_split(2, 2, secret, rng, xs=[CURVE.scalar(3), CURVE.scalar(3)])  # dup
