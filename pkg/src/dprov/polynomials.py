"""Polynomial algebra over the scalar field.

Covers the three algebraic tools the protocol leans on: products of linear
factors selected by a bit mask, Lagrange interpolation evaluated at zero, and
Shamir secret sharing built from both.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .group import Curve, Scalar


class PolicyNotSatisfied(Exception):
    """A permission vector does not cover the requested policy."""


@dataclass(frozen=True)
class MaskedRootPoly:
    """Coefficients (ascending powers) of prod (x + r_j) over unmasked roots."""

    coeffs: tuple[Scalar, ...]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def constant(self) -> Scalar:
        return self.coeffs[0]

    def evaluate(self, x: Scalar) -> Scalar:
        acc = x.curve.scalar(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc


def expand_roots(roots: Sequence[Scalar], mask: Sequence[int]) -> MaskedRootPoly:
    """Expand prod over j with mask[j] == 0 of (x + roots[j]).

    An all-ones mask (empty product) yields the constant polynomial 1.
    """
    if len(roots) != len(mask):
        raise ValueError("roots and mask differ in length")
    if not roots:
        raise ValueError("need at least one root to fix the field")
    if any(b not in (0, 1) for b in mask):
        raise ValueError("mask entries must be 0 or 1")
    curve = roots[0].curve
    coeffs = [curve.scalar(1)]
    for root, bit in zip(roots, mask):
        if bit:
            continue
        # multiply by (x + root): shift up one degree, add root * old
        nxt = [root * coeffs[0]]
        for i in range(1, len(coeffs)):
            nxt.append(coeffs[i - 1] + root * coeffs[i])
        nxt.append(coeffs[-1])
        coeffs = nxt
    return MaskedRootPoly(tuple(coeffs))


def quotient_mask(policy: Sequence[int], permissions: Sequence[int]) -> tuple[int, ...]:
    """Per-index differences a_i - p_i, all of which must land in {0, 1}.

    An entry of -1 means the policy demands an attribute the permission vector
    lacks; that is the "not satisfied" failure mode.
    """
    if len(policy) != len(permissions):
        raise ValueError("policy and permissions differ in length")
    out = []
    for i, (p, a) in enumerate(zip(policy, permissions)):
        if p not in (0, 1) or a not in (0, 1):
            raise ValueError("bits must be 0 or 1")
        if a - p < 0:
            raise PolicyNotSatisfied(f"policy bit {i} not covered by permissions")
        out.append(a - p)
    return tuple(out)


def lagrange_zero_coefficient(i: int, xs: Sequence[Scalar]) -> Scalar:
    """Coefficient of y_i when interpolating at x = 0 through points at xs.

    That is prod over j != i of -x_j / (x_i - x_j).  The xs must be distinct
    and nonzero.
    """
    if not 0 <= i < len(xs):
        raise ValueError("index out of range")
    curve = xs[0].curve
    num = curve.scalar(1)
    den = curve.scalar(1)
    xi = xs[i]
    if not xi:
        raise ValueError("interpolation nodes must be nonzero")
    for j, xj in enumerate(xs):
        if j == i:
            continue
        if not xj:
            raise ValueError("interpolation nodes must be nonzero")
        if xj == xi:
            raise ValueError("interpolation nodes must be distinct")
        num = num * -xj
        den = den * (xi - xj)
    return num / den


def _poly_eval(coeffs: Sequence[Scalar], x: Scalar) -> Scalar:
    acc = x.curve.scalar(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


@dataclass(frozen=True)
class ShareSet:
    """Shamir shares: (x, f(x)) points of a degree t-1 polynomial, f(0) secret."""

    points: tuple[tuple[Scalar, Scalar], ...]
    threshold: int
    n: int

    def subset(self, indices: Sequence[int]) -> "ShareSet":
        return ShareSet(tuple(self.points[i] for i in indices), self.threshold, self.n)


def shamir_split(
    n: int,
    t: int,
    secret: Scalar,
    rng,
    xs: Sequence[Scalar] | None = None,
) -> ShareSet:
    """Split secret into n shares with recovery threshold t (1 <= t <= n).

    Evaluation points may be caller-chosen (distinct, nonzero); otherwise
    fresh random ones are drawn.
    """
    if not 1 <= t <= n:
        raise ValueError("need 1 <= t <= n")
    curve = secret.curve
    if xs is None:
        seen: set[int] = set()
        chosen: list[Scalar] = []
        while len(chosen) < n:
            x = curve.random_scalar(rng, nonzero=True)
            if x.v not in seen:
                seen.add(x.v)
                chosen.append(x)
        xs = chosen
    else:
        if len(xs) != n:
            raise ValueError("need exactly n evaluation points")
        if any(not x for x in xs):
            raise ValueError("evaluation points must be nonzero")
        if len({x.v for x in xs}) != n:
            raise ValueError("evaluation points must be distinct")
    coeffs = [secret] + [curve.random_scalar(rng, nonzero=False) for _ in range(t - 1)]
    points = tuple((x, _poly_eval(coeffs, x)) for x in xs)
    return ShareSet(points, t, n)


def shamir_recover(shares: ShareSet) -> Scalar:
    """Recover the secret from at least threshold-many shares."""
    if len(shares.points) < shares.threshold:
        raise ValueError("not enough shares to recover")
    xs = [x for x, _ in shares.points]
    if len({x.v for x in xs}) != len(xs):
        raise ValueError("shares carry duplicate x coordinates")
    acc = xs[0].curve.scalar(0)
    for i, (_, y) in enumerate(shares.points):
        acc = acc + y * lagrange_zero_coefficient(i, xs)
    return acc
