"""Elliptic-curve group arithmetic, canonical encodings, and the tagged hash suite.

Scalars live in Z_p for the group order p, points on a short-Weierstrass curve
over a prime field.  Affine coordinates are the public representation; scalar
multiplication runs on Jacobian coordinates internally, with a fixed-base
window table for the generator.
"""

from __future__ import annotations

import hashlib
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass
from typing import Iterator


class InvalidPointError(ValueError):
    """Raised when bytes do not decode to a point on the curve."""


# ---------------------------------------------------------------------------
# Operation counting.  Tests and benchmarks wrap calls in count_group_ops()
# to observe how many scalar multiplications / Z_p inversions ran inside.
# The counter is context-local, so concurrent counts do not bleed together.


@dataclass
class OpCount:
    scalar_mults: int = 0
    inversions: int = 0


_ACTIVE_COUNT: ContextVar[OpCount | None] = ContextVar("group_op_count", default=None)


@contextmanager
def count_group_ops() -> Iterator[OpCount]:
    """Collect scalar-mult and inversion counts for the enclosed block."""
    counts = OpCount()
    token = _ACTIVE_COUNT.set(counts)
    try:
        yield counts
    finally:
        _ACTIVE_COUNT.reset(token)


def _note_mult() -> None:
    c = _ACTIVE_COUNT.get()
    if c is not None:
        c.scalar_mults += 1


def _note_inversion() -> None:
    c = _ACTIVE_COUNT.get()
    if c is not None:
        c.inversions += 1


# ---------------------------------------------------------------------------
# Curve registry.


@dataclass(frozen=True)
class CurveSpec:
    """Short-Weierstrass parameters y^2 = x^3 + ax + b over GF(q), order-p generator."""

    name: str
    field_prime: int
    a: int
    b: int
    gx: int
    gy: int
    order: int


# brainpoolP160r1 (RFC 5639): prime order of exactly 160 bits, cofactor 1.
# The exact 20-byte scalar width matters: several wire-size guarantees count
# whole scalar widths, and a 161-bit order would silently add a byte.
_BRAINPOOL_P160R1 = CurveSpec(
    name="brainpoolp160r1",
    field_prime=0xE95E4A5F737059DC60DFC7AD95B3D8139515620F,
    a=0x340E7BE2A280EB74E2BE61BADA745D97E8F7C300,
    b=0x1E589A8595423412134FAA2DBDEC95C8D8675E58,
    gx=0xBED5AF16EA3F6A4F62938C4631EB5AF7BDBCDBC3,
    gy=0x1667CB477A1A8EC338F94741669C976316DA6321,
    order=0xE95E4A5F737059DC60DF5991D45029409E60FC09,
)

# NIST P-256, the drop-in larger group.
_SECP256R1 = CurveSpec(
    name="secp256r1",
    field_prime=0xFFFFFFFF00000001000000000000000000000000FFFFFFFFFFFFFFFFFFFFFFFF,
    a=0xFFFFFFFF00000001000000000000000000000000FFFFFFFFFFFFFFFFFFFFFFFC,
    b=0x5AC635D8AA3A93E7B3EBBD55769886BC651D06B0CC53B0F63BCE3C3E27D2604B,
    gx=0x6B17D1F2E12C4247F8BCE6E563A440F277037D812DEB33A0F4A13945D898C296,
    gy=0x4FE342E2FE1A7F9B8EE7EB4A7C0F9E162BCE33576B315ECECBB6406837BF51F5,
    order=0xFFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632551,
)

CURVE_SPECS = {spec.name: spec for spec in (_BRAINPOOL_P160R1, _SECP256R1)}

_WINDOW = 4  # window width (bits) for both fixed-base and variable-base ladders


class Curve:
    """An instantiated curve group.  All Scalars and Points are bound to one.

    Use get_curve(name) rather than constructing directly, so that points of
    the same curve share one instance (and its precomputed generator table).
    """

    def __init__(self, spec: CurveSpec) -> None:
        if spec.field_prime % 4 != 3:
            # keeps point decompression a single pow(); true of every
            # registered curve and asserted rather than worked around
            raise ValueError("field prime must be 3 mod 4")
        self.name = spec.name
        self.q = spec.field_prime
        self.a = spec.a
        self.b = spec.b
        self.order = spec.order
        self.scalar_bytes = (spec.order.bit_length() + 7) // 8
        self.field_bytes = (spec.field_prime.bit_length() + 7) // 8
        self.point_bytes = 1 + self.field_bytes
        self.generator = Point(self, spec.gx, spec.gy)
        self.identity = Point(self, 0, 0, infinity=True)
        self._base_table: list[list[tuple[int, int]]] | None = None

    def __repr__(self) -> str:
        return f"Curve({self.name})"

    # -- constructors -------------------------------------------------

    def scalar(self, value: int) -> Scalar:
        return Scalar(self, value)

    def scalar_from_bytes(self, data: bytes) -> Scalar:
        if len(data) != self.scalar_bytes:
            raise ValueError(f"scalar must be {self.scalar_bytes} bytes")
        value = int.from_bytes(data, "big")
        if value >= self.order:
            raise ValueError("scalar out of range")
        return Scalar(self, value)

    def random_scalar(self, rng, nonzero: bool = True) -> Scalar:
        lo = 1 if nonzero else 0
        return Scalar(self, rng.randrange(lo, self.order))

    def point(self, x: int, y: int) -> Point:
        """Construct and validate an affine point."""
        if not self.contains(x, y):
            raise InvalidPointError("coordinates not on curve")
        return Point(self, x, y)

    def contains(self, x: int, y: int) -> bool:
        q = self.q
        return (y * y - (x * x * x + self.a * x + self.b)) % q == 0

    def point_from_bytes(self, data: bytes) -> Point:
        """Decode a compressed point (02/03 prefix; all-zero bytes = identity)."""
        if len(data) != self.point_bytes:
            raise InvalidPointError(f"point must be {self.point_bytes} bytes")
        if data[0] == 0:
            if any(data[1:]):
                raise InvalidPointError("bad identity encoding")
            return self.identity
        if data[0] not in (2, 3):
            raise InvalidPointError("bad compression prefix")
        x = int.from_bytes(data[1:], "big")
        if x >= self.q:
            raise InvalidPointError("x coordinate out of field")
        rhs = (x * x * x + self.a * x + self.b) % self.q
        y = pow(rhs, (self.q + 1) // 4, self.q)  # sqrt, valid since q = 3 mod 4
        if y * y % self.q != rhs:
            raise InvalidPointError("x has no point on curve")
        if y & 1 != data[0] & 1:
            y = self.q - y
        return Point(self, x, y)

    # -- fixed-base table for the generator ----------------------------

    def _generator_table(self) -> list[list[tuple[int, int]]]:
        """Affine multiples d * 2^(4i) * G for d in 1..15, built once per curve."""
        if self._base_table is None:
            windows = (self.order.bit_length() + _WINDOW - 1) // _WINDOW
            q, a = self.q, self.a
            table: list[list[tuple[int, int]]] = []
            base = (self.generator.x, self.generator.y, 1)
            for _ in range(windows):
                row_j = [base]
                for _ in range(14):
                    row_j.append(_jac_add(row_j[-1], base, q, a))
                table.append([_jac_to_affine(pt, q) for pt in row_j])
                for _ in range(_WINDOW):
                    base = _jac_double(base, q, a)
            self._base_table = table
        return self._base_table


_CURVES: dict[str, Curve] = {}


def get_curve(name: str = "brainpoolp160r1") -> Curve:
    """Return the shared Curve instance for a registered curve name."""
    if name not in CURVE_SPECS:
        raise ValueError(f"unknown curve {name!r}; have {sorted(CURVE_SPECS)}")
    if name not in _CURVES:
        _CURVES[name] = Curve(CURVE_SPECS[name])
    return _CURVES[name]


# ---------------------------------------------------------------------------
# Scalars.


class Scalar:
    """An element of Z_p, p the group order.  Arithmetic is mod p."""

    __slots__ = ("curve", "v")

    def __init__(self, curve: Curve, value: int) -> None:
        self.curve = curve
        self.v = value % curve.order

    def _coerce(self, other) -> "Scalar":
        if isinstance(other, Scalar):
            if other.curve is not self.curve:
                raise ValueError("scalars from different curves")
            return other
        if isinstance(other, int):
            return Scalar(self.curve, other)
        return NotImplemented

    def __add__(self, other) -> "Scalar":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return Scalar(self.curve, self.v + o.v)

    __radd__ = __add__

    def __sub__(self, other) -> "Scalar":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return Scalar(self.curve, self.v - o.v)

    def __rsub__(self, other) -> "Scalar":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return Scalar(self.curve, o.v - self.v)

    def __mul__(self, other):
        if isinstance(other, Point):
            return other.__rmul__(self)
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return Scalar(self.curve, self.v * o.v)

    __rmul__ = __mul__

    def __neg__(self) -> "Scalar":
        return Scalar(self.curve, -self.v)

    def __truediv__(self, other) -> "Scalar":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self * o.inverse()

    def inverse(self) -> "Scalar":
        """Multiplicative inverse mod p; defined only for nonzero values."""
        if self.v == 0:
            raise ZeroDivisionError("inverse of zero scalar")
        _note_inversion()
        return Scalar(self.curve, pow(self.v, -1, self.curve.order))

    def __eq__(self, other) -> bool:
        if isinstance(other, Scalar):
            return self.curve is other.curve and self.v == other.v
        if isinstance(other, int):
            return self.v == other % self.curve.order
        return NotImplemented

    def __hash__(self) -> int:
        return hash((id(self.curve), self.v))

    def __bool__(self) -> bool:
        return self.v != 0

    def __repr__(self) -> str:
        return f"Scalar(0x{self.v:x})"

    def to_bytes(self) -> bytes:
        return self.v.to_bytes(self.curve.scalar_bytes, "big")


# ---------------------------------------------------------------------------
# Jacobian helpers.  A Jacobian triple (X, Y, Z) maps to affine (X/Z^2, Y/Z^3);
# Z == 0 encodes the identity.  Plain int tuples keep the inner loops cheap.


def _jac_double(p, q, a):
    X1, Y1, Z1 = p
    if Z1 == 0 or Y1 == 0:
        return (1, 1, 0)
    ysq = Y1 * Y1 % q
    s = 4 * X1 * ysq % q
    zsq = Z1 * Z1 % q
    m = (3 * X1 * X1 + a * zsq * zsq) % q
    X3 = (m * m - 2 * s) % q
    Y3 = (m * (s - X3) - 8 * ysq * ysq) % q
    Z3 = 2 * Y1 * Z1 % q
    return (X3, Y3, Z3)


def _jac_add(p1, p2, q, a):
    X1, Y1, Z1 = p1
    X2, Y2, Z2 = p2
    if Z1 == 0:
        return p2
    if Z2 == 0:
        return p1
    z1sq = Z1 * Z1 % q
    z2sq = Z2 * Z2 % q
    u1 = X1 * z2sq % q
    u2 = X2 * z1sq % q
    s1 = Y1 * z2sq * Z2 % q
    s2 = Y2 * z1sq * Z1 % q
    if u1 == u2:
        if s1 != s2:
            return (1, 1, 0)
        return _jac_double(p1, q, a)
    h = (u2 - u1) % q
    r = (s2 - s1) % q
    hsq = h * h % q
    hcu = hsq * h % q
    v = u1 * hsq % q
    X3 = (r * r - hcu - 2 * v) % q
    Y3 = (r * (v - X3) - s1 * hcu) % q
    Z3 = Z1 * Z2 * h % q
    return (X3, Y3, Z3)


def _jac_add_affine(p1, xy2, q, a):
    """Mixed addition of a Jacobian point and an affine point (Z2 = 1)."""
    X1, Y1, Z1 = p1
    x2, y2 = xy2
    if Z1 == 0:
        return (x2, y2, 1)
    z1sq = Z1 * Z1 % q
    u2 = x2 * z1sq % q
    s2 = y2 * z1sq * Z1 % q
    if X1 == u2:
        if Y1 != s2:
            return (1, 1, 0)
        return _jac_double(p1, q, a)
    h = (u2 - X1) % q
    r = (s2 - Y1) % q
    hsq = h * h % q
    hcu = hsq * h % q
    v = X1 * hsq % q
    X3 = (r * r - hcu - 2 * v) % q
    Y3 = (r * (v - X3) - Y1 * hcu) % q
    Z3 = Z1 * h % q
    return (X3, Y3, Z3)


def _jac_to_affine(p, q):
    X, Y, Z = p
    if Z == 0:
        return None
    zinv = pow(Z, -1, q)
    zinv2 = zinv * zinv % q
    return (X * zinv2 % q, Y * zinv2 * zinv % q)


def _mul_fixed_base(curve: Curve, k: int):
    """k * G via the per-curve window table: one mixed add per nonzero digit."""
    table = curve._generator_table()
    q, a = curve.q, curve.a
    acc = (1, 1, 0)
    i = 0
    while k:
        d = k & 0xF
        if d:
            acc = _jac_add_affine(acc, table[i][d - 1], q, a)
        k >>= _WINDOW
        i += 1
    return _jac_to_affine(acc, q)


def _mul_var_base(curve: Curve, k: int, x: int, y: int):
    """k * P for arbitrary P: 4-bit fixed windows, left to right."""
    q, a = curve.q, curve.a
    # odd multiples would halve the table, but 1..15 keeps the scan branch-free
    tbl = [(x, y, 1)]
    for _ in range(14):
        tbl.append(_jac_add_affine(tbl[-1], (x, y), q, a))
    acc = (1, 1, 0)
    nbits = k.bit_length()
    top = (nbits + _WINDOW - 1) // _WINDOW * _WINDOW
    for shift in range(top - _WINDOW, -1, -_WINDOW):
        if acc[2] != 0:
            acc = _jac_double(acc, q, a)
            acc = _jac_double(acc, q, a)
            acc = _jac_double(acc, q, a)
            acc = _jac_double(acc, q, a)
        d = (k >> shift) & 0xF
        if d:
            acc = _jac_add(acc, tbl[d - 1], q, a)
    return _jac_to_affine(acc, q)


# ---------------------------------------------------------------------------
# Points.


class Point:
    """An affine curve point; the identity carries infinity=True."""

    __slots__ = ("curve", "x", "y", "infinity")

    def __init__(self, curve: Curve, x: int, y: int, infinity: bool = False) -> None:
        self.curve = curve
        self.x = x
        self.y = y
        self.infinity = infinity

    def is_identity(self) -> bool:
        return self.infinity

    def __eq__(self, other) -> bool:
        if not isinstance(other, Point):
            return NotImplemented
        if self.curve is not other.curve:
            return False
        if self.infinity or other.infinity:
            return self.infinity and other.infinity
        return self.x == other.x and self.y == other.y

    def __hash__(self) -> int:
        return hash((id(self.curve), self.infinity, self.x, self.y))

    def __repr__(self) -> str:
        if self.infinity:
            return "Point(identity)"
        return f"Point(0x{self.x:x}, 0x{self.y:x})"

    def __neg__(self) -> "Point":
        if self.infinity:
            return self
        return Point(self.curve, self.x, self.curve.q - self.y)

    def __add__(self, other: "Point") -> "Point":
        if not isinstance(other, Point):
            return NotImplemented
        if self.curve is not other.curve:
            raise ValueError("points from different curves")
        if self.infinity:
            return other
        if other.infinity:
            return self
        q = self.curve.q
        if self.x == other.x:
            if (self.y + other.y) % q == 0:
                return self.curve.identity
            num = (3 * self.x * self.x + self.curve.a) % q
            den = 2 * self.y % q
        else:
            num = (other.y - self.y) % q
            den = (other.x - self.x) % q
        lam = num * pow(den, -1, q) % q
        x3 = (lam * lam - self.x - other.x) % q
        y3 = (lam * (self.x - x3) - self.y) % q
        return Point(self.curve, x3, y3)

    def __radd__(self, other):
        # lets sum() over points start from 0
        if other == 0:
            return self
        return self.__add__(other)

    def __sub__(self, other: "Point") -> "Point":
        return self + (-other)

    def __mul__(self, other):
        return self.__rmul__(other)

    def __rmul__(self, other) -> "Point":
        if isinstance(other, Scalar):
            if other.curve is not self.curve:
                raise ValueError("scalar and point from different curves")
            k = other.v
        elif isinstance(other, int):
            k = other % self.curve.order
        else:
            return NotImplemented
        _note_mult()
        if k == 0 or self.infinity:
            return self.curve.identity
        g = self.curve.generator
        if self.x == g.x and self.y == g.y:
            aff = _mul_fixed_base(self.curve, k)
        else:
            aff = _mul_var_base(self.curve, k, self.x, self.y)
        if aff is None:
            return self.curve.identity
        return Point(self.curve, aff[0], aff[1])

    def encode(self) -> bytes:
        """Compressed encoding: parity prefix 02/03 + x; identity is all zero."""
        if self.infinity:
            return bytes(self.curve.point_bytes)
        prefix = 2 | (self.y & 1)
        return bytes([prefix]) + self.x.to_bytes(self.curve.field_bytes, "big")


# ---------------------------------------------------------------------------
# Hash suite: one XOF (SHAKE-256) behind distinct domain tags.

HASH_SUITE_ID = "shake256-tagged-v1"
KDF_KEY_BYTES = 32

_TAG_H1 = b"dprov/h1:"
_TAG_H2 = b"dprov/h2:"
_TAG_H3 = b"dprov/h3:"
_TAG_KDF = b"dprov/kdf:"
_SCALAR_SLACK = 16  # extra digest bytes before reduction, flattens mod bias


def hash_to_scalar(curve: Curve, which: str, data: bytes) -> Scalar:
    """Map bytes into Z_p under the named hash role ("h1" or "h3")."""
    try:
        tag = {"h1": _TAG_H1, "h3": _TAG_H3}[which]
    except KeyError:
        raise ValueError(f"unknown hash role {which!r}") from None
    digest = hashlib.shake_256(tag + data).digest(curve.scalar_bytes + _SCALAR_SLACK)
    return Scalar(curve, int.from_bytes(digest, "big"))


def h1(curve: Curve, data: bytes) -> Scalar:
    return hash_to_scalar(curve, "h1", data)


def h3(curve: Curve, data: bytes) -> Scalar:
    return hash_to_scalar(curve, "h3", data)


def xof(data: bytes, out_len: int) -> bytes:
    """Variable-length output hash; out_len must be positive."""
    if out_len < 1:
        raise ValueError("out_len must be >= 1")
    return hashlib.shake_256(_TAG_H2 + data).digest(out_len)


def kdf_point(point: Point) -> bytes:
    """Derive a 32-byte key from a group point.  The identity has no key."""
    if point.is_identity():
        raise ValueError("cannot derive a key from the identity point")
    return hashlib.shake_256(_TAG_KDF + point.encode()).digest(KDF_KEY_BYTES)


def xor_bytes(a: bytes, b: bytes) -> bytes:
    if len(a) != len(b):
        raise ValueError("xor operands differ in length")
    return bytes(x ^ y for x, y in zip(a, b))
