"""Tag-length-value wire primitives shared by every serialized message.

A message is a 2-byte version header, a 1-byte message type, then a sequence
of fields.  Each field is tag (1 byte) + length (4 bytes, big endian) + value.
Field tags name the primitive kind, not the semantic slot; schemas fix the
slot order.
"""

from __future__ import annotations

WIRE_VERSION = b"\x00\x01"

T_SCALAR = 0x01
T_POINT = 0x02
T_BYTES = 0x03
T_U64 = 0x04
T_BITS = 0x05
T_POINT_LIST = 0x06
T_SCALAR_LIST = 0x07


class WireError(ValueError):
    """Malformed wire bytes."""


def pack_field(tag: int, value: bytes) -> bytes:
    if not 0 < tag < 256:
        raise ValueError("tag out of range")
    return bytes([tag]) + len(value).to_bytes(4, "big") + value


def pack_u64(value: int) -> bytes:
    return pack_field(T_U64, value.to_bytes(8, "big"))


def pack_bits(bits) -> bytes:
    return pack_field(T_BITS, bytes(bits))


def pack_message(msg_type: int, fields: bytes) -> bytes:
    if not 0 < msg_type < 256:
        raise ValueError("message type out of range")
    return WIRE_VERSION + bytes([msg_type]) + fields


class FieldReader:
    """Sequential reader over the field section of a message."""

    def __init__(self, data: bytes) -> None:
        self._data = data
        self._pos = 0

    def done(self) -> bool:
        return self._pos == len(self._data)

    def next_field(self) -> tuple[int, bytes]:
        data, pos = self._data, self._pos
        if pos + 5 > len(data):
            raise WireError("truncated field header")
        tag = data[pos]
        length = int.from_bytes(data[pos + 1 : pos + 5], "big")
        end = pos + 5 + length
        if end > len(data):
            raise WireError("field length overruns message")
        self._pos = end
        return tag, data[pos + 5 : end]

    def expect(self, tag: int) -> bytes:
        got, value = self.next_field()
        if got != tag:
            raise WireError(f"expected field tag {tag:#x}, got {got:#x}")
        return value

    def expect_u64(self) -> int:
        value = self.expect(T_U64)
        if len(value) != 8:
            raise WireError("u64 field must be 8 bytes")
        return int.from_bytes(value, "big")

    def expect_bits(self) -> tuple[int, ...]:
        value = self.expect(T_BITS)
        if any(b not in (0, 1) for b in value):
            raise WireError("bit field holds non-bit bytes")
        return tuple(value)

    def remaining(self) -> bytes:
        return self._data[self._pos :]


def open_message(data: bytes) -> tuple[int, FieldReader]:
    """Validate the header and return (msg_type, reader over the fields)."""
    if len(data) < 3:
        raise WireError("message too short")
    if data[:2] != WIRE_VERSION:
        raise WireError("unsupported wire version")
    return data[2], FieldReader(data[3:])


def scan_fields(data: bytes) -> list[tuple[int, int]]:
    """Structural scan: (tag, value length) per field, without decoding values."""
    _, reader = open_message(data)
    out = []
    while not reader.done():
        tag, value = reader.next_field()
        out.append((tag, len(value)))
    return out
