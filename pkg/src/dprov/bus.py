"""In-process message bus with byte accounting and fault injection.

Delivery is FIFO per sender-receiver pair (one global FIFO per receiver,
which preserves pairwise order).  Every send is logged with its phase,
message type, and two byte counts: the framed wire size and, when the body
is an envelope, the plaintext payload size before framing.  Tests and
reports query the log with filters.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable


@dataclass(frozen=True)
class Delivery:
    sender: str
    receiver: str
    phase: str
    msg_type: int
    data: bytes


@dataclass
class FaultRule:
    """Match-and-act rule applied at send time.

    kind: "drop" (discard), "duplicate" (deliver twice), or "tamper"
    (mutate bytes; default flips the last byte).  None match fields are
    wildcards; each rule fires at most `count` times.
    """

    kind: str
    phase: str | None = None
    msg_type: int | None = None
    sender: str | None = None
    receiver: str | None = None
    count: int = 1
    tamper: Callable[[bytes], bytes] | None = None

    def matches(self, d: Delivery) -> bool:
        if self.count <= 0:
            return False
        for want, got in (
            (self.phase, d.phase),
            (self.msg_type, d.msg_type),
            (self.sender, d.sender),
            (self.receiver, d.receiver),
        ):
            if want is not None and want != got:
                return False
        return True


def _flip_last_byte(data: bytes) -> bytes:
    if not data:
        return data
    return data[:-1] + bytes([data[-1] ^ 0x01])


@dataclass(frozen=True)
class TrafficRecord:
    phase: str
    msg_type: int
    sender: str
    receiver: str
    wire_bytes: int
    payload_bytes: int


class SimBus:
    """The only channel entities talk over; also the traffic meter."""

    def __init__(self, clock=None) -> None:
        self._queues: dict[str, deque[Delivery]] = {}
        self.log: list[TrafficRecord] = []
        self.faults: list[FaultRule] = []
        self._clock = clock

    def add_fault(self, rule: FaultRule) -> None:
        if rule.kind not in ("drop", "duplicate", "tamper"):
            raise ValueError(f"unknown fault kind {rule.kind!r}")
        self.faults.append(rule)

    def send(
        self,
        sender: str,
        receiver: str,
        phase: str,
        msg_type: int,
        data: bytes,
        payload_bytes: int | None = None,
    ) -> None:
        """Queue a message; ticks the clock and applies matching fault rules."""
        if self._clock is not None:
            self._clock.tick()
        d = Delivery(sender, receiver, phase, msg_type, data)
        copies = 1
        for rule in self.faults:
            if not rule.matches(d):
                continue
            rule.count -= 1
            if rule.kind == "drop":
                copies = 0
            elif rule.kind == "duplicate":
                copies = 2
            elif rule.kind == "tamper":
                mutate = rule.tamper or _flip_last_byte
                d = Delivery(sender, receiver, phase, msg_type, mutate(data))
            break
        self.log.append(
            TrafficRecord(
                phase,
                msg_type,
                sender,
                receiver,
                len(data),
                len(data) if payload_bytes is None else payload_bytes,
            )
        )
        queue = self._queues.setdefault(receiver, deque())
        for _ in range(copies):
            queue.append(d)

    def take(self, receiver: str) -> list[Delivery]:
        """Drain and return everything queued for the receiver, in order."""
        queue = self._queues.get(receiver)
        if not queue:
            return []
        out = list(queue)
        queue.clear()
        return out

    def pending(self, receiver: str) -> int:
        return len(self._queues.get(receiver, ()))

    # -- accounting -----------------------------------------------------

    def mark(self) -> int:
        """Position in the log; pass to select() to scope a query to a phase run."""
        return len(self.log)

    def select(
        self,
        since: int = 0,
        phase: str | None = None,
        msg_type: int | None = None,
        sender: str | None = None,
        receiver: str | None = None,
    ) -> list[TrafficRecord]:
        out = []
        for rec in self.log[since:]:
            if phase is not None and rec.phase != phase:
                continue
            if msg_type is not None and rec.msg_type != msg_type:
                continue
            if sender is not None and rec.sender != sender:
                continue
            if receiver is not None and rec.receiver != receiver:
                continue
            out.append(rec)
        return out

    def total_bytes(self, kind: str = "wire", **filters) -> int:
        """Sum byte counts over matching log records; kind "wire" or "payload"."""
        if kind not in ("wire", "payload"):
            raise ValueError("kind must be 'wire' or 'payload'")
        records = self.select(**filters)
        if kind == "wire":
            return sum(r.wire_bytes for r in records)
        return sum(r.payload_bytes for r in records)

    def message_count(self, **filters) -> int:
        return len(self.select(**filters))
