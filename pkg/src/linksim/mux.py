"""Dual-modem multiplexer: deadline-stamped logical channels, EDF dispatch.

One ``Mux`` instance owns both halves of the data path of one station:

* transmit side: per-channel FIFO queues of deadline-stamped packets,
  earliest-deadline-first selection across channels, dispatch to one or
  both modems depending on the channel's redundancy mode (redundant
  duplicates onto both modems, distributive picks the modem with the
  smaller cumulative byte count, single always uses modem 0);
* receive side: CRC gating, at-most-once delivery per (channel, sequence
  number) via a delivered-set (cross-modem reordering means a plain
  next-expected counter would mis-drop late first copies), latency samples.

Expired packets are dropped at scheduling time and counted, so nothing is
ever transmitted past its deadline.  The state machine is single-owner:
callers advance it with explicit (event, now) calls from one timeline.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .profiles import ServiceProfile

DEFAULT_MTU = 1500
DEFAULT_QUEUE_DEPTH = 64


class Redundancy(Enum):
    REDUNDANT = "redundant"
    DISTRIBUTIVE = "distributive"
    SINGLE = "single"


class FrameSource(Enum):
    WTB = "wtb"
    UIC = "uic"
    ETHERNET = "ethernet"


@dataclass(frozen=True)
class LogicalChannel:
    id: int
    sp: ServiceProfile
    deadline: float                    # seconds, relative per packet
    redundancy: Redundancy = Redundancy.SINGLE

    def __post_init__(self) -> None:
        if self.deadline <= 0:
            raise ValueError("deadline must be > 0")
        if self.id < 0:
            raise ValueError("channel id must be >= 0")


@dataclass(frozen=True)
class AppFrame:
    source: FrameSource
    payload: bytes
    arrival_time: float


@dataclass(frozen=True)
class DataLinkPacket:
    channel_id: int
    sequence_number: int
    payload: bytes
    created_at: float
    deadline_at: float


@dataclass
class ChannelCounters:
    enqueued: int = 0
    delivered: int = 0
    duplicate_drops: int = 0
    deadline_misses: int = 0
    corrupt_drops: int = 0
    overflow_drops: int = 0
    latencies: list[float] = field(default_factory=list)


class Mux:
    """Multiplexer state machine for one station (two modems)."""

    def __init__(self, channels: list[LogicalChannel], mtu: int = DEFAULT_MTU,
                 queue_depth: int = DEFAULT_QUEUE_DEPTH, n_modems: int = 2):
        ids = [ch.id for ch in channels]
        if len(set(ids)) != len(ids):
            raise ValueError("channel ids must be unique within a mux")
        if n_modems < 1:
            raise ValueError("need at least one modem")
        self.channels = {ch.id: ch for ch in channels}
        self.mtu = mtu
        self.queue_depth = queue_depth
        self.n_modems = n_modems
        self._queues: dict[int, deque[DataLinkPacket]] = {
            ch.id: deque() for ch in channels}
        self._next_seq = {ch.id: 0 for ch in channels}
        self._delivered: dict[int, set[int]] = {ch.id: set() for ch in channels}
        self.counters = {ch.id: ChannelCounters() for ch in channels}
        self.modem_bytes = [0] * n_modems   # cumulative bytes assigned

    # -- transmit side ----------------------------------------------------
    def enqueue(self, frame: AppFrame, channel: LogicalChannel,
                now: float) -> DataLinkPacket | None:
        """Stamp and queue an application frame; None if the queue overflowed."""
        if channel.id not in self.channels:
            raise ValueError(f"channel {channel.id} not registered")
        if len(frame.payload) > self.mtu:
            raise ValueError(
                f"payload of {len(frame.payload)} bytes exceeds MTU {self.mtu}")
        seq = self._next_seq[channel.id]
        self._next_seq[channel.id] = seq + 1
        packet = DataLinkPacket(
            channel_id=channel.id, sequence_number=seq, payload=frame.payload,
            created_at=now, deadline_at=now + channel.deadline)
        counters = self.counters[channel.id]
        counters.enqueued += 1
        if len(self._queues[channel.id]) >= self.queue_depth:
            counters.overflow_drops += 1
            return None
        self._queues[channel.id].append(packet)
        return packet

    def _edf_head(self, now: float) -> DataLinkPacket | None:
        """Earliest-deadline head packet, dropping expired ones as found."""
        while True:
            best_key = None
            best_ch = None
            for ch_id, queue in self._queues.items():
                if not queue:
                    continue
                head = queue[0]
                key = (head.deadline_at, ch_id, head.sequence_number)
                if best_key is None or key < best_key:
                    best_key, best_ch = key, ch_id
            if best_ch is None:
                return None
            head = self._queues[best_ch][0]
            if head.deadline_at < now:
                self._queues[best_ch].popleft()
                self.counters[best_ch].deadline_misses += 1
                continue
            return head

    def _targets(self, channel: LogicalChannel) -> tuple[int, ...]:
        if channel.redundancy is Redundancy.REDUNDANT:
            return tuple(range(self.n_modems))
        if channel.redundancy is Redundancy.DISTRIBUTIVE:
            return (int(min(range(self.n_modems),
                            key=lambda m: (self.modem_bytes[m], m))),)
        return (0,)

    def peek_next(self, now: float) -> tuple[DataLinkPacket, tuple[int, ...]] | None:
        """Next packet and its target modems without dequeuing it."""
        head = self._edf_head(now)
        if head is None:
            return None
        return head, self._targets(self.channels[head.channel_id])

    def schedule_next(self, now: float) -> tuple[DataLinkPacket, tuple[int, ...]] | None:
        """Pop the EDF-next packet and assign its target modem set."""
        peeked = self.peek_next(now)
        if peeked is None:
            return None
        packet, targets = peeked
        self._queues[packet.channel_id].popleft()
        for m in targets:
            self.modem_bytes[m] += len(packet.payload)
        return packet, targets

    # -- receive side -----------------------------------------------------
    def receive(self, packet: DataLinkPacket, from_modem: int, crc_ok: bool,
                now: float) -> tuple[bytes, float] | None:
        """Deliver the first valid copy of each sequence number.

        Returns (payload, latency) on delivery; None for corrupt copies and
        duplicates, which are counted.
        """
        counters = self.counters[packet.channel_id]
        if not crc_ok:
            counters.corrupt_drops += 1
            return None
        delivered = self._delivered[packet.channel_id]
        if packet.sequence_number in delivered:
            counters.duplicate_drops += 1
            return None
        delivered.add(packet.sequence_number)
        counters.delivered += 1
        latency = now - packet.created_at
        counters.latencies.append(latency)
        return packet.payload, latency

    def queued_packets(self, channel_id: int) -> int:
        return len(self._queues[channel_id])
