"""Event-driven simulation of the dual-modem multiplexer.

The timeline is a heap of (time, tiebreak, event) entries: packet arrivals
from periodic sources or a trace, and per-modem transmission completions.
Packets are pulled from the mux only when every modem in their target set
is idle, so copies of a redundant packet start (and finish) together and
the EDF expiry check in ``schedule_next`` really happens at transmission
time.  After the last arrival the queues are drained so every packet ends
with a definite fate, and the conservation identity

    enqueued = delivered + deadline_misses + overflow_drops + lost

(lost = all transmitted copies corrupt) is checked before returning.

Losses come either from an iid per-modem loss probability (decided by a
stable hash of (channel, sequence, modem), hence order-independent) or
from running each copy through the full baseband + channel pipeline.
"""
from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, replace

import numpy as np

from ..baseband.chain import ChainConfig, ChannelKnowledge, rx_chain, tx_chain
from ..channel import ChannelModel, apply_channel, estimate_frequency_response
from ..errors import ConfigError
from ..mux import AppFrame, FrameSource, LogicalChannel, Mux, Redundancy
from ..profiles import ModemCapacity, admit_channels
from .seeding import stable_seed, stable_uniform

#: latency histogram bucket upper edges (seconds); the last bucket is open
LATENCY_BUCKETS = (1e-5, 3e-5, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1)


@dataclass(frozen=True)
class PeriodicTraffic:
    period: float
    payload_size: int
    start_offset: float = 0.0
    source: FrameSource = FrameSource.ETHERNET

    def __post_init__(self) -> None:
        if self.period <= 0:
            raise ValueError("period must be > 0")
        if self.payload_size < 1:
            raise ValueError("payload_size must be >= 1")
        if self.start_offset < 0:
            raise ValueError("start_offset must be >= 0")


@dataclass(frozen=True)
class IidLossModel:
    per_modem: tuple[float, ...]

    def __post_init__(self) -> None:
        if any(not 0 <= p < 1 for p in self.per_modem):
            raise ValueError("loss probabilities must be in [0, 1)")


@dataclass(frozen=True)
class BasebandLossModel:
    chain: ChainConfig
    channel: ChannelModel


@dataclass(frozen=True)
class MuxSimSpec:
    channels: tuple[LogicalChannel, ...]
    traffic: dict[int, PeriodicTraffic]
    capacity: ModemCapacity
    duration_s: float
    loss: IidLossModel | BasebandLossModel
    trace: tuple[tuple[float, int, int], ...] = ()   # (time, channel, size)
    mtu: int = 1500
    queue_depth: int = 64

    def __post_init__(self) -> None:
        if self.duration_s <= 0:
            raise ValueError("duration_s must be > 0")


@dataclass
class MuxChannelStats:
    channel_id: int
    sp_id: str
    redundancy: str
    enqueued: int
    delivered: int
    duplicate_drops: int
    deadline_misses: int
    corrupt_drops: int
    overflow_drops: int
    lost_packets: int
    e2e_per: float
    latency_min_s: float
    latency_mean_s: float
    latency_max_s: float
    latency_p95_s: float
    histogram: tuple[int, ...]


@dataclass
class MuxSimResult:
    stats: list[MuxChannelStats]
    modem_bytes: tuple[int, ...]
    wall_clock_s: float

    def csv_rows(self) -> tuple[list[dict], list[str]]:
        fields = ["channel_id", "sp_id", "redundancy", "enqueued", "delivered",
                  "duplicate_drops", "deadline_misses", "corrupt_drops",
                  "overflow_drops", "lost_packets", "e2e_per",
                  "latency_min_s", "latency_mean_s", "latency_max_s",
                  "latency_p95_s"]
        hist_fields = [f"hist_le_{edge:g}" for edge in LATENCY_BUCKETS]
        hist_fields.append("hist_gt")
        rows = []
        for s in self.stats:
            row = {name: getattr(s, name) for name in fields}
            row.update(dict(zip(hist_fields, s.histogram)))
            rows.append(row)
        return rows, fields + hist_fields


def check_admission(spec: MuxSimSpec) -> None:
    """Reject channel sets that overload either modem.

    Conservative accounting: a channel's load counts against every modem
    it may use (redundant and distributive against both, single against
    modem 0 only).
    """
    per_modem: list[list] = [[], []]
    for ch in spec.channels:
        if ch.redundancy in (Redundancy.REDUNDANT, Redundancy.DISTRIBUTIVE):
            targets = (0, 1)
        else:
            targets = (0,)
        for m in targets:
            per_modem[m].append((ch.sp, 1))
    for m, channels in enumerate(per_modem):
        if not channels:
            continue
        verdict = admit_channels(channels, spec.capacity)
        if not verdict.accepted:
            raise ConfigError(
                f"channel set overloads modem {m}: load "
                f"{verdict.load:.6g} > 1 at capacity {spec.capacity.capacity_c} Mbit/s")


def _latency_stats(latencies: list[float]) -> tuple[float, float, float, float]:
    if not latencies:
        return 0.0, 0.0, 0.0, 0.0
    arr = np.asarray(latencies)
    return (float(arr.min()), float(arr.mean()), float(arr.max()),
            float(np.percentile(arr, 95)))


def _histogram(latencies: list[float]) -> tuple[int, ...]:
    counts = [0] * (len(LATENCY_BUCKETS) + 1)
    for lat in latencies:
        for i, edge in enumerate(LATENCY_BUCKETS):
            if lat <= edge:
                counts[i] += 1
                break
        else:
            counts[-1] += 1
    return tuple(counts)


class _BasebandLink:
    """One modem's PHY pipeline for the baseband-backed loss model."""

    def __init__(self, loss: BasebandLossModel):
        self.cfg = loss.chain
        self.model = loss.channel
        self.knowledge = None
        if self.cfg.channel_estimator == "genie":
            h = estimate_frequency_response(self.model, self.cfg.frame.fft_size)
            sigma2 = 0.0
            if self.model.snr_db is not None:
                tap_power = float(np.mean(np.abs(h) ** 2))
                sigma2 = tap_power / 10.0 ** (self.model.snr_db / 10.0)
            self.knowledge = ChannelKnowledge(h, sigma2)

    def transmit(self, payload: bytes, seed: int) -> bool:
        bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8))
        padded = np.zeros(self.cfg.payload_bits, dtype=np.uint8)
        padded[: len(bits)] = bits
        tx = tx_chain(padded, self.cfg)
        model = replace(self.model, seed=seed)
        rx = rx_chain(apply_channel(tx.waveform, model), self.cfg, self.knowledge)
        ok = rx.crc_ok is not False and bool(np.array_equal(rx.info_bits, padded))
        return ok


def run_mux_sim(spec: MuxSimSpec, master_seed: int) -> MuxSimResult:
    """Simulate the dual-modem mux and return per-channel statistics."""
    check_admission(spec)
    start = time.perf_counter()
    mux = Mux(list(spec.channels), mtu=spec.mtu, queue_depth=spec.queue_depth)
    channels = {ch.id: ch for ch in spec.channels}

    # packet air time at the modem line rate (capacity in Mbit/s)
    def airtime(nbytes: int) -> float:
        return nbytes * 8 / (spec.capacity.capacity_c * 1e6)

    link = None
    if isinstance(spec.loss, BasebandLossModel):
        link = _BasebandLink(spec.loss)

    events: list[tuple[float, int, str, object]] = []
    order = 0
    for ch_id, traffic in spec.traffic.items():
        t = traffic.start_offset
        while t < spec.duration_s:
            heapq.heappush(events, (t, order, "arrival",
                                    (ch_id, traffic.payload_size, traffic.source)))
            order += 1
            t += traffic.period
    for t, ch_id, size in spec.trace:
        heapq.heappush(events, (t, order, "arrival",
                                (ch_id, size, FrameSource.ETHERNET)))
        order += 1

    modem_busy = [False] * mux.n_modems
    # per-(channel, seq): [copies_sent, copies_corrupt, delivered_flag]
    fates: dict[tuple[int, int], list] = {}

    def crc_of_copy(packet, modem: int) -> bool:
        if isinstance(spec.loss, IidLossModel):
            u = stable_uniform(master_seed, packet.channel_id,
                               packet.sequence_number, modem)
            return u >= spec.loss.per_modem[modem]
        seed = stable_seed(master_seed, packet.channel_id,
                           packet.sequence_number, modem)
        return link.transmit(packet.payload, seed)

    def dispatch(now: float) -> None:
        nonlocal order
        while True:
            peeked = mux.peek_next(now)
            if peeked is None:
                return
            _, targets = peeked
            if any(modem_busy[m] for m in targets):
                return
            packet, targets = mux.schedule_next(now)
            done = now + airtime(len(packet.payload))
            key = (packet.channel_id, packet.sequence_number)
            fates.setdefault(key, [0, 0, False])[0] += len(targets)
            for m in targets:
                modem_busy[m] = True
                heapq.heappush(events, (done, order, "tx_done", (m, packet)))
                order += 1

    while events:
        now, _, kind, data = heapq.heappop(events)
        if kind == "arrival":
            ch_id, size, source = data
            if ch_id not in channels:
                raise ConfigError(f"traffic references unknown channel {ch_id}")
            mux.enqueue(AppFrame(source, bytes(size), now), channels[ch_id], now)
        else:
            modem, packet = data
            modem_busy[modem] = False
            crc_ok = crc_of_copy(packet, modem)
            key = (packet.channel_id, packet.sequence_number)
            outcome = mux.receive(packet, modem, crc_ok, now)
            if not crc_ok:
                fates[key][1] += 1
            if outcome is not None:
                fates[key][2] = True
        dispatch(now)

    stats = []
    for ch in spec.channels:
        c = mux.counters[ch.id]
        lost = sum(1 for (cid, _), (sent, corrupt, delivered) in fates.items()
                   if cid == ch.id and sent > 0 and not delivered)
        fully_corrupt = sum(
            1 for (cid, _), (sent, corrupt, delivered) in fates.items()
            if cid == ch.id and sent > 0 and corrupt == sent)
        if c.enqueued != c.delivered + c.deadline_misses + c.overflow_drops + lost \
                or lost != fully_corrupt:
            raise RuntimeError(
                f"conservation violated on channel {ch.id}: enqueued={c.enqueued} "
                f"delivered={c.delivered} misses={c.deadline_misses} "
                f"overflow={c.overflow_drops} lost={lost}")
        transmitted = c.enqueued - c.deadline_misses - c.overflow_drops
        e2e_per = lost / transmitted if transmitted else 0.0
        lmin, lmean, lmax, lp95 = _latency_stats(c.latencies)
        stats.append(MuxChannelStats(
            channel_id=ch.id, sp_id=ch.sp.id, redundancy=ch.redundancy.value,
            enqueued=c.enqueued, delivered=c.delivered,
            duplicate_drops=c.duplicate_drops,
            deadline_misses=c.deadline_misses, corrupt_drops=c.corrupt_drops,
            overflow_drops=c.overflow_drops, lost_packets=lost,
            e2e_per=e2e_per, latency_min_s=lmin, latency_mean_s=lmean,
            latency_max_s=lmax, latency_p95_s=lp95,
            histogram=_histogram(c.latencies)))
    return MuxSimResult(stats=stats, modem_bytes=tuple(mux.modem_bytes),
                        wall_clock_s=time.perf_counter() - start)
