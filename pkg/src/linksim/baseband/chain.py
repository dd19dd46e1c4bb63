"""End-to-end transmit and receive chains.

Transmit: payload bits -> per-codeword CRC + convolutional encoding ->
spreading -> BPSK/QPSK mapping -> frame assembly (preamble, pilot block,
CP'd payload blocks).  Uncoded operation (codec=None) maps payload bits
straight to chips.

Receive: preamble acquisition (timing / CFO / phase), correction, channel
estimation (genie response handed in, or least squares from the pilot
block), per-block equalization (FD-MMSE or TD-LMS), per-block pilot phase
tracking, soft demapping, despreading, Viterbi decoding and CRC checks.
The pre-decoder bit error rate is estimated by re-encoding the decoded
codewords and comparing against the sliced channel bits.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import CapacityError
from . import coding
from .coding import CodecConfig
from .equalizers import EqualizerConfig, EqualizerVariant, fd_equalize, td_equalize
from .framing import (BasebandFrame, FrameConfig, build_frame, build_preamble,
                      chu_sequence, extract_data_symbols, known_header,
                      remove_cyclic_prefix)
from .modulation import (ModulationScheme, SpreadingConfig, demodulate,
                         despread, hard_decisions, modulate, spread)
from .sync import SyncState, acquire_sync, track_phase


def _chip_count(payload_bits: int, codec: CodecConfig | None, sf: int) -> int:
    if codec is None:
        coded = payload_bits
    else:
        n_cw = -(-payload_bits // codec.info_capacity)
        coded = n_cw * codec.coded_bits_per_codeword
    return coded * sf


@dataclass(frozen=True)
class ChainConfig:
    payload_bits: int
    codec: CodecConfig | None = field(default_factory=CodecConfig)
    modulation: ModulationScheme = ModulationScheme.BPSK
    spreading: SpreadingConfig = field(default_factory=SpreadingConfig)
    frame: FrameConfig = field(default_factory=FrameConfig)
    equalizer: EqualizerConfig = field(default_factory=EqualizerConfig)
    # receiver behavior
    correct_cfo: bool = True
    track_pilot_phase: bool = True
    channel_estimator: str = "genie"      # "genie" | "pilot-ls"
    timing_search: int | None = None
    sync_threshold: float = 0.5

    def __post_init__(self) -> None:
        if self.payload_bits < 1:
            raise ValueError("payload_bits must be >= 1")
        if self.channel_estimator not in ("genie", "pilot-ls"):
            raise ValueError("channel_estimator must be 'genie' or 'pilot-ls'")
        self.required_symbols()   # validates capacity

    # -- derived geometry -------------------------------------------------
    def n_codewords(self) -> int:
        if self.codec is None:
            return 0
        cap = self.codec.info_capacity
        return -(-self.payload_bits // cap)

    def coded_bits_total(self) -> int:
        if self.codec is None:
            return self.payload_bits
        return self.n_codewords() * self.codec.coded_bits_per_codeword

    def chip_count(self) -> int:
        return _chip_count(self.payload_bits, self.codec, self.spreading.sf)

    def required_symbols(self) -> int:
        bps = self.modulation.bits_per_symbol
        symbols = -(-self.chip_count() // bps)
        if symbols > self.frame.capacity_symbols:
            raise CapacityError(
                f"payload needs {symbols} data symbols but the frame provides "
                f"{self.frame.capacity_symbols}")
        return symbols

    @classmethod
    def for_payload(cls, payload_bits: int, **kwargs) -> "ChainConfig":
        """Build a config whose frame is auto-sized to fit the payload."""
        frame = kwargs.pop("frame", FrameConfig())
        codec = kwargs["codec"] if "codec" in kwargs else CodecConfig()
        sf = kwargs.get("spreading", SpreadingConfig()).sf
        bps = kwargs.get("modulation", ModulationScheme.BPSK).bits_per_symbol
        symbols = -(-_chip_count(payload_bits, codec, sf) // bps)
        blocks = max(1, -(-symbols // frame.data_symbols_per_block))
        return cls(payload_bits=payload_bits,
                   frame=replace(frame, n_payload_blocks=blocks), **kwargs)


@dataclass(frozen=True)
class ChannelKnowledge:
    """What the receiver is told about the channel (genie mode)."""

    freq_response: np.ndarray | None = None   # fft_size bins
    noise_variance: float = 0.0


@dataclass
class TxResult:
    frame: BasebandFrame
    waveform: np.ndarray
    coded_bits: np.ndarray     # transmitted chip-domain bits (post spreading)
    data_symbols: np.ndarray


@dataclass
class LinkMetrics:
    sync: SyncState
    pre_decoder_ber_estimate: float | None
    codewords_failed: int
    sample_counts: dict[str, int]


@dataclass
class RxResult:
    info_bits: np.ndarray
    crc_ok: bool | None
    metrics: LinkMetrics


def _encode_payload(info_bits: np.ndarray, cfg: ChainConfig) -> np.ndarray:
    codec = cfg.codec
    if codec is None:
        return np.asarray(info_bits, dtype=np.uint8)
    cap = codec.info_capacity
    n_cw = cfg.n_codewords()
    framed = np.zeros((n_cw, codec.info_bits_per_codeword), dtype=np.uint8)
    padded = np.zeros(n_cw * cap, dtype=np.uint8)
    padded[: len(info_bits)] = info_bits
    framed[:, :cap] = padded.reshape(n_cw, cap)
    framed[:, cap:] = coding.crc_bits_batch(framed[:, :cap], codec.crc_width)
    return coding.conv_encode_batch(framed, codec).reshape(-1)


def tx_chain(info_bits: np.ndarray, cfg: ChainConfig) -> TxResult:
    """Build the transmit waveform for one frame of payload bits."""
    info_bits = np.asarray(info_bits, dtype=np.uint8)
    if len(info_bits) != cfg.payload_bits:
        raise ValueError(
            f"got {len(info_bits)} payload bits, config says {cfg.payload_bits}")
    coded = _encode_payload(info_bits, cfg)
    chips = spread(coded, cfg.spreading)
    bps = cfg.modulation.bits_per_symbol
    if chips.size % bps:
        pad = np.zeros(bps - chips.size % bps, dtype=np.uint8)
        chips = np.concatenate([chips, pad])
    symbols = modulate(chips, cfg.modulation)
    frame = build_frame(symbols, cfg.frame)
    return TxResult(frame=frame, waveform=frame.to_waveform(),
                    coded_bits=chips, data_symbols=symbols)


def _ls_channel_estimate(pilot_rx: np.ndarray, fcfg: FrameConfig) -> np.ndarray:
    ref = chu_sequence(fcfg.fft_size)
    return np.fft.fft(pilot_rx) / np.fft.fft(ref)


def rx_chain(waveform: np.ndarray, cfg: ChainConfig,
             channel: ChannelKnowledge | None = None) -> RxResult:
    """Recover payload bits from a received waveform."""
    waveform = np.asarray(waveform, dtype=np.complex128)
    fcfg = cfg.frame
    preamble = build_preamble()
    header = known_header(fcfg)
    sync = acquire_sync(waveform, preamble, threshold=cfg.sync_threshold,
                        search_window=cfg.timing_search, known_header=header,
                        estimate_cfo=cfg.correct_cfo)

    start = sync.timing_offset
    if len(waveform) < start + fcfg.frame_len:
        raise ValueError("waveform truncated: frame extends past its end")
    seg = waveform[start: start + fcfg.frame_len]
    n = np.arange(len(seg))
    seg = seg * np.exp(-1j * (sync.cfo_estimate * n + sync.phase))

    hdr_len = len(header)
    pilot_rx = seg[hdr_len - fcfg.fft_size: hdr_len]
    noise_var = cfg.equalizer.noise_variance_hint
    if noise_var is None:
        noise_var = channel.noise_variance if channel is not None else 0.0

    fd = cfg.equalizer.variant is EqualizerVariant.FREQUENCY_DOMAIN_MMSE
    if fd and cfg.channel_estimator == "genie":
        if channel is None or channel.freq_response is None:
            raise ValueError("genie estimator needs a ChannelKnowledge response")
        # Preamble correlation locks onto the strongest tap, so the genie
        # response must be re-referenced to that delay (derived from the
        # response itself; tx-side padding does not shift the channel).
        h_time = np.fft.ifft(channel.freq_response)
        d0 = int(np.argmax(np.abs(h_time)))
        k = np.arange(fcfg.fft_size)
        freq_response = (channel.freq_response *
                         np.exp(2j * np.pi * k * d0 / fcfg.fft_size))
    elif fd:
        freq_response = _ls_channel_estimate(pilot_rx, fcfg)

    if fd:
        eq_blocks = []
        for b in range(fcfg.n_payload_blocks):
            blk = seg[hdr_len + b * fcfg.block_len: hdr_len + (b + 1) * fcfg.block_len]
            blk = remove_cyclic_prefix(blk, fcfg.cp_len)
            eq_blocks.append(fd_equalize(blk, freq_response, noise_var))
    else:
        constellation = None
        if cfg.equalizer.decision_directed:
            bits = np.arange(2 ** cfg.modulation.bits_per_symbol)
            table = ((bits[:, None] >> np.arange(
                cfg.modulation.bits_per_symbol)[::-1]) & 1).astype(np.uint8)
            constellation = modulate(table.reshape(-1), cfg.modulation)
        stream = td_equalize(seg, header, cfg.equalizer, constellation)
        eq_blocks = [
            remove_cyclic_prefix(stream[b * fcfg.block_len:(b + 1) * fcfg.block_len],
                                 fcfg.cp_len)
            for b in range(fcfg.n_payload_blocks)
        ]

    data = []
    for blk in eq_blocks:
        if cfg.track_pilot_phase and fcfg.pilots_per_block:
            blk = track_phase(blk, fcfg.pilot_values, fcfg.pilot_positions)
        data.append(extract_data_symbols(blk, fcfg))
    data = np.concatenate(data)[: cfg.required_symbols()]

    soft_chips = demodulate(data, cfg.modulation)[: cfg.chip_count()]
    soft_bits = despread(soft_chips, cfg.spreading)

    counts = {
        "preamble": len(preamble),
        "pilot": fcfg.block_len,
        "payload": fcfg.n_payload_blocks * fcfg.block_len,
        "cp_total": (fcfg.n_payload_blocks + 1) * fcfg.cp_len,
        "data_symbols": int(data.size),
        "coded_bits": cfg.coded_bits_total(),
        "info_bits": cfg.payload_bits,
    }

    codec = cfg.codec
    if codec is None:
        bits = hard_decisions(soft_bits)[: cfg.payload_bits]
        metrics = LinkMetrics(sync, None, 0, counts)
        return RxResult(info_bits=bits, crc_ok=None, metrics=metrics)

    n_cw = cfg.n_codewords()
    soft_cw = soft_bits.reshape(n_cw, codec.coded_bits_per_codeword)
    framed = coding.viterbi_decode_batch(soft_cw, codec)
    cap = codec.info_capacity
    crc_expected = coding.crc_bits_batch(framed[:, :cap], codec.crc_width)
    crc_fail = np.any(crc_expected != framed[:, cap:], axis=1)
    info = framed[:, :cap].reshape(-1)[: cfg.payload_bits]

    reencoded = coding.conv_encode_batch(framed, codec).reshape(-1)
    hard_rx = hard_decisions(soft_bits)
    pre_ber = float(np.mean(reencoded != hard_rx))

    metrics = LinkMetrics(sync, pre_ber, int(crc_fail.sum()), counts)
    return RxResult(info_bits=info, crc_ok=bool(not crc_fail.any()),
                    metrics=metrics)
