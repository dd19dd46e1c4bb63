"""Latency budget accounting for one codeword through the link.

Stage model (all deterministic functions of the configuration):

* frame assembly: air time of the frame header (preamble + CP'd pilot
  block) at the symbol rate implied by the coded bit rate;
* encoding: zero (the encoder is a shift register streaming into the
  serializer, so it adds pipeline fill only);
* serialization: coded bits of one codeword (tail included) divided by the
  coded bit rate;
* cp overhead: cyclic prefix samples of the payload blocks the codeword
  occupies;
* propagation: distance over the speed of light;
* decoding: modeled equal to serialization (the decoder is assumed to be
  pipelined at line rate; the paper gives no processing-time model).
"""
from __future__ import annotations

from dataclasses import dataclass

from ..baseband.coding import CodecConfig
from ..baseband.framing import PREAMBLE_HALF_LEN, FrameConfig
from ..baseband.modulation import ModulationScheme
from ..profiles import RP1, RequirementProfile
from ..ranging import SPEED_OF_LIGHT

DEFAULT_CODED_RATE_BPS = 500e6


@dataclass(frozen=True)
class LatencyBudget:
    stages: tuple[tuple[str, float], ...]
    coded_rate_bps: float
    rp1_bound_s: float = RP1.max_latency

    def __post_init__(self) -> None:
        if any(duration < 0 for _, duration in self.stages):
            raise ValueError("stage durations must be >= 0")

    @property
    def total(self) -> float:
        return sum(duration for _, duration in self.stages)

    @property
    def within_rp1(self) -> bool:
        return self.total < self.rp1_bound_s

    def meets(self, rp: RequirementProfile) -> bool:
        return self.total < rp.max_latency

    def stage(self, name: str) -> float:
        for stage_name, duration in self.stages:
            if stage_name == name:
                return duration
        raise KeyError(name)


def latency_budget(codec: CodecConfig = CodecConfig(),
                   coded_rate_bps: float = DEFAULT_CODED_RATE_BPS,
                   frame: FrameConfig = FrameConfig(),
                   distance_m: float = 0.5,
                   modulation: ModulationScheme = ModulationScheme.BPSK,
                   spreading_factor: int = 1) -> LatencyBudget:
    """Budget for one codeword at the given coded bit rate and distance."""
    if coded_rate_bps <= 0:
        raise ValueError("coded_rate_bps must be > 0")
    if distance_m < 0:
        raise ValueError("distance_m must be >= 0")
    symbol_rate = coded_rate_bps / modulation.bits_per_symbol
    coded_bits = codec.coded_bits_per_codeword
    codeword_symbols = -(-coded_bits * spreading_factor
                         // modulation.bits_per_symbol)
    blocks = -(-codeword_symbols // frame.data_symbols_per_block)

    header_samples = 2 * PREAMBLE_HALF_LEN + frame.block_len
    stages = (
        ("frame_assembly", header_samples / symbol_rate),
        ("encoding", 0.0),
        ("serialization", coded_bits / coded_rate_bps),
        ("cp_overhead", blocks * frame.cp_len / symbol_rate),
        ("propagation", distance_m / SPEED_OF_LIGHT),
        ("decoding", coded_bits / coded_rate_bps),
    )
    return LatencyBudget(stages=stages, coded_rate_bps=coded_rate_bps)
