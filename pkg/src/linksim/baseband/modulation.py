"""Bit-to-symbol mapping, repetition spreading and the PAPR metric.

Conventions fixed here once for the whole simulator:

* BPSK maps bit 0 -> +1, bit 1 -> -1.
* QPSK is Gray-labelled, one bit per quadrature:
  (b0, b1) -> ((1-2*b0) + 1j*(1-2*b1)) / sqrt(2), unit average energy.
* Soft demodulator outputs are scaled so a clean symbol yields +/-1 and
  positive values mean bit 0.
* The spreading pattern of length SF is the Thue-Morse parity sequence
  (chip j is popcount(j) mod 2); spreading XORs it onto each repeated bit,
  despreading correlates with the same pattern and averages.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

_SQRT2 = np.sqrt(2.0)


class ModulationScheme(Enum):
    BPSK = "bpsk"
    QPSK = "qpsk"

    @property
    def bits_per_symbol(self) -> int:
        return 1 if self is ModulationScheme.BPSK else 2


@dataclass(frozen=True)
class SpreadingConfig:
    sf: int = 1

    def __post_init__(self) -> None:
        if self.sf < 1:
            raise ValueError("spreading factor must be >= 1")


def chip_pattern(sf: int) -> np.ndarray:
    """Thue-Morse +/-1 chip pattern of length sf."""
    bits = np.array([bin(j).count("1") & 1 for j in range(sf)], dtype=np.int8)
    return (1 - 2 * bits).astype(np.float64)


def spread(bits: np.ndarray, cfg: SpreadingConfig) -> np.ndarray:
    """Repeat each bit sf times and XOR the chip pattern onto the copies."""
    bits = np.asarray(bits, dtype=np.uint8)
    if cfg.sf == 1:
        return bits.copy()
    pattern = np.array([bin(j).count("1") & 1 for j in range(cfg.sf)],
                       dtype=np.uint8)
    return (np.repeat(bits, cfg.sf).reshape(-1, cfg.sf) ^ pattern).reshape(-1)


def despread(soft_chips: np.ndarray, cfg: SpreadingConfig) -> np.ndarray:
    """Correlate soft chips against the pattern; returns one soft value per bit.

    The decision variable is the pattern-weighted mean, so chip-level noise
    variance sigma^2 shrinks to sigma^2 / sf.
    """
    soft_chips = np.asarray(soft_chips, dtype=np.float64)
    if soft_chips.size % cfg.sf:
        raise ValueError("chip count is not a multiple of the spreading factor")
    if cfg.sf == 1:
        return soft_chips.copy()
    return soft_chips.reshape(-1, cfg.sf) @ chip_pattern(cfg.sf) / cfg.sf


def modulate(bits: np.ndarray, scheme: ModulationScheme) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8)
    if scheme is ModulationScheme.BPSK:
        return (1.0 - 2.0 * bits).astype(np.complex128)
    if bits.size % 2:
        raise ValueError("QPSK needs an even number of bits")
    i = 1.0 - 2.0 * bits[0::2]
    q = 1.0 - 2.0 * bits[1::2]
    return (i + 1j * q) / _SQRT2


def demodulate(symbols: np.ndarray, scheme: ModulationScheme) -> np.ndarray:
    """Soft values, one per bit, +1 for a clean bit 0."""
    symbols = np.asarray(symbols, dtype=np.complex128)
    if scheme is ModulationScheme.BPSK:
        return symbols.real.copy()
    soft = np.empty(symbols.size * 2)
    soft[0::2] = symbols.real * _SQRT2
    soft[1::2] = symbols.imag * _SQRT2
    return soft


def hard_decisions(soft: np.ndarray) -> np.ndarray:
    return (np.asarray(soft) < 0).astype(np.uint8)


def papr_db(waveform: np.ndarray) -> float:
    """Peak-to-average power ratio, 10*log10(max|x|^2 / mean|x|^2)."""
    waveform = np.asarray(waveform)
    if waveform.size == 0:
        raise ValueError("waveform must be non-empty")
    power = np.abs(waveform) ** 2
    return 10.0 * np.log10(power.max() / power.mean())
