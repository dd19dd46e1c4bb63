import numpy as np
import pytest

from linksim.baseband.framing import FrameConfig, build_preamble, known_header
from linksim.baseband.sync import (SyncState, acquire_sync, track_phase,
                                   wrap_phase)
from linksim.errors import SyncError


def embed(preamble, offset, total=600):
    wave = np.zeros(total, dtype=complex)
    wave[offset: offset + len(preamble)] = preamble
    return wave


class TestAcquire:
    def test_clean_offset(self):
        p = build_preamble()
        state = acquire_sync(embed(p, 37), p)
        assert state.timing_offset == 37
        assert abs(state.cfo_estimate) < 1e-9
        assert abs(state.phase) < 1e-9

    def test_cfo_and_phase_recovered(self):
        p = build_preamble()
        n = np.arange(len(p))
        wave = embed(p * np.exp(1j * (0.004 * n + 0.9)), 12)
        state = acquire_sync(wave, p)
        assert state.timing_offset == 12
        assert state.cfo_estimate == pytest.approx(0.004, abs=1e-6)
        # phase reference is the preamble start after CFO removal
        assert wrap_phase(state.phase - 0.9) == pytest.approx(0.0, abs=1e-6)

    def test_cfo_accuracy_at_20db(self):
        # 95th percentile error within 2e-4 rad/sample at 20 dB, using the
        # full known header (preamble + pilot block) for refinement
        cfg = FrameConfig()
        header = known_header(cfg)
        p = build_preamble()
        rng = np.random.default_rng(1234)
        sigma = np.sqrt(10 ** (-20 / 10) / 2)
        errors = []
        for _ in range(400):
            n = np.arange(len(header))
            clean = header * np.exp(1j * (0.01 * n + 0.3))
            noisy = clean + sigma * (rng.standard_normal(len(header)) +
                                     1j * rng.standard_normal(len(header)))
            state = acquire_sync(noisy, p, known_header=header)
            errors.append(abs(state.cfo_estimate - 0.01))
        assert np.percentile(errors, 95) < 2e-4

    def test_pure_noise_fails(self):
        rng = np.random.default_rng(7)
        noise = rng.standard_normal(512) + 1j * rng.standard_normal(512)
        with pytest.raises(SyncError):
            acquire_sync(noise, build_preamble())

    def test_too_short_waveform(self):
        with pytest.raises(ValueError):
            acquire_sync(np.zeros(16, complex), build_preamble())

    def test_search_window_limits_offsets(self):
        p = build_preamble()
        wave = embed(p, 200)
        with pytest.raises(SyncError):
            acquire_sync(wave, p, search_window=50)


class TestTrackPhase:
    def test_removes_rotation(self):
        rng = np.random.default_rng(2)
        block = (1.0 - 2.0 * rng.integers(0, 2, 256)).astype(complex)
        positions = np.arange(0, 256, 32)
        pilots = block[positions].copy()
        corrected = track_phase(block * np.exp(1j * 0.2), pilots, positions)
        residual = np.angle(np.sum(corrected * np.conj(block)))
        assert abs(residual) < 1e-6

    def test_zero_rotation_unchanged(self):
        rng = np.random.default_rng(3)
        block = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        positions = np.array([0, 16, 32, 48])
        out = track_phase(block, block[positions], positions)
        assert np.allclose(out, block)

    def test_pilots_resolve_quadrant(self):
        # a blind QPSK estimator is ambiguous mod pi/2; pilots are not
        rng = np.random.default_rng(4)
        bits = rng.integers(0, 2, 128)
        block = ((1 - 2.0 * bits[0::2]) + 1j * (1 - 2.0 * bits[1::2])) / np.sqrt(2)
        positions = np.arange(0, 64, 8)
        pilots = block[positions].copy()
        rotated = block * np.exp(1j * (np.pi / 2 + 0.1))
        corrected = track_phase(rotated, pilots, positions)
        assert np.max(np.abs(corrected - block)) < 1e-9

    def test_no_pilots_rejected(self):
        with pytest.raises(ValueError):
            track_phase(np.ones(8, complex), np.array([]), np.array([], dtype=int))


class TestSyncState:
    def test_phase_wrap_enforced(self):
        with pytest.raises(ValueError):
            SyncState(timing_offset=0, cfo_estimate=0.0, phase=4.0)

    def test_wrap_phase(self):
        assert wrap_phase(np.pi) == pytest.approx(np.pi)
        assert wrap_phase(-np.pi) == pytest.approx(np.pi)
        assert wrap_phase(2 * np.pi + 0.1) == pytest.approx(0.1)
