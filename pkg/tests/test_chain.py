import numpy as np
import pytest

from linksim.baseband import (ChainConfig, ChannelKnowledge, CodecConfig,
                              EqualizerConfig, EqualizerVariant,
                              ModulationScheme, SpreadingConfig, rx_chain,
                              tx_chain)
from linksim.baseband.framing import FrameConfig
from linksim.channel import (apply_channel, estimate_frequency_response,
                             make_preset)
from linksim.errors import CapacityError

IDENTITY = ChannelKnowledge(freq_response=np.ones(256), noise_variance=0.0)


def payload(n, seed):
    return np.random.default_rng(seed).integers(0, 2, n).astype(np.uint8)


def loopback(cfg, bits, knowledge=IDENTITY):
    tx = tx_chain(bits, cfg)
    return rx_chain(tx.waveform, cfg, knowledge)


class TestLoopback:
    @pytest.mark.parametrize("sf", [1, 2, 8])
    @pytest.mark.parametrize("scheme", [ModulationScheme.BPSK,
                                        ModulationScheme.QPSK])
    @pytest.mark.parametrize("variant", [EqualizerVariant.FREQUENCY_DOMAIN_MMSE,
                                         EqualizerVariant.TIME_DOMAIN_LMS])
    def test_identity_channel_matrix(self, sf, scheme, variant):
        cfg = ChainConfig.for_payload(
            500, codec=CodecConfig(info_bits_per_codeword=256),
            modulation=scheme, spreading=SpreadingConfig(sf),
            equalizer=EqualizerConfig(variant=variant))
        bits = payload(500, sf * 10 + scheme.bits_per_symbol)
        rx = loopback(cfg, bits)
        assert np.array_equal(rx.info_bits, bits)
        assert rx.crc_ok is True

    def test_defaults_bit_exact(self):
        cfg = ChainConfig.for_payload(992)
        bits = payload(992, 0)
        rx = loopback(cfg, bits)
        assert np.array_equal(rx.info_bits, bits)
        assert rx.crc_ok is True
        assert rx.metrics.pre_decoder_ber_estimate == 0.0

    def test_uncoded_loopback(self):
        cfg = ChainConfig.for_payload(300, codec=None)
        bits = payload(300, 1)
        rx = loopback(cfg, bits)
        assert np.array_equal(rx.info_bits, bits)
        assert rx.crc_ok is None
        assert rx.metrics.pre_decoder_ber_estimate is None

    def test_multi_codeword_payload(self):
        cfg = ChainConfig.for_payload(2500)
        assert cfg.n_codewords() == 3
        bits = payload(2500, 2)
        rx = loopback(cfg, bits)
        assert np.array_equal(rx.info_bits, bits)
        assert rx.crc_ok is True


class TestMultipath:
    def test_fde_over_harsh_preset_noiseless(self):
        cfg = ChainConfig.for_payload(992)
        model = make_preset("coupling-harsh")
        bits = payload(992, 3)
        tx = tx_chain(bits, cfg)
        rxw = apply_channel(tx.waveform, model)
        knowledge = ChannelKnowledge(estimate_frequency_response(model, 256), 0.0)
        rx = rx_chain(rxw, cfg, knowledge)
        assert np.array_equal(rx.info_bits, bits)
        assert rx.crc_ok is True

    def test_pilot_ls_estimator_matches_genie(self):
        cfg = ChainConfig.for_payload(992, channel_estimator="pilot-ls")
        model = make_preset("coupling-mild")
        bits = payload(992, 4)
        tx = tx_chain(bits, cfg)
        rx = rx_chain(apply_channel(tx.waveform, model), cfg)
        assert np.array_equal(rx.info_bits, bits)
        assert rx.crc_ok is True

    def test_td_equalizer_under_mild_multipath(self):
        cfg = ChainConfig.for_payload(
            400, codec=CodecConfig(info_bits_per_codeword=256),
            equalizer=EqualizerConfig(variant=EqualizerVariant.TIME_DOMAIN_LMS),
            channel_estimator="pilot-ls")
        model = make_preset("coupling-mild")
        bits = payload(400, 5)
        tx = tx_chain(bits, cfg)
        rx = rx_chain(apply_channel(tx.waveform, model), cfg)
        assert np.array_equal(rx.info_bits, bits)

    def test_cfo_phase_and_noise(self):
        cfg = ChainConfig.for_payload(992)
        model = make_preset("coupling-los", cfo=0.008, phase_offset=-1.2,
                            snr_db=15.0, seed=77)
        bits = payload(992, 6)
        tx = tx_chain(bits, cfg)
        knowledge = ChannelKnowledge(estimate_frequency_response(model, 256),
                                     10 ** (-1.5))
        rx = rx_chain(apply_channel(tx.waveform, model), cfg, knowledge)
        assert np.array_equal(rx.info_bits, bits)
        assert rx.crc_ok is True
        assert rx.metrics.sync.cfo_estimate == pytest.approx(0.008, abs=2e-4)


class TestContracts:
    def test_capacity_overflow_names_symbols(self):
        frame = FrameConfig(n_payload_blocks=1)
        with pytest.raises(CapacityError, match=r"\d+ data symbols"):
            ChainConfig(payload_bits=992, frame=frame)

    def test_payload_length_must_match_config(self):
        cfg = ChainConfig.for_payload(100, codec=None)
        with pytest.raises(ValueError, match="payload bits"):
            tx_chain(payload(99, 7), cfg)

    def test_genie_mode_requires_knowledge(self):
        cfg = ChainConfig.for_payload(100, codec=None)
        tx = tx_chain(payload(100, 8), cfg)
        with pytest.raises(ValueError, match="genie"):
            rx_chain(tx.waveform, cfg, None)

    def test_metrics_sample_counts(self):
        cfg = ChainConfig.for_payload(992)
        bits = payload(992, 9)
        rx = loopback(cfg, bits)
        counts = rx.metrics.sample_counts
        assert counts["preamble"] == 128
        assert counts["info_bits"] == 992
        assert counts["coded_bits"] == 2060
        assert counts["cp_total"] == (cfg.frame.n_payload_blocks + 1) * 32
        assert counts["payload"] == cfg.frame.n_payload_blocks * 288

    def test_pre_decoder_ber_estimate_tracks_channel(self):
        cfg = ChainConfig.for_payload(992)
        model = make_preset("coupling-los", snr_db=4.0, seed=11)
        bits = payload(992, 10)
        tx = tx_chain(bits, cfg)
        knowledge = ChannelKnowledge(np.ones(256), 10 ** (-0.4))
        rx = rx_chain(apply_channel(tx.waveform, model), cfg, knowledge)
        # raw channel BER at 4 dB per-sample SNR is ~1.25e-2
        assert 0.002 < rx.metrics.pre_decoder_ber_estimate < 0.04

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ChainConfig.for_payload(0, codec=None)
        with pytest.raises(ValueError):
            ChainConfig.for_payload(16, codec=None, channel_estimator="magic")

    @pytest.mark.parametrize("scheme", [ModulationScheme.BPSK,
                                        ModulationScheme.QPSK])
    def test_tx_waveform_papr_is_zero_db(self, scheme):
        # every frame sample (preamble, pilots, payload, filler) is
        # unit-modulus, so the single-carrier waveform has 0 dB PAPR
        from linksim.baseband.modulation import papr_db
        cfg = ChainConfig.for_payload(500, codec=None, modulation=scheme)
        tx = tx_chain(payload(500, 20), cfg)
        assert papr_db(tx.waveform) == pytest.approx(0.0, abs=1e-12)
