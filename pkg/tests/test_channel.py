import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ddprony import (
    ConfigurationError,
    ExtendedFrame,
    GridConfig,
    NoiseSpec,
    Path,
    PathSet,
    SignalModelKind,
    add_awgn,
    apply_channel,
    sample_paths,
    transmit_samples,
)

import oracles


def test_sample_paths_is_deterministic(cfg):
    a = sample_paths(1234, 4, cfg)
    b = sample_paths(1234, 4, cfg)
    assert a == b
    c = sample_paths(1235, 4, cfg)
    assert a != c


def test_sample_paths_ranges(cfg):
    for seed in range(50):
        ps = sample_paths(seed, 6, cfg)
        assert ps.count == 6
        assert np.all(ps.delays() > 0.0)
        assert np.all(ps.delays() < cfg.slot_duration)
        assert np.all(np.abs(ps.dopplers()) < 0.5 / cfg.slot_duration)


def test_sample_paths_gain_power_is_unit():
    cfg = GridConfig(32, 32)
    gains = np.concatenate(
        [sample_paths(s, 100, cfg).gains() for s in range(1000)])
    assert gains.size == 100_000
    assert np.mean(np.abs(gains) ** 2) == pytest.approx(1.0, abs=0.02)


def test_sample_paths_rejects_empty(cfg):
    with pytest.raises(ConfigurationError):
        sample_paths(0, 0, cfg)


def test_identity_channel_in_small_delay_limit(cfg, tx_ideal):
    near_identity = PathSet((Path(1.0 + 0j, 1e-12, 0.0),))
    rx = apply_channel(tx_ideal, near_identity, cfg,
                       SignalModelKind.IDEAL_PERIODIC)
    np.testing.assert_allclose(rx.samples, tx_ideal.samples, atol=1e-9)
    assert rx.origin_offset == tx_ideal.origin_offset


@pytest.mark.parametrize("kind", list(SignalModelKind))
def test_apply_channel_matches_direct_superposition(cfg, kind):
    tx = transmit_samples(cfg, kind)
    paths = PathSet((
        Path(0.8 - 0.3j, 0.37 * cfg.slot_duration, 0.21 / cfg.slot_duration),
        Path(-0.2 + 0.9j, 0.74 * cfg.slot_duration, -0.33 / cfg.slot_duration),
        Path(0.5 + 0.5j, 0.12 * cfg.slot_duration, 0.05 / cfg.slot_duration),
    ))
    rx = apply_channel(tx, paths, cfg, kind)
    want = oracles.synth_received(cfg, paths, kind)
    np.testing.assert_allclose(rx.samples, want, atol=1e-9)


def test_doppler_only_path_is_exact_phase_ramp(cfg, tx_ideal):
    doppler = 0.4 / cfg.slot_duration
    rx = apply_channel(
        tx_ideal, PathSet((Path(1.0 + 0j, 1e-15, doppler),)), cfg,
        SignalModelKind.IDEAL_PERIODIC)
    ramp = np.exp(2j * np.pi * doppler * cfg.extended_times())
    np.testing.assert_allclose(rx.samples, tx_ideal.samples * ramp,
                               atol=1e-9)


@given(st.integers(min_value=0, max_value=10_000))
def test_apply_channel_is_linear_in_gains(seed):
    cfg = GridConfig(32, 32)
    tx = transmit_samples(cfg, SignalModelKind.IDEAL_PERIODIC)
    ps = sample_paths(seed, 3, cfg)
    joint = apply_channel(tx, ps, cfg, SignalModelKind.IDEAL_PERIODIC)
    parts = sum(
        apply_channel(tx, PathSet((p,)), cfg,
                      SignalModelKind.IDEAL_PERIODIC).samples
        for p in ps.paths)
    np.testing.assert_allclose(joint.samples, parts, atol=1e-10)


def test_apply_channel_rejects_wrong_frame_length(cfg):
    short = ExtendedFrame(np.zeros(100, dtype=complex), 10)
    with pytest.raises(ConfigurationError):
        apply_channel(short, PathSet((Path(1.0, 0.1, 0.0),)), cfg,
                      SignalModelKind.IDEAL_PERIODIC)


def test_noiseless_spec_is_passthrough(cfg, tx_ideal):
    out = add_awgn(tx_ideal, NoiseSpec(None), cfg)
    assert out is tx_ideal


def test_awgn_variance_matches_requested_snr(cfg):
    # Unit-power frame so the retained-window power is exactly 1; at
    # 40 dB the complex noise variance must be 1e-4.  Pool ten frames
    # for a stable sample variance (23680 samples).
    ones = ExtendedFrame(np.ones(cfg.extended_length, dtype=complex),
                         cfg.origin_offset)
    noise = np.concatenate([
        add_awgn(ones, NoiseSpec(40.0, seed), cfg).samples - 1.0
        for seed in range(10)])
    assert noise.size >= 10_000
    measured = np.mean(np.abs(noise) ** 2)
    assert measured == pytest.approx(1e-4, rel=0.05)
    # circularity: real and imaginary parts carry half the power each
    assert np.mean(noise.real ** 2) == pytest.approx(5e-5, rel=0.1)
    assert np.mean(noise.imag ** 2) == pytest.approx(5e-5, rel=0.1)


def test_awgn_power_follows_retained_window(cfg, tx_ideal):
    rx = add_awgn(tx_ideal, NoiseSpec(20.0, 3), cfg)
    start = cfg.origin_offset + cfg.samples_per_slot
    retained = tx_ideal.samples[start:start + cfg.retained_length]
    expected_var = np.mean(np.abs(retained) ** 2) / 100.0
    w = rx.samples - tx_ideal.samples
    assert np.mean(np.abs(w) ** 2) == pytest.approx(expected_var, rel=0.1)


def test_awgn_seed_reproducibility(cfg, tx_ideal):
    a = add_awgn(tx_ideal, NoiseSpec(30.0, 42), cfg)
    b = add_awgn(tx_ideal, NoiseSpec(30.0, 42), cfg)
    np.testing.assert_array_equal(a.samples, b.samples)
    c = add_awgn(tx_ideal, NoiseSpec(30.0, 43), cfg)
    assert np.any(a.samples != c.samples)


def test_awgn_rejects_silent_frame(cfg):
    silent = ExtendedFrame(np.zeros(cfg.extended_length, dtype=complex),
                           cfg.origin_offset)
    with pytest.raises(ConfigurationError):
        add_awgn(silent, NoiseSpec(10.0, 0), cfg)
