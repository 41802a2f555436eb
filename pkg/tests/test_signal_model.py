import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddprony import (
    ConfigurationError,
    DDGrid,
    GridConfig,
    SignalModelKind,
    dirichlet_waveform,
    idzt,
    model_waveform,
    pilot_dd_grid,
    transmit_samples,
)

import oracles


def test_dirichlet_center_is_tone_count_over_duration(cfg):
    assert dirichlet_waveform(0.0, cfg) == pytest.approx(32 + 0j)


def test_dirichlet_first_zero_crossing(cfg):
    assert abs(dirichlet_waveform(1.0 / 32, cfg)) < 1e-12


def test_dirichlet_period_end_limit(cfg):
    # The removable singularity repeats at every slot boundary; values
    # just off the boundary must converge to the same limit.
    assert dirichlet_waveform(1.0, cfg) == pytest.approx(32 + 0j)
    for eps in (1e-9, -1e-9):
        assert abs(dirichlet_waveform(1.0 + eps, cfg) - 32.0) < 1e-5


@given(st.floats(min_value=-3.0, max_value=3.0,
                 allow_nan=False, allow_infinity=False))
def test_dirichlet_is_slot_periodic(t):
    cfg = GridConfig(32, 32)
    a = dirichlet_waveform(t, cfg)
    b = dirichlet_waveform(t + cfg.slot_duration, cfg)
    assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


@given(st.floats(min_value=-2.0, max_value=2.0,
                 allow_nan=False, allow_infinity=False))
def test_dirichlet_equals_centered_tone_sum(t):
    # The closed form is exactly the sum of the M centred unit tones.
    cfg = GridConfig(32, 32)
    m = np.arange(-16, 16)
    tones = np.exp(2j * np.pi * m * t / cfg.slot_duration).sum()
    assert abs(dirichlet_waveform(t, cfg) - tones) < 1e-9


@given(st.integers(min_value=-100, max_value=100).filter(lambda q: q % 32))
def test_dirichlet_zero_at_fractional_grid(q):
    cfg = GridConfig(32, 32)
    assert abs(dirichlet_waveform(q / 32, cfg)) < 1e-9


def test_dirichlet_energy_over_one_period(cfg):
    ell = np.arange(cfg.samples_per_slot)
    u = dirichlet_waveform(ell * cfg.sample_interval, cfg)
    energy = np.sum(np.abs(u) ** 2) * cfg.sample_interval
    assert energy == pytest.approx(32.0, rel=1e-9)


def test_dirichlet_energy_scales_as_tones_over_duration():
    # M unit tones of amplitude 1/T each contribute 1/T^2 mean power;
    # the period integral is therefore M/T.
    cfg = GridConfig(32, 32, slot_duration=2.0)
    ell = np.arange(cfg.samples_per_slot)
    u = dirichlet_waveform(ell * cfg.sample_interval, cfg)
    energy = np.sum(np.abs(u) ** 2) * cfg.sample_interval
    assert energy == pytest.approx(32.0 / 2.0, rel=1e-9)


def test_pilot_grid_small():
    got = pilot_dd_grid(GridConfig(2, 2)).values
    np.testing.assert_array_equal(got, [[1, 0], [0, 0]])


def test_pilot_grid_single_unit_entry(cfg):
    values = pilot_dd_grid(cfg).values
    assert values.shape == (32, 32)
    assert values[0, 0] == 1.0
    assert np.count_nonzero(values) == 1
    assert np.sum(np.abs(values) ** 2) == pytest.approx(1.0)


def test_idzt_pilot_is_impulse_train():
    cfg = GridConfig(4, 4)
    x = idzt(pilot_dd_grid(cfg), cfg)
    expected = np.zeros(16, dtype=complex)
    expected[::4] = 0.25
    np.testing.assert_array_equal(x, expected)


def test_idzt_zero_grid_is_zero():
    cfg = GridConfig(4, 4)
    x = idzt(DDGrid(np.zeros((4, 4), dtype=complex)), cfg)
    assert not np.any(x)


def test_idzt_single_doppler_bin():
    cfg = GridConfig(2, 2)
    grid = np.zeros((2, 2), dtype=complex)
    grid[1, 0] = 1.0
    x = idzt(DDGrid(grid), cfg)
    np.testing.assert_allclose(x, [0.5, 0.0, -0.5, 0.0], atol=1e-15)


def test_idzt_rejects_mismatched_grid():
    with pytest.raises(ConfigurationError):
        idzt(DDGrid(np.zeros((4, 4), dtype=complex)), GridConfig(8, 8))


def test_transmit_center_and_zero_samples(cfg, tx_ideal):
    origin = cfg.origin_offset
    assert tx_ideal.samples[origin] == pytest.approx(1.0 + 0j)  # M/(N*T)
    # first intra-slot zero of the kernel, T/M = two sample steps
    assert abs(tx_ideal.samples[origin + 2]) < 1e-12


def test_transmit_frame_geometry(cfg, tx_ideal, tx_sinc):
    assert len(tx_ideal) == cfg.extended_length == 2368
    assert tx_ideal.origin_offset == 128
    assert len(tx_sinc) == len(tx_ideal)


def test_models_agree_at_frame_center(cfg):
    mid = cfg.n_slots / 2 * cfg.slot_duration
    gap = abs(model_waveform(mid, cfg, SignalModelKind.TRUNCATED_SINC)
              - model_waveform(mid, cfg, SignalModelKind.IDEAL_PERIODIC))
    assert gap < 1e-3 * 32 / 32


@pytest.mark.parametrize("kind", list(SignalModelKind))
def test_model_waveform_matches_reference_formulas(cfg, kind):
    t = np.linspace(-1.7, 33.3, 777)
    got = model_waveform(t, cfg, kind)
    want = oracles.pilot_waveform(t, cfg, kind)
    np.testing.assert_allclose(got, want, atol=1e-9)


@pytest.mark.parametrize("kind", list(SignalModelKind))
def test_transmit_samples_on_extended_grid(cfg, kind):
    frame = transmit_samples(cfg, kind)
    want = oracles.pilot_waveform(cfg.extended_times(), cfg, kind)
    np.testing.assert_allclose(frame.samples, want, atol=1e-9)
