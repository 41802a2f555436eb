"""Built-in sanity checks for the `selftest` subcommand.

Each check is a zero-argument callable that raises on failure.  They
cover the cheap definitional corners of every module so a broken build
or environment is caught in a second or two, without pytest.
"""

from __future__ import annotations

import numpy as np

from .channel import NoiseSpec, Path, PathSet, add_awgn, apply_channel, \
    sample_paths
from .estimators import delay_first, doppler_first
from .fusion import (
    EstimationMethod,
    FusionParams,
    amplitude_fit,
    estimate_paths,
    merge_candidates,
    prune,
)
from .montecarlo import EstimateSet, Scenario, match_paths, run_trial
from .prony_core import (
    annihilating_filter,
    ls_separate,
    phase_to_delay,
    phase_to_doppler,
    polynomial_roots,
    single_mode_ratio,
)
from .sampling import fd_matrix, fd_samples, retained_td_matrix
from .signal_model import (
    DDGrid,
    GridConfig,
    SignalModelKind,
    dirichlet_waveform,
    idzt,
    model_waveform,
    pilot_dd_grid,
    transmit_samples,
)

_CFG = GridConfig(n_slots=32, n_subcarriers=32)


def _close(a, b, tol=1e-9):
    assert np.max(np.abs(np.asarray(a) - np.asarray(b))) <= tol, \
        f"{a!r} != {b!r} (tol {tol})"


def check_dirichlet_center():
    _close(dirichlet_waveform(0.0, _CFG), 32.0 + 0j)


def check_dirichlet_zero_crossing():
    _close(dirichlet_waveform(1.0 / 32, _CFG), 0.0, tol=1e-12)


def check_dirichlet_period_boundary():
    _close(dirichlet_waveform(1.0, _CFG), 32.0 + 0j)


def check_pilot_grid():
    grid = pilot_dd_grid(GridConfig(2, 2))
    _close(grid.values, np.array([[1, 0], [0, 0]]))
    assert np.sum(np.abs(pilot_dd_grid(_CFG).values) ** 2) == 1.0


def check_idzt_impulse_train():
    cfg = GridConfig(4, 4)
    x = idzt(pilot_dd_grid(cfg), cfg)
    want = np.zeros(16, dtype=complex)
    want[::4] = 0.25
    _close(x, want, tol=1e-12)


def check_idzt_zero():
    cfg = GridConfig(2, 2)
    x = idzt(DDGrid(np.zeros((2, 2), dtype=complex)), cfg)
    _close(x, 0.0, tol=0.0)


def check_idzt_doppler_bin():
    cfg = GridConfig(2, 2)
    values = np.zeros((2, 2), dtype=complex)
    values[1, 0] = 1.0
    _close(idzt(DDGrid(values), cfg), np.array([0.5, 0, -0.5, 0]),
           tol=1e-12)


def check_transmit_center_and_zero():
    tx = transmit_samples(_CFG, SignalModelKind.IDEAL_PERIODIC)
    _close(tx.samples[_CFG.origin_offset], 32.0 / 32, tol=1e-12)
    _close(tx.samples[_CFG.origin_offset + _CFG.upsample_time], 0.0,
           tol=1e-12)


def check_sample_paths_deterministic():
    a = sample_paths(7, 3, _CFG)
    b = sample_paths(7, 3, _CFG)
    assert a == b
    assert np.all((a.delays() > 0) & (a.delays() < 1))
    assert np.all(np.abs(a.dopplers()) < 0.5)


def check_channel_identity_limit():
    tx = transmit_samples(_CFG, SignalModelKind.IDEAL_PERIODIC)
    paths = PathSet((Path(1.0 + 0j, 1e-12, 0.0),))
    rx = apply_channel(tx, paths, _CFG, SignalModelKind.IDEAL_PERIODIC)
    _close(rx.samples, tx.samples, tol=1e-9)


def check_channel_linearity():
    tx = transmit_samples(_CFG, SignalModelKind.IDEAL_PERIODIC)
    p1 = Path(0.5 + 0.5j, 0.3, 0.1)
    p2 = Path(-0.25 + 1j, 0.7, -0.2)
    both = apply_channel(tx, PathSet((p1, p2)), _CFG,
                         SignalModelKind.IDEAL_PERIODIC)
    solo = (apply_channel(tx, PathSet((p1,)), _CFG,
                          SignalModelKind.IDEAL_PERIODIC).samples
            + apply_channel(tx, PathSet((p2,)), _CFG,
                            SignalModelKind.IDEAL_PERIODIC).samples)
    _close(both.samples, solo, tol=1e-12)


def check_noise_passthrough_and_determinism():
    tx = transmit_samples(_CFG, SignalModelKind.IDEAL_PERIODIC)
    same = add_awgn(tx, NoiseSpec(None, 3), _CFG)
    assert same.samples is tx.samples
    a = add_awgn(tx, NoiseSpec(20.0, 3), _CFG)
    b = add_awgn(tx, NoiseSpec(20.0, 3), _CFG)
    assert np.array_equal(a.samples, b.samples)


def check_retained_rows_identical():
    tx = transmit_samples(_CFG, SignalModelKind.IDEAL_PERIODIC)
    td = retained_td_matrix(tx, _CFG)
    _close(td, np.broadcast_to(td[0], td.shape), tol=1e-12)


def check_fd_zero_and_index_rule():
    from .signal_model import ExtendedFrame

    cfg = _CFG
    frame = ExtendedFrame(np.zeros(cfg.extended_length, dtype=complex),
                          cfg.origin_offset)
    assert not np.any(fd_samples(frame, cfg))
    tx = transmit_samples(cfg, SignalModelKind.IDEAL_PERIODIC)
    fd = fd_samples(tx, cfg)
    mat = fd_matrix(tx, cfg)
    half_m = cfg.n_subcarriers // 2
    cols = cfg.upsample_freq * cfg.n_slots
    _close(mat[half_m, cols // 2], fd[0], tol=0.0)
    _close(mat[0, 0],
           fd[(-half_m * cols - cols // 2) % cfg.fd_length], tol=0.0)


def check_fd_parseval():
    tx = transmit_samples(_CFG, SignalModelKind.IDEAL_PERIODIC)
    fd = fd_samples(tx, _CFG)
    lhs = np.sum(np.abs(fd) ** 2) / _CFG.fd_length
    rhs = _CFG.sample_interval ** 2 * np.sum(np.abs(tx.samples) ** 2)
    _close(lhs, rhs, tol=1e-9 * abs(rhs))


def check_annihilator_first_order():
    z = np.exp(1j * np.pi / 4)
    seq = z ** np.arange(8)
    data = np.stack([seq[1:], seq[:-1]], axis=1)
    coeffs, degenerate = annihilating_filter(data, 1)
    assert not degenerate
    _close(coeffs, np.array([1.0, -z]), tol=1e-9)


def check_annihilator_second_order():
    x = np.array([1, 1], dtype=complex)
    seqs = [np.ones(6, dtype=complex), (-1.0 + 0j) ** np.arange(6)]
    rows = []
    for seq in seqs:
        for i in range(len(seq) - 2):
            rows.append((seq[i + 2], seq[i + 1], seq[i]))
    coeffs, _ = annihilating_filter(np.asarray(rows), 2)
    _close(coeffs, np.array([1.0, 0.0, -1.0]), tol=1e-9)
    del x


def check_polynomial_roots():
    _close(polynomial_roots(np.array([1.0, -2.0])), np.array([2.0 + 0j]),
           tol=1e-12)
    roots = np.sort_complex(polynomial_roots(np.array([1.0, 0.0, -1.0])))
    _close(roots, np.array([-1.0 + 0j, 1.0 + 0j]), tol=1e-9)


def check_phase_maps():
    _close(phase_to_doppler(np.exp(1j * np.pi / 2), 1.0), 0.25, tol=1e-12)
    _close(phase_to_doppler(1.0 + 0j, 1.0), 0.0, tol=0.0)
    _close(phase_to_doppler(np.exp(-1j * np.pi), 2.0), -0.25, tol=1e-12)
    _close(phase_to_delay(np.exp(-1j * np.pi / 2), 1.0), 0.25, tol=1e-12)
    _close(phase_to_delay(1.0 + 0j, 1.0), 0.0, tol=0.0)
    _close(phase_to_delay(np.exp(1j * np.pi / 2), 1.0), 0.75, tol=1e-12)


def check_single_mode_ratio():
    y = np.exp(-2j * np.pi * np.arange(8) * 0.3)
    z = single_mode_ratio(y)
    _close(phase_to_delay(z, 1.0), 0.3, tol=1e-12)
    _close(single_mode_ratio(np.full(5, 2.0 + 1j)), 1.0, tol=1e-12)


def check_ls_separate():
    rng = np.random.default_rng(0)
    e = np.fft.fft(np.eye(4)) / 2.0   # unitary
    r = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
    _close(ls_separate(e, r), e.conj().T @ r, tol=1e-9)
    v0 = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
    e2 = rng.standard_normal((5, 2)) + 1j * rng.standard_normal((5, 2))
    _close(ls_separate(e2, e2 @ v0), v0, tol=1e-9)


def check_pipelines_flag_zero_input():
    td = np.zeros((_CFG.n_slots, _CFG.samples_per_slot), dtype=complex)
    cands, _ = doppler_first(td, _CFG)
    assert cands.degenerate
    fd = np.zeros((_CFG.n_subcarriers,
                   _CFG.upsample_freq * _CFG.n_slots), dtype=complex)
    cands, _ = delay_first(fd, _CFG)
    assert cands.degenerate


def check_merge_examples():
    params = FusionParams(delta_t=0.1, delta_f=0.1)
    merged = merge_candidates(np.array([[0.30, 0.20]]),
                              np.array([[0.31, 0.21]]), params)
    _close(merged, np.array([[0.305, 0.205]]), tol=1e-12)
    kept = merge_candidates(np.array([[0.2, 0.3]]),
                            np.array([[0.6, 0.3]]), params)
    assert len(kept) == 2
    chain = merge_candidates(
        np.array([[0.30, 0.0], [0.35, 0.0], [0.40, 0.0]]), None, params)
    _close(chain, np.array([[0.3625, 0.0]]), tol=1e-12)


def check_prune_examples():
    params = FusionParams()
    theta = np.array([[0.1, 0.0], [0.2, 0.0]])
    kept, _ = prune(theta, np.array([1.0, 0.005]), params)
    assert len(kept) == 1 and kept[0, 0] == 0.1
    theta3 = np.array([[0.1, 0.0], [0.2, 0.0], [0.3, 0.0]])
    kept, _ = prune(theta3, np.array([1.0, 0.5, 0.02]), params)
    assert len(kept) == 3
    kept, _ = prune(theta, np.zeros(2, dtype=complex), params)
    assert len(kept) == 0


def check_amplitude_fit_flags_duplicates():
    tx = transmit_samples(_CFG, SignalModelKind.IDEAL_PERIODIC)
    theta = np.array([[0.3, 0.1], [0.3, 0.1]])
    _, ill = amplitude_fit(theta, tx, _CFG,
                           SignalModelKind.IDEAL_PERIODIC)
    assert ill


def check_match_paths_rules():
    truth = PathSet((Path(1.0 + 0j, 0.2, 0.1), Path(1.0 + 0j, 0.6, -0.2)))
    exact = EstimateSet(tuple(truth.paths))
    assert match_paths(truth, exact, 0.5, 0.5) == 2
    assert match_paths(truth, EstimateSet(()), 0.5, 0.5) == 0
    middle = EstimateSet((Path(1.0 + 0j, 0.4, -0.05),))
    assert match_paths(truth, middle, 0.5, 0.5) == 1


def check_trial_determinism_and_noiseless_hit():
    scenario = Scenario(cfg=_CFG, path_count=1, snr_db=None, runs=4,
                        base_seed=11)
    a = run_trial(scenario, 2)
    b = run_trial(scenario, 2)
    assert a == b
    assert a.matched == 1


def check_end_to_end_single_path():
    tx = transmit_samples(_CFG, SignalModelKind.IDEAL_PERIODIC)
    truth = Path(1.0 - 0.5j, 0.37, 0.21)
    rx = apply_channel(tx, PathSet((truth,)), _CFG,
                       SignalModelKind.IDEAL_PERIODIC)
    est = estimate_paths(rx, _CFG, FusionParams(),
                         SignalModelKind.IDEAL_PERIODIC,
                         EstimationMethod.PARALLEL)
    assert est.count >= 1
    assert match_paths(PathSet((truth,)), est, 0.5, 0.5) == 1


def all_checks():
    """(name, callable) pairs in execution order."""
    checks = [
        check_dirichlet_center,
        check_dirichlet_zero_crossing,
        check_dirichlet_period_boundary,
        check_pilot_grid,
        check_idzt_impulse_train,
        check_idzt_zero,
        check_idzt_doppler_bin,
        check_transmit_center_and_zero,
        check_sample_paths_deterministic,
        check_channel_identity_limit,
        check_channel_linearity,
        check_noise_passthrough_and_determinism,
        check_retained_rows_identical,
        check_fd_zero_and_index_rule,
        check_fd_parseval,
        check_annihilator_first_order,
        check_annihilator_second_order,
        check_polynomial_roots,
        check_phase_maps,
        check_single_mode_ratio,
        check_ls_separate,
        check_pipelines_flag_zero_input,
        check_merge_examples,
        check_prune_examples,
        check_amplitude_fit_flags_duplicates,
        check_match_paths_rules,
        check_trial_determinism_and_noiseless_hit,
        check_end_to_end_single_path,
    ]
    return [(fn.__name__, fn) for fn in checks]
