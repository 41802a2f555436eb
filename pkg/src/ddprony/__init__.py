"""Delay-Doppler multipath estimation from OTFS pilot frames.

Two complementary Prony-style pipelines, one rooting Doppler
progressions across time slots and one rooting delay progressions
across subcarriers, feed a candidate-fusion stage that merges, fits
amplitudes, and prunes.  A Monte Carlo driver measures detection rates
at desk scale.
"""

from .signal_model import (
    ConfigurationError,
    DDGrid,
    ExtendedFrame,
    GridConfig,
    SignalModelKind,
    dirichlet_waveform,
    idzt,
    model_waveform,
    pilot_dd_grid,
    shifted_sinc_pulse,
    transmit_samples,
)
from .channel import NoiseSpec, Path, PathSet, add_awgn, apply_channel, sample_paths
from .sampling import fd_matrix, fd_samples, retained_td_matrix
from .prony_core import (
    DegenerateInputError,
    InvalidRootError,
    RootRefinementError,
    annihilating_filter,
    ls_separate,
    phase_to_delay,
    phase_to_doppler,
    polynomial_roots,
    single_mode_ratio,
)
from .estimators import (
    CandidateSet,
    CandidateSource,
    StageTrace,
    delay_first,
    doppler_first,
)
from .fusion import (
    EstimateSet,
    EstimationMethod,
    FusionParams,
    amplitude_fit,
    estimate_paths,
    merge_candidates,
    parallel_estimate,
    prune,
)
from .montecarlo import (
    DetectionReport,
    Scenario,
    ScenarioResult,
    TrialResult,
    match_paths,
    run_trial,
    sweep,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "DDGrid",
    "ExtendedFrame",
    "GridConfig",
    "SignalModelKind",
    "dirichlet_waveform",
    "idzt",
    "model_waveform",
    "pilot_dd_grid",
    "shifted_sinc_pulse",
    "transmit_samples",
    "NoiseSpec",
    "Path",
    "PathSet",
    "add_awgn",
    "apply_channel",
    "sample_paths",
    "fd_matrix",
    "fd_samples",
    "retained_td_matrix",
    "DegenerateInputError",
    "InvalidRootError",
    "RootRefinementError",
    "annihilating_filter",
    "ls_separate",
    "phase_to_delay",
    "phase_to_doppler",
    "polynomial_roots",
    "single_mode_ratio",
    "CandidateSet",
    "CandidateSource",
    "StageTrace",
    "delay_first",
    "doppler_first",
    "EstimateSet",
    "EstimationMethod",
    "FusionParams",
    "amplitude_fit",
    "estimate_paths",
    "merge_candidates",
    "parallel_estimate",
    "prune",
    "DetectionReport",
    "Scenario",
    "ScenarioResult",
    "TrialResult",
    "match_paths",
    "run_trial",
    "sweep",
]
