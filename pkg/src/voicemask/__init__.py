"""Voice de-identification toolkit.

Pitch-shifting and spectral-warping voice transforms, covariance-based
speaker and gender recognition, and an experiment harness that sweeps
modification degrees and reports recognition curves.
"""

from .errors import VoicemaskError
from .experiment import (
    ALGORITHMS,
    CorpusManifest,
    DegreeSchedule,
    ManifestEntry,
    MosTable,
    SweepResult,
    SweepRow,
    aggregate_mos,
    emit_report,
    find_crossover,
    load_manifest,
    load_sweep,
    run_degree_sweep,
    synth_corpus,
)
from .phase_vocoder import (
    PhasePropagator,
    PitchShiftSpec,
    detect_peaks,
    pitch_shift,
    regions_of_influence,
    shift_coefficients,
)
from .signal_core import (
    AudioBuffer,
    Spectrogram,
    StftConfig,
    istft,
    read_wav,
    stft,
    write_wav,
)
from .speaker_id import (
    FeatureConfig,
    SpeakerModel,
    classify_gender,
    covariance_model,
    extract_cepstra,
    identify_speaker,
    load_models,
    save_models,
    sphericity_distance,
    train_gender_models,
)
from .vtln import FAMILIES, WarpSpec, invert_warp, vtln_transform, warp_spectrum, warp_value

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "AudioBuffer",
    "CorpusManifest",
    "DegreeSchedule",
    "FAMILIES",
    "FeatureConfig",
    "ManifestEntry",
    "MosTable",
    "PhasePropagator",
    "PitchShiftSpec",
    "SpeakerModel",
    "Spectrogram",
    "StftConfig",
    "SweepResult",
    "SweepRow",
    "VoicemaskError",
    "WarpSpec",
    "aggregate_mos",
    "classify_gender",
    "covariance_model",
    "detect_peaks",
    "emit_report",
    "extract_cepstra",
    "find_crossover",
    "identify_speaker",
    "invert_warp",
    "istft",
    "load_manifest",
    "load_models",
    "load_sweep",
    "pitch_shift",
    "read_wav",
    "regions_of_influence",
    "run_degree_sweep",
    "save_models",
    "shift_coefficients",
    "sphericity_distance",
    "stft",
    "synth_corpus",
    "train_gender_models",
    "vtln_transform",
    "warp_spectrum",
    "warp_value",
    "write_wav",
]
