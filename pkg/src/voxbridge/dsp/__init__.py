"""Feature extraction and inversion at fixed 24 kHz analysis settings."""

from .audio_io import (
    read_f0, read_mel, read_mel_frames, read_wav, write_f0, write_mel,
    write_wav,
)
from .invert import griffin_lim, istft
from .mel import (
    frame_energy, hz_to_mel, mel_center_frequencies, mel_filterbank,
    mel_spectrogram, mel_to_hz, stft,
)
from .params import (
    AMP_FLOOR, HOP, N_FFT, N_MELS, SAMPLE_RATE, WIN, frame_count,
    synthesis_length,
)
from .pitch import F0Track, estimate_f0, interpolate_and_normalize
from .standardize import Standardizer, fit_standardizer

__all__ = [
    "mel_spectrogram", "stft", "istft", "griffin_lim",
    "mel_filterbank", "mel_center_frequencies", "hz_to_mel", "mel_to_hz",
    "frame_energy", "estimate_f0", "interpolate_and_normalize", "F0Track",
    "Standardizer", "fit_standardizer",
    "read_wav", "write_wav", "read_mel", "write_mel", "read_mel_frames",
    "read_f0", "write_f0",
    "SAMPLE_RATE", "HOP", "WIN", "N_FFT", "N_MELS", "AMP_FLOOR",
    "frame_count", "synthesis_length",
]
