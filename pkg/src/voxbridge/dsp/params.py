"""Fixed analysis parameters shared by every feature extractor.

24 kHz audio, 12.5 ms hop (300 samples), 50 ms window (1200 samples),
80 mel bands spanning 0-12 kHz. Spectra are magnitude (not power) and
mel values are natural-log compressed with a 1e-5 floor. The mel scale
is the 2595*log10(1+f/700) variant.
"""

SAMPLE_RATE = 24000
HOP = 300
WIN = 1200
N_FFT = 2048
N_MELS = 80
MEL_FMIN = 0.0
MEL_FMAX = 12000.0
AMP_FLOOR = 1e-5


def frame_count(num_samples: int) -> int:
    """Frames produced for a waveform of the given length (center-padded)."""
    return num_samples // HOP + 1


def synthesis_length(frames: int) -> int:
    """Waveform length used when inverting `frames` mel frames.

    Chosen so frame_count(synthesis_length(n)) == n, with the final
    frame centered half a hop before the end.
    """
    return frames * HOP - HOP // 2
