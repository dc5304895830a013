"""Sample-level signal operations: WAV I/O, reverberation, noise mixing, placement.

All operations work on mono float64 buffers with a nominal [-1, 1] amplitude
range. Nothing here resamples: a rate mismatch is always an error.
"""

from __future__ import annotations

import logging
import wave
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import signal as sig

from .errors import AudioError

logger = logging.getLogger(__name__)

DEFAULT_SAMPLE_RATE = 8000

# Below this many taps direct convolution beats FFT overlap-add and, as a
# bonus, keeps single-tap impulses bit-exact.
_DIRECT_CONV_MAX_TAPS = 128


@dataclass(eq=False)
class AudioBuffer:
    """Mono sampled signal. `samples` is a 1-D float64 array."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise AudioError(f"AudioBuffer requires a 1-D signal, got shape {self.samples.shape}")
        if self.sample_rate <= 0:
            raise AudioError(f"sample_rate must be positive, got {self.sample_rate}")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate

    def copy(self) -> "AudioBuffer":
        return AudioBuffer(self.samples.copy(), self.sample_rate)


@dataclass(eq=False)
class Rir:
    """Room impulse response used to reverberate speech."""

    impulse: AudioBuffer

    def __post_init__(self):
        if len(self.impulse) == 0:
            raise AudioError("RIR impulse must be non-empty")


@dataclass(eq=False)
class NoiseRecord:
    """A background noise recording with a stable id."""

    id: str
    audio: AudioBuffer

    def __post_init__(self):
        if len(self.audio) == 0:
            raise AudioError(f"noise '{self.id}' is empty")


def seconds_to_samples(t: float, sample_rate: int) -> int:
    """Convert seconds to a sample count, rounding half to even."""
    return int(round(t * sample_rate))


def read_wav(path, expected_sample_rate: int | None = None) -> AudioBuffer:
    """Read a PCM WAV file into a float64 buffer in [-1, 1).

    Multi-channel files keep only the first channel. If `expected_sample_rate`
    is given, a differing file rate is an error (no silent resampling).
    """
    path = Path(path)
    try:
        with wave.open(str(path), "rb") as w:
            n_channels = w.getnchannels()
            sampwidth = w.getsampwidth()
            rate = w.getframerate()
            n_frames = w.getnframes()
            raw = w.readframes(n_frames)
    except wave.Error as exc:
        raise AudioError(f"{path}: unsupported WAV encoding ({exc})") from exc

    if expected_sample_rate is not None and rate != expected_sample_rate:
        raise AudioError(
            f"{path}: sample rate {rate} Hz does not match configured corpus rate "
            f"{expected_sample_rate} Hz (resampling is not performed)"
        )

    if sampwidth == 1:
        data = np.frombuffer(raw, dtype=np.uint8).astype(np.float64)
        data = (data - 128.0) / 128.0
    elif sampwidth == 2:
        data = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    elif sampwidth == 3:
        b = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3)
        as_int = b[:, 0].astype(np.int32) | (b[:, 1].astype(np.int32) << 8) | (b[:, 2].astype(np.int32) << 16)
        as_int = np.where(as_int >= 1 << 23, as_int - (1 << 24), as_int)
        data = as_int.astype(np.float64) / float(1 << 23)
    elif sampwidth == 4:
        data = np.frombuffer(raw, dtype="<i4").astype(np.float64) / float(1 << 31)
    else:
        raise AudioError(f"{path}: unsupported PCM sample width {sampwidth} bytes")

    if n_channels > 1:
        data = data.reshape(-1, n_channels)[:, 0].copy()
    return AudioBuffer(data, rate)


def wav_duration(path) -> tuple[float, int, int]:
    """Return (duration_s, n_frames, sample_rate) from a WAV header without decoding samples."""
    path = Path(path)
    try:
        with wave.open(str(path), "rb") as w:
            rate = w.getframerate()
            n_frames = w.getnframes()
    except wave.Error as exc:
        raise AudioError(f"{path}: unsupported WAV encoding ({exc})") from exc
    return n_frames / rate, n_frames, rate


def write_wav(path, buffer: AudioBuffer) -> None:
    """Write a buffer as 16-bit PCM mono WAV, clipping out-of-range samples."""
    scaled = np.round(buffer.samples * 32768.0)
    n_clipped = int(np.count_nonzero((scaled < -32768) | (scaled > 32767)))
    if n_clipped:
        logger.warning("%s: clipped %d samples to the 16-bit range", path, n_clipped)
    pcm = np.clip(scaled, -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(buffer.sample_rate)
        w.writeframes(pcm.tobytes())


def convolve(signal: AudioBuffer, rir: Rir, normalize: bool = True) -> AudioBuffer:
    """Reverberate `signal` with the RIR.

    Full linear convolution truncated to the input length, then rescaled so
    the output RMS equals the input RMS (unless `normalize` is False).
    Truncation keeps segment annotations aligned with the dry signal.
    """
    x = signal.samples
    h = rir.impulse.samples
    if len(x) == 0:
        raise AudioError("cannot convolve an empty signal")
    if signal.sample_rate != rir.impulse.sample_rate:
        raise AudioError(
            f"signal rate {signal.sample_rate} Hz != RIR rate {rir.impulse.sample_rate} Hz"
        )

    if len(h) <= _DIRECT_CONV_MAX_TAPS:
        full = np.convolve(x, h)
    else:
        full = sig.fftconvolve(x, h)
    out = full[: len(x)]

    if normalize:
        rms_in = np.sqrt(np.mean(np.square(x)))
        rms_out = np.sqrt(np.mean(np.square(out)))
        if rms_in > 0.0 and rms_out > 0.0:
            out = out * (rms_in / rms_out)
    return AudioBuffer(out, signal.sample_rate)


def mixing_scale(snr_db: float, signal: AudioBuffer, noise: AudioBuffer) -> float:
    """Scale factor for `noise` so that signal-to-scaled-noise equals `snr_db`.

    Powers are mean squared amplitude over each full buffer.
    """
    p_signal = float(np.mean(np.square(signal.samples))) if len(signal) else 0.0
    p_noise = float(np.mean(np.square(noise.samples))) if len(noise) else 0.0
    if p_signal <= 0.0:
        raise AudioError("mixing_scale: signal has zero power")
    if p_noise <= 0.0:
        raise AudioError("mixing_scale: noise has zero power")
    return float(np.sqrt(p_signal / (p_noise * 10.0 ** (snr_db / 10.0))))


def repeat_to_length(noise: AudioBuffer, length: int) -> AudioBuffer:
    """Tile the noise end-to-end and truncate to exactly `length` samples."""
    if len(noise) == 0:
        raise AudioError("cannot tile an empty noise buffer")
    if length <= 0:
        return AudioBuffer(np.zeros(0), noise.sample_rate)
    reps = -(-length // len(noise))
    tiled = np.tile(noise.samples, reps)[:length]
    return AudioBuffer(tiled, noise.sample_rate)


def add_from_position(out: AudioBuffer, pos: int, input: AudioBuffer) -> AudioBuffer:
    """Add `input` onto `out` starting at sample index `pos`, growing with zeros.

    `out` is the designated accumulator and may be written in place when it is
    already long enough; the (possibly grown) buffer is returned either way.
    """
    if pos < 0:
        raise AudioError(f"add_from_position: negative position {pos}")
    if out.sample_rate != input.sample_rate:
        raise AudioError(
            f"add_from_position: rate mismatch {out.sample_rate} != {input.sample_rate}"
        )
    end = pos + len(input)
    if end > len(out):
        grown = np.zeros(end, dtype=np.float64)
        grown[: len(out)] = out.samples
        out = AudioBuffer(grown, out.sample_rate)
    out.samples[pos:end] += input.samples
    return out
