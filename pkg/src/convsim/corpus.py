"""Utterance pool management: manifest loading and without-replacement sampling.

The manifest is UTF-8 text, one utterance per line, tab-separated:

    utterance_id  speaker_id  wav_path  segments

where `segments` is a comma-separated list of `onset:duration` in seconds
(millisecond precision or better), e.g. `0.310:2.450,3.100:0.980`. Lines
starting with `#` are ignored. Relative wav paths are resolved against the
manifest's directory.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .audio import seconds_to_samples, wav_duration
from .errors import AudioError, ManifestError, PoolExhaustedError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Segment:
    """A timed speech region within a recording."""

    onset: float
    duration: float

    def __post_init__(self):
        if not (self.onset >= 0.0 and np.isfinite(self.onset)):
            raise ValueError(f"segment onset must be a finite non-negative value, got {self.onset}")
        if not (self.duration > 0.0 and np.isfinite(self.duration)):
            raise ValueError(f"segment duration must be a finite positive value, got {self.duration}")

    @property
    def offset(self) -> float:
        return self.onset + self.duration


@dataclass
class Utterance:
    """One speaker's side of a source recording: audio reference plus VAD segments."""

    id: str
    speaker: str
    audio_path: Path
    segments: list[Segment]


def merge_segments(segments: list[Segment], merge_abutting: bool = True) -> list[Segment]:
    """Sort segments by onset and merge overlapping (and optionally abutting) ones."""
    if not segments:
        return []
    ordered = sorted(segments, key=lambda s: (s.onset, s.duration))
    merged = [ordered[0]]
    for seg in ordered[1:]:
        last = merged[-1]
        if merge_abutting:
            touches = seg.onset <= last.offset
        else:
            touches = seg.onset < last.offset
        if touches:
            end = max(last.offset, seg.offset)
            merged[-1] = Segment(last.onset, end - last.onset)
        else:
            merged.append(seg)
    return merged


@dataclass
class SpeakerPool:
    """Pool of utterances grouped by speaker, drawn without replacement.

    An utterance is never drawn twice within one pool cycle. When a draw
    empties a speaker's list (or too few eligible speakers remain), the whole
    pool refills and `refill_count` increments, up to `max_refills`.
    """

    utterances: dict[str, list[Utterance]]
    max_refills: int = 0
    refill_count: int = 0
    _unconsumed: dict[str, list[Utterance]] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._unconsumed:
            self._unconsumed = {spk: list(utts) for spk, utts in self.utterances.items()}

    def __eq__(self, other) -> bool:
        if not isinstance(other, SpeakerPool):
            return NotImplemented
        return (
            self.utterances == other.utterances
            and self.max_refills == other.max_refills
            and self.refill_count == other.refill_count
            and self._unconsumed == other._unconsumed
        )

    @property
    def speakers(self) -> list[str]:
        return list(self.utterances.keys())

    def eligible_speakers(self) -> list[str]:
        """Speakers with at least one un-consumed utterance, in manifest order."""
        return [spk for spk, utts in self._unconsumed.items() if utts]

    def remaining(self, speaker: str) -> int:
        return len(self._unconsumed.get(speaker, []))

    def _refill(self) -> bool:
        if self.refill_count >= self.max_refills:
            return False
        self._unconsumed = {spk: list(utts) for spk, utts in self.utterances.items()}
        self.refill_count += 1
        logger.info("speaker pool refilled (%d/%d)", self.refill_count, self.max_refills)
        return True


def _parse_segments_field(text: str) -> list[Segment]:
    segments = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        onset_s, sep, dur_s = part.partition(":")
        if not sep:
            raise ValueError(f"segment '{part}' is not onset:duration")
        segments.append(Segment(float(onset_s), float(dur_s)))
    if not segments:
        raise ValueError("empty segment list")
    return segments


def load_manifest(
    path,
    sample_rate: int | None = None,
    max_refills: int = 0,
    validate_audio: bool = True,
) -> SpeakerPool:
    """Load an utterance manifest into a SpeakerPool.

    Same-speaker segments within an utterance that overlap or abut are merged.
    With `validate_audio` every referenced WAV header is checked: segments must
    fit inside the audio and, when `sample_rate` is given, the file rate must
    match it.

    Raises:
        ManifestError: unreadable file, malformed line, duplicate utterance id,
            segment outside the audio, or sample-rate mismatch.
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc

    utterances: dict[str, list[Utterance]] = {}
    seen_ids: set[str] = set()
    header_cache: dict[Path, tuple[float, int, int]] = {}

    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = stripped.split("\t")
        if len(fields) != 4:
            raise ManifestError(
                f"{path}:{lineno}: expected 4 tab-separated fields, got {len(fields)}"
            )
        utt_id, speaker, wav_field, segments_field = (f.strip() for f in fields)
        if not utt_id or not speaker:
            raise ManifestError(f"{path}:{lineno}: empty utterance or speaker id")
        if utt_id in seen_ids:
            raise ManifestError(f"{path}:{lineno}: duplicate utterance id '{utt_id}'")
        try:
            segments = _parse_segments_field(segments_field)
        except ValueError as exc:
            raise ManifestError(f"{path}:{lineno}: utterance '{utt_id}': {exc}") from exc

        wav_path = Path(wav_field)
        if not wav_path.is_absolute():
            wav_path = path.parent / wav_path
        segments = merge_segments(segments, merge_abutting=True)

        if validate_audio:
            if wav_path not in header_cache:
                try:
                    header_cache[wav_path] = wav_duration(wav_path)
                except (OSError, AudioError) as exc:
                    raise ManifestError(
                        f"{path}:{lineno}: utterance '{utt_id}': cannot read audio header: {exc}"
                    ) from exc
            duration_s, n_frames, file_rate = header_cache[wav_path]
            rate = sample_rate if sample_rate is not None else file_rate
            if sample_rate is not None and file_rate != sample_rate:
                raise ManifestError(
                    f"{path}:{lineno}: utterance '{utt_id}': audio rate {file_rate} Hz "
                    f"does not match corpus rate {sample_rate} Hz"
                )
            for seg in segments:
                start = seconds_to_samples(seg.onset, rate)
                length = seconds_to_samples(seg.duration, rate)
                if length < 1:
                    raise ManifestError(
                        f"{path}:{lineno}: utterance '{utt_id}': segment at {seg.onset:.3f}s "
                        f"is shorter than one sample"
                    )
                if start + length > n_frames:
                    raise ManifestError(
                        f"{path}:{lineno}: utterance '{utt_id}': segment "
                        f"{seg.onset:.3f}:{seg.duration:.3f} extends past the audio "
                        f"({duration_s:.3f}s)"
                    )

        seen_ids.add(utt_id)
        utterances.setdefault(speaker, []).append(
            Utterance(id=utt_id, speaker=speaker, audio_path=wav_path, segments=segments)
        )

    pool = SpeakerPool(utterances=utterances, max_refills=max_refills)
    logger.info(
        "loaded %d utterances from %d speakers (%s)",
        len(seen_ids), len(utterances), path,
    )
    return pool


def sample_speakers(pool: SpeakerPool, n_spk: int, rng: np.random.Generator) -> list[str]:
    """Sample `n_spk` distinct speakers uniformly among those with un-consumed utterances.

    Refills the pool when too few speakers are eligible and refills remain.
    """
    if n_spk < 1:
        raise ValueError(f"n_spk must be >= 1, got {n_spk}")
    eligible = pool.eligible_speakers()
    if len(eligible) < n_spk:
        if not pool._refill():
            raise PoolExhaustedError(
                f"need {n_spk} speakers with un-consumed utterances, only "
                f"{len(eligible)} eligible and refill limit reached"
            )
        eligible = pool.eligible_speakers()
        if len(eligible) < n_spk:
            raise PoolExhaustedError(
                f"pool has only {len(eligible)} speakers, cannot sample {n_spk}"
            )
    order = rng.permutation(len(eligible))[:n_spk]
    return [eligible[i] for i in order]


def draw_utterance(pool: SpeakerPool, speaker: str, rng: np.random.Generator) -> Utterance:
    """Draw one un-consumed utterance of `speaker` uniformly, marking it consumed.

    Emptying the speaker's list triggers a global refill when permitted.
    """
    if speaker not in pool.utterances:
        raise PoolExhaustedError(f"unknown speaker '{speaker}'")
    remaining = pool._unconsumed[speaker]
    if not remaining:
        if not pool._refill():
            raise PoolExhaustedError(
                f"speaker '{speaker}' has no un-consumed utterances and refill limit reached"
            )
        remaining = pool._unconsumed[speaker]
    idx = int(rng.integers(len(remaining)))
    utt = remaining.pop(idx)
    if not remaining:
        pool._refill()
    return utt
