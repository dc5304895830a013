"""RTTM diarization annotation parsing and emission.

Only `SPEAKER` lines carry segments; any other line type is ignored. Emitted
lines use the 10-field layout

    SPEAKER <recording_id> 1 <onset> <duration> <NA> <NA> <speaker_id> <NA> <NA>

with times printed at millisecond precision (round half to even).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .corpus import Segment
from .errors import RttmError


@dataclass(frozen=True)
class LabeledSegment:
    """A speech segment attributed to a speaker within a recording."""

    recording_id: str
    speaker: str
    segment: Segment

    def __post_init__(self):
        if not self.recording_id:
            raise ValueError("recording_id must be non-empty")


def _canonical_key(ls: LabeledSegment):
    return (ls.segment.onset, ls.speaker, ls.segment.duration)


@dataclass
class RecordingAnnotation:
    """All labeled segments of one recording, canonically sorted.

    Sort order is (onset, speaker id, duration), which is stable and
    deterministic even for simultaneous onsets.
    """

    recording_id: str
    segments: list[LabeledSegment]
    total_duration: float | None = None

    def __post_init__(self):
        for ls in self.segments:
            if ls.recording_id != self.recording_id:
                raise ValueError(
                    f"segment recording id '{ls.recording_id}' != annotation id '{self.recording_id}'"
                )
        self.segments = sorted(self.segments, key=_canonical_key)

    def speakers(self) -> list[str]:
        return sorted({ls.speaker for ls in self.segments})


def parse_rttm(text: str | Iterable[str]) -> list[RecordingAnnotation]:
    """Parse an RTTM character stream into one annotation per recording id.

    Recordings appear in order of first occurrence; lines of different
    recordings may interleave freely.

    Raises:
        RttmError: non-numeric or non-positive onset/duration, or a truncated
            SPEAKER line (reported with its line number).
    """
    if isinstance(text, str):
        lines = text.splitlines()
    else:
        lines = text
    by_recording: dict[str, list[LabeledSegment]] = {}
    for lineno, line in enumerate(lines, start=1):
        fields = line.split()
        if not fields or fields[0] != "SPEAKER":
            continue
        if len(fields) < 8:
            raise RttmError(f"line {lineno}: SPEAKER line has {len(fields)} fields, expected >= 8")
        recording_id = fields[1]
        try:
            onset = float(fields[3])
            duration = float(fields[4])
        except ValueError as exc:
            raise RttmError(f"line {lineno}: non-numeric onset/duration: {exc}") from exc
        if duration <= 0.0:
            raise RttmError(f"line {lineno}: non-positive duration {duration}")
        if onset < 0.0:
            raise RttmError(f"line {lineno}: negative onset {onset}")
        speaker = fields[7]
        by_recording.setdefault(recording_id, []).append(
            LabeledSegment(recording_id, speaker, Segment(onset, duration))
        )
    return [
        RecordingAnnotation(recording_id=rec, segments=segs)
        for rec, segs in by_recording.items()
    ]


def emit_rttm(annotation: RecordingAnnotation) -> str:
    """Render an annotation as RTTM text in canonical order.

    `parse_rttm(emit_rttm(a))` reproduces `a` up to millisecond rounding.
    """
    lines = []
    for ls in annotation.segments:
        lines.append(
            f"SPEAKER {annotation.recording_id} 1 {ls.segment.onset:.3f} "
            f"{ls.segment.duration:.3f} <NA> <NA> {ls.speaker} <NA> <NA>"
        )
    return "".join(line + "\n" for line in lines)
