"""Turn-taking statistics: estimation from real annotations and empirical samplers.

Three gap categories are collected over consecutive segment pairs of the
merged per-recording timeline:

  * pause between consecutive segments of the same speaker
  * pause between consecutive segments of different speakers
  * overlap between consecutive segments of different speakers

Sampling is uniform over the observed multiset (the empirical distribution);
no binning hyperparameter is involved unless values are explicitly quantized.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .corpus import Segment, merge_segments
from .errors import StatsError
from .rttm import LabeledSegment, RecordingAnnotation

STATS_HEADER = "convsim-stats v1"
_SECTIONS = ("same_speaker", "diff_speaker", "overlap")


class GapKind(str, enum.Enum):
    SAME_SPEAKER_PAUSE = "same_speaker_pause"
    DIFF_SPEAKER_PAUSE = "diff_speaker_pause"
    OVERLAP = "overlap"


@dataclass(frozen=True)
class GapSample:
    """A sampled inter-segment gap; negative values are overlaps."""

    value: float
    kind: GapKind

    def __post_init__(self):
        if self.kind is GapKind.OVERLAP and not self.value < 0.0:
            raise ValueError(f"overlap gap must be negative, got {self.value}")
        if self.kind is not GapKind.OVERLAP and self.value < 0.0:
            raise ValueError(f"pause gap must be non-negative, got {self.value}")


@dataclass
class ConversationStats:
    """Empirical gap multisets plus the derived pause probability.

    `ds` counts different-speaker pauses and `ov` different-speaker overlaps;
    both are derived from the multiset sizes.
    """

    same_speaker_pauses: list[float] = field(default_factory=list)
    diff_speaker_pauses: list[float] = field(default_factory=list)
    overlaps: list[float] = field(default_factory=list)

    def __post_init__(self):
        for v in self.same_speaker_pauses:
            if v < 0.0:
                raise StatsError(f"negative same-speaker pause {v}")
        for v in self.diff_speaker_pauses:
            if v < 0.0:
                raise StatsError(f"negative different-speaker pause {v}")
        for v in self.overlaps:
            if v <= 0.0:
                raise StatsError(f"overlap lengths must be positive, got {v}")

    @property
    def ds(self) -> int:
        return len(self.diff_speaker_pauses)

    @property
    def ov(self) -> int:
        return len(self.overlaps)

    def pause_probability(self) -> float:
        """Probability that a different-speaker transition is a pause."""
        total = self.ds + self.ov
        if total < 1:
            raise StatsError("no different-speaker transitions observed, pause probability undefined")
        return self.ds / total

    def observation_count(self) -> int:
        return len(self.same_speaker_pauses) + self.ds + self.ov


def _merged_timeline(annotation: RecordingAnnotation) -> list[LabeledSegment]:
    """Per-speaker overlap-merged segments of one recording, canonically ordered.

    Only strictly overlapping same-speaker segments are merged (an annotation
    artifact); exact abutment is kept and later counts as a 0 s pause.
    """
    by_speaker: dict[str, list[Segment]] = {}
    for ls in annotation.segments:
        by_speaker.setdefault(ls.speaker, []).append(ls.segment)
    timeline = [
        LabeledSegment(annotation.recording_id, spk, seg)
        for spk, segs in by_speaker.items()
        for seg in merge_segments(segs, merge_abutting=False)
    ]
    timeline.sort(key=lambda ls: (ls.segment.onset, ls.speaker, ls.segment.duration))
    return timeline


def estimate_stats(
    annotations: list[RecordingAnnotation],
    bin_width: float | None = None,
) -> ConversationStats:
    """Accumulate gap statistics over all consecutive segment pairs.

    For each recording, consecutive pairs of the merged onset-ordered timeline
    contribute one observation each: a same-speaker gap, a different-speaker
    pause (gap >= 0), or an overlap (gap < 0, stored as its absolute length).
    A zero-length gap counts as a pause. `bin_width`, if given, quantizes every
    observation to the nearest multiple (histogram-style binning).

    Raises:
        StatsError: no consecutive pairs found in any annotation.
    """
    same: list[float] = []
    diff: list[float] = []
    over: list[float] = []
    for annotation in annotations:
        timeline = _merged_timeline(annotation)
        for prev, cur in zip(timeline, timeline[1:]):
            gap = cur.segment.onset - prev.segment.offset
            if prev.speaker == cur.speaker:
                same.append(gap)
            elif gap >= 0.0:
                diff.append(gap)
            else:
                over.append(-gap)
    if not (same or diff or over):
        raise StatsError(
            "no consecutive segment pairs in the input annotations; statistics are unusable"
        )
    if bin_width is not None:
        if bin_width <= 0.0:
            raise StatsError(f"bin width must be positive, got {bin_width}")
        quantize = lambda vs: [round(v / bin_width) * bin_width for v in vs]
        same, diff = quantize(same), quantize(diff)
        over = [max(q, bin_width) for q in quantize(over)]
    return ConversationStats(same, diff, over)


def _sample_from(values: list[float], rng: np.random.Generator, what: str) -> float:
    if not values:
        raise StatsError(f"cannot sample: no {what} observations")
    return values[int(rng.integers(len(values)))]


def sample_same_speaker_pause(stats: ConversationStats, rng: np.random.Generator) -> float:
    return _sample_from(stats.same_speaker_pauses, rng, "same-speaker pause")


def sample_diff_speaker_pause(stats: ConversationStats, rng: np.random.Generator) -> float:
    return _sample_from(stats.diff_speaker_pauses, rng, "different-speaker pause")


def sample_overlap(stats: ConversationStats, rng: np.random.Generator) -> float:
    return _sample_from(stats.overlaps, rng, "overlap")


def sample_pause_or_overlap(stats: ConversationStats, rng: np.random.Generator) -> GapSample:
    """Draw the gap for a different-speaker transition.

    With probability `pause_probability()` returns a pause (value >= 0),
    otherwise an overlap returned as a negative value.
    """
    p = stats.pause_probability()
    if rng.random() < p:
        return GapSample(sample_diff_speaker_pause(stats, rng), GapKind.DIFF_SPEAKER_PAUSE)
    return GapSample(-sample_overlap(stats, rng), GapKind.OVERLAP)


def _format_value(v: float) -> str:
    """Shortest lossless decimal form with at least 3 decimal places."""
    s = repr(float(v))
    if "e" in s or "E" in s:
        from decimal import Decimal

        s = format(Decimal(v), "f")
    if "." not in s:
        s += ".000"
    whole, frac = s.split(".")
    if len(frac) < 3:
        frac = frac.ljust(3, "0")
    return f"{whole}.{frac}"


def save_stats(stats: ConversationStats) -> str:
    """Serialize statistics losslessly to the versioned text format."""
    parts = [STATS_HEADER]
    for name, values in zip(
        _SECTIONS, (stats.same_speaker_pauses, stats.diff_speaker_pauses, stats.overlaps)
    ):
        parts.append(f"[{name}]")
        parts.extend(_format_value(v) for v in values)
    return "".join(p + "\n" for p in parts)


def load_stats(text: str) -> ConversationStats:
    """Parse a stats file produced by `save_stats`.

    Raises:
        StatsError: missing/unknown header, unknown section, non-numeric or
            invariant-violating value.
    """
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or lines[0] != STATS_HEADER:
        raise StatsError(f"stats file must start with '{STATS_HEADER}'")
    sections: dict[str, list[float]] = {name: [] for name in _SECTIONS}
    current: str | None = None
    for lineno, line in enumerate(lines[1:], start=2):
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1]
            if name not in sections:
                raise StatsError(f"line {lineno}: unknown section '{name}'")
            current = name
            continue
        if current is None:
            raise StatsError(f"line {lineno}: value before any section header")
        try:
            sections[current].append(float(line))
        except ValueError as exc:
            raise StatsError(f"line {lineno}: non-numeric value '{line}'") from exc
    return ConversationStats(
        same_speaker_pauses=sections["same_speaker"],
        diff_speaker_pauses=sections["diff_speaker"],
        overlaps=sections["overlap"],
    )
