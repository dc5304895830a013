"""Corpus-level timeline statistics: silence / single-speaker / overlap shares.

A sweep over segment boundaries partitions [0, duration] into elementary
intervals, each charged to silence (no active speaker), single-speaker, or
overlap (two or more active speakers).
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Segment, merge_segments
from .errors import ConvsimError
from .rttm import RecordingAnnotation


@dataclass(frozen=True)
class TimelineStats:
    """Table-style corpus statistics; percentages are of total duration."""

    n_files: int
    total_audio_hours: float
    average_duration_s: float
    pct_silence: float
    pct_single_speaker: float
    pct_overlap: float


def timeline_stats(annotation: RecordingAnnotation, duration: float) -> TimelineStats:
    """Single-file timeline statistics over a known total duration.

    Same-speaker segments are unioned first so a speaker is active at most
    once per instant; the sweep then counts simultaneously active speakers.

    Raises:
        ConvsimError: duration is non-positive or a segment extends past it.
    """
    if duration <= 0.0:
        raise ConvsimError(f"{annotation.recording_id}: duration must be positive, got {duration}")
    by_speaker: dict[str, list[Segment]] = {}
    for ls in annotation.segments:
        if ls.segment.offset > duration + 1e-9:
            raise ConvsimError(
                f"{annotation.recording_id}: segment ending at {ls.segment.offset:.3f}s "
                f"extends past the file duration {duration:.3f}s"
            )
        by_speaker.setdefault(ls.speaker, []).append(ls.segment)

    events: list[tuple[float, int]] = []
    for segs in by_speaker.values():
        for seg in merge_segments(segs, merge_abutting=True):
            events.append((seg.onset, +1))
            events.append((min(seg.offset, duration), -1))
    events.sort()

    time_by_bucket = [0.0, 0.0, 0.0]  # silence, single, overlap
    cursor = 0.0
    active = 0
    for t, delta in events:
        if t > cursor:
            time_by_bucket[min(active, 2)] += t - cursor
            cursor = t
        active += delta
    if duration > cursor:
        time_by_bucket[0] += duration - cursor

    silence, single, overlap = (100.0 * t / duration for t in time_by_bucket)
    return TimelineStats(
        n_files=1,
        total_audio_hours=duration / 3600.0,
        average_duration_s=duration,
        pct_silence=silence,
        pct_single_speaker=single,
        pct_overlap=overlap,
    )


def aggregate_stats(per_file: list[TimelineStats]) -> TimelineStats:
    """Corpus aggregate: percentage columns are unweighted per-file means."""
    if not per_file:
        raise ConvsimError("cannot aggregate an empty list of file statistics")
    n = len(per_file)
    total_hours = sum(s.total_audio_hours for s in per_file)
    return TimelineStats(
        n_files=n,
        total_audio_hours=total_hours,
        average_duration_s=sum(s.average_duration_s for s in per_file) / n,
        pct_silence=sum(s.pct_silence for s in per_file) / n,
        pct_single_speaker=sum(s.pct_single_speaker for s in per_file) / n,
        pct_overlap=sum(s.pct_overlap for s in per_file) / n,
    )


def duration_weighted_percentages(per_file: list[TimelineStats]) -> tuple[float, float, float]:
    """(silence, single-speaker, overlap) percentages weighted by file duration."""
    if not per_file:
        raise ConvsimError("cannot aggregate an empty list of file statistics")
    total = sum(s.total_audio_hours for s in per_file)
    if total <= 0.0:
        raise ConvsimError("total duration is zero")
    weighted = [0.0, 0.0, 0.0]
    for s in per_file:
        w = s.total_audio_hours / total
        weighted[0] += w * s.pct_silence
        weighted[1] += w * s.pct_single_speaker
        weighted[2] += w * s.pct_overlap
    return tuple(weighted)


def render_report(aggregate: TimelineStats, per_file: list[TimelineStats] | None = None) -> str:
    """Aligned table plus machine-readable key-value lines."""
    header = f"{'#files':>8}  {'total (h)':>10}  {'avg dur (s)':>12}  {'sil. %':>7}  {'1spk %':>7}  {'over. %':>7}"
    row = (
        f"{aggregate.n_files:>8d}  {aggregate.total_audio_hours:>10.2f}  "
        f"{aggregate.average_duration_s:>12.2f}  {aggregate.pct_silence:>7.2f}  "
        f"{aggregate.pct_single_speaker:>7.2f}  {aggregate.pct_overlap:>7.2f}"
    )
    lines = [header, row, ""]
    lines.append(f"n_files={aggregate.n_files}")
    lines.append(f"total_audio_hours={aggregate.total_audio_hours:.6f}")
    lines.append(f"average_duration_s={aggregate.average_duration_s:.3f}")
    lines.append(f"pct_silence={aggregate.pct_silence:.4f}")
    lines.append(f"pct_single_speaker={aggregate.pct_single_speaker:.4f}")
    lines.append(f"pct_overlap={aggregate.pct_overlap:.4f}")
    if per_file:
        sil_w, single_w, over_w = duration_weighted_percentages(per_file)
        lines.append(f"pct_silence_duration_weighted={sil_w:.4f}")
        lines.append(f"pct_single_speaker_duration_weighted={single_w:.4f}")
        lines.append(f"pct_overlap_duration_weighted={over_w:.4f}")
    return "".join(line + "\n" for line in lines)
