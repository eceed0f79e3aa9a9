"""Tick-timed monophonic melodies and their quantization to a step grid.

All times in a :class:`Melody` are MIDI ticks; all times in a
:class:`QuantizedMelody` are grid steps, ``dr`` steps per quarter note.
Only 4/4 is modelled, so a bar is always four beats.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

from .errors import InvalidConfigError, PitchRangeError

BEATS_PER_BAR = 4
SUPPORTED_DR = (4, 8, 12, 16)


class Note(NamedTuple):
    onset: int
    duration: int
    pitch: int


class Violation(NamedTuple):
    index: int
    rule: str
    message: str


@dataclass(frozen=True)
class Melody:
    id: str
    tpqn: int
    notes: tuple[Note, ...] = ()
    meter: str | None = None

    def __post_init__(self):
        # accept any iterable of 3-sequences
        object.__setattr__(self, "notes", tuple(Note(*n) for n in self.notes))

    @property
    def bar_ticks(self) -> int:
        return BEATS_PER_BAR * self.tpqn


@dataclass(frozen=True)
class QuantizedMelody:
    id: str
    dr: int
    notes: tuple[Note, ...] = ()
    total_steps: int = field(default=0)

    def __post_init__(self):
        object.__setattr__(self, "notes", tuple(Note(*n) for n in self.notes))
        if self.total_steps == 0:
            end = self.notes[-1].onset + self.notes[-1].duration if self.notes else 0
            object.__setattr__(self, "total_steps", bar_ceil(end, self.dr))

    @property
    def bar_steps(self) -> int:
        return BEATS_PER_BAR * self.dr

    @property
    def n_bars(self) -> int:
        return self.total_steps // self.bar_steps

    def to_melody(self) -> Melody:
        """View the steps as ticks, i.e. a melody with ``tpqn == dr``."""
        return Melody(self.id, self.dr, self.notes)


def bar_ceil(steps: int, dr: int) -> int:
    """Round ``steps`` up to a whole number of bars, never below one bar."""
    bar = BEATS_PER_BAR * dr
    return max(1, -(-steps // bar)) * bar


def _check_notes(notes: Sequence[Note]) -> list[Violation]:
    out = []
    for i, n in enumerate(notes):
        if n.onset < 0:
            out.append(Violation(i, "onset-negative", f"onset {n.onset} < 0"))
        if n.duration <= 0:
            out.append(Violation(i, "duration-nonpositive", f"duration {n.duration} <= 0"))
        if not 0 <= n.pitch <= 127:
            out.append(Violation(i, "pitch-range", f"pitch {n.pitch} outside [0, 127]"))
        if i > 0:
            prev = notes[i - 1]
            if n.onset < prev.onset:
                out.append(Violation(i, "unsorted", f"onset {n.onset} before {prev.onset}"))
            elif prev.onset + prev.duration > n.onset:
                out.append(Violation(
                    i, "monophony",
                    f"overlaps previous note ending at {prev.onset + prev.duration}"))
    return out


def validate(melody: Melody) -> list[Violation]:
    """Return every invariant breach in ``melody``; empty means valid."""
    out = []
    if melody.tpqn <= 0:
        out.append(Violation(-1, "tpqn", f"tpqn {melody.tpqn} <= 0"))
    return out + _check_notes(melody.notes)


def validate_quantized(q: QuantizedMelody) -> list[Violation]:
    out = _check_notes(q.notes)
    if q.total_steps <= 0 or q.total_steps % q.bar_steps:
        out.append(Violation(-1, "total-steps", f"{q.total_steps} is not a whole number of bars"))
    return out


def _monophonic(notes: Sequence[Note]) -> list[Note]:
    notes = sorted(notes, key=lambda n: n.onset)
    out = []
    for i, n in enumerate(notes):
        end = n.onset + n.duration
        if i + 1 < len(notes):
            end = min(end, notes[i + 1].onset)
        if end > n.onset:
            out.append(Note(n.onset, end - n.onset, n.pitch))
    return out


def enforce_monophony(melody: Melody) -> Melody:
    """Truncate each note at its successor's onset, dropping notes left empty.

    Of two notes sharing an onset the earlier-listed one is truncated to zero
    length, so the last note at a given onset wins.
    """
    return replace(melody, notes=tuple(_monophonic(melody.notes)))


def _round_half_up(ticks: int, dr: int, tpqn: int) -> int:
    # floor(ticks * dr / tpqn + 1/2) in exact integer arithmetic
    return (2 * ticks * dr + tpqn) // (2 * tpqn)


def quantize(melody: Melody, dr: int) -> QuantizedMelody:
    """Round onsets and offsets to the nearest step of ``tpqn / dr`` ticks.

    Onset and offset are rounded independently (ties go up), so the same
    nominal duration may land on a different number of steps depending on
    where it starts. Notes that collapse to zero steps are dropped.
    """
    if dr <= 0:
        raise InvalidConfigError(f"duration resolution must be positive, got {dr}")
    if melody.tpqn <= 0:
        raise InvalidConfigError(f"tpqn must be positive, got {melody.tpqn}")
    notes = []
    for n in melody.notes:
        on = _round_half_up(n.onset, dr, melody.tpqn)
        off = _round_half_up(n.onset + n.duration, dr, melody.tpqn)
        if off > on:
            notes.append(Note(on, off - on, n.pitch))
    notes = _monophonic(notes)
    end = notes[-1].onset + notes[-1].duration if notes else 0
    return QuantizedMelody(melody.id, dr, tuple(notes), bar_ceil(end, dr))


def transpose(melody: Melody, semitones: int) -> Melody:
    if not -127 <= semitones <= 127:
        raise PitchRangeError(f"shift {semitones} outside [-127, 127]")
    notes = tuple(Note(n.onset, n.duration, n.pitch + semitones) for n in melody.notes)
    for n in notes:
        if not 0 <= n.pitch <= 127:
            raise PitchRangeError(
                f"{melody.id}: shifting by {semitones} gives pitch {n.pitch}")
    return replace(melody, notes=notes)
