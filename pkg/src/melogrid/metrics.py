"""Per-melody objective metrics.

Pitch metrics: MAI, H(P), H(PC), SC, MSD. Rhythm metrics: MD, H(D), GC, EBR.
Entropies are in bits and count each note once. Sums are taken over sorted
counts or exact integers so that a transposed melody gives bit-identical
values.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import astuple, dataclass, fields
from typing import Iterable, Optional

from .errors import UndefinedMetricError
from .melody import QuantizedMelody

MAJOR = frozenset({0, 2, 4, 5, 7, 9, 11})
NATURAL_MINOR = frozenset({0, 2, 3, 5, 7, 8, 10})
HARMONIC_MINOR = frozenset({0, 2, 3, 5, 7, 8, 11})

METRIC_NAMES = ("mai", "h_p", "h_pc", "sc", "msd", "md", "h_d", "gc", "ebr")


@dataclass(frozen=True)
class MetricReport:
    mai: Optional[float] = None
    h_p: Optional[float] = None
    h_pc: Optional[float] = None
    sc: Optional[float] = None
    msd: Optional[float] = None
    md: Optional[float] = None
    h_d: Optional[float] = None
    gc: Optional[float] = None
    ebr: Optional[float] = None

    def as_tuple(self) -> tuple:
        return astuple(self)

    def get(self, name: str) -> Optional[float]:
        return getattr(self, name)

    def undefined(self) -> list[str]:
        return [f.name for f in fields(self) if getattr(self, f.name) is None]


def _require_notes(q: QuantizedMelody, n: int = 1) -> None:
    if len(q.notes) < n:
        raise UndefinedMetricError(f"{q.id or 'melody'} needs at least {n} note(s), has {len(q.notes)}")


def entropy(values: Iterable) -> float:
    """Shannon entropy in bits of the empirical distribution of ``values``."""
    counts = sorted(Counter(values).values())
    total = sum(counts)
    if total == 0:
        raise UndefinedMetricError("entropy of an empty sample")
    h = 0.0
    for c in counts:
        p = c / total
        h -= p * math.log2(p)
    return h + 0.0  # avoid -0.0


def mai(q: QuantizedMelody) -> float:
    """Mean absolute interval between consecutive notes, in semitones."""
    _require_notes(q, 2)
    pitches = [n.pitch for n in q.notes]
    return sum(abs(b - a) for a, b in zip(pitches, pitches[1:])) / (len(pitches) - 1)


def pitch_entropy(q: QuantizedMelody) -> float:
    _require_notes(q)
    return entropy(n.pitch for n in q.notes)


def pitch_class_entropy(q: QuantizedMelody) -> float:
    _require_notes(q)
    return entropy(n.pitch % 12 for n in q.notes)


def duration_entropy(q: QuantizedMelody) -> float:
    _require_notes(q)
    return entropy(n.duration for n in q.notes)


def _class_counts(q: QuantizedMelody) -> list[int]:
    counts = [0] * 12
    for n in q.notes:
        counts[n.pitch % 12] += 1
    return counts


def _in_scale_counts(class_counts: list[int], template: frozenset) -> list[int]:
    return [sum(class_counts[(root + d) % 12] for d in template) for root in range(12)]


def scale_consistency(q: QuantizedMelody, harmonic_minor: bool = False) -> float:
    """Best in-scale note fraction over the 12 major and 12 minor scales."""
    _require_notes(q)
    counts = _class_counts(q)
    minor = HARMONIC_MINOR if harmonic_minor else NATURAL_MINOR
    best = max(max(_in_scale_counts(counts, MAJOR)), max(_in_scale_counts(counts, minor)))
    return best / len(q.notes)


def major_scale_rate_sd(q: QuantizedMelody) -> float:
    """Population SD of the 12 major-scale in-scale rates."""
    _require_notes(q)
    c = _in_scale_counts(_class_counts(q), MAJOR)
    n = len(q.notes)
    # var = (12*sum(c^2) - sum(c)^2) / (144 n^2), numerator exact in integers
    num = 12 * sum(x * x for x in c) - sum(c) ** 2
    return math.sqrt(num) / (12 * n)


def mean_duration(q: QuantizedMelody) -> float:
    """Mean note duration in beats."""
    _require_notes(q)
    return sum(n.duration for n in q.notes) / (len(q.notes) * q.dr)


def onset_grids(q: QuantizedMelody) -> list[list[bool]]:
    bar = q.bar_steps
    grids = [[False] * bar for _ in range(q.n_bars)]
    for n in q.notes:
        b, pos = divmod(n.onset, bar)
        if b < len(grids):
            grids[b][pos] = True
    return grids


def groove_consistency(q: QuantizedMelody) -> float:
    """Mean of ``1 - hamming / bar_steps`` over consecutive bar onset grids."""
    if q.n_bars < 2:
        raise UndefinedMetricError(f"{q.id or 'melody'} spans {q.n_bars} bar(s); groove needs 2")
    grids = onset_grids(q)
    bar = q.bar_steps
    dist = sum(
        sum(x != y for x, y in zip(a, b)) for a, b in zip(grids, grids[1:]))
    pairs = len(grids) - 1
    return 1 - dist / (pairs * bar)


def empty_beat_rate(q: QuantizedMelody) -> float:
    """Fraction of beats in which no note starts or is held."""
    beats = q.total_steps // q.dr
    if beats == 0:
        raise UndefinedMetricError(f"{q.id or 'melody'} has no complete beat")
    sounding = [False] * beats
    for n in q.notes:
        first = n.onset // q.dr
        last = (n.onset + n.duration - 1) // q.dr
        for b in range(first, min(last, beats - 1) + 1):
            sounding[b] = True
    return sounding.count(False) / beats


_METRIC_FUNCS = {
    "mai": mai,
    "h_p": pitch_entropy,
    "h_pc": pitch_class_entropy,
    "sc": scale_consistency,
    "msd": major_scale_rate_sd,
    "md": mean_duration,
    "h_d": duration_entropy,
    "gc": groove_consistency,
    "ebr": empty_beat_rate,
}


def report(q: QuantizedMelody, harmonic_minor: bool = False) -> MetricReport:
    """All nine metrics; any that are undefined for ``q`` come back as None."""
    values = {}
    for name, func in _METRIC_FUNCS.items():
        try:
            if name == "sc":
                values[name] = func(q, harmonic_minor=harmonic_minor)
            else:
                values[name] = func(q)
        except UndefinedMetricError:
            values[name] = None
    return MetricReport(**values)
