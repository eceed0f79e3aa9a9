"""Brute-force reference implementations of the nine melody metrics.

Written from the metric definitions alone, sharing no code with
``melogrid.metrics``: explicit probability lists, named scale tables, and a
per-step piano roll.
"""

import math
import statistics
from fractions import Fraction

SCALES = {
    "major": [0, 2, 4, 5, 7, 9, 11],
    "natural_minor": [0, 2, 3, 5, 7, 8, 10],
}


def _entropy(items):
    n = len(items)
    probs = [items.count(v) / n for v in set(items)]
    return -sum(p * math.log(p) for p in probs) / math.log(2)


def mai(notes):
    p = [n[2] for n in notes]
    return statistics.fmean(abs(p[i + 1] - p[i]) for i in range(len(p) - 1))


def h_p(notes):
    return _entropy([n[2] for n in notes])


def h_pc(notes):
    return _entropy([n[2] % 12 for n in notes])


def h_d(notes):
    return _entropy([n[1] for n in notes])


def _rate(notes, root, scale):
    members = {(root + d) % 12 for d in SCALES[scale]}
    return Fraction(sum(1 for n in notes if n[2] % 12 in members), len(notes))


def sc(notes):
    return float(max(_rate(notes, r, s) for r in range(12) for s in SCALES))


def msd(notes):
    rates = [_rate(notes, r, "major") for r in range(12)]
    return math.sqrt(statistics.pvariance(rates))


def md(notes, dr):
    return statistics.fmean(Fraction(n[1], dr) for n in notes)


def gc(notes, dr, total_steps):
    bar = 4 * dr
    bars = total_steps // bar
    onsets = {n[0] for n in notes}
    sims = []
    for b in range(bars - 1):
        diff = sum((b * bar + s in onsets) != ((b + 1) * bar + s in onsets) for s in range(bar))
        sims.append(1 - Fraction(diff, bar))
    return float(sum(sims) / len(sims))


def ebr(notes, dr, total_steps):
    roll = [False] * total_steps
    for on, dur, _ in notes:
        for t in range(on, min(on + dur, total_steps)):
            roll[t] = True
    beats = total_steps // dr
    empty = sum(not any(roll[b * dr:(b + 1) * dr]) for b in range(beats))
    return empty / beats


def all_metrics(q):
    notes = [tuple(n) for n in q.notes]
    return {
        "mai": mai(notes) if len(notes) >= 2 else None,
        "h_p": h_p(notes), "h_pc": h_pc(notes), "sc": sc(notes), "msd": msd(notes),
        "md": float(md(notes, q.dr)), "h_d": h_d(notes),
        "gc": gc(notes, q.dr, q.total_steps) if q.total_steps >= 8 * q.dr else None,
        "ebr": ebr(notes, q.dr, q.total_steps),
    }
