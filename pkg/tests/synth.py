"""Random melody generators shared by the test modules."""

import random

from melogrid.melody import Melody, Note, QuantizedMelody, bar_ceil


def random_quantized(rng: random.Random, dr: int, max_bars: int = 4, pid: str = "q",
                     pitch_range=(0, 127)) -> QuantizedMelody:
    """Monophonic melody with random rests and occasional notes longer than a bar."""
    bar = 4 * dr
    horizon = rng.randint(1, max_bars) * bar
    notes, t = [], 0
    if rng.random() < 0.3:
        t = rng.randint(1, bar)  # leading rest
    while t < horizon:
        dur = rng.randint(1, 2 * dr) if rng.random() < 0.9 else rng.randint(bar, 2 * bar)
        notes.append(Note(t, dur, rng.randint(*pitch_range)))
        t += dur
        if rng.random() < 0.25:
            t += rng.randint(1, 2 * dr)
    if not notes:
        notes.append(Note(0, 1, 60))
    end = notes[-1].onset + notes[-1].duration
    return QuantizedMelody(pid, dr, tuple(notes), bar_ceil(end, dr))


def random_melody(rng: random.Random, n_bars: int, tpqn: int = 480, pid: str = "m",
                  pitch_range=(48, 84)) -> Melody:
    """Tick-level melody on a 16th grid with some triplets, exactly ``n_bars`` long."""
    horizon = n_bars * 4 * tpqn
    choices = [tpqn // 4, tpqn // 2, tpqn // 3, tpqn, 3 * tpqn // 2, 2 * tpqn]
    notes, t = [], 0
    while True:
        dur = rng.choice(choices)
        if t + dur > horizon:
            break
        if rng.random() < 0.85:
            notes.append(Note(t, dur, rng.randint(*pitch_range)))
        t += dur
    return Melody(pid, tpqn, tuple(notes), "4/4")
