"""Melody <-> token sequence conversion.

The encoder follows the timed-token construction: every token gets a time
stamp (in steps) and a type rank, notes/rests/grid tokens are collected, and
one stable sort by ``(time, rank)`` yields the sequence. Decoding trusts only
the pitch/rest durations; grid tokens are skipped.
"""

from __future__ import annotations

from dataclasses import dataclass
from operator import itemgetter
from typing import NamedTuple, Sequence

from .errors import InvalidConfigError, MalformedSequenceError
from .melody import Note, QuantizedMelody, bar_ceil
from .vocab import (
    GRID_KINDS,
    SORT_RANK,
    Kind,
    PositionComplexity,
    Token,
    Vocabulary,
    EncodingConfig,
)


_BAR_RANK = SORT_RANK[Kind.BAR]
_POS_RANK = SORT_RANK[Kind.POS]
_PITCH_RANK = SORT_RANK[Kind.PITCH]
_DUR_RANK = SORT_RANK[Kind.DURATION]


class TimedToken(NamedTuple):
    time: int
    kind_rank: int
    token: Token


@dataclass(frozen=True)
class TokenSequence:
    config: EncodingConfig
    tokens: tuple[Token, ...]
    id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def text(self) -> str:
        return " ".join(t.text for t in self.tokens)

    def ids(self, vocab: Vocabulary) -> list[int]:
        return [vocab.token_to_id(t) for t in self.tokens]

    @classmethod
    def from_text(cls, text: str, vocab: Vocabulary, id: str = "") -> "TokenSequence":
        return cls(vocab.config, [vocab.token(t) for t in text.split()], id)


class SequenceViolation(NamedTuple):
    index: int
    rule: str
    message: str


def timed_tokens(q: QuantizedMelody, vocab: Vocabulary) -> list[TimedToken]:
    """Unsorted timed tokens in insertion order: notes, grid, then rests."""
    cfg = vocab.config
    if q.dr != cfg.dr:
        raise InvalidConfigError(f"melody quantized at DR={q.dr}, vocabulary uses DR={cfg.dr}")
    timed: list[TimedToken] = []
    for n in q.notes:
        for tok in vocab.encode_pitch(n.pitch):
            timed.append(TimedToken(n.onset, _PITCH_RANK, tok))
        for tok in vocab.encode_duration(n.duration):
            timed.append(TimedToken(n.onset, _DUR_RANK, tok))

    if cfg.pr > 0:
        bar = cfg.bar_steps
        for b in range(q.total_steps // bar):
            start = b * bar
            if cfg.pr == 1 or cfg.pc is PositionComplexity.SINGLE:
                timed.append(TimedToken(start, _BAR_RANK, vocab.bar))
            if cfg.pr > 1:
                spacing = cfg.grid_spacing
                for k in range(cfg.pr):
                    timed.append(TimedToken(start + k * spacing, _POS_RANK, vocab.grid_token(k)))

    # rests fill every gap up to the last offset, never past it
    clock = 0
    for n in q.notes:
        if n.onset > clock:
            timed.append(TimedToken(clock, _PITCH_RANK, vocab.rest))
            for tok in vocab.encode_duration(n.onset - clock):
                timed.append(TimedToken(clock, _DUR_RANK, tok))
        clock = n.onset + n.duration
    return timed


def encode(q: QuantizedMelody, vocab: Vocabulary) -> TokenSequence:
    timed = timed_tokens(q, vocab)
    timed.sort(key=itemgetter(0, 1))  # list.sort is stable
    return TokenSequence(vocab.config, [t.token for t in timed], q.id)


def decode(seq: TokenSequence, vocab: Vocabulary) -> QuantizedMelody:
    """Rebuild notes from pitch/rest units and their summed durations."""
    dr = vocab.config.dr
    notes = []
    clock = 0
    pitch = None      # pending unit: MIDI pitch, or -1 for REST
    unit_at = 0       # token index of the pending unit
    dur = 0
    klass = None      # class token waiting for its octave

    def close():
        nonlocal clock, pitch, dur
        if pitch is None:
            return
        if dur == 0:
            raise MalformedSequenceError("pitch unit has no duration token", unit_at)
        if pitch >= 0:
            notes.append(Note(clock, dur, pitch))
        clock += dur
        pitch, dur = None, 0

    for i, tok in enumerate(seq.tokens):
        kind = tok.kind
        if kind is Kind.PAD or kind in GRID_KINDS:
            continue
        if klass is not None and kind is not Kind.OCTAVE:
            raise MalformedSequenceError(f"class token {klass[1].text} not followed by an octave", klass[0])
        if kind is Kind.DURATION:
            if pitch is None:
                raise MalformedSequenceError("duration token without a preceding pitch or REST", i)
            dur += tok.payload
        elif kind is Kind.PITCH or kind is Kind.REST:
            close()
            pitch, unit_at = (tok.payload if kind is Kind.PITCH else -1), i
        elif kind is Kind.CLASS:
            close()
            klass = (i, tok)
        elif kind is Kind.OCTAVE:
            if klass is None:
                raise MalformedSequenceError(f"octave token {tok.text} without a class token", i)
            p = klass[1].payload + 12 * tok.payload
            if p > 127:
                raise MalformedSequenceError(f"{klass[1].text} {tok.text} is pitch {p} > 127", klass[0])
            pitch, unit_at, klass = p, klass[0], None
        else:  # pragma: no cover
            raise MalformedSequenceError(f"unexpected token {tok.text}", i)
    if klass is not None:
        raise MalformedSequenceError(f"class token {klass[1].text} not followed by an octave", klass[0])
    close()
    return QuantizedMelody(seq.id, dr, tuple(notes), bar_ceil(clock, dr))


def validate_sequence(seq: TokenSequence, vocab: Vocabulary) -> list[SequenceViolation]:
    """Report grammar errors and grid/duration-clock disagreements.

    Unlike :func:`decode` this never raises. After a grid token disagrees
    with the clock the grid cursor is re-anchored to the clock, so a single
    dropped or extra grid token is reported once.
    """
    cfg = vocab.config
    out: list[SequenceViolation] = []
    toks = seq.tokens
    for i, tok in enumerate(toks):
        if tok.text not in vocab or vocab.token(tok.text) != tok:
            out.append(SequenceViolation(i, "unknown-token", f"{tok.text} is not in {cfg.name}"))

    # grammar pass; also records unit start times for the grid pass
    starts: dict[int, tuple[int, int]] = {}  # token index -> (unit start, clock after unit)
    clock = 0
    pending = None   # index of pitch unit still waiting for its first duration
    in_unit = False
    klass = None
    last_unit = None
    for i, tok in enumerate(toks):
        kind = tok.kind
        if kind is Kind.PAD or kind in GRID_KINDS:
            continue
        if klass is not None and kind is not Kind.OCTAVE:
            out.append(SequenceViolation(klass, "missing-octave", f"{toks[klass].text} has no octave token"))
            klass = None
        if kind is Kind.DURATION:
            if not in_unit:
                out.append(SequenceViolation(i, "orphan-duration", f"{tok.text} follows no pitch or REST"))
                continue
            pending = None
            clock += tok.payload
            starts[last_unit] = (starts[last_unit][0], clock)
            continue
        if pending is not None:
            out.append(SequenceViolation(pending, "missing-duration", f"{toks[pending].text} has no duration"))
        if kind is Kind.CLASS:
            klass = i
            in_unit = False
            pending = None
            continue
        if kind is Kind.OCTAVE and klass is None:
            out.append(SequenceViolation(i, "orphan-octave", f"{tok.text} follows no class token"))
            in_unit = False
            pending = None
            continue
        unit = klass if kind is Kind.OCTAVE else i
        if kind is Kind.OCTAVE and toks[klass].payload + 12 * tok.payload > 127:
            out.append(SequenceViolation(klass, "pitch-range", f"{toks[klass].text} {tok.text} is above 127"))
        klass = None
        pending, in_unit, last_unit = unit, True, unit
        starts[unit] = (clock, clock)
    if klass is not None:
        out.append(SequenceViolation(klass, "missing-octave", f"{toks[klass].text} has no octave token"))
    if pending is not None:
        out.append(SequenceViolation(pending, "missing-duration", f"{toks[pending].text} has no duration"))

    if cfg.pr > 0:
        out += _grid_violations(toks, cfg, starts)
    out.sort(key=lambda v: v.index)
    return out


def _grid_violations(toks, cfg: EncodingConfig, starts) -> list[SequenceViolation]:
    bar = cfg.bar_steps
    step = bar if cfg.pr == 1 else cfg.grid_spacing
    per_bar = bar // step
    multiple = cfg.pc is PositionComplexity.MULTIPLE
    unit_idx = sorted(starts)
    out = []
    slot = -1          # absolute grid slot of the last grid token
    fresh_bar = False  # Single: the POS right after BAR shares the bar's slot
    last_start, clock, u = None, 0, 0
    for i, tok in enumerate(toks):
        while u < len(unit_idx) and unit_idx[u] < i:
            last_start, clock = starts[unit_idx[u]]
            u += 1
        if tok.kind is Kind.BAR:
            slot = (slot // per_bar + 1) * per_bar
            fresh_bar = True
        elif tok.kind is Kind.POS and multiple:
            b = slot // per_bar
            if slot < 0 or tok.payload <= slot % per_bar:
                b += 1
            slot = b * per_bar + tok.payload
        elif tok.kind is Kind.POS:
            if not fresh_bar:
                slot += 1
            fresh_bar = False
        else:
            continue
        g = slot * step
        if (last_start is None or g > last_start) and (u == len(unit_idx) or g <= clock):
            continue
        out.append(SequenceViolation(
            i, "grid-clock", f"{tok.text} implies step {g}, duration clock is at {clock}"))
        # re-anchor to the earliest slot of the same kind after the last unit start
        first = 0 if last_start is None else last_start // step + 1
        if tok.kind is Kind.BAR:
            slot = -(-first // per_bar) * per_bar
        elif multiple:
            k = tok.payload
            slot = -(-(first - k) // per_bar) * per_bar + k
        else:
            slot = first
    return out


def is_cut_point(tokens: Sequence[Token], i: int) -> bool:
    """True if ``tokens[:i]`` ends on a pitch-unit boundary."""
    return i == 0 or i >= len(tokens) or tokens[i].kind not in (Kind.DURATION, Kind.OCTAVE)


def truncate_tokens(seq: TokenSequence, max_len: int) -> TokenSequence:
    """Longest prefix of at most ``max_len`` tokens that keeps units whole."""
    if max_len < 1:
        raise ValueError(f"max_len must be >= 1, got {max_len}")
    cut = min(max_len, len(seq.tokens))
    while not is_cut_point(seq.tokens, cut):
        cut -= 1
    return TokenSequence(seq.config, seq.tokens[:cut], seq.id)
