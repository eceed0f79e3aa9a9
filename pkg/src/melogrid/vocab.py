"""Token vocabularies induced by the four encoding hyper-parameters."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

from .errors import InvalidConfigError, PitchRangeError, TokenLookupError
from .melody import BEATS_PER_BAR, SUPPORTED_DR

SUPPORTED_PR = (0, 1, 4, 8, 12, 16, 32, 48, 64)
PITCH_CLASS_NAMES = ("C", "Db", "D", "Eb", "E", "F", "Gb", "G", "Ab", "A", "Bb", "B")
N_OCTAVES = 11  # floor(127 / 12) + 1


class PitchMode(str, enum.Enum):
    NUMBER = "number"
    CLASS_OCTAVE = "class_octave"


class PositionComplexity(str, enum.Enum):
    SINGLE = "single"
    MULTIPLE = "multiple"
    UNDEFINED = "undefined"


class Kind(str, enum.Enum):
    PAD = "pad"
    BAR = "bar"
    POS = "pos"
    PITCH = "pitch"
    CLASS = "class"
    OCTAVE = "octave"
    REST = "rest"
    DURATION = "duration"


SORT_RANK = {
    Kind.BAR: 0,
    Kind.POS: 1,
    Kind.PITCH: 2,
    Kind.CLASS: 2,
    Kind.OCTAVE: 2,
    Kind.REST: 2,
    Kind.DURATION: 3,
}

GRID_KINDS = frozenset({Kind.BAR, Kind.POS})
UNIT_KINDS = frozenset({Kind.PITCH, Kind.CLASS, Kind.REST})


@dataclass(frozen=True, slots=True)
class Token:
    kind: Kind
    payload: int | None
    text: str

    def __str__(self) -> str:
        return self.text


@dataclass(frozen=True)
class EncodingConfig:
    pitch: PitchMode = PitchMode.NUMBER
    pc: PositionComplexity = PositionComplexity.SINGLE
    pr: int = 16
    dr: int = 4

    def __post_init__(self):
        try:
            object.__setattr__(self, "pitch", PitchMode(self.pitch))
            object.__setattr__(self, "pc", PositionComplexity(self.pc))
        except ValueError as exc:
            raise InvalidConfigError(str(exc)) from None
        if self.dr not in SUPPORTED_DR:
            raise InvalidConfigError(f"DR must be one of {SUPPORTED_DR}, got {self.dr}")
        if self.pr not in SUPPORTED_PR:
            raise InvalidConfigError(f"PR must be one of {SUPPORTED_PR}, got {self.pr}")
        bar = BEATS_PER_BAR * self.dr
        if self.pr > bar:
            raise InvalidConfigError(f"PR={self.pr} exceeds the {bar} steps of a bar at DR={self.dr}")
        if self.pr > 1 and bar % self.pr:
            raise InvalidConfigError(f"PR={self.pr} does not divide the {bar} steps of a bar")
        if (self.pc is PositionComplexity.UNDEFINED) != (self.pr <= 1):
            raise InvalidConfigError(
                f"PC must be 'undefined' exactly when PR <= 1 (got PC={self.pc.value}, PR={self.pr})")

    @classmethod
    def make(cls, pitch="number", pc="single", pr=16, dr=4) -> "EncodingConfig":
        """Like the constructor, but PC is forced to undefined when PR <= 1."""
        if pr <= 1:
            pc = PositionComplexity.UNDEFINED
        return cls(pitch, pc, pr, dr)

    @property
    def bar_steps(self) -> int:
        return BEATS_PER_BAR * self.dr

    @property
    def grid_spacing(self) -> int:
        """Steps between consecutive grid positions (PR > 1 only)."""
        return self.bar_steps // self.pr

    @property
    def name(self) -> str:
        return f"{self.pitch.value}-{self.pc.value}-pr{self.pr}-dr{self.dr}"

    def as_dict(self) -> dict:
        return {"pitch": self.pitch.value, "pc": self.pc.value, "pr": self.pr, "dr": self.dr}


def experiment_grid() -> list[EncodingConfig]:
    """The 48 configurations of the experimental grid."""
    out = []
    for pitch in PitchMode:
        for dr in SUPPORTED_DR:
            out.append(EncodingConfig(pitch, PositionComplexity.UNDEFINED, 0, dr))
            out.append(EncodingConfig(pitch, PositionComplexity.UNDEFINED, 1, dr))
            for pc in (PositionComplexity.SINGLE, PositionComplexity.MULTIPLE):
                for pr in (4, BEATS_PER_BAR * dr):
                    out.append(EncodingConfig(pitch, pc, pr, dr))
    return out


class Vocabulary:
    """Ordered token set for one :class:`EncodingConfig`.

    Ids are assigned as PAD (0), grid tokens, pitch-family tokens, then
    durations ``d1 .. d<4*DR>``.
    """

    def __init__(self, config: EncodingConfig):
        self.config = config
        toks = [Token(Kind.PAD, None, "PAD")]
        if config.pr == 1:
            toks.append(Token(Kind.BAR, None, "BAR"))
        elif config.pc is PositionComplexity.SINGLE:
            toks += [Token(Kind.BAR, None, "BAR"), Token(Kind.POS, None, "POS")]
        elif config.pc is PositionComplexity.MULTIPLE:
            toks += [Token(Kind.POS, k, f"POS{k}") for k in range(config.pr)]
        if config.pitch is PitchMode.NUMBER:
            toks += [Token(Kind.PITCH, p, f"p{p}") for p in range(128)]
        else:
            toks += [Token(Kind.CLASS, c, name) for c, name in enumerate(PITCH_CLASS_NAMES)]
            toks += [Token(Kind.OCTAVE, o, f"o{o}") for o in range(N_OCTAVES)]
        toks.append(Token(Kind.REST, None, "REST"))
        toks += [Token(Kind.DURATION, s, f"d{s}") for s in range(1, config.bar_steps + 1)]

        self.tokens: tuple[Token, ...] = tuple(toks)
        self._ids = {t.text: i for i, t in enumerate(self.tokens)}
        self._by_text = {t.text: t for t in self.tokens}
        self.pad = self.tokens[0]
        self.rest = self._by_text["REST"]
        self.bar = self._by_text.get("BAR")
        self._durations = (None,) + tuple(t for t in toks if t.kind is Kind.DURATION)
        if config.pitch is PitchMode.NUMBER:
            self._pitch = tuple((self._by_text[f"p{p}"],) for p in range(128))
        else:
            self._pitch = tuple(
                (self._by_text[PITCH_CLASS_NAMES[p % 12]], self._by_text[f"o{p // 12}"])
                for p in range(128))

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, text: str) -> bool:
        return text in self._ids

    def __iter__(self):
        return iter(self.tokens)

    def token(self, text: str) -> Token:
        try:
            return self._by_text[text]
        except KeyError:
            raise TokenLookupError(f"unknown token {text!r} for config {self.config.name}") from None

    def token_to_id(self, text: str | Token) -> int:
        key = text.text if isinstance(text, Token) else text
        try:
            return self._ids[key]
        except KeyError:
            raise TokenLookupError(f"unknown token {key!r} for config {self.config.name}") from None

    def id_to_token(self, idx: int) -> Token:
        if not 0 <= idx < len(self.tokens):
            raise TokenLookupError(f"id {idx} outside 0..{len(self.tokens) - 1}")
        return self.tokens[idx]

    def grid_token(self, position: int) -> Token:
        """``POS<k>`` for Multiple, the shared ``POS`` otherwise."""
        if self.config.pc is PositionComplexity.MULTIPLE:
            return self.tokens[1 + position]
        return self._by_text["POS"]

    def encode_pitch(self, pitch: int) -> tuple[Token, ...]:
        if not 0 <= pitch <= 127:
            raise PitchRangeError(f"pitch {pitch} outside [0, 127]")
        return self._pitch[pitch]

    def encode_duration(self, steps: int) -> list[Token]:
        """Greedy split into full-bar tokens followed by one remainder token."""
        if steps <= 0:
            raise ValueError(f"duration must be at least one step, got {steps}")
        cap = self.config.bar_steps
        out = []
        while steps > cap:
            out.append(self._durations[cap])
            steps -= cap
        out.append(self._durations[steps])
        return out

    def dump(self) -> str:
        return "".join(f"{i}\t{t.text}\n" for i, t in enumerate(self.tokens))


def build_vocabulary(config: EncodingConfig) -> Vocabulary:
    return Vocabulary(config)


def expected_size(config: EncodingConfig) -> int:
    if config.pr == 0:
        grid = 0
    elif config.pr == 1:
        grid = 1
    elif config.pc is PositionComplexity.SINGLE:
        grid = 2
    else:
        grid = config.pr
    family = 129 if config.pitch is PitchMode.NUMBER else 24
    return 1 + grid + family + config.bar_steps


def pitch_of(tokens: Iterable[Token]) -> int:
    """Inverse of :meth:`Vocabulary.encode_pitch` for one pitch unit."""
    toks = list(tokens)
    if len(toks) == 1 and toks[0].kind is Kind.PITCH:
        return toks[0].payload
    if len(toks) == 2 and toks[0].kind is Kind.CLASS and toks[1].kind is Kind.OCTAVE:
        return toks[0].payload + 12 * toks[1].payload
    raise ValueError(f"not a pitch unit: {' '.join(t.text for t in toks)}")
