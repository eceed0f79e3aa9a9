"""Corpus files, filtering, splitting, augmentation and token files.

Melody files are UTF-8 JSON lines, one melody per line::

    {"id": "song-1", "tpqn": 480, "meter": "4/4", "notes": [[0, 480, 62], ...]}

``meter`` is optional. Token files hold one space-separated sequence per line;
id files hold the matching vocabulary ids.
"""

from __future__ import annotations

import json
import math
import os
import random
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .codec import TokenSequence, encode
from .errors import MidiParseError, PitchRangeError, RecordError, TokenLookupError, UnsupportedFormatError
from .melody import Melody, quantize, transpose, validate
from .smf import parse_smf
from .vocab import EncodingConfig, Vocabulary, build_vocabulary

MAX_REDRAWS = 13


@dataclass(frozen=True)
class Corpus:
    melodies: tuple[Melody, ...] = ()
    provenance: str = ""

    def __post_init__(self):
        object.__setattr__(self, "melodies", tuple(self.melodies))
        seen = set()
        for m in self.melodies:
            if m.id in seen:
                raise ValueError(f"duplicate melody id {m.id!r}")
            seen.add(m.id)

    def __len__(self) -> int:
        return len(self.melodies)

    def __iter__(self):
        return iter(self.melodies)


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.9
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ValueError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")


def write_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temp file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- melody files ------------------------------------------------------------

def melody_to_record(m: Melody) -> str:
    rec = {"id": m.id, "tpqn": m.tpqn}
    if m.meter is not None:
        rec["meter"] = m.meter
    rec["notes"] = [list(n) for n in m.notes]
    return json.dumps(rec, separators=(",", ":"))


def melody_from_record(line: str) -> Melody:
    rec = json.loads(line)
    if not isinstance(rec, dict):
        raise ValueError("record is not an object")
    unknown = set(rec) - {"id", "tpqn", "meter", "notes"}
    if unknown:
        raise ValueError(f"unknown field(s) {sorted(unknown)}")
    for key in ("id", "tpqn", "notes"):
        if key not in rec:
            raise ValueError(f"missing field {key!r}")
    if not isinstance(rec["id"], str) or not rec["id"]:
        raise ValueError("id must be a non-empty string")
    if not isinstance(rec["tpqn"], int) or isinstance(rec["tpqn"], bool):
        raise ValueError("tpqn must be an integer")
    meter = rec.get("meter")
    if meter is not None and not isinstance(meter, str):
        raise ValueError("meter must be a string")
    notes = rec["notes"]
    if not isinstance(notes, list):
        raise ValueError("notes must be a list")
    for n in notes:
        if (not isinstance(n, list) or len(n) != 3
                or not all(isinstance(v, int) and not isinstance(v, bool) for v in n)):
            raise ValueError(f"note {n!r} is not [onset, duration, pitch] integers")
    m = Melody(rec["id"], rec["tpqn"], tuple(notes), meter)
    problems = validate(m)
    if problems:
        v = problems[0]
        where = f"note {v.index}: " if v.index >= 0 else ""
        raise ValueError(f"{where}{v.message} ({v.rule})")
    return m


def read_melodies(path) -> tuple[Corpus, list[tuple[int, str]]]:
    """Lenient reader: good records plus ``(line, message)`` diagnostics."""
    path = Path(path)
    melodies, diagnostics, seen = [], [], set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                m = melody_from_record(line)
            except (ValueError, TypeError) as exc:
                diagnostics.append((lineno, str(exc)))
                continue
            if m.id in seen:
                diagnostics.append((lineno, f"duplicate id {m.id!r}"))
                continue
            seen.add(m.id)
            melodies.append(m)
    return Corpus(melodies, str(path)), diagnostics


def load_melodies(path) -> Corpus:
    corpus, diagnostics = read_melodies(path)
    if diagnostics:
        raise RecordError(path, diagnostics)
    return corpus


def save_melodies(corpus: Corpus | Iterable[Melody], path) -> None:
    write_atomic(path, "".join(melody_to_record(m) + "\n" for m in corpus))


def import_midi(path) -> Corpus:
    path = Path(path)
    return Corpus(parse_smf(path.read_bytes(), path.stem), str(path))


def load_any(path) -> tuple[Corpus, list[tuple[int, str]]]:
    """Melody file, MIDI file, or a directory of either (sorted by name)."""
    path = Path(path)
    if path.is_dir():
        melodies, diagnostics = [], []
        for child in sorted(path.iterdir()):
            if child.suffix.lower() in (".mid", ".midi", ".jsonl", ".json"):
                c, d = load_any(child)
                melodies += c.melodies
                diagnostics += [(n, f"{child.name}: {msg}") for n, msg in d]
        return Corpus(melodies, str(path)), diagnostics
    if path.suffix.lower() in (".mid", ".midi"):
        try:
            return import_midi(path), []
        except (MidiParseError, UnsupportedFormatError) as exc:
            return Corpus((), str(path)), [(0, str(exc))]
    return read_melodies(path)


# -- filtering, splitting, augmentation ---------------------------------------

def filter_four_four(corpus: Corpus, bar_check: bool = True) -> Corpus:
    """Drop melodies without notes and, with ``bar_check``, non-4/4 meters.

    A melody with no declared meter is assumed to be in 4/4.
    """
    keep = [m for m in corpus
            if m.notes and (not bar_check or m.meter is None or m.meter == "4/4")]
    return Corpus(keep, corpus.provenance)


def split(corpus: Corpus, spec: SplitSpec) -> tuple[Corpus, Corpus]:
    """Seeded shuffle of the id-sorted corpus, then a train/test cut."""
    if not len(corpus):
        raise ValueError("cannot split an empty corpus")
    melodies = sorted(corpus, key=lambda m: m.id)
    random.Random(spec.seed).shuffle(melodies)
    # round away float noise such as 10 * 0.9 = 8.999...
    n_train = math.floor(round(len(melodies) * spec.train_fraction, 9))
    return (Corpus(melodies[:n_train], corpus.provenance),
            Corpus(melodies[n_train:], corpus.provenance))


def draw_shift(melody: Melody, seed: int, low: int = -6, high: int = 6) -> int:
    """Seeded uniform shift in ``[low, high]`` keeping all pitches in range.

    The generator is keyed on ``(seed, melody.id)`` so results do not depend
    on processing order.
    """
    if low > high:
        raise ValueError(f"low {low} > high {high}")
    rng = random.Random(f"{seed}:{melody.id}")
    if not melody.notes:
        return rng.randint(low, high)
    lo = min(n.pitch for n in melody.notes)
    hi = max(n.pitch for n in melody.notes)
    for _ in range(MAX_REDRAWS):
        s = rng.randint(low, high)
        if 0 <= lo + s and hi + s <= 127:
            return s
    return 0


def augment_epoch(corpus: Corpus, seed: int, low: int = -6, high: int = 6) -> Corpus:
    out = []
    for m in corpus:
        s = draw_shift(m, seed, low, high)
        try:
            out.append(transpose(m, s))
        except PitchRangeError:  # pragma: no cover - draw_shift already checks
            out.append(m)
    return Corpus(out, corpus.provenance)


# -- token files ---------------------------------------------------------------

def encode_corpus(corpus: Iterable[Melody], config: EncodingConfig,
                  vocab: Vocabulary | None = None) -> list[TokenSequence]:
    vocab = vocab or build_vocabulary(config)
    return [encode(quantize(m, config.dr), vocab) for m in corpus]


def format_token_file(seqs: Sequence[TokenSequence]) -> str:
    return "".join(s.text + "\n" for s in seqs)


def format_id_file(seqs: Sequence[TokenSequence], vocab: Vocabulary) -> str:
    return "".join(" ".join(map(str, s.ids(vocab))) + "\n" for s in seqs)


def write_token_file(seqs: Sequence[TokenSequence], path) -> None:
    write_atomic(path, format_token_file(seqs))


def write_id_file(seqs: Sequence[TokenSequence], vocab: Vocabulary, path) -> None:
    write_atomic(path, format_id_file(seqs, vocab))


def _read_lines(path, parse) -> list[TokenSequence]:
    seqs, diagnostics = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            try:
                seqs.append(parse(line, lineno))
            except (TokenLookupError, ValueError) as exc:
                diagnostics.append((lineno, str(exc)))
    if diagnostics:
        raise RecordError(path, diagnostics)
    return seqs


def load_token_file(path, config: EncodingConfig) -> list[TokenSequence]:
    """One :class:`TokenSequence` per line, ids ``"<line number>"``."""
    vocab = build_vocabulary(config)
    return _read_lines(
        path, lambda line, n: TokenSequence.from_text(line, vocab, str(n)))


def load_id_file(path, config: EncodingConfig) -> list[TokenSequence]:
    vocab = build_vocabulary(config)
    return _read_lines(
        path, lambda line, n: TokenSequence(
            config, [vocab.id_to_token(int(x)) for x in line.split()], str(n)))
