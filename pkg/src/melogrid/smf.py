"""Minimal Standard MIDI File reader: notes and time signatures only."""

from __future__ import annotations

import struct
from collections import defaultdict, deque

from .errors import MidiParseError, UnsupportedFormatError
from .melody import Melody, Note, enforce_monophony

# data bytes following each channel-voice status nibble
_DATA_LEN = {0x8: 2, 0x9: 2, 0xA: 2, 0xB: 2, 0xC: 1, 0xD: 1, 0xE: 2}


class _Reader:
    def __init__(self, data: bytes, offset: int = 0, end: int | None = None):
        self.data = data
        self.pos = offset
        self.end = len(data) if end is None else end

    def need(self, n: int, what: str) -> None:
        if self.pos + n > self.end:
            raise MidiParseError(f"truncated {what}: need {n} byte(s), {self.end - self.pos} left", self.pos)

    def byte(self, what: str = "byte") -> int:
        self.need(1, what)
        b = self.data[self.pos]
        self.pos += 1
        return b

    def take(self, n: int, what: str) -> bytes:
        self.need(n, what)
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def varlen(self) -> int:
        start = self.pos
        value = 0
        for _ in range(4):
            b = self.byte("variable-length quantity")
            value = (value << 7) | (b & 0x7F)
            if not b & 0x80:
                return value
        raise MidiParseError("variable-length quantity longer than 4 bytes", start)


def _parse_track(data: bytes, start: int, end: int):
    """Return ``(notes, time_signatures)`` for one MTrk body."""
    r = _Reader(data, start, end)
    tick = 0
    status = None
    sounding: dict[tuple[int, int], deque] = defaultdict(deque)
    notes = []
    meters = []
    while r.pos < r.end:
        tick += r.varlen()
        at = r.pos
        b = r.byte("event")
        if b == 0xFF:
            kind = r.byte("meta type")
            body = r.take(r.varlen(), "meta event")
            if kind == 0x58 and len(body) >= 2:
                meters.append(f"{body[0]}/{2 ** body[1]}")
            elif kind == 0x2F:
                break
            continue
        if b in (0xF0, 0xF7):
            r.take(r.varlen(), "sysex event")
            continue
        if b & 0x80:
            if b >= 0xF0:
                raise MidiParseError(f"unexpected system status 0x{b:02X}", at)
            status = b
            first = r.byte("event data")
        else:
            if status is None:
                raise MidiParseError("data byte with no running status", at)
            first = b
        kind, channel = status >> 4, status & 0x0F
        rest = r.take(_DATA_LEN[kind] - 1, "event data")
        if kind == 0x9 and rest[0] > 0:
            sounding[(channel, first)].append(tick)
        elif kind == 0x8 or kind == 0x9:
            # note-off, or note-on with velocity 0
            queue = sounding.get((channel, first))
            if queue:
                onset = queue.popleft()
                if tick > onset:
                    notes.append(Note(onset, tick - onset, first))
    for (channel, pitch), queue in sounding.items():
        for onset in queue:
            if tick > onset:
                notes.append(Note(onset, tick - onset, pitch))
    notes.sort(key=lambda n: (n.onset, n.pitch))
    return notes, meters


def parse_smf(data: bytes, name: str = "midi") -> list[Melody]:
    """Parse SMF bytes into one melody per track that contains notes.

    Overlapping notes are made monophonic. The meter is taken from the
    time-signature events of all tracks; conflicting signatures are joined
    with commas so that a 4/4 filter rejects them.
    """
    if data[:4] != b"MThd":
        raise MidiParseError("missing MThd header", 0)
    r = _Reader(data, 4)
    (hlen,) = struct.unpack(">I", r.take(4, "header length"))
    if hlen < 6:
        raise MidiParseError(f"header length {hlen} < 6", 4)
    fmt, ntracks, division = struct.unpack(">HHH", r.take(6, "header"))
    r.take(hlen - 6, "header")
    if fmt not in (0, 1):
        raise UnsupportedFormatError(f"SMF format {fmt} not supported (only 0 and 1)")
    if division & 0x8000:
        raise UnsupportedFormatError("SMPTE time division not supported")
    if division == 0:
        raise MidiParseError("ticks per quarter note is 0", 12)

    tracks = []
    meters: list[str] = []
    while r.pos < len(data):
        at = r.pos
        tag = r.take(4, "chunk type")
        (length,) = struct.unpack(">I", r.take(4, "chunk length"))
        r.need(length, f"chunk body ({length} bytes)")
        if tag == b"MTrk":
            notes, ts = _parse_track(data, r.pos, r.pos + length)
            tracks.append(notes)
            meters += ts
        elif not tag.isalpha():
            raise MidiParseError(f"bad chunk type {tag!r}", at)
        r.pos += length
    if len(tracks) != ntracks:
        raise MidiParseError(f"header declares {ntracks} track(s), found {len(tracks)}", len(data))

    meter = ",".join(dict.fromkeys(meters)) or None
    out = []
    for i, notes in enumerate(tracks):
        if notes:
            m = Melody(f"{name}-t{i}", division, tuple(notes), meter)
            out.append(enforce_monophony(m))
    return out
