"""Tiny SMF writer for tests: hand-assembled chunks, no MIDI library."""

import struct

# one note, tpqn 480: note-on C4 at 0, note-off after 480 ticks, end of track
ONE_NOTE = (
    b"MThd" + struct.pack(">IHHH", 6, 0, 1, 480)
    + b"MTrk" + struct.pack(">I", 13)
    + bytes([0x00, 0x90, 60, 100,
             0x83, 0x60, 0x80, 60, 0,
             0x00, 0xFF, 0x2F, 0x00])
)


def varlen(n):
    out = [n & 0x7F]
    n >>= 7
    while n:
        out.append(0x80 | (n & 0x7F))
        n >>= 7
    return bytes(reversed(out))


def track(events):
    """``events`` are (delta, raw bytes) pairs; end-of-track is appended."""
    body = b"".join(varlen(d) + raw for d, raw in events) + b"\x00\xff\x2f\x00"
    return b"MTrk" + struct.pack(">I", len(body)) + body


def smf(tracks, tpqn=480, fmt=None):
    fmt = (0 if len(tracks) == 1 else 1) if fmt is None else fmt
    return b"MThd" + struct.pack(">IHHH", 6, fmt, len(tracks), tpqn) + b"".join(tracks)


def time_signature(num, den_pow):
    return bytes([0xFF, 0x58, 4, num, den_pow, 24, 8])


def notes_track(notes, channel=0):
    """Absolute (onset, duration, pitch) notes to explicit note-on/off events."""
    evs = []
    for on, dur, p in notes:
        evs.append((on, 0, bytes([0x90 | channel, p, 90])))
        evs.append((on + dur, 1, bytes([0x80 | channel, p, 0])))
    evs.sort()
    out, now = [], 0
    for t, _, raw in evs:
        out.append((t - now, raw))
        now = t
    return track(out)
