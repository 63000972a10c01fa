"""Reader and writer for the GF01 grid-field file format.

Layout: one ASCII header line

    GF01 n=<n> shape=<s1,s2[,s3]> box=<L1,L2[,L3]>

terminated by ``\\n``, followed by little-endian float64 samples with real
and imaginary parts interleaved, in row-major (C) order.
"""
from __future__ import annotations

import os
import re

import numpy as np

from .spectral import GridField, GridSpec

__all__ = ["GF01Error", "read_gf01", "write_gf01", "encode_gf01", "decode_gf01"]

MAGIC = b"GF01"


class GF01Error(ValueError):
    """Malformed GF01 content; ``offset`` is the byte position of the problem."""

    def __init__(self, offset: int, message: str):
        super().__init__(f"malformed GF01 data at byte {offset}: {message}")
        self.offset = offset


def encode_gf01(field: GridField) -> bytes:
    spec = field.spec
    header = "GF01 n={} shape={} box={}\n".format(
        spec.n,
        ",".join(str(s) for s in spec.shape),
        ",".join(repr(float(b)) for b in spec.box),
    ).encode("ascii")
    data = np.ascontiguousarray(field.samples, dtype="<c16").tobytes()
    return header + data


def _parse_header(header: bytes):
    tokens, pos = [], 0
    for piece in header.split(b" "):
        tokens.append((pos, piece))
        pos += len(piece) + 1
    keys = (b"GF01", b"n=", b"shape=", b"box=")
    if len(tokens) != len(keys):
        where = tokens[len(keys)][0] if len(tokens) > len(keys) else len(header)
        raise GF01Error(where, f"expected {len(keys)} header fields, found {len(tokens)}")
    values = {}
    for (at, piece), key in zip(tokens, keys):
        if not piece.startswith(key):
            raise GF01Error(at, f"expected field '{key.decode()}'")
        values[key] = (at + len(key), piece[len(key):])
    if tokens[0][1] != MAGIC:
        raise GF01Error(0, "missing GF01 magic")
    at, raw = values[b"n="]
    if not re.fullmatch(rb"\d+", raw):
        raise GF01Error(at, "n is not an integer")
    n = int(raw)
    shape_at, raw = values[b"shape="]
    shape = []
    cursor = shape_at
    for item in raw.split(b","):
        if not re.fullmatch(rb"\d+", item):
            raise GF01Error(cursor, f"shape entry {item!r} is not an integer")
        shape.append(int(item))
        cursor += len(item) + 1
    box_at, raw = values[b"box="]
    box = []
    cursor = box_at
    for item in raw.split(b","):
        try:
            box.append(float(item))
        except ValueError:
            raise GF01Error(cursor, f"box entry {item!r} is not a real number") from None
        cursor += len(item) + 1
    if len(shape) != n:
        raise GF01Error(shape_at, f"shape has {len(shape)} entries but n={n}")
    if len(box) != n:
        raise GF01Error(box_at, f"box has {len(box)} entries but n={n}")
    return n, tuple(shape), tuple(box), shape_at


def decode_gf01(blob: bytes) -> GridField:
    if not blob.startswith(MAGIC):
        raise GF01Error(0, "missing GF01 magic")
    end = blob.find(b"\n")
    if end < 0:
        raise GF01Error(len(blob), "header line is not terminated by a newline")
    header = blob[:end]
    n, shape, box, shape_at = _parse_header(header)
    try:
        spec = GridSpec(shape, box)
    except ValueError as exc:
        raise GF01Error(shape_at, str(exc)) from None
    start = end + 1
    expected = 16 * int(np.prod(shape))
    got = len(blob) - start
    if got != expected:
        raise GF01Error(start + min(got, expected),
                        f"expected {expected} data bytes, found {got}")
    samples = np.frombuffer(blob, dtype="<c16", offset=start).reshape(shape).astype(complex)
    if not np.all(np.isfinite(samples)):
        bad = int(np.flatnonzero(~np.isfinite(samples.ravel()))[0])
        raise GF01Error(start + 16 * bad, "non-finite sample")
    return GridField(spec, samples)


def write_gf01(path: str | os.PathLike, field: GridField) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_gf01(field))


def read_gf01(path: str | os.PathLike) -> GridField:
    with open(path, "rb") as fh:
        return decode_gf01(fh.read())
