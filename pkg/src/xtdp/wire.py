"""Binary framing for protocol values.

Frame layout, all integers big-endian::

    length      4 bytes   byte count of everything after this field
    magic       4 bytes   b"XTDP"
    version     1 byte    0x01
    msg_type    1 byte    MsgType
    prime       2 bytes
    dim         1 byte
    count       1 byte    number of matrices
    payload     count * dim * dim * width bytes, row-major entries,
                width = ceil(bits(p) / 8) bytes each
"""
from __future__ import annotations

import enum
import hashlib
import struct
from dataclasses import dataclass
from typing import BinaryIO, Sequence

from .errors import EntryOutOfRange, MalformedFrame, NotPrime, Truncated, UnsupportedType
from .field import FieldParams
from .matrix import SquareMatrix

MAGIC = b"XTDP"
VERSION = 0x01
_HEADER = struct.Struct(">4sBBHBB")
_LEN = struct.Struct(">I")
MAX_FRAME = 1 << 24


class MsgType(enum.IntEnum):
    SETUP = 0x01
    PUBKEY = 0x02
    TOKEN = 0x03
    CIPHERTEXT = 0x04
    ERROR = 0x05


@dataclass(frozen=True)
class Frame:
    msg_type: MsgType
    params: FieldParams
    dim: int
    matrices: tuple[SquareMatrix, ...]


def matrix_bytes(m: SquareMatrix) -> bytes:
    """Canonical row-major fixed-width encoding of one matrix."""
    w = m.params.entry_width
    return b"".join(e.to_bytes(w, "big") for e in m.entries())


def matrix_from_bytes(data: bytes, dim: int, params: FieldParams) -> SquareMatrix:
    w = params.entry_width
    if len(data) != dim * dim * w:
        raise MalformedFrame(f"expected {dim * dim * w} bytes for a {dim}x{dim} matrix, got {len(data)}")
    vals = [int.from_bytes(data[k:k + w], "big") for k in range(0, len(data), w)]
    for v in vals:
        if v >= params.p:
            raise EntryOutOfRange(f"entry {v} >= p={params.p}")
    return SquareMatrix([vals[r * dim:(r + 1) * dim] for r in range(dim)], params)


def fingerprint(m: SquareMatrix) -> str:
    """First 16 hex chars of SHA-256 over the canonical matrix encoding."""
    return hashlib.sha256(matrix_bytes(m)).hexdigest()[:16]


def encode_frame(values: Sequence[SquareMatrix], msg_type: MsgType, params: FieldParams,
                 dim: int | None = None) -> bytes:
    msg_type = MsgType(msg_type)
    if dim is None:
        if not values:
            raise ValueError("dim is required for a frame without matrices")
        dim = values[0].dim
    if len(values) > 255 or not 1 <= dim <= 255 or params.p >= 1 << 16:
        raise ValueError("frame limits: <= 255 matrices, 1 <= dim <= 255, p < 2**16")
    for m in values:
        if m.dim != dim or m.params != params:
            raise ValueError("all matrices in a frame must share dim and field")
    body = _HEADER.pack(MAGIC, VERSION, msg_type, params.p, dim, len(values))
    body += b"".join(matrix_bytes(m) for m in values)
    return _LEN.pack(len(body)) + body


def _decode_body(body: bytes) -> Frame:
    if len(body) < _HEADER.size:
        raise MalformedFrame(f"frame body of {len(body)} bytes is shorter than the header")
    magic, version, mtype, prime, dim, count = _HEADER.unpack_from(body)
    if magic != MAGIC:
        raise MalformedFrame(f"bad magic {magic!r}")
    if version != VERSION:
        raise MalformedFrame(f"unsupported version {version}")
    try:
        msg_type = MsgType(mtype)
    except ValueError:
        raise UnsupportedType(f"unknown message type 0x{mtype:02x}") from None
    try:
        params = FieldParams(prime)
    except NotPrime as exc:
        raise MalformedFrame(str(exc)) from None
    if dim == 0:
        raise MalformedFrame("dimension 0")
    size = dim * dim * params.entry_width
    payload = body[_HEADER.size:]
    if len(payload) != count * size:
        raise MalformedFrame(f"payload is {len(payload)} bytes, header implies {count * size}")
    mats = tuple(matrix_from_bytes(payload[k * size:(k + 1) * size], dim, params) for k in range(count))
    return Frame(msg_type, params, dim, mats)


def decode_frame(data: bytes) -> Frame:
    if len(data) < _LEN.size:
        raise MalformedFrame("missing length prefix")
    (length,) = _LEN.unpack_from(data)
    if len(data) - _LEN.size != length:
        raise MalformedFrame(f"length prefix says {length} bytes, got {len(data) - _LEN.size}")
    return _decode_body(data[_LEN.size:])


def _read_exact(stream: BinaryIO, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        chunk = stream.read(n - len(buf))
        if not chunk:
            raise Truncated(f"stream closed after {len(buf)} of {n} bytes")
        buf += chunk
    return bytes(buf)


def read_frame(stream: BinaryIO) -> Frame:
    """Read one length-prefixed frame from a binary file-like object."""
    (length,) = _LEN.unpack(_read_exact(stream, _LEN.size))
    if length > MAX_FRAME:
        raise MalformedFrame(f"frame of {length} bytes exceeds limit")
    return _decode_body(_read_exact(stream, length))
