"""Conjugation cipher under the shared session key, plus a byte-payload codec.

``encrypt(K, m) = K^-1 m K`` and ``decrypt(K, c) = K c K^-1``.  Conjugation
is a similarity transform, so trace, determinant and characteristic
polynomial of the plaintext are visible in the ciphertext.  That leakage is
inherent to the construction and is asserted by the test suite.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Sequence, Union

from .errors import CodecError, DimMismatch
from .field import FieldParams
from .matrix import SquareMatrix
from .protocol import SessionKey

KeyLike = Union[SessionKey, SquareMatrix]


@dataclass(frozen=True)
class Ciphertext:
    value: SquareMatrix


def _key_matrix(key: KeyLike) -> SquareMatrix:
    return key.value if isinstance(key, SessionKey) else key


def bcsp_encrypt(key: KeyLike, msg: SquareMatrix) -> Ciphertext:
    k = _key_matrix(key)
    if k.dim != msg.dim or k.params != msg.params:
        raise DimMismatch(f"key is {k.dim}x{k.dim} over F_{k.p}, message {msg.dim}x{msg.dim} over F_{msg.p}")
    return Ciphertext(k.inverse @ msg @ k)


def bcsp_decrypt(key: KeyLike, cif: Ciphertext | SquareMatrix) -> SquareMatrix:
    k = _key_matrix(key)
    c = cif.value if isinstance(cif, Ciphertext) else cif
    if k.dim != c.dim or k.params != c.params:
        raise DimMismatch(f"key is {k.dim}x{k.dim} over F_{k.p}, ciphertext {c.dim}x{c.dim} over F_{c.p}")
    return k @ c @ k.inverse


# -- payload codec ---------------------------------------------------------
#
# Stream = escape(len as 4 bytes big-endian || payload), zero padded to a
# whole number of d*d blocks, packed row-major one byte per entry.  For
# 128 < p < 256 the value p-1 is an escape marker: byte b >= p becomes
# (p-1, b-p) and the literal byte p-1 becomes (p-1, 256-p).  For p >= 257
# bytes map to entries unchanged.

def _escape(data: bytes, p: int) -> list[int]:
    if p > 256:
        return list(data)
    marker = p - 1
    out = []
    for b in data:
        if b < marker:
            out.append(b)
        elif b == marker:
            out.extend((marker, 256 - p))
        else:
            out.extend((marker, b - p))
    return out


def _unescape(entries: Sequence[int], p: int, count: int, start: int = 0) -> tuple[bytes, int]:
    """Read ``count`` logical bytes from ``entries[start:]``; return them and the next index."""
    out = bytearray()
    i = start
    marker = p - 1
    while len(out) < count:
        if i >= len(entries):
            raise CodecError("payload stream ended early")
        e = entries[i]
        if p > 256:
            if e > 255:
                raise CodecError(f"entry {e} is not a byte")
            out.append(e)
            i += 1
            continue
        if e != marker:
            out.append(e)
            i += 1
            continue
        if i + 1 >= len(entries):
            raise CodecError("dangling escape marker")
        nxt = entries[i + 1]
        if nxt == 256 - p:
            out.append(marker)
        elif nxt < 256 - p:
            out.append(p + nxt)
        else:
            raise CodecError(f"invalid escape pair ({marker}, {nxt})")
        i += 2
    return bytes(out), i


def _check_codec_field(params: FieldParams) -> None:
    if params.p <= 128:
        raise CodecError(f"byte codec needs p > 128, got p={params.p}")


def encode_payload(data: bytes, dim: int, params: FieldParams) -> list[SquareMatrix]:
    """Pack a byte string into one or more ``dim x dim`` message matrices."""
    _check_codec_field(params)
    if len(data) >= 2**32:
        raise CodecError("payload longer than 2**32 - 1 bytes")
    stream = _escape(struct.pack(">I", len(data)) + data, params.p)
    block = dim * dim
    stream += [0] * (-len(stream) % block)
    return [
        SquareMatrix([stream[off + r * dim: off + (r + 1) * dim] for r in range(dim)], params)
        for off in range(0, len(stream), block)
    ]


def decode_payload(mats: Sequence[SquareMatrix], params: FieldParams) -> bytes:
    _check_codec_field(params)
    entries = [e for m in mats for e in m.entries()]
    header, i = _unescape(entries, params.p, 4)
    (length,) = struct.unpack(">I", header)
    data, i = _unescape(entries, params.p, length, i)
    if any(entries[i:]):
        raise CodecError("nonzero padding after payload")
    return data


def encrypt_bytes(key: KeyLike, data: bytes) -> list[Ciphertext]:
    k = _key_matrix(key)
    return [bcsp_encrypt(k, m) for m in encode_payload(data, k.dim, k.params)]


def decrypt_bytes(key: KeyLike, blocks: Sequence[Ciphertext | SquareMatrix]) -> bytes:
    k = _key_matrix(key)
    return decode_payload([bcsp_decrypt(k, c) for c in blocks], k.params)
