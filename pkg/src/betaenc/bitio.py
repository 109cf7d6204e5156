"""Bit/word conventions and the packed bit-stream file format.

Words are ints read MSB-first: a word w of length n stands for the bits
(b_1 .. b_n) with b_1 the most significant.  Bit files carry an 8-byte
little-endian bit count followed by the bits packed MSB-first into bytes.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import DomainError


def bits_to_word(bits: Sequence[int]) -> int:
    w = 0
    for b in bits:
        if b not in (0, 1):
            raise DomainError(f"bits must be 0 or 1, got {b!r}")
        w = (w << 1) | b
    return w


def word_to_bits(word: int, n: int) -> tuple:
    if word < 0 or word >> n:
        raise DomainError(f"word {word} does not fit in {n} bits")
    return tuple((word >> (n - 1 - i)) & 1 for i in range(n))


def word_to_str(word: int, n: int) -> str:
    return format(word, f"0{n}b") if n else ""


def str_to_bits(text: str) -> tuple:
    if any(c not in "01" for c in text):
        raise DomainError("bit strings may contain only 0 and 1")
    return tuple(int(c) for c in text)


def bits_to_str(bits: Sequence[int]) -> str:
    return "".join(str(int(b)) for b in bits)


def pack_bits(bits: Sequence[int]) -> bytes:
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.size and arr.max() > 1:
        raise DomainError("bit stream contains non-bits")
    header = int(arr.size).to_bytes(8, "little")
    return header + np.packbits(arr).tobytes()


def unpack_bits(blob: bytes) -> np.ndarray:
    if len(blob) < 8:
        raise DomainError("bit file too short for its header")
    count = int.from_bytes(blob[:8], "little")
    body = np.frombuffer(blob[8:], dtype=np.uint8)
    if body.size * 8 < count:
        raise DomainError("bit file truncated")
    return np.unpackbits(body)[:count]


def write_bit_file(path, bits) -> None:
    with open(path, "wb") as fh:
        fh.write(pack_bits(bits))


def read_bit_file(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return unpack_bits(fh.read())
