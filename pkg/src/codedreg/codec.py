"""k-of-n erasure coding over GF(2^8).

Systematic Reed-Solomon style code: a value is split into k data shards and
extended to n pieces such that any k distinct pieces reconstruct the value
exactly. k=1 degenerates to full replication.

Construction
------------
* Field: GF(2^8), primitive polynomial 0x11D, generator 0x02.
* A 4-byte big-endian length header is prepended to the payload, then the
  buffer is zero-padded to k equal shards. The header is what makes arbitrary
  byte lengths round-trip (and keeps every piece >= 1 byte even when k exceeds
  the payload length).
* Piece j (1-based) is the evaluation at field point x = j-1 of the degree
  < k polynomial interpolating the data shards at points 0..k-1, byte column
  by byte column. Pieces 1..k are therefore the data shards themselves.
* Decoding Lagrange-interpolates any k pieces back to the data shards.

Scalar multiplication of a whole shard is a bytes.translate() over a
pre-multiplied 256-byte table and shard XOR is done on big integers, so the
per-byte work happens in C.

Sizes: piece_size_bits() reports the idealized ceil(D/k); the real on-wire
size including the header is wire_piece_size_bits(); storage accounting uses
the exact rational ideal_piece_bits() = D/k throughout.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Iterable, NamedTuple

HEADER_BYTES = 4
MAX_PIECES = 255  # distinct evaluation points available in GF(2^8)


class CodecError(ValueError):
    """Base class for coding errors."""


class CodecParameterError(CodecError):
    """Invalid (n, k) or value parameters."""


class InsufficientPiecesError(CodecError):
    """Fewer than k distinct pieces supplied to decode."""


class CorruptPiecesError(CodecError):
    """Pieces are inconsistent with any valid encoding."""


class Value(NamedTuple):
    """A written datum: raw payload bytes, D = bits() bits."""

    payload: bytes

    def bits(self) -> int:
        return 8 * len(self.payload)


class Piece(NamedTuple):
    """One coded fragment: 1-based index and shard payload."""

    index: int
    payload: bytes


# ---------------------------------------------------------------------------
# GF(2^8) tables


def _build_tables() -> tuple[list[int], list[int]]:
    exp = [0] * 512
    log = [0] * 256
    x = 1
    for i in range(255):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x & 0x100:
            x ^= 0x11D
    for i in range(255, 512):
        exp[i] = exp[i - 255]
    return exp, log


_EXP, _LOG = _build_tables()


def _gf_mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return _EXP[_LOG[a] + _LOG[b]]


def _gf_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("GF(256) inverse of zero")
    return _EXP[255 - _LOG[a]]


@lru_cache(maxsize=256)
def _mul_row(c: int) -> bytes:
    return bytes(_gf_mul(c, b) for b in range(256))


def _combine(coeffs: Iterable[int], shards: Iterable[bytes], size: int) -> bytes:
    """Sum of coeff*shard over GF(256), columnwise."""
    acc = 0
    for c, shard in zip(coeffs, shards):
        if c == 0:
            continue
        if c == 1:
            acc ^= int.from_bytes(shard, "big")
        else:
            acc ^= int.from_bytes(shard.translate(_mul_row(c)), "big")
    return acc.to_bytes(size, "big")


@lru_cache(maxsize=None)
def _lagrange_coeffs(xs: tuple[int, ...], t: int) -> tuple[int, ...]:
    """Coefficients evaluating at t the degree <len(xs) polynomial through xs."""
    coeffs = []
    for i, xi in enumerate(xs):
        num, den = 1, 1
        for j, xj in enumerate(xs):
            if j == i:
                continue
            num = _gf_mul(num, t ^ xj)
            den = _gf_mul(den, xi ^ xj)
        coeffs.append(_gf_mul(num, _gf_inv(den)))
    return tuple(coeffs)


# ---------------------------------------------------------------------------
# Public API


def _check_params(n: int, k: int) -> None:
    if not (isinstance(n, int) and isinstance(k, int) and 1 <= k <= n <= MAX_PIECES):
        raise CodecParameterError(f"need 1 <= k <= n <= {MAX_PIECES}, got n={n} k={k}")


def _shard_size(payload_len: int, k: int) -> int:
    total = HEADER_BYTES + payload_len
    return -(-total // k)


def encode(value: Value, n: int, k: int) -> list[Piece]:
    """Split value into n pieces, any k of which decode back to value."""
    _check_params(n, k)
    if len(value.payload) < 1:
        raise CodecParameterError("value payload must be at least one byte")
    size = _shard_size(len(value.payload), k)
    data = len(value.payload).to_bytes(HEADER_BYTES, "big") + value.payload
    data = data.ljust(k * size, b"\x00")
    shards = [data[i * size : (i + 1) * size] for i in range(k)]
    pieces = []
    xs = tuple(range(k))
    for j in range(1, n + 1):
        x = j - 1
        if x < k:
            pieces.append(Piece(j, shards[x]))
        else:
            pieces.append(Piece(j, _combine(_lagrange_coeffs(xs, x), shards, size)))
    return pieces


def decode(pieces: Iterable[Piece], n: int, k: int) -> Value:
    """Reconstruct the value from any >= k distinct pieces of one encoding."""
    _check_params(n, k)
    got = sorted(set(pieces), key=lambda p: p.index)
    indices = [p.index for p in got]
    if len(set(indices)) != len(indices):
        raise CorruptPiecesError("pieces with duplicate indices but different payloads")
    if any(not (1 <= i <= n) for i in indices):
        raise CorruptPiecesError(f"piece index out of range 1..{n}")
    if len(got) < k:
        raise InsufficientPiecesError(f"need {k} distinct pieces, got {len(got)}")
    sizes = {len(p.payload) for p in got}
    if len(sizes) != 1:
        raise CorruptPiecesError(f"inconsistent piece sizes {sorted(sizes)}")
    size = sizes.pop()
    sel = got[:k]
    xs = tuple(p.index - 1 for p in sel)
    payloads = [p.payload for p in sel]
    shards = []
    for t in range(k):
        if t in xs:
            shards.append(payloads[xs.index(t)])
        else:
            shards.append(_combine(_lagrange_coeffs(xs, t), payloads, size))
    data = b"".join(shards)
    length = int.from_bytes(data[:HEADER_BYTES], "big")
    if length < 1 or HEADER_BYTES + length > len(data):
        raise CorruptPiecesError("length header inconsistent with shard size")
    return Value(data[HEADER_BYTES : HEADER_BYTES + length])


def piece_size_bits(data_bits: int, k: int) -> int:
    """Idealized per-piece size in bits: ceil(D/k)."""
    if data_bits < 1 or k < 1:
        raise CodecParameterError("need data_bits >= 1 and k >= 1")
    return -(-data_bits // k)


def wire_piece_size_bits(data_bits: int, k: int) -> int:
    """Real on-wire piece size in bits, including the length header."""
    if data_bits < 1 or k < 1:
        raise CodecParameterError("need data_bits >= 1 and k >= 1")
    return 8 * _shard_size(-(-data_bits // 8), k)


def ideal_piece_bits(data_bits: int, k: int) -> Fraction:
    """Exact idealized piece size D/k used by all storage accounting."""
    return Fraction(data_bits, k)
