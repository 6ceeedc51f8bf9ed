"""Pure-Python byte kernels; used when the compiled extension is missing.

Whole payloads are processed at once: multiplying every byte by a constant is
a ``bytes.translate`` through that constant's row of the multiplication
table, and XOR of two equal-length strings goes through ``int``.
"""

import zlib

from .gf256 import MUL_ROWS


def _xor(a, b):
    n = len(a)
    return (int.from_bytes(a, "little") ^ int.from_bytes(b, "little")).to_bytes(n, "little")


def split_payloads(secret, coeffs, xs):
    length = len(secret)
    if length == 0:
        return [b"" for _ in xs]
    degree = len(coeffs) // length
    rows = [bytes(coeffs[j * length:(j + 1) * length]) for j in range(degree)]
    secret = bytes(secret)
    out = []
    for x in xs:
        table = MUL_ROWS[x]
        if degree == 0:
            out.append(secret)
            continue
        acc = rows[-1]
        for j in range(degree - 2, -1, -1):
            acc = _xor(acc.translate(table), rows[j])
        out.append(_xor(acc.translate(table), secret))
    return out


def interpolate_at_zero(payloads, weights):
    if not payloads:
        return b""
    length = len(payloads[0])
    acc = 0
    for payload, w in zip(payloads, weights):
        acc ^= int.from_bytes(bytes(payload).translate(MUL_ROWS[w]), "little")
    return acc.to_bytes(length, "little")


def share_crcs(prefix, suffix, xs, payloads):
    base = zlib.crc32(prefix)
    return [
        zlib.crc32(payload, zlib.crc32(suffix, zlib.crc32(bytes((x,)), base)))
        for x, payload in zip(xs, payloads)
    ]
