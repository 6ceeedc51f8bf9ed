# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled GF(2^8) byte kernels. Same contract as ``_kernels_py``.

Inputs are read straight out of ``bytes`` objects; memoryview acquisition
costs more than the arithmetic for the small payloads the simulator moves.
"""

from cpython.bytes cimport PyBytes_AS_STRING, PyBytes_FromStringAndSize, PyBytes_GET_SIZE


cdef extern from "zlib.h":
    unsigned long crc32(unsigned long crc, const unsigned char *buf, unsigned int length) nogil

cdef unsigned char MUL[256][256]


cdef void _init_tables():
    cdef int exp[510]
    cdef int log[256]
    cdef int value = 1, power, doubled, a, b
    for power in range(255):
        exp[power] = value
        log[value] = power
        doubled = value << 1
        if doubled & 0x100:
            doubled ^= 0x11B
        value ^= doubled
    for power in range(255, 510):
        exp[power] = exp[power - 255]
    for a in range(256):
        for b in range(256):
            if a == 0 or b == 0:
                MUL[a][b] = 0
            else:
                MUL[a][b] = <unsigned char>exp[log[a] + log[b]]


_init_tables()


cdef inline const unsigned char *_buf(bytes obj):
    return <const unsigned char *>PyBytes_AS_STRING(obj)


def split_payloads(secret, coeffs, xs):
    cdef bytes sec = bytes(secret)
    cdef bytes cof = bytes(coeffs)
    cdef Py_ssize_t length = PyBytes_GET_SIZE(sec)
    cdef Py_ssize_t degree, p, j
    cdef const unsigned char *s = _buf(sec)
    cdef const unsigned char *c = _buf(cof)
    cdef unsigned char acc
    cdef unsigned char *row
    cdef unsigned char *dst
    cdef int x
    if length == 0:
        return [b"" for _ in xs]
    degree = PyBytes_GET_SIZE(cof) // length
    out = []
    for x in xs:
        buf = PyBytes_FromStringAndSize(NULL, length)
        dst = <unsigned char *>PyBytes_AS_STRING(buf)
        if degree == 0:
            for p in range(length):
                dst[p] = s[p]
        else:
            row = MUL[x]
            for p in range(length):
                acc = c[(degree - 1) * length + p]
                for j in range(degree - 2, -1, -1):
                    acc = row[acc] ^ c[j * length + p]
                dst[p] = row[acc] ^ s[p]
        out.append(buf)
    return out


def interpolate_at_zero(payloads, weights):
    cdef Py_ssize_t length, p
    cdef bytes payload
    cdef const unsigned char *src
    cdef unsigned char *row
    cdef unsigned char *dst
    if not payloads:
        return b""
    length = len(payloads[0])
    buf = PyBytes_FromStringAndSize(NULL, length)
    dst = <unsigned char *>PyBytes_AS_STRING(buf)
    for p in range(length):
        dst[p] = 0
    for obj, w in zip(payloads, weights):
        payload = bytes(obj)
        if PyBytes_GET_SIZE(payload) != length:
            raise ValueError("payload lengths differ")
        row = MUL[<int>w]
        src = _buf(payload)
        for p in range(length):
            dst[p] ^= row[src[p]]
    return buf


def share_crcs(prefix, suffix, xs, payloads):
    """CRC32 of ``prefix | x | suffix | payload`` for each (x, payload)."""
    cdef bytes pre = bytes(prefix)
    cdef bytes suf = bytes(suffix)
    cdef bytes body
    cdef unsigned long base = crc32(0, _buf(pre), <unsigned int>PyBytes_GET_SIZE(pre))
    cdef unsigned long crc
    cdef unsigned char xb
    out = []
    for x, payload in zip(xs, payloads):
        body = bytes(payload)
        xb = <unsigned char>x
        crc = crc32(base, &xb, 1)
        crc = crc32(crc, _buf(suf), <unsigned int>PyBytes_GET_SIZE(suf))
        crc = crc32(crc, _buf(body), <unsigned int>PyBytes_GET_SIZE(body))
        out.append(crc)
    return out
