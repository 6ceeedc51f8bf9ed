"""Share records and their on-disk binary encoding.

Layout of one encoded share (all integers big-endian)::

    magic "ESH1" | version u8 | secret_id 16B | k u8 | n u8 | x u8
    | chunk_index u32 | chunk_size u32 | payload_len u64 | payload
    | crc32 u32 over every preceding byte

A share file is a concatenation of such records (one per chunk).
"""

import struct
import zlib
from dataclasses import dataclass, field
from math import ceil

from . import kernels
from .errors import CorruptShare, InvalidPolicy

MAGIC = b"ESH1"
FORMAT_VERSION = 1
SECRET_ID_LEN = 16
MAX_SHARES = 255

_HEADER = struct.Struct(">4sB16sBBBIIQ")
_HEADER_PREFIX = struct.Struct(">4sB16sBB")  # fields before x
_HEADER_SUFFIX = struct.Struct(">IIQ")  # fields after x
_CRC = struct.Struct(">I")
HEADER_SIZE = _HEADER.size  # 40
TRAILER_SIZE = _CRC.size  # 4
# fixed per-share metadata: everything that is not payload
SHARE_OVERHEAD = HEADER_SIZE + TRAILER_SIZE


@dataclass(frozen=True)
class SharePolicy:
    k: int
    n: int

    def __post_init__(self):
        if not (isinstance(self.k, int) and isinstance(self.n, int)):
            raise InvalidPolicy(f"k and n must be integers, got {self.k!r}, {self.n!r}")
        if not 2 <= self.k <= self.n <= MAX_SHARES:
            raise InvalidPolicy(
                f"need 2 <= k <= n <= {MAX_SHARES}, got k={self.k}, n={self.n}"
            )

    @property
    def fault_tolerance(self):
        return self.n - self.k


@dataclass(frozen=True)
class ChunkLayout:
    chunk_size: int
    total_length: int
    chunk_count: int = field(init=False)

    def __post_init__(self):
        count = ceil(self.total_length / self.chunk_size) if self.total_length else 0
        object.__setattr__(self, "chunk_count", count)

    def chunk_length(self, index):
        if not 0 <= index < self.chunk_count:
            raise IndexError(index)
        if index < self.chunk_count - 1:
            return self.chunk_size
        return self.total_length - self.chunk_size * (self.chunk_count - 1)


def _header(secret_id, policy, x, chunk_index, chunk_size, payload_len):
    return _HEADER.pack(
        MAGIC, FORMAT_VERSION, secret_id, policy.k, policy.n, x,
        chunk_index, chunk_size, payload_len,
    )


@dataclass(frozen=True, slots=True)
class Share:
    """One holder's portion of one chunk of a secret.

    ``checksum`` is filled in from the other fields when omitted. Rebuilding
    a share with :func:`dataclasses.replace` keeps the old checksum, so a
    tampered payload is caught by :meth:`verify`.
    """

    secret_id: bytes
    x: int
    payload: bytes
    policy: SharePolicy
    chunk_index: int = 0
    chunk_size: int = 0
    checksum: int = None

    def __post_init__(self):
        if len(self.secret_id) != SECRET_ID_LEN:
            raise ValueError(f"secret_id must be {SECRET_ID_LEN} bytes")
        if not 1 <= self.x <= MAX_SHARES:
            raise ValueError(f"x must be a nonzero field element, got {self.x}")
        if self.checksum is None:
            object.__setattr__(self, "checksum", self.compute_checksum())

    def header(self):
        return _header(
            self.secret_id, self.policy, self.x, self.chunk_index,
            self.chunk_size, len(self.payload),
        )

    def compute_checksum(self):
        return zlib.crc32(self.payload, zlib.crc32(self.header()))

    def verify(self):
        return self.checksum == self.compute_checksum()

    @property
    def stored_size(self):
        return SHARE_OVERHEAD + len(self.payload)


def share_checksums(secret_id, policy, xs, chunk_index, chunk_size, payloads):
    """CRC32 for every (x, payload) of one split; the header prefix is hashed once."""
    if not payloads:
        return []
    prefix = _HEADER_PREFIX.pack(MAGIC, FORMAT_VERSION, secret_id, policy.k, policy.n)
    suffix = _HEADER_SUFFIX.pack(chunk_index, chunk_size, len(payloads[0]))
    return kernels.share_crcs(prefix, suffix, xs, payloads)


def encode_share(share):
    return share.header() + share.payload + _CRC.pack(share.checksum)


def decode_share(buf, offset=0):
    """Decode one record starting at ``offset``; returns ``(share, next_offset)``."""
    end_header = offset + HEADER_SIZE
    if len(buf) < end_header:
        raise CorruptShare("truncated share header")
    magic, version, secret_id, k, n, x, chunk_index, chunk_size, plen = _HEADER.unpack_from(buf, offset)
    if magic != MAGIC:
        raise CorruptShare(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise CorruptShare(f"unsupported format version {version}")
    end_payload = end_header + plen
    if len(buf) < end_payload + TRAILER_SIZE:
        raise CorruptShare("truncated share payload")
    (crc,) = _CRC.unpack_from(buf, end_payload)
    if zlib.crc32(bytes(buf[offset:end_payload])) != crc:
        raise CorruptShare("CRC32 mismatch")
    try:
        policy = SharePolicy(k, n)
        share = Share(
            secret_id=bytes(secret_id), x=x, payload=bytes(buf[end_header:end_payload]),
            policy=policy, chunk_index=chunk_index, chunk_size=chunk_size, checksum=crc,
        )
    except ValueError as exc:
        raise CorruptShare(str(exc)) from exc
    return share, end_payload + TRAILER_SIZE


def encode_shares(shares):
    return b"".join(encode_share(s) for s in shares)


def decode_shares(buf):
    shares = []
    offset = 0
    while offset < len(buf):
        share, offset = decode_share(buf, offset)
        shares.append(share)
    return shares
