"""Shamir (k, n) threshold sharing of byte strings over GF(2^8).

Each byte position is shared with its own random polynomial of degree k-1
whose constant term is that byte; share ``i`` is the evaluation at ``x = i``.
Payloads therefore have exactly the length of the secret.
"""

from functools import lru_cache

from . import kernels
from .errors import (
    CorruptShare,
    DuplicateShare,
    InsufficientShares,
    InvalidChunkSize,
    InvalidPolicy,
)
from .gf256 import lagrange_weights_at_zero
from .shares import SECRET_ID_LEN, ChunkLayout, Share, SharePolicy, share_checksums


def chunk(data, chunk_size):
    """Cut ``data`` into ``chunk_size`` pieces; the last may be shorter."""
    if chunk_size < 1:
        raise InvalidChunkSize(f"chunk_size must be >= 1, got {chunk_size}")
    layout = ChunkLayout(chunk_size, len(data))
    view = memoryview(data)
    pieces = [bytes(view[i:i + chunk_size]) for i in range(0, len(data), chunk_size)]
    return layout, pieces


def split(secret, policy, rng, *, secret_id=None, chunk_index=0, chunk_size=None):
    """Share ``secret`` into ``policy.n`` shares at x = 1..n.

    ``rng`` supplies ``(k - 1) * len(secret)`` fresh coefficient bytes, plus 16
    bytes for the secret id when none is given.
    """
    if not isinstance(policy, SharePolicy):
        raise InvalidPolicy(f"expected SharePolicy, got {policy!r}")
    secret = bytes(secret)
    if secret_id is None:
        secret_id = rng.random_bytes(SECRET_ID_LEN)
    if chunk_size is None:
        chunk_size = len(secret)
    coeffs = rng.random_bytes((policy.k - 1) * len(secret))
    xs = range(1, policy.n + 1)
    payloads = kernels.split_payloads(secret, coeffs, xs)
    crcs = share_checksums(secret_id, policy, xs, chunk_index, chunk_size, payloads)
    return [
        Share(secret_id, x, payload, policy, chunk_index, chunk_size, crc)
        for x, payload, crc in zip(xs, payloads, crcs)
    ]


@lru_cache(maxsize=1024)
def _weights(xs):
    return tuple(lagrange_weights_at_zero(xs))


def _check_consistent(shares, policy):
    first = shares[0]
    for s in shares:
        if not s.verify():
            raise CorruptShare(f"checksum mismatch on share x={s.x}")
        if s.policy != policy:
            raise CorruptShare(f"share x={s.x} has policy {s.policy}, expected {policy}")
        if s.secret_id != first.secret_id:
            raise CorruptShare("shares belong to different secrets")
        if s.chunk_index != first.chunk_index:
            raise CorruptShare("shares belong to different chunks")
        if len(s.payload) != len(first.payload):
            raise CorruptShare("share payload lengths differ")
    xs = [s.x for s in shares]
    if len(set(xs)) != len(xs):
        raise DuplicateShare(f"duplicate x-coordinates {sorted(xs)}")


def reconstruct(shares, expected_policy=None):
    """Recover one chunk from at least k consistent shares.

    Every share is checked; only the k with the smallest x are interpolated.
    """
    shares = list(shares)
    if not shares:
        required = expected_policy.k if expected_policy else 2
        raise InsufficientShares(0, required)
    policy = expected_policy or shares[0].policy
    _check_consistent(shares, policy)
    if len(shares) < policy.k:
        raise InsufficientShares(len(shares), policy.k)
    used = sorted(shares, key=lambda s: s.x)[:policy.k]
    weights = _weights(tuple(s.x for s in used))
    return kernels.interpolate_at_zero([s.payload for s in used], list(weights))


def split_data(data, policy, rng, chunk_size=4096, secret_id=None):
    """Chunk and share ``data``; returns one list of shares per x (1..n).

    Empty data still yields one empty chunk so every holder gets a record
    naming the secret.
    """
    layout, pieces = chunk(data, chunk_size)
    if not pieces:
        pieces = [b""]
    if secret_id is None:
        secret_id = rng.random_bytes(SECRET_ID_LEN)
    per_holder = [[] for _ in range(policy.n)]
    for index, piece in enumerate(pieces):
        for share in split(piece, policy, rng, secret_id=secret_id,
                           chunk_index=index, chunk_size=layout.chunk_size):
            per_holder[share.x - 1].append(share)
    return per_holder


def reconstruct_data(shares, expected_policy=None):
    """Group shares by chunk, rebuild each chunk, and concatenate in order."""
    by_chunk = {}
    for s in shares:
        by_chunk.setdefault(s.chunk_index, []).append(s)
    if not by_chunk:
        raise InsufficientShares(0, expected_policy.k if expected_policy else 2)
    ids = {s.secret_id for group in by_chunk.values() for s in group}
    if len(ids) > 1:
        raise CorruptShare("shares belong to different secrets")
    expected = list(range(max(by_chunk) + 1))
    if sorted(by_chunk) != expected:
        missing = sorted(set(expected) - set(by_chunk))
        raise InsufficientShares(0, (expected_policy or shares[0].policy).k,
                                 f"no shares for chunk(s) {missing}")
    return b"".join(reconstruct(by_chunk[i], expected_policy) for i in expected)
