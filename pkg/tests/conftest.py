import sys

import pytest

from edgeshard.rng import RandomSource


def slow_mul(a, b):
    """Shift-and-reduce multiplication modulo x^8+x^4+x^3+x+1."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        if a & 0x100:
            a ^= 0x11B
        b >>= 1
    return out


def slow_inv(a):
    return next(b for b in range(1, 256) if slow_mul(a, b) == 1)


class ScriptedRandom(RandomSource):
    """Hands out a fixed byte string instead of random bytes."""

    def __init__(self, stream):
        super().__init__(0)
        self._stream = bytes(stream)
        self._pos = 0

    def random_bytes(self, count):
        out = self._stream[self._pos:self._pos + count]
        if len(out) != count:
            raise RuntimeError("scripted stream exhausted")
        self._pos += count
        return out


@pytest.fixture
def rng():
    return RandomSource(1234)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])
