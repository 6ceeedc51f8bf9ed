"""Seedable byte source used for polynomial coefficients and sampling."""

import random


class RandomSource:
    """Deterministic when seeded, OS entropy otherwise.

    A seeded source replays the identical stream for the same seed, which the
    simulator and the test-suite rely on. An unseeded source draws from
    ``os.urandom`` through :class:`random.SystemRandom` and is what real data
    should be shared with.

    Not thread-safe; give each concurrent caller its own instance.
    """

    def __init__(self, seed=None):
        if seed is not None:
            seed = int(seed) & 0xFFFFFFFFFFFFFFFF
            self._rng = random.Random(seed)
        else:
            self._rng = random.SystemRandom()
        self.seed = seed
        self.position = 0

    @property
    def deterministic(self):
        return self.seed is not None

    def random_bytes(self, count):
        self.position += count
        return self._rng.randbytes(count) if count else b""

    def random(self):
        self.position += 1
        return self._rng.random()

    def sample(self, population, count):
        self.position += count
        return self._rng.sample(list(population), count)

    def spawn(self):
        """Independent child stream, itself reproducible if this one is."""
        if self.seed is None:
            return RandomSource()
        return RandomSource(int.from_bytes(self.random_bytes(8), "big"))

    def __repr__(self):
        return f"RandomSource(seed={self.seed!r}, position={self.position})"
