"""Exception hierarchy shared by every edgeshard module."""


class EdgeShardError(Exception):
    """Base class for all errors raised by edgeshard."""


class NonInvertible(EdgeShardError, ZeroDivisionError):
    pass


class InvalidPolynomial(EdgeShardError, ValueError):
    pass


class InvalidPolicy(EdgeShardError, ValueError):
    pass


class InvalidChunkSize(EdgeShardError, ValueError):
    pass


class DuplicateShare(EdgeShardError, ValueError):
    pass


class CorruptShare(EdgeShardError, ValueError):
    pass


class InsufficientShares(EdgeShardError):
    """Fewer usable shares than the threshold requires."""

    def __init__(self, available, required, message=None):
        self.available = available
        self.required = required
        super().__init__(
            message or f"need {required} shares, only {available} available"
        )


class InsufficientNodes(EdgeShardError):
    """Not enough candidates passed the selection gates."""

    def __init__(self, eligible, requested):
        self.eligible = eligible
        self.requested = requested
        super().__init__(
            f"requested {requested} nodes, only {eligible} eligible"
        )


class InvalidRecord(EdgeShardError, ValueError):
    pass


class DealerUnavailable(EdgeShardError):
    pass


class UnknownNode(EdgeShardError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class UnknownSecret(EdgeShardError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class ScenarioError(EdgeShardError, ValueError):
    """A scenario document failed validation; ``field`` names the culprit."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
