"""Exception hierarchy shared across the package."""


class ConvsimError(Exception):
    """Base class for all data and runtime errors raised by convsim."""


class ManifestError(ConvsimError):
    """Malformed or inconsistent utterance/noise/RIR manifest."""


class PoolExhaustedError(ConvsimError):
    """No eligible speakers or utterances left and refills are not permitted."""


class RttmError(ConvsimError):
    """Malformed RTTM input."""


class StatsError(ConvsimError):
    """Unusable turn-taking statistics or malformed stats file."""


class AudioError(ConvsimError):
    """Unsupported audio encoding, rate mismatch, or degenerate signal."""
