"""Counter-based random streams.

Every draw is a Philox4x32-10 evaluation of (seed, stream id, draw index), so a
stream can be recreated anywhere from those three integers.  Monte Carlo
replicate ``r`` uses stream id ``r``; results therefore do not depend on how
replicates are split across workers.
"""

from __future__ import annotations

from . import _backend

SEED_MAX = 2**64 - 1


def check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed <= SEED_MAX:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


class RandomStream:
    """Sequential uniforms on (0, 1) from one substream.

    Not thread-safe: the draw position is the only state, and each stream
    should have a single owner.
    """

    def __init__(self, seed: int, stream: int = 0, backend=None):
        self.seed = check_seed(seed)
        self.stream = check_seed(stream)
        self.position = 0
        self.backend = backend if backend is not None else _backend.active

    def uniform(self, count: int):
        out = self.backend.uniforms(self.seed, self.stream, self.position, int(count))
        self.position += int(count)
        return out

    def spawn(self, stream: int) -> "RandomStream":
        """A fresh stream sharing this one's seed and backend."""
        return RandomStream(self.seed, stream, self.backend)

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, stream={self.stream}, position={self.position})"
