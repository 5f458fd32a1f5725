"""
Reproducible random streams keyed by (master seed, stream id)
"""
from dataclasses import dataclass
import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class Seed:
    """Master seed plus stream id; together they fix a sampler's output"""

    seed: int
    stream: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'seed', int(self.seed) & _MASK64)
        object.__setattr__(self, 'stream', int(self.stream) & _MASK64)

    def generator(self) -> np.random.Generator:
        """Counter-based Philox generator; the draw counter starts at zero"""
        key = (self.stream << 64) | self.seed
        return np.random.Generator(np.random.Philox(key=key))

    def spawn(self, index: int) -> "Seed":
        """Independent child stream for replica `index`"""
        mixed = np.random.SeedSequence([self.seed, self.stream, int(index)])
        child = int(mixed.generate_state(1, dtype=np.uint64)[0])
        return Seed(self.seed, child)

    def __str__(self):
        return f"{self.seed}:{self.stream}"
