"""
Exact probability laws over all subgraphs of a small pair universe
"""
from typing import Sequence
import numpy as np
from core.errors import DysonError, GraphError
from core.graph import Graph, Interval


class DiscreteGraphLaw:
    """Probability of every subset of `pairs`; bit k of a state index is pairs[k]"""

    def __init__(self, pairs: Sequence[tuple], probs: np.ndarray, tol: float = 1e-12):
        self.pairs = tuple((int(i), int(j)) for i, j in pairs)
        self.probs = np.asarray(probs, dtype=float)
        if len(self.probs) != 1 << len(self.pairs):
            raise GraphError(f"law needs {1 << len(self.pairs)} state probabilities, got {len(self.probs)}")
        if np.any(self.probs < 0):
            raise DysonError("law has negative state probabilities")
        if abs(self.probs.sum() - 1.0) > tol:
            raise DysonError(f"law sums to {self.probs.sum():.15f}, not 1")

    @property
    def num_pairs(self) -> int:
        return len(self.pairs)

    @property
    def num_states(self) -> int:
        return len(self.probs)

    def state_bits(self) -> np.ndarray:
        """(states, pairs) boolean matrix of open indicators"""
        states = np.arange(self.num_states, dtype=np.int64)
        return ((states[:, None] >> np.arange(self.num_pairs)) & 1).astype(bool)

    def graph_of(self, state: int, vertices: Interval) -> Graph:
        return Graph.from_pairs(vertices, [pair for k, pair in enumerate(self.pairs) if (state >> k) & 1])

    def edge_marginals(self) -> np.ndarray:
        return self.probs @ self.state_bits()

    def marginal(self, pair: tuple) -> float:
        return float(self.edge_marginals()[self.pairs.index((min(pair), max(pair)))])

    def total_variation(self, other: "DiscreteGraphLaw") -> float:
        if self.pairs != other.pairs:
            raise GraphError("laws live on different pair universes")
        return 0.5 * float(np.abs(self.probs - other.probs).sum())

    @classmethod
    def from_counts(cls, pairs: Sequence[tuple], counts: np.ndarray) -> "DiscreteGraphLaw":
        counts = np.asarray(counts, dtype=float)
        return cls(pairs, counts / counts.sum(), tol=1e-9)

    @classmethod
    def product(cls, pairs: Sequence[tuple], marginals: Sequence[float]) -> "DiscreteGraphLaw":
        """Independent pairs with the given open probabilities"""
        m = np.asarray(marginals, dtype=float)
        bits = ((np.arange(1 << len(m))[:, None] >> np.arange(len(m))) & 1).astype(bool)
        return cls(pairs, np.where(bits, m, 1.0 - m).prod(axis=1))

    def __repr__(self):
        return f"DiscreteGraphLaw(pairs={len(self.pairs)})"
