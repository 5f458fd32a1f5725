"""
Edge probabilities and random graph samplers: Bernoulli, FK random-cluster,
site-bond and sprinkling.
"""
from dataclasses import dataclass
from typing import Iterator, Optional
import numpy as np
from numba import njit
from config.settings import Settings
from core.errors import EnumerationLimitError, GraphError, InfeasibleScaleError, ParameterError
from core.graph import Graph, Interval, clusters, omega_per_state, union_graphs
from core.laws import DiscreteGraphLaw
from core.rng import Seed
from utils.logger import logger


@dataclass(frozen=True)
class ModelParams:
    """(alpha, beta, q, delta) for all samplers"""

    alpha: float
    beta: float
    q: float = 1.0
    delta: float = 0.0

    def __post_init__(self):
        if not self.alpha > 1:
            raise ParameterError(f"alpha > 1 violated (alpha={self.alpha})")
        if not self.beta >= 0:
            raise ParameterError(f"beta >= 0 violated (beta={self.beta})")
        if not self.q >= 1:
            raise ParameterError(f"q >= 1 violated (q={self.q})")
        if not self.delta >= 0:
            raise ParameterError(f"delta >= 0 violated (delta={self.delta})")
        if self.alpha >= 2:
            logger.warning(f"alpha={self.alpha} >= 2: exploratory, conjecture only")

    def edge_prob_fn(self) -> "EdgeProbFn":
        return dyson(self.beta, self.alpha)

    def sprinkle_fn(self) -> "EdgeProbFn":
        return dyson(self.delta, self.alpha)


class EdgeProbFn:
    """Translation-invariant pair probabilities, optionally restricted to an interval"""

    def probs_for(self, i: np.ndarray, j: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def distance_probs(self, max_distance: int) -> np.ndarray:
        """p_d for d = 1..max_distance"""
        d = np.arange(1, max_distance + 1, dtype=np.int64)
        return self.probs_for(np.zeros_like(d), d)

    def support(self, v: Interval) -> Interval:
        """Sub-interval of v outside of which every pair has probability 0"""
        return v

    def pair_probs(self, v: Interval) -> tuple:
        """(pairs, probabilities) over all pairs of v in lexicographic order"""
        i, j = np.triu_indices(v.length, k=1)
        pairs = np.column_stack([i + v.lo, j + v.lo]).astype(np.int64)
        return pairs, self.probs_for(pairs[:, 0], pairs[:, 1])


@dataclass(frozen=True)
class Dyson(EdgeProbFn):
    """p(ij) = 1 - exp(-beta |i-j|^-alpha)"""

    beta: float
    alpha: float

    def probs_for(self, i, j):
        d = np.abs(np.asarray(j, dtype=float) - np.asarray(i, dtype=float))
        # expm1 keeps small probabilities from rounding to zero
        return -np.expm1(-self.beta * d ** -self.alpha)


@dataclass(frozen=True)
class Constant(EdgeProbFn):
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ParameterError(f"0 <= p <= 1 violated (p={self.p})")

    def probs_for(self, i, j):
        return np.full(np.broadcast(np.asarray(i), np.asarray(j)).shape, self.p, dtype=float)


@dataclass(frozen=True)
class Restricted(EdgeProbFn):
    """p|_V: inner probabilities for pairs inside v, zero otherwise"""

    inner: EdgeProbFn
    v: Interval

    def probs_for(self, i, j):
        i, j = np.asarray(i), np.asarray(j)
        inside = (i >= self.v.lo) & (i < self.v.hi) & (j >= self.v.lo) & (j < self.v.hi)
        return np.where(inside, self.inner.probs_for(i, j), 0.0)

    def distance_probs(self, max_distance):
        return self.inner.distance_probs(max_distance)

    def support(self, v):
        return self.inner.support(v).intersect(self.v)


def dyson(beta: float, alpha: float) -> EdgeProbFn:
    return Dyson(float(beta), float(alpha))


def constant(p: float) -> EdgeProbFn:
    return Constant(float(p))


def restricted(inner: EdgeProbFn, v: Interval) -> EdgeProbFn:
    return Restricted(inner, v)


def edge_prob(f: EdgeProbFn, i: int, j: int) -> float:
    if i == j:
        raise GraphError(f"self-loop at vertex {i}")
    return float(f.probs_for(np.array([i]), np.array([j]))[0])


def _skip_positions(rng: np.random.Generator, p: float, m: int, first: int) -> np.ndarray:
    """Occupied offsets among m candidates given the first geometric jump"""
    if p >= 1.0:
        return np.arange(m, dtype=np.int64)
    chunks = [np.array([first - 1], dtype=np.int64)]
    last = first - 1
    while True:
        expected = (m - 1 - last) * p
        batch = int(expected + 4.0 * np.sqrt(expected + 1.0)) + 8
        # float sums cannot wrap around when p is tiny
        candidates = last + np.cumsum(rng.geometric(p, size=batch).astype(float))
        inside = candidates[candidates < m].astype(np.int64)
        chunks.append(inside)
        if len(inside) < batch:
            break
        last = int(candidates[-1])
    return np.concatenate(chunks)


def sample_bernoulli(v: Interval, f: EdgeProbFn, s: Seed) -> Graph:
    """Independent edges, generated distance by distance with geometric jumps"""
    support = f.support(v)
    n = support.length
    if n < 2:
        return Graph.empty(v)
    rng = s.generator()
    p = np.clip(f.distance_probs(n - 1), 0.0, 1.0)
    m = n - np.arange(1, n, dtype=np.int64)

    # first jump for every distance at once; most long distances stay empty
    first = np.full(n - 1, np.iinfo(np.int64).max, dtype=np.int64)
    live = p > 0
    first[live] = rng.geometric(p[live])
    hit = np.nonzero(first <= m)[0]

    chunks = []
    for k in hit.tolist():
        left = support.lo + _skip_positions(rng, float(p[k]), int(m[k]), int(first[k]))
        chunks.append(np.column_stack([left, left + k + 1]))
    if not chunks:
        return Graph.empty(v)
    return Graph(v, np.concatenate(chunks))


@dataclass(frozen=True)
class CoupledSample:
    """Graph at beta_max with an activation beta per edge.

    {e : activation[e] <= beta} has the exact Dyson law at every beta <= beta_max,
    and the graphs are nested in beta.
    """

    graph: Graph
    activation: np.ndarray
    beta_max: float

    def at(self, beta: float) -> Graph:
        if beta > self.beta_max:
            raise ParameterError(f"beta <= beta_max violated ({beta} > {self.beta_max})")
        return Graph(self.graph.vertices, self.graph.edges[self.activation <= beta])

    def order(self) -> np.ndarray:
        return np.argsort(self.activation, kind='stable')


def coupled_bernoulli(v: Interval, beta_max: float, alpha: float, s: Seed) -> CoupledSample:
    g = sample_bernoulli(v, dyson(beta_max, alpha), s)
    rng = s.spawn(1).generator()
    coupling = (g.edges[:, 1] - g.edges[:, 0]).astype(float) ** -alpha
    p_max = -np.expm1(-beta_max * coupling)
    # exponential clock conditioned to ring before beta_max
    u = rng.random(g.num_edges)
    activation = -np.log1p(-u * p_max) / coupling
    return CoupledSample(g, np.minimum(activation, beta_max), float(beta_max))


def fk_weight(g: Graph, f: EdgeProbFn, q: float) -> float:
    """q^omega(g) times the Bernoulli probability of g, over all pairs of g.vertices"""
    pairs, probs = f.pair_probs(g.vertices)
    present = g.edge_set()
    is_open = np.array([(int(i), int(j)) in present for i, j in pairs], dtype=bool)
    bernoulli = float(np.where(is_open, probs, 1.0 - probs).prod())
    return q ** clusters(g).omega * bernoulli


def fk_exact_distribution(v: Interval, f: EdgeProbFn, q: float) -> DiscreteGraphLaw:
    """Normalized FK weights over every subgraph of v"""
    num_pairs = v.num_pairs()
    if num_pairs > Settings.ENUMERATION_MAX_PAIRS:
        raise EnumerationLimitError(
            f"enumeration limit: {num_pairs} pairs > {Settings.ENUMERATION_MAX_PAIRS}"
        )
    pairs, probs = f.pair_probs(v)
    states = np.arange(1 << num_pairs, dtype=np.int64)
    bits = ((states[:, None] >> np.arange(num_pairs)) & 1).astype(bool)
    weights = np.where(bits, probs, 1.0 - probs).prod(axis=1)
    if q != 1.0:
        weights = weights * float(q) ** omega_per_state(v, pairs)
    return DiscreteGraphLaw([tuple(pair) for pair in pairs.tolist()], weights / weights.sum())


def heat_bath_open_probability(p: float, q: float, connected: bool) -> float:
    """Probability the heat-bath update leaves a pair open"""
    if connected or p >= 1.0:
        return p
    return p / (p + q * (1.0 - p))


@njit(cache=True)
def _link(i, j, nbr, deg):
    nbr[i, deg[i]] = j
    deg[i] += 1
    nbr[j, deg[j]] = i
    deg[j] += 1


@njit(cache=True)
def _drop(x, y, nbr, deg):
    for t in range(deg[x]):
        if nbr[x, t] == y:
            deg[x] -= 1
            nbr[x, t] = nbr[x, deg[x]]
            return


@njit(cache=True)
def _unlink(i, j, nbr, deg):
    _drop(i, j, nbr, deg)
    _drop(j, i, nbr, deg)


@njit(cache=True)
def _grow_level(queue, head, tail, nbr, deg, own, other, stamp):
    """Expand one breadth-first level; found is True once the other side is reached"""
    end = tail
    while head < end:
        x = queue[head]
        head += 1
        for t in range(deg[x]):
            y = nbr[x, t]
            if other[y] == stamp:
                return head, tail, True
            if own[y] != stamp:
                own[y] = stamp
                queue[tail] = y
                tail += 1
    return head, tail, False


@njit(cache=True)
def _joined(i, j, nbr, deg, seen_a, seen_b, queue_a, queue_b, stamp):
    """Two-ended breadth-first search, always growing the smaller frontier"""
    if i == j:
        return True
    seen_a[i] = stamp
    seen_b[j] = stamp
    queue_a[0] = i
    queue_b[0] = j
    head_a, tail_a, head_b, tail_b = 0, 1, 0, 1
    while head_a < tail_a and head_b < tail_b:
        if tail_a - head_a <= tail_b - head_b:
            head_a, tail_a, found = _grow_level(queue_a, head_a, tail_a, nbr, deg, seen_a, seen_b, stamp)
        else:
            head_b, tail_b, found = _grow_level(queue_b, head_b, tail_b, nbr, deg, seen_b, seen_a, stamp)
        if found:
            return True
    return False


@njit(cache=True)
def _heat_bath_sweep(left, right, p, p_isolated, uniforms, is_open, nbr, deg, seen_a, seen_b,
                     queue_a, queue_b, stamp):
    for k in range(len(left)):
        i, j = left[k], right[k]
        if is_open[k]:
            _unlink(i, j, nbr, deg)
            is_open[k] = False
        threshold = p[k]
        # p_isolated < p only when q > 1 and 0 < p < 1
        if p_isolated[k] < threshold:
            stamp += 1
            if not _joined(i, j, nbr, deg, seen_a, seen_b, queue_a, queue_b, stamp):
                threshold = p_isolated[k]
        if uniforms[k] < threshold:
            _link(i, j, nbr, deg)
            is_open[k] = True
    return stamp


class HeatBathChain:
    """Single-bond heat-bath chain for the FK measure, lexicographic sweeps.

    The state lives in flat arrays indexed by vertex offset from v.lo so that a
    sweep runs compiled; one uniform per pair is drawn from the seeded
    generator before each sweep.
    """

    def __init__(self, v: Interval, f: EdgeProbFn, q: float, s: Seed, start: Optional[Graph] = None):
        if q < 1:
            raise ParameterError(f"q >= 1 violated (q={q})")
        self.vertices = v
        self.q = float(q)
        self.pairs, probs = f.pair_probs(v)
        self.p = np.clip(probs, 0.0, 1.0)
        self.p_isolated = np.where((self.q > 1) & (self.p > 0) & (self.p < 1),
                                   self.p / (self.p + self.q * (1.0 - self.p)), self.p)
        self.left = self.pairs[:, 0] - v.lo
        self.right = self.pairs[:, 1] - v.lo
        self.rng = s.generator()
        n = v.length
        self.open = np.zeros(len(self.pairs), dtype=np.bool_)
        self._nbr = np.zeros((n, max(n - 1, 1)), dtype=np.int64)
        self._deg = np.zeros(n, dtype=np.int64)
        self._seen_a = np.zeros(n, dtype=np.int64)
        self._seen_b = np.zeros(n, dtype=np.int64)
        self._queue_a = np.zeros(n, dtype=np.int64)
        self._queue_b = np.zeros(n, dtype=np.int64)
        self._stamp = 0
        if start is not None:
            if start.vertices != v:
                raise GraphError(f"start graph on {start.vertices}, chain on {v}")
            # lexicographic pair index of (i, j), offsets a < b
            a, b = start.edges[:, 0] - v.lo, start.edges[:, 1] - v.lo
            for k in (a * (2 * n - a - 1) // 2 + (b - a - 1)).tolist():
                _link(self.left[k], self.right[k], self._nbr, self._deg)
                self.open[k] = True

    def connected(self, i: int, j: int) -> bool:
        self._stamp += 1
        lo = self.vertices.lo
        return bool(_joined(i - lo, j - lo, self._nbr, self._deg, self._seen_a, self._seen_b,
                            self._queue_a, self._queue_b, self._stamp))

    def sweep(self) -> None:
        uniforms = self.rng.random(len(self.pairs))
        self._stamp = _heat_bath_sweep(self.left, self.right, self.p, self.p_isolated, uniforms, self.open,
                                       self._nbr, self._deg, self._seen_a, self._seen_b,
                                       self._queue_a, self._queue_b, self._stamp)

    def state_index(self) -> int:
        """Bit k set when pairs[k] is open (DiscreteGraphLaw convention)"""
        return int(np.dot(self.open.astype(np.int64), 1 << np.arange(len(self.pairs), dtype=np.int64)))

    def graph(self) -> Graph:
        return Graph(self.vertices, self.pairs[self.open])

    def states(self, kept: int, burn_in: int = 0, thin: int = 1) -> Iterator[int]:
        for _ in range(burn_in):
            self.sweep()
        for _ in range(kept):
            for _ in range(thin):
                self.sweep()
            yield self.state_index()


def fk_sample_mcmc(v: Interval, f: EdgeProbFn, q: float, sweeps: int, s: Seed,
                   start: Optional[Graph] = None) -> Graph:
    """State of the heat-bath chain after `sweeps` sweeps from the empty graph"""
    if sweeps < 1:
        raise ParameterError(f"sweeps >= 1 violated (sweeps={sweeps})")
    chain = HeatBathChain(v, f, q, s, start)
    for _ in range(sweeps):
        chain.sweep()
    return chain.graph()


def sample_site_bond(v: Interval, site_retention: float, f: EdgeProbFn, s: Seed) -> Graph:
    """Vertices kept with probability lambda, bonds only between kept vertices"""
    if not 0.0 <= site_retention <= 1.0:
        raise ParameterError(f"0 <= lambda <= 1 violated (lambda={site_retention})")
    kept = site_bond_retained(v, site_retention, s)
    bonds = sample_bernoulli(v, f, s.spawn(1))
    e = bonds.edges
    mask = kept[e[:, 0] - v.lo] & kept[e[:, 1] - v.lo]
    return Graph(v, e[mask])


def site_bond_retained(v: Interval, site_retention: float, s: Seed) -> np.ndarray:
    """The retained-vertex mask sample_site_bond uses for the same seed"""
    return s.spawn(0).generator().random(v.length) < site_retention


def sprinkle(g: Graph, delta: float, alpha: float, s: Seed) -> Graph:
    """G ∪ H with H ~ Bernoulli(dyson(delta, alpha)) independent of G"""
    if delta < 0:
        raise ParameterError(f"delta >= 0 violated (delta={delta})")
    if delta == 0:
        return g
    return union_graphs(g, sample_bernoulli(g.vertices, dyson(delta, alpha), s))


def sample_model(params: ModelParams, v: Interval, s: Seed, f: Optional[EdgeProbFn] = None,
                 sweeps: Optional[int] = None) -> Graph:
    """G ~ nu_beta^V: exact at q = 1, heat-bath MCMC otherwise"""
    f = f or params.edge_prob_fn()
    if params.q == 1.0:
        return sample_bernoulli(v, f, s)
    if v.length > Settings.FK_MAX_VERTICES:
        raise InfeasibleScaleError(
            f"FK sampling at q={params.q} limited to {Settings.FK_MAX_VERTICES} vertices, got {v.length}"
        )
    if sweeps is None:
        sweeps = Settings.MCMC_SWEEPS + Settings.MCMC_BURN_IN
    return fk_sample_mcmc(v, f, params.q, sweeps, s)
