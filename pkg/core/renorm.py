"""
Renormalization machinery: block partitions, goodness, the coarse graph,
effective parameters, the scale/error schedule and the induction-step
experiment.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence
import numpy as np
from scipy.special import zeta
from config.settings import Settings
from core.errors import DomainError, GraphError, InfeasibleScaleError, ParameterError
from core.graph import ClusterPartition, Graph, Interval, clusters
from core.models import ModelParams, dyson, sample_bernoulli, sample_model
from core.rng import Seed
from utils.logger import logger
from utils.parallel import replica_map


# Block partitions and goodness

@dataclass(frozen=True)
class BlockPartition:
    """Blocks I_k = [kN, (k+1)N) intersected with the domain"""

    block_length: int
    domain: Interval

    def __post_init__(self):
        if self.block_length < 1:
            raise ParameterError(f"block length N >= 1 violated (N={self.block_length})")

    @property
    def first_index(self) -> int:
        return self.domain.lo // self.block_length

    @property
    def indices(self) -> range:
        if self.domain.length == 0:
            return range(0)
        return range(self.first_index, -(-self.domain.hi // self.block_length))

    @property
    def blocks(self) -> List[Interval]:
        return [self.block(k) for k in self.indices]

    def block(self, k: int) -> Interval:
        n = self.block_length
        return Interval(k * n, (k + 1) * n).intersect(self.domain)

    def index_of(self, vertex) -> np.ndarray:
        return np.asarray(vertex) // self.block_length


def _check_gamma(gamma: float) -> None:
    if not 0 < gamma < 1:
        raise ParameterError(f"0 < gamma < 1 violated (gamma={gamma})")


def is_good_partition(p: ClusterPartition, i: Interval, gamma: float) -> bool:
    """|Ĉ_I| >= |I|^gamma for an already clustered graph"""
    _check_gamma(gamma)
    if i.length == 0:
        raise DomainError("empty domain")
    return p.largest_induced_size(i) >= i.length ** gamma


def is_good(g: Graph, i: Interval, gamma: float) -> bool:
    if i.length == 0:
        raise DomainError("empty domain")
    if not g.vertices.contains(i):
        raise DomainError(f"interval {i} not contained in {g.vertices}")
    return is_good_partition(clusters(g), i, gamma)


def good_blocks(graphs: Sequence[Graph], partition: BlockPartition, gamma: float) -> List[int]:
    """Indices of good blocks; graphs[m] is the graph for the m-th block"""
    blocks = partition.blocks
    if len(graphs) != len(blocks):
        raise GraphError(f"{len(graphs)} graphs for {len(blocks)} blocks")
    return [k for k, g, block in zip(partition.indices, graphs, blocks) if is_good(g, block, gamma)]


# Coarse graph

@dataclass
class CoarseGraphSpec:
    """Disjoint vertex sets S_j indexed 0..|U|-1 with diameter bounds D_ij"""

    sets: List[frozenset]
    labels: Optional[List[int]] = None
    diameter_bounds: Optional[Dict[tuple, int]] = None

    def __post_init__(self):
        self.sets = [frozenset(int(x) for x in s) for s in self.sets]
        if self.labels is None:
            self.labels = list(range(len(self.sets)))
        seen = set()
        for s in self.sets:
            if seen & s:
                raise GraphError("overlapping sets in coarse graph spec")
            seen |= s
        if self.diameter_bounds:
            for (a, b), bound in self.diameter_bounds.items():
                if bound < self.diameter(a, b):
                    raise GraphError(f"D_{a}{b}={bound} is below diam(S_{a} ∪ S_{b})={self.diameter(a, b)}")

    @classmethod
    def from_blocks(cls, sets: Sequence[frozenset], block_indices: Sequence[int], block_length: int):
        """Sets living in blocks of length N, with D_ij = (|i-j|+1)·N"""
        bounds = {
            (a, b): (abs(block_indices[a] - block_indices[b]) + 1) * block_length
            for a in range(len(sets)) for b in range(a + 1, len(sets))
        }
        return cls(list(sets), list(block_indices), bounds)

    @property
    def size(self) -> int:
        return len(self.sets)

    def diameter(self, a: int, b: int) -> int:
        union = self.sets[a] | self.sets[b]
        return max(union) - min(union) if union else 0

    def bound(self, a: int, b: int) -> int:
        if self.diameter_bounds and (min(a, b), max(a, b)) in self.diameter_bounds:
            return self.diameter_bounds[(min(a, b), max(a, b))]
        return self.diameter(a, b)


def coarse_graph(h: Graph, spec: CoarseGraphSpec) -> Graph:
    """Graph on 0..|U|-1 with ij present iff h joins a vertex of S_i to one of S_j"""
    owner = np.full(h.vertices.length, -1, dtype=np.int64)
    for index, s in enumerate(spec.sets):
        members = np.fromiter(s, dtype=np.int64, count=len(s))
        if len(members) and (members.min() < h.vertices.lo or members.max() >= h.vertices.hi):
            raise DomainError(f"set S_{index} leaves the vertex interval {h.vertices}")
        owner[members - h.vertices.lo] = index
    us, vs = h.offsets()
    a, b = owner[us], owner[vs]
    mask = (a >= 0) & (b >= 0) & (a != b)
    return Graph.from_pairs(Interval(0, spec.size), np.column_stack([a[mask], b[mask]]))


def coarse_edge_prob_lb(delta: float, s_i: int, s_j: int, d_ij: int, alpha: float) -> float:
    """1 - exp(-delta |S_i||S_j| D_ij^-alpha)"""
    if d_ij <= 0:
        raise ParameterError(f"D_ij >= 1 violated (D_ij={d_ij})")
    if s_i < 1 or s_j < 1:
        raise ParameterError(f"|S_i|, |S_j| >= 1 violated ({s_i}, {s_j})")
    return float(-np.expm1(-delta * s_i * s_j * float(d_ij) ** -alpha))


def effective_beta(delta: float, n_block: int, gamma: float, alpha: float) -> float:
    """delta · 2^-alpha · N^(2 gamma - alpha)"""
    if 2 * gamma <= alpha:
        raise ParameterError(f"subcritical exponent: 2*gamma > alpha violated ({2 * gamma} <= {alpha})")
    return delta * 2.0 ** -alpha * float(n_block) ** (2 * gamma - alpha)


def coarse_connectivity_q(delta: float, c_n: int, m_prev: int, gamma: float, alpha: float) -> float:
    """Lower bound on coarse edge probabilities between good children"""
    return float(-np.expm1(-delta * float(c_n) ** -alpha * float(m_prev) ** (2 * gamma - alpha)))


def markov_bound(eps_prev: float, d_n: float) -> tuple:
    """(1 - eps/(1-d), whether it is >= 1 - eps(1+2d))"""
    if not 0 < d_n < 0.5:
        raise ParameterError(f"0 < d_n < 1/2 violated (d_n={d_n})")
    if not 0 < eps_prev < 1:
        raise ParameterError(f"0 < eps_prev < 1 violated (eps_prev={eps_prev})")
    bound = 1.0 - eps_prev / (1.0 - d_n)
    return bound, bound >= 1.0 - eps_prev * (1.0 + 2.0 * d_n)


def er_disconnect_bound(k: int, q: float) -> float:
    """2·K·(1-q)^(K-1); may exceed 1, see clamp_probability"""
    if k < 2:
        raise ParameterError(f"K >= 2 violated (K={k})")
    if not 0 <= q <= 1:
        raise ParameterError(f"0 <= q <= 1 violated (q={q})")
    return 2.0 * k * (1.0 - q) ** (k - 1)


def clamp_probability(value: float) -> float:
    return min(1.0, max(0.0, value))


# Schedule

def _exact_fraction(value: float) -> Fraction:
    return Fraction(str(value)).limit_denominator(10**9)


def _int_power(base: int, exponent: Fraction) -> int:
    """ceil(base^exponent) for exponent > 0, exact when the power is an integer"""
    if exponent.denominator == 1:
        return base ** exponent.numerator
    value = float(base) ** float(exponent)
    candidate = math.ceil(value)
    # undo float round-up when an exact integer power exists
    if (candidate - 1) ** exponent.denominator >= base ** exponent.numerator:
        return candidate - 1
    return candidate


def _real_power(base: int, exponent: Fraction) -> float:
    """base^exponent, exact when base is a perfect power of the root"""
    root_degree = exponent.denominator
    root = round(float(base) ** (1.0 / root_degree))
    for r in (root - 1, root, root + 1):
        if r > 0 and r ** root_degree == base:
            return float(Fraction(r) ** exponent.numerator)
    return float(base) ** float(exponent)


def _c_value(n: int, gamma: Fraction, c0: int) -> int:
    return max(_int_power(n, 2 / (1 - gamma)), c0)


@dataclass(frozen=True)
class ProductBound:
    """Certified bracket for log prod_k (1 + 3 d_k)"""

    log_lower: float
    log_upper: float
    depth: int

    @property
    def upper(self) -> float:
        return math.exp(self.log_upper)

    @property
    def relative_width(self) -> float:
        return math.expm1(self.log_upper - self.log_lower)


def infinite_product_bound(gamma: float, c0: int, depth: Optional[int] = None) -> ProductBound:
    """Bracket prod_{k>=1} (1 + 3 d_k) with d_k = c_k^(gamma-1).

    The first `depth` factors are summed in log space, the tail is bounded by
    3·sum d_k above and 3·sum d_k - 4.5·sum d_k^2 below, with
    k^-2 (1 + k^-e)^(gamma-1) <= d_k <= k^-2 past the constant region.
    Without an explicit depth it doubles until the bracket is narrower
    than Settings.PRODUCT_TAIL_TOL.
    """
    g = _exact_fraction(gamma)
    e = 2 / (1 - g)
    # c_k = c0 for k < k0
    k0 = max(1, int(float(c0) ** (1.0 / float(e))))
    while _int_power(k0, e) <= c0:
        k0 += 1
    head_const = (k0 - 1) * math.log1p(3.0 * _real_power(c0, g - 1))

    def bracket(last: int) -> ProductBound:
        ks = np.arange(k0, last + 1, dtype=float)
        c = np.maximum(np.ceil(ks ** float(e)), float(c0))
        head = head_const + float(np.sum(np.log1p(3.0 * c ** (float(g) - 1.0))))
        z2, z4 = float(zeta(2, last + 1)), float(zeta(4, last + 1))
        shrink = (1.0 + float(last + 1) ** -float(e)) ** (float(g) - 1.0)
        return ProductBound(head + 3.0 * shrink * z2 - 4.5 * z4, head + 3.0 * z2, last)

    if depth is not None:
        return bracket(max(depth, k0 - 1))
    last = k0 + 64
    result = bracket(last)
    while result.relative_width >= Settings.PRODUCT_TAIL_TOL:
        if last > Settings.PRODUCT_MAX_TERMS:
            raise ParameterError("product truncation did not converge")
        last *= 2
        result = bracket(last)
    return result


@dataclass(frozen=True)
class RenormSchedule:
    """Scales M_n = M_{n-1} c_n with error levels eps_n = (1 + 3 d_n) eps_{n-1}.

    Sequences are stored 0-based: c[n - 1] is c_n.
    """

    gamma_prime: float
    gamma: float
    alpha: float
    epsilon: float
    epsilon_1: float
    c0: int
    M1: int
    L: int
    n_max: int
    c: tuple = field(default_factory=tuple)
    M: tuple = field(default_factory=tuple)
    d: tuple = field(default_factory=tuple)
    eps: tuple = field(default_factory=tuple)
    proof_form: bool = True

    def c_n(self, n: int) -> int:
        return self.c[n - 1]

    def M_n(self, n: int) -> int:
        return self.M[n - 1]

    def d_n(self, n: int) -> float:
        return self.d[n - 1]

    def eps_n(self, n: int) -> float:
        return self.eps[n - 1]

    def rows(self) -> List[dict]:
        return [
            {'n': n, 'c_n': self.c_n(n), 'M_n': self.M_n(n), 'd_n': self.d_n(n), 'eps_n': self.eps_n(n)}
            for n in range(1, self.n_max + 1)
        ]

    def with_padding(self, pad: int) -> "RenormSchedule":
        if pad < 0:
            raise ParameterError(f"L >= 0 violated (L={pad})")
        return RenormSchedule(**{**self.__dict__, 'L': int(pad)})


def _check_schedule_params(gamma_prime, gamma, alpha, epsilon, M1, n_max, L):
    if not alpha / 2 < gamma_prime:
        raise ParameterError(f"alpha/2 < gamma' violated ({alpha / 2} >= {gamma_prime})")
    if not gamma_prime < gamma:
        raise ParameterError(f"gamma' < gamma violated ({gamma_prime} >= {gamma})")
    if not gamma < 1:
        raise ParameterError(f"gamma < 1 violated (gamma={gamma})")
    if not 0 < epsilon < 1:
        raise ParameterError(f"0 < epsilon < 1 violated (epsilon={epsilon})")
    if M1 < 1 or n_max < 1:
        raise ParameterError(f"M1 >= 1 and n_max >= 1 violated (M1={M1}, n_max={n_max})")
    if L < 0:
        raise ParameterError(f"L >= 0 violated (L={L})")


def _assemble(gamma_prime, gamma, alpha, epsilon, epsilon_1, c0, M1, L, c_values, proof_form):
    g = _exact_fraction(gamma)
    d = [_real_power(c, g - 1) for c in c_values]
    M = [int(M1)]
    eps = [epsilon_1]
    for n in range(2, len(c_values) + 1):
        M.append(M[-1] * c_values[n - 1])
        eps.append((1.0 + 3.0 * d[n - 1]) * eps[-1])
    if max(eps) >= epsilon:
        raise ParameterError(f"eps_n < epsilon violated (max eps_n={max(eps)})")
    return RenormSchedule(gamma_prime, gamma, alpha, epsilon, epsilon_1, int(c0), int(M1), int(L),
                          len(c_values), tuple(c_values), tuple(M), tuple(d), tuple(eps), proof_form)


def build_schedule(gamma_prime: float, gamma: float, alpha: float, epsilon: float, c0: int,
                   M1: int, L: int, n_max: int) -> RenormSchedule:
    """Proof-form schedule: c_n = max{n^(2/(1-gamma)), c0}, eps_1 = eps / prod(1 + 3 d_k)"""
    _check_schedule_params(gamma_prime, gamma, alpha, epsilon, M1, n_max, L)
    if c0 < 1:
        raise ParameterError(f"c0 >= 1 violated (c0={c0})")
    g = _exact_fraction(gamma)
    c_values = [_c_value(n, g, int(c0)) for n in range(1, n_max + 1)]
    product = infinite_product_bound(gamma, int(c0))
    epsilon_1 = epsilon / product.upper
    logger.info(f"Schedule: eps_1={epsilon_1:.6g} (product bracket width {product.relative_width:.2e}, "
                f"depth {product.depth})")
    return _assemble(gamma_prime, gamma, alpha, epsilon, epsilon_1, c0, M1, L, c_values, True)


def build_scaled_schedule(gamma_prime: float, gamma: float, alpha: float, epsilon: float, M1: int,
                          c_values: Sequence[int], L: int = 0) -> RenormSchedule:
    """Desk-scale schedule with explicit c_1..c_nmax and a finite error product"""
    _check_schedule_params(gamma_prime, gamma, alpha, epsilon, M1, len(c_values), L)
    if any(c < 2 for c in c_values):
        raise ParameterError("c_n >= 2 violated in scaled schedule")
    g = _exact_fraction(gamma)
    product = math.prod(1.0 + 3.0 * _real_power(int(c), g - 1) for c in c_values)
    return _assemble(gamma_prime, gamma, alpha, epsilon, epsilon / product, min(c_values), M1, L,
                     [int(c) for c in c_values], False)


# Experiments

def _good_rate_replica(task) -> bool:
    params, m1, gamma, pad, seed = task
    block = Interval(0, m1)
    g = sample_model(params, block.padded(pad), seed.spawn(0))
    h = sample_bernoulli(block, dyson(params.delta, params.alpha), seed.spawn(1))
    return is_good_partition(clusters(g).with_edges(h.edges), block, gamma)


def base_case_rate(params: ModelParams, m1: int, gamma: float, pad: int, replicas: int, s: Seed,
                   workers: int = 1) -> float:
    """Fraction of replicas where I = [0, M1) is good in G ∪ H[I], G on I±L"""
    tasks = [(params, m1, gamma, pad, s.spawn(r)) for r in range(replicas)]
    return float(np.mean(replica_map(_good_rate_replica, tasks, workers)))


def find_padding(params: ModelParams, m1: int, gamma: float, epsilon_1: float, replicas: int, s: Seed,
                 max_pad: int = 1 << 16, workers: int = 1) -> int:
    """Smallest L in 0, 1, 2, 4, ... whose base-case goodness rate exceeds 1 - eps_1"""
    pad = 0
    while pad <= max_pad:
        rate = base_case_rate(params, m1, gamma, pad, replicas, s, workers)
        logger.info(f"Padding L={pad}: base-case goodness rate {rate:.4f}")
        if rate > 1.0 - epsilon_1:
            return pad
        pad = 1 if pad == 0 else 2 * pad
    raise InfeasibleScaleError(f"no padding L <= {max_pad} reaches goodness rate {1.0 - epsilon_1}")


@dataclass
class InductionTally:
    """Per-replica outcome of the induction-step experiment, mergeable by addition"""

    replicas: int = 0
    good_children: int = 0
    k_counts: Dict[int, int] = field(default_factory=dict)
    k_large: int = 0
    connected_given_large: int = 0
    er_bound_sum: float = 0.0
    er_bound_samples: int = 0
    big_cluster: int = 0
    chain_violations: int = 0

    def merge(self, other: "InductionTally") -> "InductionTally":
        counts = dict(self.k_counts)
        for k, v in other.k_counts.items():
            counts[k] = counts.get(k, 0) + v
        return InductionTally(
            self.replicas + other.replicas,
            self.good_children + other.good_children,
            counts,
            self.k_large + other.k_large,
            self.connected_given_large + other.connected_given_large,
            self.er_bound_sum + other.er_bound_sum,
            self.er_bound_samples + other.er_bound_samples,
            self.big_cluster + other.big_cluster,
            self.chain_violations + other.chain_violations,
        )


@dataclass
class InductionReport:
    n: int
    m_prev: int
    c_n: int
    m_n: int
    gamma: float
    d_n: float
    q_coarse: float
    tally: InductionTally

    @property
    def child_good_rate(self) -> float:
        return self.tally.good_children / (self.tally.replicas * self.c_n)

    @property
    def eps_prev(self) -> float:
        return 1.0 - self.child_good_rate

    @property
    def k_large_rate(self) -> float:
        return self.tally.k_large / self.tally.replicas

    @property
    def markov(self) -> tuple:
        """Markov bound on P(K >= c_n^gamma) from the observed bad-child rate"""
        if not (0 < self.d_n < 0.5 and 0 < self.eps_prev < 1):
            return float('nan'), None
        bound, _ = markov_bound(self.eps_prev, self.d_n)
        return bound, self.k_large_rate >= bound

    @property
    def connected_rate(self) -> float:
        if self.tally.k_large == 0:
            return float('nan')
        return self.tally.connected_given_large / self.tally.k_large

    @property
    def er_bound(self) -> float:
        if self.tally.er_bound_samples == 0:
            return float('nan')
        return self.tally.er_bound_sum / self.tally.er_bound_samples

    @property
    def big_cluster_rate(self) -> float:
        return self.tally.big_cluster / self.tally.replicas

    @property
    def implication_rhs(self) -> float:
        return 1.0 - self.eps_prev * (1.0 + 3.0 * self.d_n)

    @property
    def joint_rate(self) -> float:
        """P(K >= c_n^gamma and coarse graph connected)"""
        return self.tally.connected_given_large / self.tally.replicas

    def rows(self) -> List[dict]:
        markov, markov_holds = self.markov
        disconnected = 1.0 - self.connected_rate if self.tally.k_large else float('nan')
        er_holds = None if math.isnan(disconnected) or math.isnan(self.er_bound) else disconnected <= self.er_bound
        return [
            {'quantity': 'child_good_rate', 'empirical': self.child_good_rate, 'bound': float('nan'), 'holds': None},
            {'quantity': 'k_mean', 'empirical': sum(k * v for k, v in self.tally.k_counts.items()) / self.tally.replicas,
             'bound': float('nan'), 'holds': None},
            {'quantity': 'p_k_large', 'empirical': self.k_large_rate, 'bound': markov, 'holds': markov_holds},
            {'quantity': 'p_coarse_disconnected', 'empirical': disconnected, 'bound': self.er_bound, 'holds': er_holds},
            {'quantity': 'p_big_cluster', 'empirical': self.big_cluster_rate, 'bound': self.implication_rhs,
             'holds': self.big_cluster_rate >= self.implication_rhs},
            {'quantity': 'p_joint_lower', 'empirical': self.joint_rate, 'bound': self.big_cluster_rate,
             'holds': self.joint_rate <= self.big_cluster_rate},
            {'quantity': 'chain_violations', 'empirical': float(self.tally.chain_violations), 'bound': 0.0,
             'holds': self.tally.chain_violations == 0},
        ] + [
            {'quantity': f'k_count_{k}', 'empirical': float(v), 'bound': float('nan'), 'holds': None}
            for k, v in sorted(self.tally.k_counts.items())
        ]


def _induction_replica(task) -> InductionTally:
    params, m_prev, c_n, gamma, pad, q_coarse, seed = task
    m_n = m_prev * c_n
    block = Interval(0, m_n)
    g = sample_model(params, block.padded(pad), seed.spawn(0))
    h = sample_bernoulli(block, dyson(params.delta, params.alpha), seed.spawn(1))
    base = clusters(g)

    child_of = BlockPartition(m_prev, block).index_of(h.edges)
    inner = child_of[:, 0] == child_of[:, 1]
    threshold = m_prev ** gamma
    sets, good = [], []
    for j in range(c_n):
        child = Interval(j * m_prev, (j + 1) * m_prev)
        part = base.with_edges(h.edges[inner & (child_of[:, 0] == j)])
        ids, _, counts = part.induced_sizes(child)
        best = int(np.argmax(counts))
        if counts[best] > threshold:
            good.append(j)
            offset = child.lo - part.vertices.lo
            sub = part.labels[offset:offset + child.length]
            sets.append(frozenset(int(v) + child.lo for v in np.nonzero(sub == ids[best])[0]))

    k = len(good)
    tally = InductionTally(replicas=1, good_children=k, k_counts={k: 1})
    if k >= c_n ** gamma:
        tally.k_large = 1
        cross = Graph(block, h.edges[~inner])
        coarse = clusters(coarse_graph(cross, CoarseGraphSpec(sets, good)))
        if coarse.omega == 1:
            tally.connected_given_large = 1
        if k >= 2:
            tally.er_bound_sum = clamp_probability(er_disconnect_bound(k, q_coarse))
            tally.er_bound_samples = 1
        largest_coarse = coarse.largest_size()
    else:
        largest_coarse = 0

    big = base.with_edges(h.edges).largest_induced_size(block)
    if big > m_n ** gamma:
        tally.big_cluster = 1
    if largest_coarse and big < largest_coarse * threshold:
        tally.chain_violations = 1
    return tally


def induction_step_experiment(params: ModelParams, schedule: RenormSchedule, n: int, replicas: int, s: Seed,
                              workers: int = 1) -> InductionReport:
    """Monte Carlo check of the induction step's ingredients at scale n"""
    if not 2 <= n <= schedule.n_max:
        raise ParameterError(f"2 <= n <= n_max violated (n={n}, n_max={schedule.n_max})")
    m_prev, c_n = schedule.M_n(n - 1), schedule.c_n(n)
    m_n = m_prev * c_n
    if m_n + 2 * schedule.L > Settings.MAX_EXPERIMENT_SIZE:
        raise InfeasibleScaleError(
            f"M_n + 2L = {m_n + 2 * schedule.L} exceeds {Settings.MAX_EXPERIMENT_SIZE}; use a scaled schedule"
        )
    if params.q != 1.0 and m_n + 2 * schedule.L > Settings.FK_MAX_VERTICES:
        raise InfeasibleScaleError(f"FK sampling at q={params.q} limited to {Settings.FK_MAX_VERTICES} vertices")
    gamma = schedule.gamma
    q_coarse = coarse_connectivity_q(params.delta, c_n, m_prev, gamma, params.alpha)

    logger.info(f"Induction step n={n}: M_(n-1)={m_prev}, c_n={c_n}, L={schedule.L}, {replicas} replicas")
    tasks = [(params, m_prev, c_n, gamma, schedule.L, q_coarse, s.spawn(r)) for r in range(replicas)]
    tally = InductionTally()
    for part in replica_map(_induction_replica, tasks, workers):
        tally = tally.merge(part)
    return InductionReport(n, m_prev, c_n, m_n, gamma, schedule.d_n(n), q_coarse, tally)
