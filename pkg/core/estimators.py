"""
Finite-size percolation proxies, cluster density, goodness-rate experiments
and one-sided vs two-sided crossing estimates.
"""
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence
import numpy as np
from scipy.stats import norm
from config.settings import Settings
from core.errors import DomainError, GridTooNarrowError, ParameterError
from core.graph import Graph, Interval, clusters, first_crossing_index
from core.models import EdgeProbFn, ModelParams, coupled_bernoulli, sample_model
from core.rng import Seed
from utils.logger import logger
from utils.parallel import replica_map

MIN_PROXY_VERTICES = 10


class Side(str, Enum):
    ONE_SIDED = 'one_sided'
    TWO_SIDED = 'two_sided'

    @classmethod
    def parse(cls, text: str) -> "Side":
        aliases = {'one': cls.ONE_SIDED, 'two': cls.TWO_SIDED}
        try:
            return aliases.get(text) or cls(text)
        except ValueError:
            raise ParameterError(f"unknown side '{text}' (expected one or two)")

    def domain(self, m: int) -> Interval:
        """[0, M) one-sided, [-M, M) two-sided"""
        if m < 1:
            raise ParameterError(f"M >= 1 violated (M={m})")
        return Interval(0, m) if self is Side.ONE_SIDED else Interval(-m, m)

    def window(self, m: int) -> Interval:
        """Where the proxy is evaluated: [0, M), or M vertices centred on 0"""
        if self is Side.ONE_SIDED:
            return Interval(0, m)
        return Interval(-(m // 2), -(m // 2) + m)


@dataclass(frozen=True)
class Proxy:
    """'span' or 'giant(c)'"""

    kind: str
    fraction: float = 0.0

    _GIANT = re.compile(r'^giant\(\s*([0-9.eE+-]+)\s*\)$')

    @classmethod
    def parse(cls, text: str) -> "Proxy":
        text = text.strip()
        if text == 'span':
            return cls('span')
        match = cls._GIANT.match(text)
        if match:
            try:
                c = float(match.group(1))
            except ValueError:
                c = float('nan')
            if not 0 < c <= 1:
                raise ParameterError(f"0 < c <= 1 violated in proxy '{text}'")
            return cls('giant', c)
        raise ParameterError(f"unknown proxy '{text}' (expected span or giant(c))")

    def required_count(self, window: Interval) -> int:
        """Window vertices a cluster needs for 'giant'; 0 for 'span'"""
        if self.kind == 'span':
            return 0
        return max(1, math.ceil(self.fraction * window.length - 1e-12))

    def __str__(self):
        return 'span' if self.kind == 'span' else f"giant({self.fraction:g})"


def _as_proxy(kind) -> Proxy:
    return kind if isinstance(kind, Proxy) else Proxy.parse(kind)


def _tenth(window: Interval) -> int:
    return max(1, window.length // 10)


def percolation_proxy(g: Graph, kind="span", window: Optional[Interval] = None) -> bool:
    """Finite-size stand-in for an infinite cluster, evaluated on `window`"""
    proxy = _as_proxy(kind)
    window = g.vertices if window is None else window
    if not g.vertices.contains(window):
        raise DomainError(f"window {window} not contained in {g.vertices}")
    if window.length < MIN_PROXY_VERTICES:
        raise DomainError(f"proxy needs at least {MIN_PROXY_VERTICES} vertices, got {window.length}")
    partition = clusters(g)
    if proxy.kind == 'giant':
        return partition.largest_induced_size(window) >= proxy.required_count(window)
    tenth = _tenth(window)
    offset = window.lo - g.vertices.lo
    labels = partition.labels[offset:offset + window.length]
    return bool(np.intersect1d(labels[:tenth], labels[-tenth:]).size)


def wilson_interval(successes: int, n: int, confidence: float = None) -> tuple:
    """Wilson score interval for a binomial proportion"""
    confidence = confidence or Settings.CONFIDENCE
    if n < 1:
        raise ParameterError(f"n >= 1 violated (n={n})")
    if not 0 <= successes <= n:
        raise ParameterError(f"0 <= successes <= n violated ({successes}, {n})")
    z = float(norm.ppf(0.5 + confidence / 2))
    p = successes / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == n else min(1.0, centre + half)
    return lo, hi


def _stderr(values: np.ndarray) -> float:
    if len(values) < 2:
        return 0.0
    return float(np.std(values, ddof=1) / math.sqrt(len(values)))


# Cluster density

@dataclass
class ThetaEstimate:
    side: Side
    m: int
    replicas: int
    mean: float
    stderr: float

    def row(self, params: ModelParams) -> dict:
        return {'side': self.side.value, 'alpha': params.alpha, 'beta': params.beta, 'q': params.q,
                'M': self.m, 'theta': self.mean, 'stderr': self.stderr, 'replicas': self.replicas}


def _theta_replica(task) -> float:
    params, domain, f, seed = task
    g = sample_model(params, domain, seed, f)
    return clusters(g).largest_size() / domain.length


def estimate_theta(params: ModelParams, side: Side, m: int, replicas: int, s: Seed,
                   f: Optional[EdgeProbFn] = None, workers: int = 1) -> ThetaEstimate:
    """Mean and standard error of |Ĉ(G)|/|V| on the side's domain"""
    if replicas < 1:
        raise ParameterError(f"replicas >= 1 violated (replicas={replicas})")
    side = Side.parse(side) if isinstance(side, str) else side
    domain = side.domain(m)
    tasks = [(params, domain, f, s.spawn(r)) for r in range(replicas)]
    values = np.asarray(replica_map(_theta_replica, tasks, workers), dtype=float)
    logger.info(f"theta({side.value}, M={m}, beta={params.beta}) = {values.mean():.5f}")
    return ThetaEstimate(side, m, replicas, float(values.mean()), _stderr(values))


# Goodness rates

@dataclass(frozen=True)
class LemmaPoint:
    n: int
    successes: int
    replicas: int
    interval: tuple

    @property
    def rate(self) -> float:
        return self.successes / self.replicas


@dataclass
class LemmaReport:
    alpha: float
    beta: float
    gamma: float
    points: List[LemmaPoint] = field(default_factory=list)

    @property
    def rates(self) -> List[float]:
        return [point.rate for point in self.points]

    def non_decreasing(self) -> bool:
        """Rates never drop by more than the overlap of consecutive Wilson intervals"""
        return all(b.interval[1] >= a.interval[0] for a, b in zip(self.points, self.points[1:]))

    def rows(self, q: float = 1.0) -> List[dict]:
        return [
            {'alpha': self.alpha, 'beta': self.beta, 'q': q, 'gamma': self.gamma, 'N': point.n,
             'rate': point.rate, 'wilson_lo': point.interval[0], 'wilson_hi': point.interval[1],
             'replicas': point.replicas}
            for point in self.points
        ]


def _lemma_replica(task) -> bool:
    params, n, gamma, f, seed = task
    g = sample_model(params, Interval(0, n), seed, f)
    return clusters(g).largest_size() >= n ** gamma


def lemma2_experiment(params: ModelParams, gamma: float, n_list: Sequence[int], replicas: int, s: Seed,
                      f: Optional[EdgeProbFn] = None, workers: int = 1) -> LemmaReport:
    """Empirical P(|Ĉ_I(G)| >= N^gamma) for G on I = [0, N), per N"""
    if not params.alpha / 2 < gamma < 1:
        raise ParameterError(f"alpha/2 < gamma < 1 violated (alpha={params.alpha}, gamma={gamma})")
    if replicas < 1:
        raise ParameterError(f"replicas >= 1 violated (replicas={replicas})")
    if any(n < 1 for n in n_list):
        raise ParameterError("N >= 1 violated in size list")

    report = LemmaReport(params.alpha, params.beta, gamma)
    for index, n in enumerate(n_list):
        child = s.spawn(index)
        tasks = [(params, int(n), gamma, f, child.spawn(r)) for r in range(replicas)]
        successes = int(sum(replica_map(_lemma_replica, tasks, workers)))
        report.points.append(LemmaPoint(int(n), successes, replicas, wilson_interval(successes, replicas)))
        logger.info(f"Goodness rate at N={n}: {successes}/{replicas}")
    return report


# Crossing estimates

def locate_crossing(grid: Sequence[float], rate_fn: Callable[[float], float], level: float = None) -> tuple:
    """Bisect the grid for the first point whose rate reaches `level`.

    Returns (interpolated beta, {beta: rate} for every evaluated point).
    """
    level = Settings.CROSSING_LEVEL if level is None else level
    grid = [float(b) for b in grid]
    if len(grid) < 2 or any(b >= c for b, c in zip(grid, grid[1:])):
        raise ParameterError("beta grid must hold at least two strictly increasing values")
    seen: Dict[float, float] = {}

    def rate(k: int) -> float:
        if grid[k] not in seen:
            seen[grid[k]] = float(rate_fn(grid[k]))
        return seen[grid[k]]

    lo, hi = 0, len(grid) - 1
    if not (rate(lo) < level <= rate(hi)):
        raise GridTooNarrowError(
            f"grid too narrow: rates {rate(lo):.3f} at beta={grid[lo]} and {rate(hi):.3f} at beta={grid[hi]} "
            f"do not bracket {level}"
        )
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if rate(mid) >= level:
            hi = mid
        else:
            lo = mid
    r_lo, r_hi = rate(lo), rate(hi)
    beta = grid[lo] + (level - r_lo) / (r_hi - r_lo) * (grid[hi] - grid[lo])
    return beta, seen


@dataclass
class BetaCEstimate:
    side: Side
    alpha: float
    q: float
    sizes: List[int]
    crossings: List[float]
    estimate: float
    interval: tuple
    proxy: str
    replicas: int
    rows: List[dict] = field(default_factory=list)


def _threshold_replica(task) -> float:
    """Smallest grid-free beta at which the proxy holds on one coupled sample"""
    domain, window, beta_max, alpha, need, seed = task
    sample = coupled_bernoulli(domain, beta_max, alpha, seed)
    if 0 < need <= 1:
        return 0.0
    order = sample.order()
    index = first_crossing_index(sample.graph, order, window, _tenth(window), need)
    return float(sample.activation[order[index]]) if index >= 0 else math.inf


def _proxy_replica(task) -> bool:
    params, domain, window, proxy, seed = task
    return percolation_proxy(sample_model(params, domain, seed), proxy, window)


def _check_beta_c_inputs(alpha, q, sizes, grid, replicas):
    ModelParams(alpha, float(grid[-1]) if len(grid) else 0.0, q)
    if len(sizes) < 3:
        raise ParameterError(f"at least 3 sizes required, got {len(sizes)}")
    if replicas < 1:
        raise ParameterError(f"replicas >= 1 violated (replicas={replicas})")
    if len(grid) < 2 or grid[0] < 0:
        raise ParameterError("beta grid needs at least two values >= 0")


def estimate_beta_c(side: Side, alpha: float, q: float, sizes: Sequence[int], beta_grid: Sequence[float],
                    replicas: int, proxy="span", s: Seed = None, workers: int = 1,
                    rate_fn: Optional[Callable[[int, float], float]] = None) -> BetaCEstimate:
    """Proxy crossings of the 1/2 level for each size, and the largest-size extrapolation.

    At q = 1 every replica is one coupled sample across the grid, so proxy rates
    are monotone in beta. At q > 1 each grid point is sampled with the same
    replica seeds. `rate_fn(M, beta)` replaces sampling altogether.
    """
    side = Side.parse(side) if isinstance(side, str) else side
    proxy = _as_proxy(proxy)
    grid = sorted(float(b) for b in beta_grid)
    sizes = [int(m) for m in sizes]
    _check_beta_c_inputs(alpha, q, sizes, grid, replicas)
    s = s or Seed(0)

    crossings, brackets, rows = [], [], []
    for index, m in enumerate(sizes):
        domain, window = side.domain(m), side.window(m)
        if window.length < MIN_PROXY_VERTICES:
            raise DomainError(f"proxy needs at least {MIN_PROXY_VERTICES} vertices, got {window.length}")
        child = s.spawn(index)

        if rate_fn is not None:
            size_rate = lambda beta, m=m: rate_fn(m, beta)
        elif q == 1.0:
            tasks = [(domain, window, grid[-1], alpha, proxy.required_count(window), child.spawn(r))
                     for r in range(replicas)]
            thresholds = np.sort(np.asarray(replica_map(_threshold_replica, tasks, workers)))
            size_rate = lambda beta, t=thresholds: np.searchsorted(t, beta, side='right') / len(t)
        else:
            def size_rate(beta, domain=domain, window=window, child=child):
                params = ModelParams(alpha, beta, q)
                tasks = [(params, domain, window, proxy, child.spawn(r)) for r in range(replicas)]
                return float(np.mean(replica_map(_proxy_replica, tasks, workers)))

        try:
            crossing, seen = locate_crossing(grid, size_rate)
        except GridTooNarrowError as e:
            logger.error(f"M={m} ({side.value}): {e}")
            raise
        evaluated = sorted(seen) if q != 1.0 or rate_fn is not None else grid
        rates = [seen[b] if b in seen else float(size_rate(b)) for b in evaluated]
        if any(b < a for a, b in zip(rates, rates[1:])):
            logger.warning(f"M={m} ({side.value}): proxy rates not monotone in beta: {rates}")
        for beta, r in zip(evaluated, rates):
            rows.append({'side': side.value, 'alpha': alpha, 'q': q, 'M': m, 'beta': beta, 'proxy_rate': r,
                         'stderr': math.sqrt(r * (1 - r) / replicas), 'seed': child.seed, 'stream': child.stream})

        k = int(np.searchsorted(grid, crossing, side='left'))
        brackets.append(grid[min(k, len(grid) - 1)] - grid[max(k - 1, 0)])
        crossings.append(crossing)
        logger.info(f"Crossing at M={m} ({side.value}): beta={crossing:.5f}")

    half_step = max(brackets[-2:]) / 2
    last_two = crossings[-2:]
    interval = (min(last_two) - half_step, max(last_two) + half_step)
    return BetaCEstimate(side, alpha, q, sizes, crossings, crossings[-1], interval, str(proxy), replicas, rows)
