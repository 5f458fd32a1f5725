"""
Stochastic domination: monotone couplings, conditioned FK laws and an exact
max-flow certifier for laws on small pair universes.
"""
import re
import shlex
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union
import networkx as nx
import numpy as np
from config.settings import Settings
from core.errors import DomainError, DysonError, EnumerationLimitError, GraphError, ParameterError
from core.graph import Graph, Interval, omega_per_state
from core.laws import DiscreteGraphLaw
from core.models import EdgeProbFn, dyson, fk_exact_distribution
from core.rng import Seed
from utils.logger import logger
from utils.parallel import replica_map

FLOW_SCALE = 1 << 40
_PAIR = re.compile(r'^(-?\d+)-(-?\d+)$')


def monotone_coupling(f_lo: EdgeProbFn, f_hi: EdgeProbFn, v: Interval, s: Seed) -> Tuple[Graph, Graph]:
    """Both Bernoulli graphs from one uniform per pair, so low ⊆ high"""
    pairs, p_lo = f_lo.pair_probs(v)
    _, p_hi = f_hi.pair_probs(v)
    bad = np.nonzero(p_lo > p_hi)[0]
    if len(bad):
        i, j = pairs[bad[0]]
        raise ParameterError(f"f_lo <= f_hi violated at pair ({i}, {j}): {p_lo[bad[0]]} > {p_hi[bad[0]]}")
    u = s.generator().random(len(pairs))
    return Graph(v, pairs[u < p_lo]), Graph(v, pairs[u < p_hi])


def sprinkle_edge_identity(beta: float, delta: float, alpha: float, i: int, j: int) -> tuple:
    """(P(ij in G∪H), P(ij in G~), combined <= target) for G ~ beta, H ~ delta, G~ ~ beta + 2 delta"""
    if i == j:
        raise GraphError(f"self-loop at vertex {i}")
    coupling = float(abs(i - j)) ** -alpha
    p_combined = float(-np.expm1(-(beta + delta) * coupling))
    p_target = float(-np.expm1(-(beta + 2 * delta) * coupling))
    return p_combined, p_target, p_combined <= p_target


def sprinkled_law(law: DiscreteGraphLaw, delta: float, alpha: float) -> DiscreteGraphLaw:
    """Exact law of G ∪ H, H independent Bernoulli(dyson(delta, alpha)) on the same pairs"""
    if delta < 0:
        raise ParameterError(f"delta >= 0 violated (delta={delta})")
    out = law.probs.copy()
    states = np.arange(law.num_states, dtype=np.int64)
    for k, (i, j) in enumerate(law.pairs):
        p = float(-np.expm1(-delta * float(j - i) ** -alpha))
        bit = 1 << k
        off = states[(states & bit) == 0]
        moved = out[off] * p
        out[off] -= moved
        out[off | bit] += moved
    return DiscreteGraphLaw(law.pairs, out, tol=1e-9)


# Conditions on pairs outside V

@dataclass(frozen=True)
class Condition:
    """An event on the pairs of W that are not inside V"""

    kind: str
    a: int = -1
    b: int = -1

    KINDS = ('none', 'edge_open', 'edge_closed', 'all_open', 'all_closed', 'connects', 'disconnects')

    @classmethod
    def parse(cls, text: str) -> "Condition":
        kind, _, arg = text.strip().partition(':')
        if kind not in cls.KINDS:
            raise ParameterError(f"unknown condition '{text}'")
        if kind in ('none', 'all_open', 'all_closed'):
            if arg:
                raise ParameterError(f"condition '{kind}' takes no argument")
            return cls(kind)
        match = _PAIR.match(arg)
        if not match:
            raise ParameterError(f"condition '{text}' needs a pair a-b")
        a, b = int(match.group(1)), int(match.group(2))
        if a == b:
            raise GraphError(f"self-loop at vertex {a}")
        return cls(kind, min(a, b), max(a, b))

    def __str__(self):
        if self.kind in ('none', 'all_open', 'all_closed'):
            return self.kind
        return f"{self.kind}:{self.a}-{self.b}"

    def mask(self, law: DiscreteGraphLaw, w: Interval, outside: np.ndarray) -> np.ndarray:
        """Which states of `law` (a law on W) satisfy the condition"""
        bits = law.state_bits()
        if self.kind == 'none':
            return np.ones(law.num_states, dtype=bool)
        if self.kind == 'all_open':
            return bits[:, outside].all(axis=1)
        if self.kind == 'all_closed':
            return ~bits[:, outside].any(axis=1)
        if self.a not in w or self.b not in w:
            raise DomainError(f"condition pair {self.a}-{self.b} outside {w}")
        if self.kind in ('edge_open', 'edge_closed'):
            k = law.pairs.index((self.a, self.b))
            if k not in set(outside.tolist()):
                raise ParameterError(f"condition pair {self.a}-{self.b} lies inside V")
            return bits[:, k] if self.kind == 'edge_open' else ~bits[:, k]

        # connectivity through outside pairs only
        out_pairs = np.asarray([law.pairs[k] for k in outside] + [(self.a, self.b)], dtype=np.int64)
        omega = omega_per_state(w, out_pairs)
        half = 1 << len(outside)
        joined = omega[:half] == omega[half:]
        sub = (bits[:, outside].astype(np.int64) << np.arange(len(outside))).sum(axis=1)
        return joined[sub] if self.kind == 'connects' else ~joined[sub]


def _inside(law: DiscreteGraphLaw, v: Interval) -> np.ndarray:
    return np.asarray([k for k, (i, j) in enumerate(law.pairs) if i in v and j in v], dtype=np.int64)


def conditioned_fk_law(w: Interval, v: Interval, f: EdgeProbFn, q: float,
                       condition: Union[str, Condition, None] = None) -> DiscreteGraphLaw:
    """Exact law of G[V] under the FK measure on W given an event outside V"""
    if not w.contains(v):
        raise DomainError(f"interval {v} not contained in {w}")
    condition = Condition.parse(condition) if isinstance(condition, str) else (condition or Condition('none'))
    law = fk_exact_distribution(w, f, q)
    inside = _inside(law, v)
    outside = np.setdiff1d(np.arange(law.num_pairs), inside)

    weights = law.probs * condition.mask(law, w, outside)
    total = weights.sum()
    if total <= 0:
        raise DysonError(f"zero-probability condition '{condition}'")
    sub = (law.state_bits()[:, inside].astype(np.int64) << np.arange(len(inside))).sum(axis=1)
    probs = np.bincount(sub, weights=weights, minlength=1 << len(inside)) / total
    return DiscreteGraphLaw([law.pairs[k] for k in inside], probs, tol=1e-9)


# Exact dominance certificate

@dataclass
class DominanceResult:
    """Outcome of check_dominance_exact.

    `coupling` maps (low state, high state) to mass when dominated; otherwise
    `upset_generators` are the minimal states of an increasing event with
    P_lo(event) - P_hi(event) = gap > 0.
    """

    dominated: bool
    flow: float
    coupling: Dict[Tuple[int, int], float] = field(default_factory=dict)
    upset_generators: List[int] = field(default_factory=list)
    gap: float = 0.0
    pairs: tuple = ()

    def upset_edges(self) -> List[List[tuple]]:
        return [[pair for k, pair in enumerate(self.pairs) if (state >> k) & 1] for state in self.upset_generators]

    def __bool__(self):
        return self.dominated


def _down_closure(marked: np.ndarray, num_pairs: int) -> np.ndarray:
    down = marked.copy()
    states = np.arange(len(marked), dtype=np.int64)
    for k in range(num_pairs):
        bit = 1 << k
        off = states[(states & bit) == 0]
        down[off] |= down[off | bit]
    return down


def _minimal_states(upset: np.ndarray, num_pairs: int) -> List[int]:
    minimal = []
    for state in np.nonzero(upset)[0].tolist():
        if not any((state >> k) & 1 and upset[state ^ (1 << k)] for k in range(num_pairs)):
            minimal.append(state)
    return minimal


def check_dominance_exact(lo: DiscreteGraphLaw, hi: DiscreteGraphLaw) -> DominanceResult:
    """Decide lo ≺ hi by max flow over the subset relation between configurations"""
    if lo.pairs != hi.pairs:
        raise GraphError("laws live on different pair universes")
    if lo.num_pairs > Settings.DOMINANCE_MAX_PAIRS:
        raise EnumerationLimitError(f"enumeration limit: {lo.num_pairs} pairs > {Settings.DOMINANCE_MAX_PAIRS}")

    lo_cap = np.rint(lo.probs * FLOW_SCALE).astype(np.int64)
    hi_cap = np.rint(hi.probs * FLOW_SCALE).astype(np.int64)
    network = nx.DiGraph()
    network.add_node('source')
    network.add_node('sink')
    for state in np.nonzero(hi_cap)[0].tolist():
        network.add_edge('source', ('hi', state), capacity=int(hi_cap[state]))
        # every submask of the high configuration; edges without capacity are unbounded
        sub = state
        while True:
            if lo_cap[sub]:
                network.add_edge(('hi', state), ('lo', sub))
            if sub == 0:
                break
            sub = (sub - 1) & state
    for state in np.nonzero(lo_cap)[0].tolist():
        network.add_edge(('lo', state), 'sink', capacity=int(lo_cap[state]))

    flow_value, flow_dict = nx.maximum_flow(network, 'source', 'sink')
    needed = min(int(lo_cap.sum()), int(hi_cap.sum()))
    dominated = flow_value >= needed - int(Settings.FEASIBILITY_SLACK * FLOW_SCALE)
    result = DominanceResult(dominated, flow_value / FLOW_SCALE, pairs=lo.pairs)

    if dominated:
        for node, targets in flow_dict.items():
            if isinstance(node, tuple) and node[0] == 'hi':
                for target, amount in targets.items():
                    if amount:
                        result.coupling[(target[1], node[1])] = amount / FLOW_SCALE
        return result

    _, (reachable, _) = nx.minimum_cut(network, 'source', 'sink')
    marked = np.zeros(lo.num_states, dtype=bool)
    for node in reachable:
        if isinstance(node, tuple) and node[0] == 'hi':
            marked[node[1]] = True
    upset = ~_down_closure(marked, lo.num_pairs)
    result.gap = float(lo.probs[upset].sum() - hi.probs[upset].sum())
    result.upset_generators = _minimal_states(upset, lo.num_pairs)
    logger.info(f"Dominance fails: increasing event with {len(result.upset_generators)} generators, "
                f"gap {result.gap:.3e}")
    return result


def certify_sprinkle(v: Interval, beta: float, delta: float, alpha: float, q: float = 1.0) -> tuple:
    """(nu_beta ≺ nu_beta ⊗ eta_delta, nu_beta ⊗ eta_delta ≺ nu_(beta+2 delta)) on v"""
    base = fk_exact_distribution(v, dyson(beta, alpha), q)
    combined = sprinkled_law(base, delta, alpha)
    target = fk_exact_distribution(v, dyson(beta + 2 * delta, alpha), q)
    if q != 1.0:
        logger.warning(f"Sprinkling chain at q={q} is certified at desk scale only")
    return check_dominance_exact(base, combined), check_dominance_exact(combined, target)


# Corpus

@dataclass(frozen=True)
class CorpusCase:
    w: Interval
    v: Interval
    q: float
    beta: float
    alpha: float
    condition: str = 'none'

    @classmethod
    def parse(cls, line: str) -> "CorpusCase":
        """`w=0:4 v=1:3 q=2 beta=1.0 alpha=1.5 condition=edge_open:0-3`"""
        fields = {}
        for token in shlex.split(line, comments=True):
            key, sep, value = token.partition('=')
            if not sep:
                raise ParameterError(f"corpus token '{token}' is not key=value")
            fields[key] = value
        missing = {'w', 'v', 'q', 'beta', 'alpha'} - fields.keys()
        if missing:
            raise ParameterError(f"corpus line misses {', '.join(sorted(missing))}")
        return cls(Interval.parse(fields['w']), Interval.parse(fields['v']), float(fields['q']),
                   float(fields['beta']), float(fields['alpha']), fields.get('condition', 'none'))

    def to_line(self) -> str:
        return (f"w={self.w.lo}:{self.w.hi} v={self.v.lo}:{self.v.hi} q={self.q:g} beta={self.beta:g} "
                f"alpha={self.alpha:g} condition={self.condition}")


def default_corpus(beta: float = 1.0, alpha: float = 1.5) -> List[CorpusCase]:
    """Every outside condition for W of 3 and 4 vertices, V a sub-interval, q in {1, 2}"""
    cases = []
    for w in (Interval(0, 3), Interval(0, 4)):
        for size in range(2, w.length):
            for start in range(w.lo, w.hi - size + 1):
                v = Interval(start, start + size)
                outside = [(i, j) for i, j in w.pairs() if not (i in v and j in v)]
                conditions = ['none', 'all_open', 'all_closed']
                conditions += [f"edge_{state}:{i}-{j}" for i, j in outside for state in ('open', 'closed')]
                conditions += [f"{kind}:{v.lo}-{v.hi - 1}" for kind in ('connects', 'disconnects')]
                for q in (1.0, 2.0):
                    cases.extend(CorpusCase(w, v, q, beta, alpha, c) for c in conditions)
    return cases


def check_case(case: CorpusCase) -> dict:
    f = dyson(case.beta, case.alpha)
    free = fk_exact_distribution(case.v, f, case.q)
    conditioned = conditioned_fk_law(case.w, case.v, f, case.q, case.condition)
    result = check_dominance_exact(free, conditioned)
    return {'w': str(case.w), 'v': str(case.v), 'q': case.q, 'beta': case.beta, 'alpha': case.alpha,
            'condition': case.condition, 'dominated': result.dominated, 'gap': result.gap}


def check_corpus(cases: List[CorpusCase], workers: Optional[int] = 1) -> List[dict]:
    rows = replica_map(check_case, cases, workers)
    failed = [row for row in rows if not row['dominated']]
    if failed:
        logger.warning(f"{len(failed)} of {len(rows)} corpus cases not dominated")
    return rows
