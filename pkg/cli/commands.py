"""
Subcommand handlers and the run() entry point
"""
from typing import Callable, Dict, List, Optional
import numpy as np
from cli.config import RunConfig
from cli.writers import RowWriter
from config.settings import Settings
from core.dominance import CorpusCase, certify_sprinkle, check_corpus, default_corpus
from core.errors import DysonError, InfeasibleScaleError
from core.estimators import Side, estimate_beta_c, lemma2_experiment
from core.graph import Graph, Interval, clusters
from core.models import (ModelParams, fk_sample_mcmc, sample_bernoulli, sample_model,
                         sample_site_bond, sprinkle)
from core.renorm import (BlockPartition, CoarseGraphSpec, build_scaled_schedule, build_schedule,
                         coarse_edge_prob_lb, coarse_graph, find_padding, induction_step_experiment,
                         is_good_partition)
from core.rng import Seed
from utils.file_utils import FileUtils
from utils.logger import logger


def _params(config: RunConfig) -> ModelParams:
    return ModelParams(config.alpha, config.beta, config.q, config.delta)


def _seed(config: RunConfig) -> Seed:
    return Seed(config.seed, config.stream)


def _sides(config: RunConfig) -> List[Side]:
    if config.side == 'both':
        return [Side.ONE_SIDED, Side.TWO_SIDED]
    return [Side.parse(config.side)]


def cmd_sample(config: RunConfig) -> Optional[List[dict]]:
    """Writes one graph in the text graph format instead of rows"""
    params, s = _params(config), _seed(config)
    domain = _sides(config)[0].domain(config.size)
    f = params.edge_prob_fn()
    if config.model == 'bernoulli':
        g = sample_bernoulli(domain, f, s)
    elif config.model == 'fk':
        if domain.length > Settings.FK_MAX_VERTICES:
            raise InfeasibleScaleError(f"FK sampling limited to {Settings.FK_MAX_VERTICES} vertices")
        sweeps = Settings.MCMC_SWEEPS + Settings.MCMC_BURN_IN if config.sweeps is None else config.sweeps
        g = fk_sample_mcmc(domain, f, config.q, sweeps, s)
    elif config.model == 'site-bond':
        g = sample_site_bond(domain, config.site_retention, f, s)
    else:
        g = sprinkle(sample_model(params, domain, s.spawn(0), sweeps=config.sweeps),
                     config.delta, config.alpha, s.spawn(1))
    logger.info(f"Sampled {config.model} graph on {domain} with {g.num_edges} edges (seed {s})")

    if config.out is None:
        print(g.to_text(), end='')
    else:
        FileUtils.write_graph(config.out, g)
    return None


def cmd_clusters(config: RunConfig) -> List[dict]:
    g = FileUtils.read_graph(config.graph)
    window = Interval.parse(config.window) if config.window else g.vertices
    partition = clusters(g)
    return [{
        'graph': str(config.graph), 'vertices': str(g.vertices), 'edges': g.num_edges, 'window': str(window),
        'omega': partition.omega, 'largest': partition.largest_size(),
        'largest_induced': partition.largest_induced_size(window),
    }]


def cmd_lemma2(config: RunConfig) -> List[dict]:
    report = lemma2_experiment(_params(config), config.gamma, config.sizes, config.replicas, _seed(config),
                               workers=config.threads)
    if not report.non_decreasing():
        logger.warning("Goodness rates decrease in N beyond their Wilson intervals")
    return report.rows(config.q)


def cmd_betac(config: RunConfig) -> List[dict]:
    rows = []
    for index, side in enumerate(_sides(config)):
        estimate = estimate_beta_c(side, config.alpha, config.q, config.sizes, config.betas, config.replicas,
                                   config.proxy, _seed(config).spawn(index), workers=config.threads)
        rows.extend({'kind': 'grid', 'proxy': estimate.proxy, **row} for row in estimate.rows)
        rows.extend(
            {'kind': 'crossing', 'side': side.value, 'alpha': config.alpha, 'q': config.q, 'proxy': estimate.proxy,
             'M': m, 'beta': crossing, 'proxy_rate': Settings.CROSSING_LEVEL}
            for m, crossing in zip(estimate.sizes, estimate.crossings)
        )
        rows.append({'kind': 'estimate', 'side': side.value, 'alpha': config.alpha, 'q': config.q,
                     'proxy': estimate.proxy, 'M': estimate.sizes[-1], 'beta': estimate.estimate,
                     'ci_lo': estimate.interval[0], 'ci_hi': estimate.interval[1]})
        logger.info(f"beta_c({side.value}) ~ {estimate.estimate:.5f} "
                    f"[{estimate.interval[0]:.5f}, {estimate.interval[1]:.5f}]")
    return rows


def cmd_coarse(config: RunConfig) -> List[dict]:
    """Coarse graph over the largest clusters of good blocks of one sampled instance"""
    params, s = _params(config), _seed(config)
    domain = Interval(0, config.size)
    partition = BlockPartition(config.block, domain)
    g = sample_model(params, domain, s.spawn(0), sweeps=config.sweeps)
    h = sample_bernoulli(domain, params.sprinkle_fn(), s.spawn(1))
    base = clusters(g)

    block_of = partition.index_of(h.edges)
    inner = block_of[:, 0] == block_of[:, 1]
    sets, labels = [], []
    for k, block in zip(partition.indices, partition.blocks):
        part = base.with_edges(h.edges[inner & (block_of[:, 0] == k)])
        if not is_good_partition(part, block, config.gamma):
            continue
        ids, _, counts = part.induced_sizes(block)
        best = ids[int(np.argmax(counts))]
        labels_in_block = part.labels[block.lo - domain.lo:block.hi - domain.lo]
        sets.append(frozenset(int(v) + block.lo for v in np.nonzero(labels_in_block == best)[0]))
        labels.append(k)
    logger.info(f"{len(sets)} good blocks of {len(partition.blocks)}")

    spec = CoarseGraphSpec.from_blocks(sets, labels, config.block)
    coarse = coarse_graph(Graph(domain, h.edges[~inner]), spec)
    present = coarse.edge_set()
    rows = []
    for a in range(spec.size):
        for b in range(a + 1, spec.size):
            d_ij = spec.bound(a, b)
            rows.append({
                'i': a, 'j': b, 'block_i': labels[a], 'block_j': labels[b],
                'size_i': len(spec.sets[a]), 'size_j': len(spec.sets[b]), 'd_ij': d_ij,
                'edge': (a, b) in present,
                'p_lower_bound': coarse_edge_prob_lb(config.delta, len(spec.sets[a]), len(spec.sets[b]),
                                                     d_ij, config.alpha),
            })
    return rows


def _schedule(config: RunConfig):
    pad = config.pad or 0
    if config.c_values:
        return build_scaled_schedule(config.effective_gamma_prime, config.gamma, config.alpha, config.epsilon,
                                     config.m1, config.c_values, pad)
    return build_schedule(config.effective_gamma_prime, config.gamma, config.alpha, config.epsilon, config.c0,
                          config.m1, pad, config.n_max)


def cmd_schedule(config: RunConfig) -> List[dict]:
    schedule = _schedule(config)
    return [{**row, 'eps_1': schedule.epsilon_1, 'L': schedule.L} for row in schedule.rows()]


def cmd_induction(config: RunConfig) -> List[dict]:
    params, s = _params(config), _seed(config)
    schedule = _schedule(config)
    if config.pad is None:
        pad = find_padding(params, schedule.M1, config.gamma, schedule.epsilon_1, config.replicas, s.spawn(0),
                           workers=config.threads)
        schedule = schedule.with_padding(pad)
    report = induction_step_experiment(params, schedule, config.n, config.replicas, s.spawn(1),
                                       workers=config.threads)
    header = {'n': report.n, 'M_prev': report.m_prev, 'c_n': report.c_n, 'L': schedule.L}
    for row in report.rows():
        if row['holds'] is False:
            logger.warning(f"Bound not met for {row['quantity']}: {row['empirical']} vs {row['bound']}")
    return [{**header, **row} for row in report.rows()]


def cmd_dominate(config: RunConfig) -> List[dict]:
    if config.corpus:
        cases = [CorpusCase.parse(line) for line in FileUtils.read_corpus_lines(config.corpus)]
    else:
        cases = default_corpus(config.beta, config.alpha)
    rows = check_corpus(cases, config.threads)

    if config.delta > 0:
        universes = sorted({(c.w.lo, c.w.hi, c.q, c.beta, c.alpha) for c in cases})
        for lo, hi, q, beta, alpha in universes:
            w = Interval(lo, hi)
            first, second = certify_sprinkle(w, beta, config.delta, alpha, q)
            rows.append({'w': str(w), 'v': str(w), 'q': q, 'beta': beta, 'alpha': alpha,
                         'condition': f"sprinkle:{config.delta:g}", 'dominated': bool(first and second),
                         'gap': max(first.gap, second.gap)})
    failed = sum(not row['dominated'] for row in rows)
    logger.info(f"Dominance corpus: {len(rows) - failed} of {len(rows)} certified")
    return rows


HANDLERS: Dict[str, Callable[[RunConfig], Optional[List[dict]]]] = {
    'sample': cmd_sample,
    'clusters': cmd_clusters,
    'lemma2': cmd_lemma2,
    'betac': cmd_betac,
    'coarse': cmd_coarse,
    'schedule': cmd_schedule,
    'induction': cmd_induction,
    'dominate': cmd_dominate,
}


def run(config: RunConfig) -> int:
    """Execute one command; 0 on success, 2 on a violated constraint, 1 otherwise"""
    logger.info(f"Running {config.command} (seed {config.seed}:{config.stream}, config {config.config_hash()})")
    try:
        rows = HANDLERS[config.command](config)
        if rows is not None:
            provenance = {'seed': config.seed, 'stream': config.stream, 'config_hash': config.config_hash()}
            RowWriter(config.command, config.format, provenance).write(rows, config.out)
        return 0
    except DysonError as e:
        logger.error(f"{config.command} failed: {e}")
        return 2
    except Exception as e:
        logger.exception(f"Unexpected error in {config.command}: {e}")
        return 1
    finally:
        if config.out is not None:
            FileUtils.remove_partial(config.out)
