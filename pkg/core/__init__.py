"""Core module for Dyson percolation and random-cluster experiments"""
from .errors import (DysonError, DomainError, GraphError, ParameterError, EnumerationLimitError,
                     GridTooNarrowError, InfeasibleScaleError)
from .rng import Seed
from .graph import (Interval, Graph, ClusterPartition, clusters, largest_cluster, induced_partition,
                    largest_induced, induced_subgraph, union_graphs)
from .laws import DiscreteGraphLaw
from .models import (ModelParams, EdgeProbFn, dyson, constant, restricted, edge_prob, sample_bernoulli,
                     coupled_bernoulli, fk_weight, fk_exact_distribution, fk_sample_mcmc, sample_site_bond,
                     sprinkle, sample_model)
from .renorm import (BlockPartition, RenormSchedule, CoarseGraphSpec, is_good, good_blocks, coarse_graph,
                     coarse_edge_prob_lb, effective_beta, build_schedule, build_scaled_schedule, markov_bound,
                     er_disconnect_bound, induction_step_experiment)
from .estimators import Side, percolation_proxy, estimate_theta, lemma2_experiment, estimate_beta_c
from .dominance import (monotone_coupling, sprinkle_edge_identity, conditioned_fk_law, check_dominance_exact,
                        sprinkled_law)

__all__ = [
    'DysonError', 'DomainError', 'GraphError', 'ParameterError', 'EnumerationLimitError',
    'GridTooNarrowError', 'InfeasibleScaleError',
    'Seed',
    'Interval', 'Graph', 'ClusterPartition', 'clusters', 'largest_cluster', 'induced_partition',
    'largest_induced', 'induced_subgraph', 'union_graphs',
    'DiscreteGraphLaw',
    'ModelParams', 'EdgeProbFn', 'dyson', 'constant', 'restricted', 'edge_prob', 'sample_bernoulli',
    'coupled_bernoulli', 'fk_weight', 'fk_exact_distribution', 'fk_sample_mcmc', 'sample_site_bond',
    'sprinkle', 'sample_model',
    'BlockPartition', 'RenormSchedule', 'CoarseGraphSpec', 'is_good', 'good_blocks', 'coarse_graph',
    'coarse_edge_prob_lb', 'effective_beta', 'build_schedule', 'build_scaled_schedule', 'markov_bound',
    'er_disconnect_bound', 'induction_step_experiment',
    'Side', 'percolation_proxy', 'estimate_theta', 'lemma2_experiment', 'estimate_beta_c',
    'monotone_coupling', 'sprinkle_edge_identity', 'conditioned_fk_law', 'check_dominance_exact',
    'sprinkled_law',
]
