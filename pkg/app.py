"""
dyson-rc: Monte Carlo and exact checks for long-range percolation and
random-cluster models on the integers
"""
import argparse
import sys
from typing import List, Optional
from pydantic import ValidationError
from cli.commands import HANDLERS, run
from cli.config import RunConfig
from config.settings import Settings
from utils.file_utils import FileUtils
from utils.logger import logger

# flag name -> RunConfig field, where they differ
_RENAMED = {'lambda': 'site_retention'}


def _common_flags() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    add = parent.add_argument
    add('--config', type=str, help='flat key=value file; flags win over its values')
    add('--seed', type=int)
    add('--stream', type=int)
    add('--alpha', type=float)
    add('--beta', type=float)
    add('--q', type=float)
    add('--delta', type=float)
    add('--side', choices=['one', 'two', 'both'])
    add('--size', type=int)
    add('--sizes', type=str, help='comma-separated list')
    add('--betas', type=str, help='comma-separated beta grid')
    add('--replicas', type=int)
    add('--proxy', type=str, help='span or giant(c)')
    add('--gamma', type=float)
    add('--gamma-prime', dest='gamma_prime', type=float)
    add('--epsilon', type=float)
    add('--c0', type=int)
    add('--m1', type=int)
    add('--pad', type=int)
    add('--n-max', dest='n_max', type=int)
    add('--n', type=int)
    add('--c-values', dest='c_values', type=str, help='comma-separated c_1..c_nmax')
    add('--block', type=int)
    add('--model', choices=['bernoulli', 'fk', 'site-bond', 'sprinkle'])
    add('--lambda', dest='lambda', type=float, help='site retention probability')
    add('--sweeps', type=int)
    add('--graph', type=str)
    add('--window', type=str, help='lo:hi')
    add('--corpus', type=str)
    add('--out', type=str)
    add('--format', choices=['csv', 'jsonl'])
    add('--threads', type=int)
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='dyson-rc', description=__doc__.strip())
    subparsers = parser.add_subparsers(dest='command', required=True)
    parent = _common_flags()
    helps = {
        'sample': 'sample a Bernoulli, FK, site-bond or sprinkled graph',
        'clusters': 'cluster statistics of a graph file',
        'lemma2': 'goodness rates P(|C_I| >= N^gamma) per N',
        'betac': 'one-sided and two-sided proxy crossings',
        'coarse': 'coarse graph of good blocks on a sampled instance',
        'schedule': 'renormalization scale and error schedule',
        'induction': 'Monte Carlo check of the induction step',
        'dominate': 'exact dominance certificates over a condition corpus',
    }
    for name in HANDLERS:
        subparsers.add_parser(name, parents=[parent], help=helps[name])
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    flags = {_RENAMED.get(k, k): v for k, v in vars(args).items() if k not in ('command', 'config')}
    file_values = FileUtils.read_config(args.config) if args.config else {}
    file_values = {_RENAMED.get(k, k): v for k, v in file_values.items()}
    return RunConfig.from_sources(args.command, file_values, flags)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        Settings.validate()
        config = load_config(args)
    except ValidationError as e:
        for error in e.errors():
            logger.error(f"Invalid configuration: {error['msg']}")
        return 2
    except ValueError as e:
        logger.error(f"Invalid settings: {e}")
        return 2
    except OSError as e:
        logger.error(f"Cannot read configuration: {e}")
        return 2
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
