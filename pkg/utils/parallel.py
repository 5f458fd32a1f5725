"""
Replica-parallel execution
"""
from multiprocessing import Pool
from typing import Callable, List, Sequence
from config.settings import Settings
from utils.logger import logger


def replica_map(worker: Callable, tasks: Sequence, workers: int = None) -> List:
    """Run `worker` over `tasks`, preserving task order in the result.

    `worker` must be a module-level function so it can be pickled.
    """
    workers = workers or Settings.THREADS
    if workers <= 1 or len(tasks) <= 1:
        return [worker(task) for task in tasks]

    workers = min(workers, len(tasks))
    logger.debug(f"Running {len(tasks)} replicas on {workers} workers")
    with Pool(processes=workers) as pool:
        return pool.map(worker, tasks)
