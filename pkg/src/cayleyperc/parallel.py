"""Trial fan-out.

Trials are split into fixed-size chunks that depend only on the trial
count.  Each chunk returns one row per trial and rows are concatenated in
trial order, so the worker count never changes a result.
"""
import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import kernels

WORKERS_ENV = "CAYLEYPERC_WORKERS"
CHUNK = 4096


def default_workers():
    value = os.environ.get(WORKERS_ENV, "1")
    try:
        workers = int(value)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {value!r}")
    if workers < 1:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {value!r}")
    return workers


def field_keys(seed, start, stop):
    """Label-field keys of trials ``start..stop-1`` under master ``seed``."""
    base = np.uint64(kernels.splitmix((seed & kernels.MASK64) ^ kernels.TRIAL_SALT))
    seeds = kernels.fold_np(np.full(stop - start, base, dtype=np.uint64),
                            np.arange(start, stop, dtype=np.int64))
    return kernels.splitmix_np(seeds)


def trial_seed(seed, trial):
    """Seed for :func:`cayleyperc.percolation.sample_labels` in trial ``trial``."""
    return kernels.trial_key(seed, trial)


def map_trials(fn, trials, workers=None, chunk=None):
    """Concatenate ``fn(start, stop)`` over consecutive trial chunks."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    chunk = CHUNK if chunk is None else int(chunk)
    workers = default_workers() if workers is None else int(workers)
    if workers < 1:
        raise ValueError("workers must be >= 1")
    bounds = [(a, min(a + chunk, trials)) for a in range(0, trials, chunk)]
    if workers == 1 or len(bounds) == 1:
        parts = [fn(a, b) for a, b in bounds]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, [a for a, _ in bounds], [b for _, b in bounds]))
    return np.concatenate(parts)
