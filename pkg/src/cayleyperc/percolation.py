"""Bernoulli bond percolation on Cayley balls through the monotone coupling.

All configurations come from one uniform label per edge: the edge is open
at parameter p iff its label is below p.  A boundary-touching cluster at
radius R stands in for an infinite cluster.

The label field is a hash of (seed, canonical edge key), so it is invariant
under the group action in distribution only, which is all the law of
Bernoulli percolation needs.
"""
from dataclasses import dataclass
from functools import lru_cache, partial
from math import sqrt

import numpy as np

from . import kernels
from .groups import build_ball
from .parallel import field_keys, map_trials, trial_seed


class ModelError(ValueError):
    """Estimator used on a graph it does not support."""


@dataclass(frozen=True)
class EstimateWithCI:
    estimate: float
    stderr: float
    trials: int

    @classmethod
    def from_count(cls, successes, trials):
        successes, trials = int(successes), int(trials)
        est = successes / trials
        return cls(est, sqrt(max(est * (1.0 - est), 0.0) / trials), trials)

    @classmethod
    def from_samples(cls, values):
        values = np.asarray(values, dtype=np.float64)
        n = values.size
        sd = values.std(ddof=1) if n > 1 else 0.0
        return cls(float(values.mean()), float(sd / sqrt(n)), n)


@dataclass(frozen=True, eq=False)
class EdgeLabelField:
    ball: object
    seed: int
    labels: np.ndarray

    @property
    def field_key(self):
        return kernels.splitmix(self.seed & kernels.MASK64)


@dataclass(frozen=True, eq=False)
class Configuration:
    ball: object
    open: np.ndarray

    def __post_init__(self):
        if self.open.shape != (self.ball.n_edges,):
            raise ValueError("configuration length must equal the edge count")

    @property
    def n_open(self):
        return int(self.open.sum())

    def __eq__(self, other):
        return (isinstance(other, Configuration) and other.ball is self.ball
                and np.array_equal(other.open, self.open))

    def __hash__(self):
        return hash((id(self.ball), self.open.tobytes()))


@dataclass(frozen=True, eq=False)
class ClusterDecomposition:
    """Cluster of each vertex, named by its smallest vertex index."""

    ball: object
    cluster_id: np.ndarray
    sizes: np.ndarray
    touches: np.ndarray

    @property
    def representatives(self):
        return np.flatnonzero(self.cluster_id == np.arange(self.cluster_id.size))

    @property
    def n_clusters(self):
        return self.representatives.size

    def size(self, v):
        return int(self.sizes[self.cluster_id[v]])

    def touches_boundary(self, v):
        return bool(self.touches[self.cluster_id[v]])

    def same_cluster(self, u, v):
        return self.cluster_id[u] == self.cluster_id[v]

    @property
    def root_cluster(self):
        return int(self.cluster_id[0])


def _field_key(seed):
    return kernels.splitmix(seed & kernels.MASK64)


def sample_labels(ball, seed):
    """Label field of ``ball`` under ``seed``; pure function of (seed, edge key)."""
    return EdgeLabelField(ball, seed, kernels.uniform_labels(ball.ekeys, _field_key(seed)))


def _check_p(p):
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")


def threshold_config(labels, p):
    _check_p(p)
    return Configuration(labels.ball, labels.labels < p)


def sample_bernoulli(ball, p, seed):
    return threshold_config(sample_labels(ball, seed), p)


def clusters(config):
    ball = config.ball
    ids = kernels.component_labels(ball.n_vertices, ball.eu, ball.ev, config.open)
    sizes = np.bincount(ids, minlength=ball.n_vertices)
    touches = np.zeros(ball.n_vertices, dtype=bool)
    touches[ids[ball.boundary]] = True
    return ClusterDecomposition(ball, ids, sizes, touches)


def insert_edge(config, e):
    """The configuration equal to ``config`` except that edge ``e`` is open."""
    bits = config.open.copy()
    bits[e] = True
    return Configuration(config.ball, bits)


def boundary_cluster_count(config):
    decomp = clusters(config)
    return int(np.unique(decomp.cluster_id[config.ball.boundary]).size)


@lru_cache(maxsize=8)
def cached_ball(spec, R):
    return build_ball(spec, R)


def _require_transitive(spec):
    if not spec.transitive:
        raise ModelError(f"{spec} is not vertex-transitive; this estimator needs a transitive graph")


def _bottleneck_chunk(ball, seed, start, stop):
    return kernels.bottlenecks(ball.indptr, ball.nbr, ball.nbr_edge, ball.ekeys,
                               ball.is_boundary, ball.root, field_keys(seed, start, stop))


def root_bottlenecks(spec, R, trials, seed, workers=None):
    """Per-trial minimax label on root-to-boundary paths.

    The root's cluster at parameter p touches the boundary iff the value is
    below p, so one array answers every p on the same coupled trials.
    """
    _require_transitive(spec)
    ball = cached_ball(spec, R)
    return map_trials(partial(_bottleneck_chunk, ball, seed), trials, workers)


def theta_curve(spec, ps, R, trials, seed, workers=None):
    """Coupled estimates of the root-reaches-boundary probability.

    One label field per trial serves every p, so the curve is exactly
    non-decreasing.
    """
    ps = [float(p) for p in ps]
    for p in ps:
        _check_p(p)
    if any(b < a for a, b in zip(ps, ps[1:])):
        raise ValueError("ps must be sorted ascending")
    b = root_bottlenecks(spec, R, trials, seed, workers)
    return [(p, EstimateWithCI.from_count(int(np.count_nonzero(b < p)), trials)) for p in ps]


def theta_hat(spec, p, R, trials, seed, workers=None):
    return theta_curve(spec, [p], R, trials, seed, workers)[0][1]


def pc_estimate(spec, R, trials, tol, seed, workers=None, level=0.5):
    """Bracket of width <= tol around where theta_hat crosses ``level``.

    This is a radius-dependent proxy for the critical probability, not the
    critical probability itself.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    b = root_bottlenecks(spec, R, trials, seed, workers)
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if np.count_nonzero(b < mid) / trials >= level:
            hi = mid
        else:
            lo = mid
    return lo, hi


def _ncluster_chunk(ball, seed, p, start, stop):
    return kernels.boundary_cluster_counts(ball.n_vertices, ball.eu, ball.ev, ball.ekeys,
                                           ball.boundary, field_keys(seed, start, stop), p)


def boundary_cluster_counts(spec, p, R, trials, seed, workers=None):
    """Per-trial number of distinct boundary-touching clusters."""
    _check_p(p)
    ball = cached_ball(spec, R)
    return map_trials(partial(_ncluster_chunk, ball, seed, float(p)), trials, workers)


def nclusters_curve(spec, ps, R, trials, seed, workers=None):
    return [(float(p), EstimateWithCI.from_samples(
        boundary_cluster_counts(spec, p, R, trials, seed, workers))) for p in ps]


def trial_labels(ball, seed, trial):
    """Label field of trial ``trial``; matches the batched estimators."""
    return sample_labels(ball, trial_seed(seed, trial))


def label_matrix(ball, seed, start, stop):
    """Labels of trials ``start..stop-1`` as a (trials, edges) array.

    Row i equals ``trial_labels(ball, seed, start + i).labels``.
    """
    keys = field_keys(seed, start, stop)
    out = np.empty((stop - start, ball.n_edges))
    for i, fk in enumerate(keys):
        out[i] = kernels.uniform_labels(ball.ekeys, fk)
    return out
