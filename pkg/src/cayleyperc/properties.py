"""Vertex and cluster properties, agreement operators, indistinguishability.

A property is evaluated on a *state*: a :class:`Configuration`, an
:class:`EdgeLabelField` together with the outer threshold ``p``, or a
scenery-model sample from :mod:`cayleyperc.models`.
"""
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .percolation import (Configuration, EdgeLabelField, EstimateWithCI, cached_ball,
                          clusters, threshold_config, trial_labels)
from .parallel import map_trials

KINDS = ("degree", "cluster-size", "touches-boundary", "contains-subcluster",
         "majority-window", "directed-majority")
SCENERY_KINDS = ("majority-window", "directed-majority")


class StateMismatchError(TypeError):
    """Property evaluated on a state of the wrong kind."""


@dataclass(frozen=True)
class PropertySpec:
    kind: str
    k: int = 0
    m: int = 1
    p0: float = 0.0
    n: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown property kind {self.kind!r}")

    @classmethod
    def degree_at_least(cls, k):
        return cls("degree", k=k)

    @classmethod
    def cluster_size_at_least(cls, m):
        return cls("cluster-size", m=m)

    @classmethod
    def touches_boundary(cls):
        return cls("touches-boundary")

    @classmethod
    def contains_subcluster(cls, p0):
        return cls("contains-subcluster", p0=p0)

    @classmethod
    def majority_window(cls, n):
        return cls("majority-window", n=n)

    @classmethod
    def directed_majority(cls, n):
        return cls("directed-majority", n=n)

    @classmethod
    def parse(cls, text):
        """``kind`` or ``kind:param``, e.g. ``contains-subcluster:0.45``."""
        kind, _, arg = text.strip().partition(":")
        kind = kind.strip().lower()
        if kind == "degree":
            return cls.degree_at_least(int(arg))
        if kind == "cluster-size":
            return cls.cluster_size_at_least(int(arg))
        if kind == "touches-boundary":
            return cls.touches_boundary()
        if kind == "contains-subcluster":
            return cls.contains_subcluster(float(arg))
        if kind == "majority-window":
            return cls.majority_window(int(arg))
        if kind == "directed-majority":
            return cls.directed_majority(int(arg))
        raise ValueError(f"unknown property kind {kind!r}")

    @property
    def is_cluster_property(self):
        return self.kind in ("cluster-size", "touches-boundary", "contains-subcluster")

    def with_n(self, n):
        if self.kind in SCENERY_KINDS:
            return PropertySpec(self.kind, n=n)
        return self


def _resolve(state, p, prop):
    """Return (configuration, labels or None)."""
    if isinstance(state, Configuration):
        if prop.kind == "contains-subcluster":
            raise StateMismatchError("contains-subcluster needs an EdgeLabelField state")
        return state, None
    if isinstance(state, EdgeLabelField):
        if p is None:
            raise StateMismatchError("an EdgeLabelField state needs the threshold p")
        return threshold_config(state, p), state
    raise StateMismatchError(f"cannot evaluate {prop.kind} on {type(state).__name__}")


def eval_all(prop, state, p=None, decomp=None):
    """Boolean value of ``prop`` at every vertex of the state's ball."""
    if prop.kind in SCENERY_KINDS:
        if not hasattr(state, "prop_all"):
            raise StateMismatchError(f"{prop.kind} needs a scenery-model state")
        return state.prop_all(prop.n)
    config, labels = _resolve(state, p, prop)
    ball = config.ball
    if prop.kind == "degree":
        deg = (np.bincount(ball.eu[config.open], minlength=ball.n_vertices)
               + np.bincount(ball.ev[config.open], minlength=ball.n_vertices))
        return deg >= prop.k
    decomp = clusters(config) if decomp is None else decomp
    if prop.kind == "cluster-size":
        return decomp.sizes[decomp.cluster_id] >= prop.m
    if prop.kind == "touches-boundary":
        return decomp.touches[decomp.cluster_id]
    if not prop.p0 < p:
        raise ValueError(f"contains-subcluster needs p0 < p1, got p0={prop.p0}, p1={p}")
    inner = clusters(threshold_config(labels, prop.p0))
    good = inner.touches[inner.cluster_id]
    hits = np.bincount(decomp.cluster_id, weights=good, minlength=ball.n_vertices)
    return hits[decomp.cluster_id] > 0


def eval_property(prop, state, v, p=None):
    """Value of ``prop`` at vertex ``v`` (index, or normal form for model states)."""
    if prop.kind in SCENERY_KINDS:
        if not hasattr(state, "prop"):
            raise StateMismatchError(f"{prop.kind} needs a scenery-model state")
        return state.prop(prop.n, v)
    if isinstance(v, tuple):
        config, _ = _resolve(state, p, prop)
        idx = config.ball.index(v)
        if idx is None:
            raise ValueError(f"vertex {v} is outside the ball")
        v = idx
    return bool(eval_all(prop, state, p)[v])


@dataclass(frozen=True)
class Agreement:
    plus: bool
    minus: bool
    pm: bool


def agreement_of(values):
    values = list(values)
    plus = all(values)
    minus = not any(values)
    return Agreement(plus, minus, plus or minus)


def agreement(prop, state, S, p=None):
    """P^+, P^- and P^+- of ``prop`` over the finite vertex set ``S``."""
    S = list(S)
    if not S:
        return Agreement(True, True, True)
    if prop.kind in SCENERY_KINDS:
        return agreement_of(state.prop(prop.n, v) for v in S)
    vals = eval_all(prop, state, p)
    return agreement_of(bool(vals[v]) for v in S)


@dataclass(frozen=True, eq=False)
class PropertyEvalReport:
    values: np.ndarray
    representatives: np.ndarray
    constant: np.ndarray
    window: tuple = field(default=())
    window_agreement: Agreement = Agreement(True, True, True)

    @property
    def all_constant(self):
        return bool(self.constant.all())


def cluster_constancy(values, decomp):
    """Per-cluster flag (indexed like ``decomp.representatives``): constant or not."""
    ids = decomp.cluster_id
    n = ids.size
    trues = np.bincount(ids, weights=values, minlength=n)
    reps = decomp.representatives
    t = trues[reps]
    return (t == 0) | (t == decomp.sizes[reps])


def evaluate(prop, state, p=None, window=()):
    config, _ = _resolve(state, p, prop)
    decomp = clusters(config)
    values = eval_all(prop, state, p, decomp=decomp)
    window = tuple(window)
    return PropertyEvalReport(values, decomp.representatives,
                              cluster_constancy(values, decomp), window,
                              agreement_of(bool(values[v]) for v in window))


def _violation_chunk(prop, ball, pr, seed, start, stop):
    out = np.zeros(stop - start, dtype=np.int64)
    for i, t in enumerate(range(start, stop)):
        labels = trial_labels(ball, seed, t)
        decomp = clusters(threshold_config(labels, pr))
        values = eval_all(prop, labels, pr, decomp=decomp)
        out[i] = not cluster_constancy(values, decomp).all()
    return out


def check_cluster_property(prop, spec, pr, R, trials, seed, workers=None):
    """Number of sampled configurations with a cluster on which ``prop`` varies."""
    if prop.kind in SCENERY_KINDS:
        raise StateMismatchError(f"{prop.kind} is evaluated on scenery models, not Bernoulli samples")
    ball = cached_ball(spec, R)
    hits = map_trials(partial(_violation_chunk, prop, ball, float(pr), seed), trials, workers)
    return int(hits.sum())


def _indist_chunk(prop, ball, p1, f_radius, seed, start, stop):
    out = np.zeros(stop - start, dtype=np.int64)
    in_window = ball.depth <= f_radius
    for i, t in enumerate(range(start, stop)):
        labels = trial_labels(ball, seed, t)
        decomp = clusters(threshold_config(labels, p1))
        reps = np.unique(decomp.cluster_id[in_window])
        reps = reps[decomp.touches[reps]]
        if reps.size <= 1:
            out[i] = 1
            continue
        values = eval_all(prop, labels, p1, decomp=decomp)[reps]
        out[i] = values.all() or not values.any()
    return out


def indist_statistic(spec, p1, prop, R, F_radius, trials, seed, workers=None):
    """Frequency with which all boundary-touching clusters meeting the
    radius-``F_radius`` window agree on ``prop``.

    Each qualifying cluster is represented by its smallest vertex index.
    """
    if F_radius > R:
        raise ValueError("F_radius must not exceed R")
    if prop.kind in SCENERY_KINDS:
        raise StateMismatchError(f"{prop.kind} is evaluated on scenery models")
    ball = cached_ball(spec, R)
    agree = map_trials(partial(_indist_chunk, prop, ball, float(p1), F_radius, seed),
                       trials, workers)
    return EstimateWithCI.from_count(int(agree.sum()), trials)
