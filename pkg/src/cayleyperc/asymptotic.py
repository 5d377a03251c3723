"""Rerootings, asymptotic cluster property statistics and the random-walk oracle."""
from dataclasses import dataclass
from functools import partial

import numpy as np

from .models import RadiusError, SceneryModel
from .parallel import map_trials
from .percolation import Configuration, EstimateWithCI, clusters
from .properties import PropertySpec, SCENERY_KINDS, eval_all

REROOT_KINDS = ("translate", "lex-walk", "directed-walk")


@dataclass(frozen=True)
class ReRootingSpec:
    kind: str
    g: tuple = ()
    steps: int = 0

    def __post_init__(self):
        if self.kind not in REROOT_KINDS:
            raise ValueError(f"unknown rerooting {self.kind!r}")
        if self.steps < 0:
            raise ValueError("steps must be non-negative")

    @classmethod
    def translate(cls, g):
        return cls("translate", g=tuple(g))

    @classmethod
    def lex_walk(cls, steps):
        return cls("lex-walk", steps=steps)

    @classmethod
    def directed_walk(cls, steps):
        return cls("directed-walk", steps=steps)

    def displacement(self, spec):
        if self.kind == "translate":
            return spec.word_length(self.g) if self.g else 0
        return self.steps


@dataclass(frozen=True)
class PropertySeqSpec:
    """A window property P_n; non-window kinds are constant in n."""

    base: PropertySpec
    ns: tuple = ()

    def at(self, n):
        return self.base.with_n(n)


class ConfigSample:
    """Adapter giving a Bernoulli configuration the model-sample interface."""

    def __init__(self, config, labels=None, p=None):
        self.config = config
        self.ball = config.ball
        self.spec = config.ball.spec
        self.labels = labels
        self.p = p
        self.decomp = clusters(config)
        self._cache = {}

    def _idx(self, v):
        i = self.ball.index(v)
        if i is None:
            raise RadiusError(f"{v} lies outside the ball of radius {self.ball.radius}")
        return i

    def connected(self, u, v):
        iu, iv = self.ball.index(u), self.ball.index(v)
        if iu is None or iv is None:
            return False
        return bool(self.decomp.same_cluster(iu, iv))

    def open_moves(self, v):
        i = self.ball.index(v)
        if i is None:
            return []
        return sorted(g for _, e, g in self.ball.neighbors(i) if self.config.open[e])

    def in_infinite_cluster(self, v):
        return self.decomp.touches_boundary(self._idx(v))

    def cluster_label(self, v):
        return int(self.decomp.cluster_id[self._idx(v)])

    def values(self, prop):
        if prop not in self._cache:
            state = self.labels if prop.kind == "contains-subcluster" else self.config
            self._cache[prop] = eval_all(prop, state, self.p, decomp=self.decomp)
        return self._cache[prop]


def _as_sample(state):
    if isinstance(state, Configuration):
        return ConfigSample(state)
    return state


def evaluate_at(prop, sample, v):
    """P at the normal form v of a model or configuration sample."""
    if prop.kind in SCENERY_KINDS:
        return sample.prop(prop.n, v)
    if isinstance(sample, ConfigSample):
        return bool(sample.values(prop)[sample._idx(v)])
    return bool(eval_all(prop, sample.config, decomp=sample.decomp)[sample.ball.index(v)])


def reroot(r, state, v):
    """Move v within its own cluster according to the rerooting ``r``.

    ``state`` is a :class:`Configuration` or a model sample.  With a
    configuration ``v`` may be an index; the result then is an index too.
    """
    sample = _as_sample(state)
    spec = sample.spec
    as_index = not isinstance(v, tuple)
    if as_index:
        v = sample.ball.nf(v)
    if r.kind == "translate":
        target = spec.multiply(r.g, v) if r.g else v
        u = target if target != v and sample.connected(v, target) else v
    elif r.kind == "lex-walk":
        u, back = v, None
        for _ in range(r.steps):
            moves = sample.open_moves(u)
            if not moves:
                break
            forward = [g for g in moves if g != back]
            g = forward[0] if forward else moves[0]
            u = spec.multiply(u, spec.generator(g))
            back = g ^ 1
    else:
        if not hasattr(sample, "step"):
            raise ValueError("directed-walk rerooting needs the free-directed model")
        u = sample.walk(v, r.steps)[0]
    if as_index:
        idx = sample.ball.index(u)
        return idx if idx is not None else sample.ball.index(v)
    return u


def _check(model, prop, n, r=None):
    if prop.kind in SCENERY_KINDS:
        disp = r.displacement(model.spec) if r is not None else 0
        model.check_radius(n, disp)


def _mismatch_chunk(model, prop, r, seed, start, stop):
    out = np.zeros(stop - start, dtype=np.int64)
    root = model.spec.identity()
    for i, t in enumerate(range(start, stop)):
        sample = model.sample(seed, t)
        u = reroot(r, sample, root)
        if u != root:
            out[i] = evaluate_at(prop, sample, root) != evaluate_at(prop, sample, u)
    return out


def acp_mismatch(model, seq, r, n, trials, seed, workers=None):
    """Frequency of P_n(anchor) != P_n(rerooted anchor)."""
    prop = seq.at(n)
    _check(model, prop, n, r)
    hits = map_trials(partial(_mismatch_chunk, model, prop, r, seed), trials, workers)
    return EstimateWithCI.from_count(int(hits.sum()), trials)


def _strong_chunk(model, prop, F, seed, start, stop):
    out = np.zeros(stop - start, dtype=np.int64)
    for i, t in enumerate(range(start, stop)):
        sample = model.sample(seed, t)
        vals = {evaluate_at(prop, sample, v) for v in F if sample.in_infinite_cluster(v)}
        out[i] = len(vals) <= 1
    return out


def strong_indist_statistic(model, seq, n, F, trials, seed, workers=None):
    """Frequency with which P_n is unanimous over the infinite-cluster vertices of F."""
    prop = seq.at(n)
    F = [tuple(v) for v in F]
    _check(model, prop, n)
    for v in F:
        if model.kind != "free-directed" and model.ball.index(v) is None:
            raise RadiusError(f"window vertex {v} lies outside the ball of radius {model.radius}")
    agree = map_trials(partial(_strong_chunk, model, prop, F, seed), trials, workers)
    return EstimateWithCI.from_count(int(agree.sum()), trials)


def _zmod4_chunk(model, n, seed, start, stop):
    out = np.zeros(stop - start, dtype=np.int64)
    for i, t in enumerate(range(start, stop)):
        sample = model.sample(seed, t)
        a, b = sample.representatives()
        out[i] = sample.prop(n, a) != sample.prop(n, b)
    return out


def zxzmod4_mismatch(n, R, trials, seed, workers=None):
    """Disagreement of the double-line majority between the two infinite clusters."""
    if R < 2 * n + 2:
        raise RadiusError(f"zmod4 with n={n} needs R >= {2 * n + 2}, got R={R}")
    model = SceneryModel("zmod4", R)
    hits = map_trials(partial(_zmod4_chunk, model, n, seed), trials, workers)
    return EstimateWithCI.from_count(int(hits.sum()), trials)


def srw_distribution(steps):
    """Exact law of a simple symmetric walk after ``steps`` steps.

    Returns positions ``-steps..steps`` and their probabilities.
    """
    if steps < 0:
        raise ValueError("steps must be non-negative")
    probs = np.zeros(2 * steps + 1)
    probs[steps] = 1.0
    for _ in range(steps):
        nxt = np.zeros_like(probs)
        nxt[1:] += 0.5 * probs[:-1]
        nxt[:-1] += 0.5 * probs[1:]
        probs = nxt
    return np.arange(-steps, steps + 1), probs


def srw_endpoint_prob(steps, interval):
    """P[walk of ``steps`` steps from 0 ends in the integer interval (lo, hi)]."""
    lo, hi = interval
    pos, probs = srw_distribution(steps)
    return float(probs[(pos >= lo) & (pos <= hi)].sum())


def srw_bound(n, shift):
    """Upper bound on the two-line majority mismatch for an in-line shift."""
    k = abs(shift)
    return srw_endpoint_prob(2 * n + 1 - k, (-2 * k, 2 * k))


@dataclass(frozen=True)
class EquivalenceReport:
    window_clusters: EstimateWithCI
    anchored_pairs: EstimateWithCI
    all_pairs: EstimateWithCI
    cross_clusters: EstimateWithCI


def default_window(model, radius=1):
    if model.kind == "two-line":
        return [(k, b) for k in range(-radius, radius + 1) for b in (0, 1)]
    ball = model.ball
    return [ball.nf(i) for i in np.flatnonzero(ball.depth <= radius)]


def _equivalence_chunk(model, prop, r, F, seed, start, stop):
    out = np.zeros((stop - start, 4), dtype=np.float64)
    root = model.spec.identity()
    for i, t in enumerate(range(start, stop)):
        sample = model.sample(seed, t)
        vals = {v: evaluate_at(prop, sample, v) for v in F}
        groups = {}
        for v in F:
            groups.setdefault(sample.cluster_label(v), set()).add(vals[v])
        out[i, 0] = all(len(g) == 1 for g in groups.values())
        u = reroot(r, sample, root)
        out[i, 1] = evaluate_at(prop, sample, root) == evaluate_at(prop, sample, u)
        agree = [vals[v] == evaluate_at(prop, sample, reroot(r, sample, v)) for v in F]
        out[i, 2] = np.mean(agree)
        inf_vals = {vals[v] for v in F if sample.in_infinite_cluster(v)}
        out[i, 3] = len(inf_vals) <= 1
    return out


def acp_equivalence_report(model, seq, r, n, trials, seed, F=None, workers=None):
    """Finite proxies of the equivalent characterisations of an asymptotic
    cluster property, side by side.

    ``window_clusters``
        every cluster meeting the window F is unanimous on its part of F;
    ``anchored_pairs``
        P_n agrees at the anchor and its rerooted image;
    ``all_pairs``
        the same, averaged over every u in F;
    ``cross_clusters``
        all infinite-cluster vertices of F agree (strong indistinguishability),
        reported for contrast.
    """
    prop = seq.at(n)
    F = default_window(model) if F is None else [tuple(v) for v in F]
    if prop.kind in SCENERY_KINDS and model.kind != "free-directed":
        reach = max(model.spec.word_length(v) for v in F)
        model.check_radius(n, r.displacement(model.spec) + reach)
    rows = map_trials(partial(_equivalence_chunk, model, prop, r, F, seed), trials, workers)
    counts = rows[:, [0, 1, 3]].sum(axis=0).astype(int)
    return EquivalenceReport(
        EstimateWithCI.from_count(counts[0], trials),
        EstimateWithCI.from_count(counts[1], trials),
        EstimateWithCI.from_samples(rows[:, 2]),
        EstimateWithCI.from_count(counts[2], trials),
    )
