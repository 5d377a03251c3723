"""Scenery models: generalized percolations whose randomness sits on extra
vertex or edge data.

``two-line``
    Two disjoint Z-lines, every line edge open, a fair bit on every vertex.
``zmod4``
    Classic percolation on Z x Z/4Z.  A fair coin erases one of the two
    vertical edge families; horizontal edges are always open; the surviving
    vertical edges are open independently with probability 1/2.
``free-directed``
    Free group on a, b.  Every element picks s in {a, b} uniformly and the
    edge to ``gamma * s`` is open.  Evaluated lazily on the whole group: the
    choice at gamma is a hash of gamma's normal form, so no ball truncation
    occurs along directed paths.

A model sample answers the questions the rerooting and statistics code asks:
connectivity, open moves, membership of an infinite cluster and the value of
the model's window property ``P_n``.  Vertices are normal forms.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .groups import GroupGraphSpec, build_ball
from .percolation import Configuration, clusters

MODEL_KINDS = ("two-line", "zmod4", "free-directed")
COIN_SALT = 0x3C6EF372FE94F82B
LETTER_A, LETTER_B = 0, 2


class RadiusError(ValueError):
    """Ball radius too small for the requested windows."""


@dataclass(frozen=True)
class SceneryModel:
    kind: str
    radius: int

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model {self.kind!r}; choose from {', '.join(MODEL_KINDS)}")
        if self.radius < 0:
            raise ValueError("radius must be non-negative")

    @classmethod
    def parse(cls, text, radius):
        aliases = {"two_line": "two-line", "twoline": "two-line", "z-zmod4": "zmod4",
                   "zxzmod4": "zmod4", "z-zmod-4": "zmod4", "free_directed": "free-directed"}
        kind = text.strip().lower()
        return cls(aliases.get(kind, kind), radius)

    @property
    def spec(self):
        return {"two-line": GroupGraphSpec.two_line(),
                "zmod4": GroupGraphSpec.zxzmod(4),
                "free-directed": GroupGraphSpec.free(2)}[self.kind]

    @property
    def window_slack(self):
        """Extra radius a window at the anchor needs beyond 2n + 1."""
        return 1 if self.kind == "zmod4" else 0

    def required_radius(self, n, displacement=0):
        """Smallest radius for windows of half-width n after a displacement."""
        if self.kind == "free-directed":
            return 0
        return 2 * n + 1 + self.window_slack + displacement

    def check_radius(self, n, displacement=0):
        need = self.required_radius(n, displacement)
        if self.radius < need:
            raise RadiusError(
                f"{self.kind} with n={n} and displacement {displacement} needs R >= {need}, "
                f"got R={self.radius}")

    @cached_property
    def ball(self):
        return build_ball(self.spec, self.radius)

    def sample(self, seed, trial):
        fk = kernels.splitmix(kernels.trial_key(seed, trial))
        cls = {"two-line": TwoLineSample, "zmod4": ZMod4Sample,
               "free-directed": FreeDirectedSample}[self.kind]
        return cls(self, fk)


def _majority(bits):
    bits = np.asarray(bits)
    return int(np.count_nonzero(bits)) * 2 > bits.size


class _BallSample:
    """Shared behaviour for samples living on a finite ball."""

    def __init__(self, model, fk):
        self.model = model
        self.fk = fk
        self.spec = model.spec
        self.ball = model.ball

    @cached_property
    def decomp(self):
        return clusters(self.config)

    def open_moves(self, v):
        i = self.ball.index(v)
        if i is None:
            return []
        return sorted(g for _, e, g in self.ball.neighbors(i) if self.config.open[e])

    def prop_all(self, n):
        return np.array([self.prop(n, v) for v in self.ball.vertices], dtype=bool)


class TwoLineSample(_BallSample):

    @cached_property
    def config(self):
        return Configuration(self.ball, np.ones(self.ball.n_edges, dtype=bool))

    def bits(self, ks, line):
        keys = kernels.fold_np(np.full(len(ks), kernels.VERTEX_BASE, dtype=np.uint64), ks)
        keys = kernels.fold_np(keys, np.full(len(ks), line, dtype=np.int64))
        return kernels.scenery_bits(keys, self.fk)

    def check_window(self, n, v):
        if abs(v[0]) + n > self.model.radius:
            raise RadiusError(f"window of half-width {n} at {v} needs R >= {abs(v[0]) + n}, "
                              f"got R={self.model.radius}")

    def prop(self, n, v):
        """More ones than zeros among the bits at (k-n..k+n, line)."""
        self.check_window(n, v)
        k, line = v
        return _majority(self.bits(np.arange(k - n, k + n + 1, dtype=np.int64), line))

    def connected(self, u, v):
        R = self.model.radius
        return u[1] == v[1] and abs(u[0]) <= R and abs(v[0]) <= R

    def in_infinite_cluster(self, v):
        return abs(v[0]) <= self.model.radius

    def cluster_label(self, v):
        return v[1]


class ZMod4Sample(_BallSample):

    @cached_property
    def erased_family(self):
        """0: edges {z=0,1} and {2,3} erased; 1: edges {1,2} and {3,0} erased."""
        return kernels.splitmix(self.fk ^ COIN_SALT) >> 63

    def partner(self, z):
        if self.erased_family == 0:
            return {1: 2, 2: 1, 3: 0, 0: 3}[z]
        return {0: 1, 1: 0, 2: 3, 3: 2}[z]

    def lower_level(self, z):
        """Lower level of the surviving vertical edge at level z (names the double line)."""
        w = self.partner(z)
        return z if (z + 1) % 4 == w else w

    def _vertical_keys(self, ks, z):
        """Canonical edge keys of the vertical edges {(k,z),(k,z+1 mod 4)}."""
        if z < 3:
            small, gen = z, 2
        else:
            small, gen = 0, 3
        h = np.full(len(ks), kernels.VERTEX_BASE, dtype=np.uint64)
        h = kernels.fold_np(h, ks)
        h = kernels.fold_np(h, np.full(len(ks), small, dtype=np.int64))
        return kernels.fold_np(h ^ np.uint64(kernels.EDGE_SALT),
                               np.full(len(ks), gen, dtype=np.int64))

    def vertical_open(self, ks, z):
        """Open bits of the vertical edges between levels z and z+1 at columns ks."""
        ks = np.asarray(ks, dtype=np.int64)
        family = 0 if z in (0, 2) else 1
        if family == self.erased_family:
            return np.zeros(len(ks), dtype=bool)
        return kernels.uniform_labels(self._vertical_keys(ks, z), self.fk) < 0.5

    @cached_property
    def config(self):
        ball = self.ball
        bits = np.ones(ball.n_edges, dtype=bool)
        vertical = np.flatnonzero(ball.egen >= 2)
        lower = np.where(ball.egen[vertical] == 2, ball.coords[ball.eu[vertical], 1], 3)
        family = lower % 2
        fair = kernels.uniform_labels(ball.ekeys[vertical], self.fk) < 0.5
        bits[vertical] = fair & (family != self.erased_family)
        return Configuration(ball, bits)

    def _level_distance(self, z):
        return min(z, 4 - z)

    def check_window(self, n, v):
        k, z = v
        need = abs(k) + n + max(self._level_distance(z), self._level_distance(self.partner(z)))
        if need > self.model.radius:
            raise RadiusError(f"window of half-width {n} at {v} needs R >= {need}, "
                              f"got R={self.model.radius}")

    def prop(self, n, v):
        """More open than closed vertical edges of v's double line over columns k-n..k+n."""
        self.check_window(n, v)
        k, z = v
        return _majority(self.vertical_open(np.arange(k - n, k + n + 1), self.lower_level(z)))

    def connected(self, u, v):
        return self.lower_level(u[1]) == self.lower_level(v[1])

    def in_infinite_cluster(self, v):
        return True

    def cluster_label(self, v):
        return self.lower_level(v[1])

    def representatives(self):
        """Lowest-index vertex of each surviving double line, in index order."""
        reps, seen = [], set()
        for v in self.ball.vertices:
            pid = self.lower_level(v[1])
            if pid not in seen:
                seen.add(pid)
                reps.append(v)
            if len(seen) == 2:
                break
        return reps


class FreeDirectedSample(_BallSample):

    def choice(self, key):
        return LETTER_B if kernels.bit_from_key(key, self.fk) else LETTER_A

    def walk(self, v, steps):
        """Vertices and step letters of the directed path launched at v."""
        word = list(v)
        keys = [kernels.VERTEX_BASE]
        for x in word:
            keys.append(kernels.fold(keys[-1], x))
        letters = []
        for _ in range(steps):
            s = self.choice(keys[-1])
            letters.append(s)
            if word and word[-1] == s ^ 1:
                word.pop()
                keys.pop()
            else:
                word.append(s)
                keys.append(kernels.fold(keys[-1], s))
        return tuple(word), letters

    def step(self, v):
        return self.walk(v, 1)[0]

    def prop(self, n, v):
        """More a's than b's among the first 2n+1 steps of the directed path from v."""
        _, letters = self.walk(v, 2 * n + 1)
        return letters.count(LETTER_A) > n

    def s_of(self, v):
        return self.choice(kernels.fold_all(v))

    def edge_open(self, w, x):
        """Is the edge {w, w x} open (x any letter)?"""
        if x & 1 == 0:
            return self.s_of(w) == x
        return self.s_of(self.spec.multiply(w, (x,))) == x ^ 1

    def connected(self, u, v):
        path = self.spec.multiply(self.spec.inverse(u), v)
        w = u
        for x in path:
            if not self.edge_open(w, x):
                return False
            w = self.spec.multiply(w, (x,))
        return True

    def open_moves(self, v):
        moves = [self.s_of(v)]
        for x in (LETTER_A, LETTER_B):
            if self.s_of(self.spec.multiply(v, (x ^ 1,))) == x:
                moves.append(x ^ 1)
        return sorted(moves)

    def in_infinite_cluster(self, v):
        return True

    @cached_property
    def config(self):
        ball = self.ball
        s = np.where(kernels.scenery_bits(ball.vkeys, self.fk), LETTER_B, LETTER_A)
        positive = (ball.egen & 1) == 0
        tail_choice = np.where(positive, s[ball.eu], s[ball.ev])
        arrow = np.where(positive, ball.egen, ball.egen ^ 1)
        return Configuration(ball, tail_choice == arrow)

    def out_degrees(self):
        """Open out-arrows per ball vertex (arrows point from gamma to gamma s)."""
        ball = self.ball
        positive = (ball.egen & 1) == 0
        tails = np.where(positive, ball.eu, ball.ev)[self.config.open]
        return np.bincount(tails, minlength=ball.n_vertices)

    def cluster_label(self, v):
        i = self.ball.index(v)
        if i is None:
            raise RadiusError(f"{v} lies outside the structural ball of radius {self.model.radius}")
        return int(self.decomp.cluster_id[i])
