"""Finite balls of Cayley graphs.

Group elements and vertices share one representation, the *normal form*:

* ``lattice:d`` (Z^d) and ``line`` (Z): integer tuple of length d.
* ``zmod:n`` (Z x Z/nZ): ``(k, z)`` with ``0 <= z < n``.
* ``two-line``: ``(k, b)`` with ``b`` in {0, 1}; as a group this is
  Z x Z/2Z, but only the two Z-lines carry edges.
* ``free:r``: reduced word, a tuple of letter ids.  Letter ``2i`` is the
  i-th generator and ``2i + 1`` its inverse, so the order is
  a < a^-1 < b < b^-1 < ...

Generator ids follow the same pairing everywhere: ``gid ^ 1`` is the inverse
of ``gid``.  Edges are stored once, from the lexicographically smaller
endpoint, with the generator id that leads from it to the other endpoint.
"""
from dataclasses import dataclass
from functools import cached_property
from math import comb

import numpy as np

from . import kernels

DEFAULT_MAX_VERTICES = 10**7
FAMILIES = ("lattice", "free", "zmod", "line", "two-line")


class BallSizeError(ValueError):
    """Requested ball exceeds the vertex cap."""


@dataclass(frozen=True)
class GroupGraphSpec:
    family: str
    param: int = 1

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown graph family {self.family!r}")
        if self.family == "lattice" and self.param < 1:
            raise ValueError("lattice dimension must be >= 1")
        if self.family == "free" and self.param < 1:
            raise ValueError("free group rank must be >= 1")
        if self.family == "zmod" and self.param < 2:
            raise ValueError("zmod modulus must be >= 2")
        if self.family in ("line", "two-line") and self.param != 1:
            object.__setattr__(self, "param", 1)

    @classmethod
    def hypercubic(cls, d):
        return cls("lattice", d)

    @classmethod
    def free(cls, rank):
        return cls("free", rank)

    @classmethod
    def zxzmod(cls, n):
        return cls("zmod", n)

    @classmethod
    def line(cls):
        return cls("line")

    @classmethod
    def two_line(cls):
        return cls("two-line")

    @classmethod
    def parse(cls, text):
        """Parse ``free:2``, ``lattice:2``, ``zmod:4``, ``line``, ``two-line``."""
        name, _, arg = text.strip().lower().partition(":")
        aliases = {"z": "lattice", "zd": "lattice", "hypercubic": "lattice",
                   "twoline": "two-line", "two_line": "two-line"}
        name = aliases.get(name, name)
        if name in ("line", "two-line"):
            if arg:
                raise ValueError(f"graph {name!r} takes no parameter")
            return cls(name)
        if not arg:
            raise ValueError(f"graph {name!r} needs a parameter, e.g. {name}:2")
        return cls(name, int(arg))

    def __str__(self):
        if self.family in ("line", "two-line"):
            return self.family
        return f"{self.family}:{self.param}"

    @property
    def transitive(self):
        return self.family != "two-line"

    @property
    def dim(self):
        """Length of an abelian normal form (unused for free groups)."""
        if self.family == "lattice":
            return self.param
        if self.family == "line":
            return 1
        return 2

    @property
    def n_generators(self):
        """Number of generator ids (generators and their inverses)."""
        if self.family in ("lattice", "free"):
            return 2 * self.param
        if self.family == "zmod":
            return 4
        return 2

    @property
    def degree(self):
        if self.family == "zmod" and self.param == 2:
            return 3
        return self.n_generators

    def identity(self):
        if self.family == "free":
            return ()
        return (0,) * self.dim

    def generator(self, gid):
        """Group element of generator id ``gid``."""
        if not 0 <= gid < self.n_generators:
            raise ValueError(f"generator id {gid} out of range")
        if self.family == "free":
            return (gid,)
        sign = -1 if gid & 1 else 1
        axis = gid >> 1
        g = [0] * self.dim
        if self.family == "zmod" and axis == 1:
            g[1] = sign % self.param
        else:
            g[axis] = sign
        return tuple(g)

    def multiply(self, g, h):
        if self.family == "free":
            g = list(g)
            i = 0
            while g and i < len(h) and g[-1] == h[i] ^ 1:
                g.pop()
                i += 1
            return tuple(g) + tuple(h[i:])
        if self.family == "zmod":
            return (g[0] + h[0], (g[1] + h[1]) % self.param)
        if self.family == "two-line":
            return (g[0] + h[0], (g[1] + h[1]) % 2)
        return tuple(a + b for a, b in zip(g, h))

    def inverse(self, g):
        if self.family == "free":
            return tuple(x ^ 1 for x in reversed(g))
        if self.family == "zmod":
            return (-g[0], (-g[1]) % self.param)
        if self.family == "two-line":
            return (-g[0], g[1])
        return tuple(-a for a in g)

    def word_length(self, nf):
        """Distance from the anchor; for two-line, distance within the line."""
        if self.family == "free":
            return len(nf)
        if self.family == "zmod":
            z = nf[1] % self.param
            return abs(nf[0]) + min(z, self.param - z)
        if self.family == "two-line":
            return abs(nf[0])
        return sum(abs(a) for a in nf)

    def is_normal_form(self, nf):
        if not isinstance(nf, tuple):
            return False
        if self.family == "free":
            return all(0 <= x < 2 * self.param for x in nf) and all(
                a != b ^ 1 for a, b in zip(nf, nf[1:]))
        if len(nf) != self.dim:
            return False
        if self.family == "zmod":
            return 0 <= nf[1] < self.param
        if self.family == "two-line":
            return nf[1] in (0, 1)
        return True

    def format(self, nf):
        if self.family != "free":
            return ",".join(str(a) for a in nf)
        if not nf:
            return "e"
        if self.param > 26:
            return ".".join(str(x) for x in nf)
        out = []
        for x in nf:
            c = chr(ord("a") + (x >> 1))
            out.append(c.upper() if x & 1 else c)
        return "".join(out)

    def parse_element(self, text):
        """Inverse of :meth:`format`; for free groups letters may be ``a``/``A``."""
        text = text.strip()
        if self.family != "free":
            nf = tuple(int(x) for x in text.split(","))
            if self.family == "zmod":
                nf = (nf[0], nf[1] % self.param)
            if not self.is_normal_form(nf):
                raise ValueError(f"{text!r} is not an element of {self}")
            return nf
        if text in ("", "e", "1"):
            return ()
        letters = []
        for c in text:
            gid = 2 * (ord(c.lower()) - ord("a")) + (1 if c.isupper() else 0)
            if not 0 <= gid < 2 * self.param:
                raise ValueError(f"letter {c!r} outside free group of rank {self.param}")
            if letters and letters[-1] == gid ^ 1:
                letters.pop()
            else:
                letters.append(gid)
        return tuple(letters)


def ball_size(spec, radius):
    """Vertex count of the radius-``radius`` ball, without building it."""
    R = radius
    if spec.family == "free":
        r = spec.param
        if r == 1:
            return 2 * R + 1
        return 1 + 2 * r * ((2 * r - 1) ** R - 1) // (2 * r - 2)
    if spec.family in ("lattice", "line"):
        d = spec.dim
        return sum(2**k * comb(d, k) * comb(R, k) for k in range(min(d, R) + 1))
    if spec.family == "two-line":
        return 2 * (2 * R + 1)
    n = spec.param
    return sum(max(0, 2 * (R - min(z, n - z)) + 1) for z in range(n))


def _vertex_keys_abelian(coords):
    h = np.full(coords.shape[0], kernels.VERTEX_BASE, dtype=np.uint64)
    for j in range(coords.shape[1]):
        h = kernels.fold_np(h, coords[:, j])
    return h


def vertex_key(spec, nf):
    """64-bit hash of a normal form; radius independent."""
    return kernels.fold_all(nf)


def _edge_keys(vkeys_small, gens):
    return kernels.fold_np(vkeys_small ^ np.uint64(kernels.EDGE_SALT), gens)


def edge_key_hash(spec, nf_small, gid):
    return kernels.fold(vertex_key(spec, nf_small) ^ kernels.EDGE_SALT, gid)


class CayleyBall:
    """Induced subgraph of a Cayley graph on the radius-R ball around the anchor.

    Vertex 0 is the anchor.  Vertices are ordered by word length, then
    lexicographically by normal form.  Instances are treated as immutable.
    """

    def __init__(self, spec, radius, depth, eu, ev, egen, vkeys, coords=None,
                 parent=None, last=None):
        self.spec = spec
        self.radius = radius
        self.depth = depth
        self.n_vertices = depth.shape[0]
        self.eu = eu
        self.ev = ev
        self.egen = egen
        self.n_edges = eu.shape[0]
        self.vkeys = vkeys
        self.ekeys = _edge_keys(vkeys[eu], egen)
        self.is_boundary = depth == radius
        self.boundary = np.flatnonzero(self.is_boundary)
        self._coords = coords
        self._parent = parent
        self._last = last
        self._build_csr()
        for arr in (depth, eu, ev, egen, vkeys, self.ekeys, self.is_boundary,
                    self.boundary, self.indptr, self.nbr, self.nbr_edge, self.nbr_gen):
            arr.setflags(write=False)

    def _build_csr(self):
        src = np.concatenate([self.eu, self.ev])
        dst = np.concatenate([self.ev, self.eu])
        gen = np.concatenate([self.egen, self.egen ^ 1])
        eid = np.concatenate([np.arange(self.n_edges)] * 2)
        order = np.lexsort((gen, src))
        self.nbr = dst[order]
        self.nbr_edge = eid[order]
        self.nbr_gen = gen[order]
        counts = np.bincount(src, minlength=self.n_vertices)
        self.indptr = np.zeros(self.n_vertices + 1, dtype=np.int64)
        np.cumsum(counts, out=self.indptr[1:])

    def __repr__(self):
        return (f"CayleyBall({self.spec}, R={self.radius}, "
                f"|V|={self.n_vertices}, |E|={self.n_edges})")

    @property
    def root(self):
        return 0

    def nf(self, i):
        """Normal form of vertex index ``i``."""
        i = int(i)
        if self.spec.family == "free":
            word = []
            while i != 0:
                word.append(int(self._last[i]))
                i = int(self._parent[i])
            return tuple(reversed(word))
        return tuple(int(x) for x in self._coords[i])

    @cached_property
    def vertices(self):
        return [self.nf(i) for i in range(self.n_vertices)]

    @cached_property
    def _level_offsets(self):
        return np.searchsorted(self.depth, np.arange(self.radius + 2))

    @cached_property
    def _index_map(self):
        return {self.nf(i): i for i in range(self.n_vertices)}

    def index(self, nf):
        """Dense index of a normal form, or None when outside the ball."""
        spec = self.spec
        if not spec.is_normal_form(nf) or spec.word_length(nf) > self.radius:
            return None
        if spec.family != "free":
            return self._index_map[nf]
        k = 2 * spec.param
        rank = 0
        for j, x in enumerate(nf):
            if j == 0:
                rank = x
            else:
                inv = nf[j - 1] ^ 1
                rank = rank * (k - 1) + (x - 1 if x > inv else x)
        return int(self._level_offsets[len(nf)]) + rank

    def neighbors(self, i):
        """(neighbor index, edge index, generator id) triples of vertex ``i``."""
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return list(zip(self.nbr[lo:hi].tolist(), self.nbr_edge[lo:hi].tolist(),
                        self.nbr_gen[lo:hi].tolist()))

    def edge_between(self, u, v):
        for w, e, _ in self.neighbors(u):
            if w == v:
                return e
        return None

    @property
    def coords(self):
        return self._coords


def _check_cap(spec, radius, max_vertices):
    size = ball_size(spec, radius)
    if size > max_vertices:
        raise BallSizeError(
            f"ball {spec} R={radius} has {size} vertices, above the cap of {max_vertices}")
    return size


def _abelian_points(spec, R):
    if spec.family in ("lattice", "line"):
        d = spec.dim
        axes = np.meshgrid(*[np.arange(-R, R + 1)] * d, indexing="ij")
        pts = np.stack([a.ravel() for a in axes], axis=1).astype(np.int64)
        depth = np.abs(pts).sum(axis=1)
    elif spec.family == "zmod":
        n = spec.param
        k, z = np.meshgrid(np.arange(-R, R + 1), np.arange(n), indexing="ij")
        pts = np.stack([k.ravel(), z.ravel()], axis=1).astype(np.int64)
        depth = np.abs(pts[:, 0]) + np.minimum(pts[:, 1], n - pts[:, 1])
    else:
        k, b = np.meshgrid(np.arange(-R, R + 1), np.arange(2), indexing="ij")
        pts = np.stack([k.ravel(), b.ravel()], axis=1).astype(np.int64)
        depth = np.abs(pts[:, 0])
    keep = depth <= R
    pts, depth = pts[keep], depth[keep]
    order = np.lexsort(tuple(pts[:, j] for j in range(pts.shape[1] - 1, -1, -1)) + (depth,))
    return pts[order], depth[order]


def _build_abelian(spec, R):
    pts, depth = _abelian_points(spec, R)
    d = pts.shape[1]
    base = 2 * R + 3
    shifted = pts + R + 1
    codes = np.zeros(len(pts), dtype=np.int64)
    for j in range(d):
        codes = codes * base + shifted[:, j]
    sorter = np.argsort(codes)
    sorted_codes = codes[sorter]

    def lookup(target_pts):
        tc = np.zeros(len(target_pts), dtype=np.int64)
        for j in range(d):
            tc = tc * base + (target_pts[:, j] + R + 1)
        pos = np.searchsorted(sorted_codes, tc)
        pos = np.minimum(pos, len(sorted_codes) - 1)
        found = sorted_codes[pos] == tc
        return np.where(found, sorter[pos], -1)

    idx = np.arange(len(pts))
    eus, evs, egs = [], [], []
    if spec.family == "zmod":
        n = spec.param
        steps = [(0, np.array([1, 0]), None)]
        # vertical edges {(k,z),(k,z+1)}; the wrap edge {(k,n-1),(k,0)} is
        # owned by (k,0) via z-1.
        steps.append((2, np.array([0, 1]), pts[:, 1] < n - 1))
        if n > 2:
            steps.append((3, np.array([0, n - 1]), pts[:, 1] == 0))
        for gid, delta, mask in steps:
            tgt = pts + delta
            tgt[:, 1] %= n
            j = lookup(tgt)
            ok = j >= 0 if mask is None else (j >= 0) & mask
            eus.append(idx[ok]); evs.append(j[ok]); egs.append(np.full(ok.sum(), gid))
    else:
        axes = 1 if spec.family == "two-line" else d
        for axis in range(axes):
            delta = np.zeros(d, dtype=np.int64)
            delta[axis] = 1
            j = lookup(pts + delta)
            ok = j >= 0
            eus.append(idx[ok]); evs.append(j[ok]); egs.append(np.full(ok.sum(), 2 * axis))
    eu = np.concatenate(eus).astype(np.int64)
    ev = np.concatenate(evs).astype(np.int64)
    eg = np.concatenate(egs).astype(np.int64)
    order = np.lexsort((eg, eu))
    vkeys = _vertex_keys_abelian(pts)
    return CayleyBall(spec, R, depth.astype(np.int64), eu[order], ev[order], eg[order],
                      vkeys, coords=pts)


def _build_free(spec, R):
    k = 2 * spec.param
    parent = [np.array([-1], dtype=np.int64)]
    last = [np.array([-1], dtype=np.int64)]
    depth = [np.array([0], dtype=np.int64)]
    vkeys = [np.array([kernels.VERTEX_BASE], dtype=np.uint64)]
    offset = 0
    for level in range(1, R + 1):
        prev_last = last[-1]
        prev_idx = np.arange(offset, offset + len(prev_last))
        letters = np.arange(k)
        cand_parent = np.repeat(prev_idx, k)
        cand_letter = np.tile(letters, len(prev_idx))
        cand_prevlast = np.repeat(prev_last, k)
        ok = (cand_prevlast < 0) | (cand_letter != (cand_prevlast ^ 1))
        p = cand_parent[ok]
        lt = cand_letter[ok]
        parent.append(p)
        last.append(lt)
        depth.append(np.full(len(p), level, dtype=np.int64))
        vkeys.append(kernels.fold_np(vkeys[-1][np.repeat(np.arange(len(prev_idx)), k)[ok]], lt))
        offset += len(prev_last)
    parent = np.concatenate(parent)
    last = np.concatenate(last)
    depth = np.concatenate(depth)
    vkeys = np.concatenate(vkeys)
    children = np.arange(1, len(parent), dtype=np.int64)
    return CayleyBall(spec, R, depth, parent[1:].copy(), children, last[1:].copy(),
                      vkeys, parent=parent, last=last)


def build_ball(spec, radius, max_vertices=DEFAULT_MAX_VERTICES):
    """Build the radius-``radius`` ball of ``spec`` around the anchor.

    Raises
    ------
    BallSizeError
        If the ball would have more than ``max_vertices`` vertices.
    """
    if radius < 0:
        raise ValueError("radius must be non-negative")
    _check_cap(spec, radius, max_vertices)
    if spec.family == "free":
        return _build_free(spec, radius)
    return _build_abelian(spec, radius)


def _as_nf(ball, v):
    if isinstance(v, tuple):
        return v
    return ball.nf(v)


def act(ball, g, v):
    """Index of ``g . v``, or None when it leaves the ball."""
    return ball.index(ball.spec.multiply(g, _as_nf(ball, v)))


def canonical_edge_key(ball, e):
    """``(smaller endpoint normal form, generator id)`` of an edge.

    ``e`` is an edge index or a pair of endpoint indices in either order.
    """
    if isinstance(e, tuple):
        u, v = e
        idx = ball.edge_between(int(u), int(v))
        if idx is None:
            raise ValueError(f"no edge between {u} and {v}")
        e = idx
    return ball.nf(ball.eu[e]), int(ball.egen[e])
