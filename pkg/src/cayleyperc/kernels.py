"""Hot numeric kernels.

Every kernel has a numba implementation (``*_nb``) and a pure-numpy
implementation (``*_np``) that return bit-identical results.  The public
name dispatches on :data:`cayleyperc._accel.USE_NUMBA`.

Hashing is splitmix64-based and counter-style: a label or bit is a pure
function of a 64-bit field key and a 64-bit edge/vertex key, so results do
not depend on evaluation order, chunking or ball radius.
"""
import heapq

import numpy as np

from ._accel import USE_NUMBA, njit

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_C1 = 0xBF58476D1CE4E5B9
_C2 = 0x94D049BB133111EB
SCENERY_SALT = 0xD1B54A32D192ED03
TRIAL_SALT = 0x8CB92BA72F3D8DD7
EDGE_SALT = 0xA0761D6478BD642F
VERTEX_BASE = 0xE7037ED1A0B428DB

_U_GOLDEN = np.uint64(GOLDEN)
_U_C1 = np.uint64(_C1)
_U_C2 = np.uint64(_C2)
_U_SCENERY = np.uint64(SCENERY_SALT)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_S63 = np.uint64(63)
_INV53 = 1.0 / 9007199254740992.0


# -- scalar (python int) hashing ------------------------------------------

def splitmix(x):
    z = (x + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * _C1) & MASK64
    z = ((z ^ (z >> 27)) * _C2) & MASK64
    return z ^ (z >> 31)


def fold(h, x):
    """Absorb one integer (any sign) into a running 64-bit key."""
    return splitmix(h ^ splitmix(x & MASK64))


def fold_all(values, h=VERTEX_BASE):
    for x in values:
        h = fold(h, x)
    return h


def trial_key(seed, trial):
    """Seed of trial ``trial`` under master ``seed``."""
    return fold(splitmix((seed & MASK64) ^ TRIAL_SALT), trial)


def label_from_key(ekey, field_key):
    raw = splitmix(splitmix(ekey ^ field_key))
    return (raw >> 11) * _INV53


def bit_from_key(vkey, field_key):
    raw = splitmix(splitmix(vkey ^ field_key ^ SCENERY_SALT))
    return bool(raw >> 63)


# -- vectorised numpy hashing ----------------------------------------------

def splitmix_np(x):
    z = np.asarray(x, dtype=np.uint64) + _U_GOLDEN
    z = (z ^ (z >> _S30)) * _U_C1
    z = (z ^ (z >> _S27)) * _U_C2
    return z ^ (z >> _S31)


def as_u64(values):
    """Two's-complement view of an integer array as uint64."""
    return np.ascontiguousarray(values, dtype=np.int64).view(np.uint64)


def fold_np(h, x):
    return splitmix_np(np.asarray(h, dtype=np.uint64) ^ splitmix_np(as_u64(x)))


# -- numba scalar helpers ----------------------------------------------------

@njit(cache=True, inline="always")
def _splitmix_nb(x):
    z = x + _U_GOLDEN
    z = (z ^ (z >> _S30)) * _U_C1
    z = (z ^ (z >> _S27)) * _U_C2
    return z ^ (z >> _S31)


@njit(cache=True, inline="always")
def _label_nb(ekey, fk):
    raw = _splitmix_nb(_splitmix_nb(ekey ^ fk))
    return np.float64(raw >> _S11) * _INV53


# -- uniform labels ----------------------------------------------------------

@njit(cache=True)
def uniform_labels_nb(ekeys, field_key):
    out = np.empty(ekeys.shape[0], dtype=np.float64)
    for i in range(ekeys.shape[0]):
        out[i] = _label_nb(ekeys[i], field_key)
    return out


def uniform_labels_np(ekeys, field_key):
    raw = splitmix_np(splitmix_np(ekeys ^ np.uint64(field_key)))
    return (raw >> _S11).astype(np.float64) * _INV53


# -- scenery bits ------------------------------------------------------------

@njit(cache=True)
def scenery_bits_nb(vkeys, field_key):
    out = np.empty(vkeys.shape[0], dtype=np.bool_)
    salt = field_key ^ _U_SCENERY
    for i in range(vkeys.shape[0]):
        out[i] = (_splitmix_nb(_splitmix_nb(vkeys[i] ^ salt)) >> _S63) == 1
    return out


def scenery_bits_np(vkeys, field_key):
    salt = np.uint64(field_key) ^ _U_SCENERY
    raw = splitmix_np(splitmix_np(vkeys ^ salt))
    return (raw >> _S63).astype(bool)


# -- connected components ----------------------------------------------------

@njit(cache=True, inline="always")
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit(cache=True)
def component_labels_nb(n, eu, ev, open_mask):
    parent = np.arange(n)
    for e in range(eu.shape[0]):
        if open_mask[e]:
            a = _find(parent, eu[e])
            b = _find(parent, ev[e])
            if a < b:
                parent[b] = a
            elif b < a:
                parent[a] = b
    for i in range(n):
        parent[i] = _find(parent, i)
    return parent


def component_labels_np(n, eu, ev, open_mask):
    labels = np.arange(n)
    u = eu[open_mask]
    v = ev[open_mask]
    while True:
        m = np.minimum(labels[u], labels[v])
        new = labels.copy()
        np.minimum.at(new, u, m)
        np.minimum.at(new, v, m)
        while True:
            jumped = new[new]
            if np.array_equal(jumped, new):
                break
            new = jumped
        if np.array_equal(new, labels):
            return labels
        labels = new


# -- minimax path from the root to the boundary ------------------------------
#
# The root reaches the boundary in the threshold-p configuration iff the
# returned bottleneck b satisfies b < p.  -1.0 means the root is itself on
# the boundary, 2.0 means the boundary is unreachable.

@njit(cache=True)
def bottlenecks_nb(indptr, nbr, nbr_edge, ekeys, is_boundary, root, field_keys):
    n = indptr.shape[0] - 1
    out = np.empty(field_keys.shape[0], dtype=np.float64)
    best = np.full(n, 3.0)
    done = np.zeros(n, dtype=np.bool_)
    touched = np.empty(n, dtype=np.int64)
    for t in range(field_keys.shape[0]):
        fk = field_keys[t]
        if is_boundary[root]:
            out[t] = -1.0
            continue
        ntouched = 0
        result = 2.0
        heap = [(0.0, root)]
        best[root] = 0.0
        touched[ntouched] = root
        ntouched += 1
        while len(heap) > 0:
            w, x = heapq.heappop(heap)
            if done[x]:
                continue
            done[x] = True
            if is_boundary[x]:
                result = w
                break
            for k in range(indptr[x], indptr[x + 1]):
                y = nbr[k]
                if done[y]:
                    continue
                lab = _label_nb(ekeys[nbr_edge[k]], fk)
                c = w if w > lab else lab
                if c < best[y]:
                    if best[y] == 3.0:
                        touched[ntouched] = y
                        ntouched += 1
                    best[y] = c
                    heapq.heappush(heap, (c, y))
        for i in range(ntouched):
            best[touched[i]] = 3.0
            done[touched[i]] = False
        out[t] = result
    return out


def bottlenecks_np(indptr, nbr, nbr_edge, ekeys, is_boundary, root, field_keys):
    out = np.empty(len(field_keys), dtype=np.float64)
    for t, fk in enumerate(field_keys):
        if is_boundary[root]:
            out[t] = -1.0
            continue
        labels = uniform_labels_np(ekeys, int(fk))
        best = {root: 0.0}
        done = set()
        heap = [(0.0, int(root))]
        result = 2.0
        while heap:
            w, x = heapq.heappop(heap)
            if x in done:
                continue
            done.add(x)
            if is_boundary[x]:
                result = w
                break
            lo, hi = indptr[x], indptr[x + 1]
            for y, e in zip(nbr[lo:hi].tolist(), nbr_edge[lo:hi].tolist()):
                if y in done:
                    continue
                c = max(w, labels[e])
                if c < best.get(y, 3.0):
                    best[y] = c
                    heapq.heappush(heap, (c, y))
        out[t] = result
    return out


# -- boundary cluster counts --------------------------------------------------

@njit(cache=True)
def boundary_cluster_counts_nb(n, eu, ev, ekeys, boundary_idx, field_keys, p):
    out = np.empty(field_keys.shape[0], dtype=np.int64)
    open_mask = np.empty(eu.shape[0], dtype=np.bool_)
    seen = np.zeros(n, dtype=np.bool_)
    for t in range(field_keys.shape[0]):
        fk = field_keys[t]
        for e in range(eu.shape[0]):
            open_mask[e] = _label_nb(ekeys[e], fk) < p
        labels = component_labels_nb(n, eu, ev, open_mask)
        count = 0
        for i in range(boundary_idx.shape[0]):
            r = labels[boundary_idx[i]]
            if not seen[r]:
                seen[r] = True
                count += 1
        for i in range(boundary_idx.shape[0]):
            seen[labels[boundary_idx[i]]] = False
        out[t] = count
    return out


def boundary_cluster_counts_np(n, eu, ev, ekeys, boundary_idx, field_keys, p):
    out = np.empty(len(field_keys), dtype=np.int64)
    for t, fk in enumerate(field_keys):
        open_mask = uniform_labels_np(ekeys, int(fk)) < p
        labels = component_labels_np(n, eu, ev, open_mask)
        out[t] = np.unique(labels[boundary_idx]).size
    return out


def _pick(nb, np_):
    return nb if USE_NUMBA else np_


def uniform_labels(ekeys, field_key):
    """Uniform [0,1) label per key under ``field_key``."""
    return _pick(uniform_labels_nb, uniform_labels_np)(ekeys, np.uint64(field_key))


def scenery_bits(vkeys, field_key):
    """Fair bit per vertex key under ``field_key``."""
    return _pick(scenery_bits_nb, scenery_bits_np)(vkeys, np.uint64(field_key))


def component_labels(n, eu, ev, open_mask):
    """Smallest vertex index of each vertex's component."""
    return _pick(component_labels_nb, component_labels_np)(
        int(n), eu, ev, np.ascontiguousarray(open_mask, dtype=np.bool_))


def bottlenecks(indptr, nbr, nbr_edge, ekeys, is_boundary, root, field_keys):
    keys = np.asarray(field_keys, dtype=np.uint64)
    return _pick(bottlenecks_nb, bottlenecks_np)(
        indptr, nbr, nbr_edge, ekeys, is_boundary, np.int64(root), keys)


def boundary_cluster_counts(n, eu, ev, ekeys, boundary_idx, field_keys, p):
    keys = np.asarray(field_keys, dtype=np.uint64)
    return _pick(boundary_cluster_counts_nb, boundary_cluster_counts_np)(
        int(n), eu, ev, ekeys, boundary_idx, keys, float(p))
