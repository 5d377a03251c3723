"""Exact small-instance measures and the branching-process oracle."""
from dataclasses import dataclass
from math import fsum

import numpy as np

from . import kernels
from .percolation import Configuration, clusters

MAX_EXACT_EDGES = 20


class ExactSizeError(ValueError):
    """Too many edges for exhaustive enumeration."""


def _check_size(ball):
    if ball.n_edges > MAX_EXACT_EDGES:
        raise ExactSizeError(
            f"exact enumeration needs <= {MAX_EXACT_EDGES} edges, ball has {ball.n_edges}")


def config_from_code(ball, code):
    """Configuration whose edge ``e`` is open iff bit ``e`` of ``code`` is set."""
    bits = (np.int64(code) >> np.arange(ball.n_edges, dtype=np.int64)) & 1
    return Configuration(ball, bits.astype(bool))


def config_code(config):
    return int(np.dot(config.open.astype(np.int64), 1 << np.arange(config.open.size, dtype=np.int64)))


def _weights(m, p):
    codes = np.arange(1 << m, dtype=np.int64)
    n_open = np.zeros(codes.size, dtype=np.int64)
    for e in range(m):
        n_open += (codes >> e) & 1
    return np.power(p, n_open) * np.power(1.0 - p, m - n_open)


def event_codes(ball, event):
    """Sorted codes of all configurations satisfying ``event``."""
    _check_size(ball)
    return np.array([c for c in range(1 << ball.n_edges)
                     if event(config_from_code(ball, c))], dtype=np.int64)


def measure_of_codes(codes, m, p):
    if len(codes) == 0:
        return 0.0
    return fsum(_weights(m, p)[np.asarray(codes, dtype=np.int64)].tolist())


def exact_measure(ball, p, event):
    """P_p[event] by summing over all 2^|E| configurations of the ball."""
    _check_size(ball)
    return measure_of_codes(event_codes(ball, event), ball.n_edges, p)


@dataclass(frozen=True)
class InsertionReport:
    measure_B: float
    measure_PiB: tuple
    all_positive: bool


def insertion_tolerance_check(ball, p, event):
    """Exact P_p[B] and P_p[Pi^e(B)] for every edge e.

    ``Pi^e(B)`` is the image of B under forcing edge e open.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("insertion check needs 0 < p < 1")
    codes = event_codes(ball, event)
    m = ball.n_edges
    mB = measure_of_codes(codes, m, p)
    images = tuple(measure_of_codes(np.unique(codes | (1 << e)), m, p) for e in range(m))
    ok = mB == 0.0 or all(x > 0.0 for x in images)
    return InsertionReport(mB, images, ok)


def tree_theta_exact(degree, p, tol=1e-12, max_iter=10**7):
    """Percolation probability of the root in the infinite degree-regular tree.

    Iterates z <- (1 - p + p z)^(degree - 1) upward from 0 to the smallest
    fixed point (extinction probability of a branch).
    """
    if degree < 3:
        raise ValueError("degree must be >= 3")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if p * (degree - 1) <= 1.0:
        return 0.0
    z = 0.0
    for _ in range(max_iter):
        nz = (1.0 - p + p * z) ** (degree - 1)
        if abs(nz - z) < tol:
            z = nz
            break
        z = nz
    return 1.0 - (1.0 - p + p * z) ** degree


def tree_theta_finite(degree, p, R):
    """P[root connects to distance R] in the degree-regular tree, exactly."""
    if R == 0:
        return 1.0
    q = 1.0
    for _ in range(R - 1):
        q = 1.0 - (1.0 - p * q) ** (degree - 1)
    return 1.0 - (1.0 - p * q) ** degree


def named_event(ball, text):
    """Event predicate from a short name.

    ``always``, ``never``, ``all-closed``, ``all-open``, ``root-touches``,
    ``root-size:M`` (anchor cluster has at least M vertices) and
    ``random:SEED:DENSITY`` (a pseudo-random set of configurations).
    """
    name, _, arg = text.strip().partition(":")
    if name == "always":
        return lambda c: True
    if name == "never":
        return lambda c: False
    if name == "all-closed":
        return lambda c: not c.open.any()
    if name == "all-open":
        return lambda c: bool(c.open.all())
    if name == "root-touches":
        return lambda c: clusters(c).touches_boundary(0)
    if name == "root-size":
        m = int(arg)
        return lambda c: clusters(c).size(0) >= m
    if name == "random":
        seed_text, _, density_text = arg.partition(":")
        seed, density = int(seed_text), float(density_text or 0.5)
        return random_event(seed, density)
    raise ValueError(f"unknown event {text!r}")


def random_event(seed, density=0.5):
    """Pseudo-random set of configurations, each included with prob ``density``."""
    def event(config):
        key = kernels.fold(kernels.splitmix(seed & kernels.MASK64), config_code(config))
        return kernels.label_from_key(key, seed & kernels.MASK64) < density
    return event
