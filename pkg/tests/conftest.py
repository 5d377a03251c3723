from collections import deque

import numpy as np
import pytest

from cayleyperc.groups import GroupGraphSpec, build_ball

_ACCEPTANCE = []


def bfs_partition(ball, open_mask):
    """Flood-fill oracle: smallest vertex index of each vertex's component."""
    label = [-1] * ball.n_vertices
    adj = [[] for _ in range(ball.n_vertices)]
    for e, (u, v) in enumerate(zip(ball.eu.tolist(), ball.ev.tolist())):
        if open_mask[e]:
            adj[u].append(v)
            adj[v].append(u)
    for s in range(ball.n_vertices):
        if label[s] >= 0:
            continue
        label[s] = s
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if label[y] < 0:
                    label[y] = s
                    queue.append(y)
    return np.array(label)


@pytest.fixture(scope="session")
def line3():
    return build_ball(GroupGraphSpec.line(), 3)


@pytest.fixture(scope="session")
def z2_ball():
    return build_ball(GroupGraphSpec.hypercubic(2), 6)


@pytest.fixture(scope="session")
def free2_ball():
    return build_ball(GroupGraphSpec.free(2), 2)


@pytest.fixture
def acceptance():
    def record(criterion, passed, detail):
        _ACCEPTANCE.append((criterion, bool(passed), detail))
        print(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {criterion}: {detail}")
