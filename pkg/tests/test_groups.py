import itertools

import pytest
from hypothesis import given, settings, strategies as st

from cayleyperc.groups import (BallSizeError, GroupGraphSpec, act, ball_size, build_ball,
                               canonical_edge_key)

SPECS = [GroupGraphSpec.line(), GroupGraphSpec.hypercubic(2), GroupGraphSpec.hypercubic(3),
         GroupGraphSpec.free(2), GroupGraphSpec.free(3), GroupGraphSpec.zxzmod(4),
         GroupGraphSpec.zxzmod(2), GroupGraphSpec.zxzmod(5), GroupGraphSpec.two_line()]


@pytest.mark.parametrize("spec, R, nv, ne", [
    (GroupGraphSpec.line(), 3, 7, 6),
    (GroupGraphSpec.hypercubic(2), 1, 5, 4),
    (GroupGraphSpec.free(2), 2, 17, 16),
])
def test_build_ball_examples(spec, R, nv, ne):
    ball = build_ball(spec, R)
    assert (ball.n_vertices, ball.n_edges) == (nv, ne)
    assert ball.nf(0) == spec.identity()


@pytest.mark.parametrize("r", [1, 2, 3])
@pytest.mark.parametrize("R", range(0, 6))
def test_free_group_counts(r, R):
    ball = build_ball(GroupGraphSpec.free(r), R)
    if r == 1:
        expected = 2 * R + 1
    else:
        expected = 1 + 2 * r * ((2 * r - 1) ** R - 1) // (2 * r - 2)
    assert ball.n_vertices == expected
    assert ball.n_edges == ball.n_vertices - 1


@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("R", range(0, 7))
def test_lattice_counts_match_enumeration(d, R):
    pts = [p for p in itertools.product(range(-R, R + 1), repeat=d) if sum(map(abs, p)) <= R]
    spec = GroupGraphSpec.hypercubic(d) if d > 1 else GroupGraphSpec.line()
    ball = build_ball(spec, R)
    assert ball.n_vertices == len(pts) == ball_size(spec, R)
    assert sorted(ball.vertices) == sorted(pts)


def _brute_edges(spec, ball):
    """Induced Cayley edges of the ball by multiplying every vertex by every generator."""
    out = set()
    for v in ball.vertices:
        for g in range(spec.n_generators):
            w = spec.multiply(v, spec.generator(g))
            if w != v and ball.index(w) is not None:
                out.add(frozenset((v, w)))
    return out


@pytest.mark.parametrize("spec", SPECS, ids=str)
def test_ball_is_induced_subgraph(spec):
    ball = build_ball(spec, 3)
    got = {frozenset((ball.nf(u), ball.nf(v))) for u, v in zip(ball.eu, ball.ev)}
    assert len(got) == ball.n_edges
    assert got == _brute_edges(spec, ball)
    for u, v, g in zip(ball.eu, ball.ev, ball.egen):
        assert spec.multiply(ball.nf(u), spec.generator(int(g))) == ball.nf(v)
        assert ball.nf(u) < ball.nf(v) or spec.family == "zmod"
    boundary = {ball.nf(i) for i in ball.boundary}
    assert boundary == {v for v in ball.vertices if spec.word_length(v) == 3}


@pytest.mark.parametrize("spec", SPECS, ids=str)
def test_ordering_and_determinism(spec):
    a, b = build_ball(spec, 3), build_ball(spec, 3)
    assert a.vertices == b.vertices
    assert (a.ekeys == b.ekeys).all()
    keys = [(spec.word_length(v), v) for v in a.vertices]
    assert keys == sorted(keys)
    assert all(a.index(v) == i for i, v in enumerate(a.vertices))


def test_act_examples(line3, free2_ball):
    assert line3.nf(act(line3, (1,), (0,))) == (1,)
    assert act(line3, (1,), (3,)) is None
    a = (0,)
    assert free2_ball.nf(act(free2_ball, a, a)) == (0, 0)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(SPECS[:8]), st.data())
def test_act_composes(spec, data):
    ball = build_ball(spec, 4)
    v = data.draw(st.integers(0, ball.n_vertices - 1))
    g = ball.nf(data.draw(st.integers(0, ball.n_vertices - 1)))
    h = ball.nf(data.draw(st.integers(0, ball.n_vertices - 1)))
    hv = act(ball, h, v)
    if hv is None:
        return
    lhs = act(ball, g, hv)
    rhs = act(ball, spec.multiply(g, h), v)
    if lhs is not None:
        assert lhs == rhs


@pytest.mark.parametrize("spec", SPECS[:8], ids=str)
def test_act_is_graph_morphism(spec):
    ball = build_ball(spec, 3)
    g = ball.nf(1)
    for u, v in zip(ball.eu.tolist(), ball.ev.tolist()):
        gu, gv = act(ball, g, u), act(ball, g, v)
        if gu is not None and gv is not None:
            assert ball.edge_between(gu, gv) is not None


def test_canonical_edge_key_examples(line3):
    e = line3.edge_between(line3.index((0,)), line3.index((1,)))
    assert canonical_edge_key(line3, e) == ((0,), 0)
    big = build_ball(GroupGraphSpec.line(), 10)
    e10 = big.edge_between(big.index((0,)), big.index((1,)))
    assert canonical_edge_key(big, e10) == canonical_edge_key(line3, e)
    u, v = line3.index((0,)), line3.index((1,))
    assert canonical_edge_key(line3, (u, v)) == canonical_edge_key(line3, (v, u))


@pytest.mark.parametrize("spec", SPECS, ids=str)
def test_edge_keys_stable_across_radii(spec):
    small, big = build_ball(spec, 2), build_ball(spec, 4)
    for e in range(small.n_edges):
        key = canonical_edge_key(small, e)
        u, v = big.index(small.nf(small.eu[e])), big.index(small.nf(small.ev[e]))
        e_big = big.edge_between(u, v)
        assert canonical_edge_key(big, e_big) == key
        assert big.ekeys[e_big] == small.ekeys[e]
    assert len({canonical_edge_key(big, e) for e in range(big.n_edges)}) == big.n_edges


def test_size_cap():
    with pytest.raises(BallSizeError, match="1062881"):
        build_ball(GroupGraphSpec.free(2), 12, max_vertices=10**6)


def test_spec_validation_and_parse():
    with pytest.raises(ValueError):
        GroupGraphSpec.zxzmod(1)
    with pytest.raises(ValueError):
        GroupGraphSpec("torus", 2)
    assert GroupGraphSpec.parse("free:2") == GroupGraphSpec.free(2)
    assert GroupGraphSpec.parse("two-line") == GroupGraphSpec.two_line()
    assert not GroupGraphSpec.two_line().transitive
    spec = GroupGraphSpec.free(2)
    assert spec.parse_element("aB") == (0, 3)
    assert spec.format((0, 3)) == "aB"
    assert spec.parse_element("aA") == ()


def test_two_line_has_two_components():
    from cayleyperc.percolation import Configuration, clusters
    import numpy as np
    ball = build_ball(GroupGraphSpec.two_line(), 4)
    decomp = clusters(Configuration(ball, np.ones(ball.n_edges, dtype=bool)))
    assert decomp.n_clusters == 2
