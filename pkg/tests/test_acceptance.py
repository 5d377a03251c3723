"""Acceptance criteria, one test each, at the stated tolerances.

Each test records a PASS/FAIL line (shown with ``-s`` and in the terminal
summary) before asserting.
"""
import time
from math import comb, sqrt

import numpy as np
import pytest

from cayleyperc import cli, parallel
from cayleyperc.asymptotic import (PropertySeqSpec, ReRootingSpec, acp_mismatch, srw_bound,
                                   srw_distribution, srw_endpoint_prob, strong_indist_statistic,
                                   zxzmod4_mismatch)
from cayleyperc.exact import (event_codes, exact_measure, insertion_tolerance_check,
                              measure_of_codes, random_event, tree_theta_exact)
from cayleyperc.groups import GroupGraphSpec, build_ball
from cayleyperc.models import SceneryModel
from cayleyperc.percolation import Configuration, clusters, label_matrix, pc_estimate, theta_curve
from cayleyperc.properties import PropertySpec

from conftest import bfs_partition

pytestmark = pytest.mark.slow


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def _codes(labels, p):
    bits = (labels < p).astype(np.int64)
    return bits @ (1 << np.arange(labels.shape[1], dtype=np.int64))


def test_c01_coupling_monotone(acceptance):
    ps = np.round(np.arange(1, 10) / 10, 1)
    ball = build_ball(GroupGraphSpec.hypercubic(2), 8)
    with Timer() as t:
        labels = label_matrix(ball, 101, 0, 1000)
        violations = 0
        for i, p in enumerate(ps):
            low = labels < p
            for q in ps[i + 1:]:
                violations += int(np.count_nonzero(low & ~(labels < q)))
    ok = violations == 0 and t.elapsed < 30
    acceptance("1 coupling monotonicity", ok, f"violations={violations}, {t.elapsed:.1f}s")
    assert ok


def test_c02_cluster_oracle(acceptance):
    graphs = ["line", "lattice:2", "lattice:3", "free:2", "free:3", "zmod:4", "zmod:3", "two-line"]
    rng = np.random.default_rng(202)
    balls = {(g, R): build_ball(GroupGraphSpec.parse(g), R) for g in graphs for R in range(1, 9)
             if not (g == "free:3" and R > 6)}
    keys = sorted(balls)
    mismatches = 0
    with Timer() as t:
        for i in range(1000):
            ball = balls[keys[i % len(keys)]]
            config_open = rng.random(ball.n_edges) < rng.uniform(0.2, 0.8)
            got = clusters(Configuration(ball, config_open)).cluster_id
            mismatches += not np.array_equal(got, bfs_partition(ball, config_open))
    ok = mismatches == 0 and t.elapsed < 60
    acceptance("2 cluster oracle", ok, f"mismatches={mismatches}/1000, {t.elapsed:.1f}s")
    assert ok


def test_c03_exact_vs_monte_carlo(acceptance):
    ball = build_ball(GroupGraphSpec.line(), 6)
    assert ball.n_edges == 12
    trials = 10**5
    worst = 0.0
    with Timer() as t:
        labels = label_matrix(ball, 303, 0, trials)
        events = [random_event(seed, density) for seed, density in
                  zip(range(20), np.linspace(0.05, 0.95, 20))]
        code_sets = [event_codes(ball, ev) for ev in events]
        for p in (0.3, 0.5, 0.7):
            sampled = _codes(labels, p)
            for ev, codes in zip(events, code_sets):
                exact = exact_measure(ball, p, ev)
                assert exact == measure_of_codes(codes, ball.n_edges, p)
                mc = np.count_nonzero(np.isin(sampled, codes)) / trials
                sigma = sqrt(exact * (1 - exact) / trials)
                worst = max(worst, abs(mc - exact) / sigma if sigma > 0 else 0.0)
    ok = worst <= 4.0 and t.elapsed < 120
    acceptance("3 exact vs Monte Carlo", ok, f"max |MC-exact|/sigma={worst:.2f} over 60 cases, "
               f"{t.elapsed:.1f}s")
    assert ok


def test_c04_insertion_tolerance(acceptance):
    ball = build_ball(GroupGraphSpec.line(), 5)
    assert ball.n_edges == 10
    checked = violations = 0
    seed = 0
    with Timer() as t:
        while checked < 50:
            density = (0.002, 0.01, 0.1, 0.5)[seed % 4]
            report = insertion_tolerance_check(ball, 0.3, random_event(1000 + seed, density))
            seed += 1
            if report.measure_B == 0.0:
                continue
            checked += 1
            violations += sum(m <= 0.0 for m in report.measure_PiB)
    ok = violations == 0 and t.elapsed < 60
    acceptance("4 insertion tolerance", ok, f"events={checked}, violations={violations}, "
               f"{t.elapsed:.1f}s")
    assert ok


def test_c05_tree_theta(acceptance):
    ps = [0.2, 1 / 3, 0.5, 0.7]
    with Timer() as t:
        curve = theta_curve(GroupGraphSpec.free(2), ps, 12, 10**4, 505)
    parts, ok = [], t.elapsed < 120
    for p, est in curve:
        exact = tree_theta_exact(4, p)
        good = abs(est.estimate - exact) <= 3 * est.stderr + 0.02
        ok &= good
        parts.append(f"p={p:.3f}: {est.estimate:.4f} vs {exact:.4f} {'ok' if good else 'OUT'}")
    low = curve[0][1].estimate <= 0.01
    ok &= low
    acceptance("5 tree theta oracle", ok, "; ".join(parts) + f"; p=0.2 <= 0.01: {low}, "
               f"{t.elapsed:.1f}s")
    assert ok


def test_c06_pc_proxies(acceptance):
    with Timer() as t:
        line = pc_estimate(GroupGraphSpec.line(), 64, 4000, 0.004, 606)
        free = pc_estimate(GroupGraphSpec.free(2), 12, 4000, 0.004, 606)
        z2 = pc_estimate(GroupGraphSpec.hypercubic(2), 48, 4000, 0.004, 606)
    checks = {
        "line lo>=0.95": line[0] >= 0.95,
        "free in 1/3+-0.05": 1 / 3 - 0.05 <= free[0] and free[1] <= 1 / 3 + 0.05,
        "Z2 in [0.45,0.55]": 0.45 <= z2[0] and z2[1] <= 0.55,
    }
    ok = all(checks.values()) and t.elapsed < 600
    detail = (f"line=({line[0]:.4f},{line[1]:.4f}) free=({free[0]:.4f},{free[1]:.4f}) "
              f"Z2=({z2[0]:.4f},{z2[1]:.4f}); "
              + ", ".join(f"{k}: {v}" for k, v in checks.items()) + f", {t.elapsed:.1f}s")
    acceptance("6 pc proxies", ok, detail)
    assert ok


def test_c07_two_line_decay(acceptance):
    ns = [8, 16, 32, 64, 128, 256]
    model = SceneryModel("two-line", 2 * max(ns) + 3)
    seq = PropertySeqSpec(PropertySpec.majority_window(0))
    r = ReRootingSpec.translate((2, 0))
    with Timer() as t:
        ests = [acp_mismatch(model, seq, r, n, 2 * 10**4, 707) for n in ns]
    m = [e.estimate for e in ests]
    s = [e.stderr for e in ests]
    inversions = [(i, m[i + 1] - m[i] <= max(s[i], s[i + 1])) for i in range(len(ns) - 1)
                  if m[i + 1] >= m[i]]
    decreasing = len(inversions) == 0 or (len(inversions) == 1 and inversions[0][1])
    slope = float(np.polyfit(np.log(ns), np.log(m), 1)[0])
    bounds = [srw_bound(n, 2) for n in ns]
    under = all(mi <= b + 3 * si for mi, b, si in zip(m, bounds, s))
    ok = decreasing and -0.65 <= slope <= -0.35 and under and t.elapsed < 300
    acceptance("7 two-line decay", ok,
               "mismatch=" + ",".join(f"{x:.4f}" for x in m)
               + f"; decreasing={decreasing}, slope={slope:.3f}, under bound={under}, "
               f"{t.elapsed:.1f}s")
    assert ok


def test_c08_two_line_strong_indist(acceptance):
    ns = [8, 64, 256]
    model = SceneryModel("two-line", 2 * max(ns) + 1)
    seq = PropertySeqSpec(PropertySpec.majority_window(0))
    with Timer() as t:
        ests = [strong_indist_statistic(model, seq, n, [(0, 0), (0, 1)], 10**4, 808) for n in ns]
    vals = [e.estimate for e in ests]
    ok = all(abs(v - 0.5) <= 0.02 for v in vals) and t.elapsed < 120
    acceptance("8 two-line strong indist", ok,
               ", ".join(f"n={n}: {v:.4f}" for n, v in zip(ns, vals)) + f", {t.elapsed:.1f}s")
    assert ok


def test_c09_free_directed(acceptance):
    model = SceneryModel("free-directed", 4)
    seq = PropertySeqSpec(PropertySpec.directed_majority(0))
    trials = 10**4
    with Timer() as t:
        mism = {n: 1.0 - strong_indist_statistic(model, seq, n, [(0,), (2,)], trials, 909).estimate
                for n in (4, 16)}
        interior = model.ball.depth < model.radius
        bad_degree = 0
        for trial in range(trials):
            sample = model.sample(909, trial)
            bad_degree += int(np.count_nonzero(sample.out_degrees()[interior] != 1))
    ok = all(abs(v - 0.5) <= 0.02 for v in mism.values()) and bad_degree == 0 and t.elapsed < 120
    acceptance("9 free-directed", ok, ", ".join(f"n={n}: {v:.4f}" for n, v in mism.items())
               + f"; out-degree != 1 at {bad_degree} interior vertex-trials, {t.elapsed:.1f}s")
    assert ok


def test_c10_zxzmod4(acceptance):
    ns = [4, 16, 64]
    trials = 10**4
    with Timer() as t:
        vals = {n: zxzmod4_mismatch(n, 2 * n + 2, trials, 1010).estimate for n in ns}
        model = SceneryModel("zmod4", 10)
        horizontal = model.ball.egen < 2
        closed = 0
        for trial in range(trials):
            closed += int(np.count_nonzero(~model.sample(1010, trial).config.open[horizontal]))
    ok = all(v >= 0.1 for v in vals.values()) and closed == 0 and t.elapsed < 120
    acceptance("10 Z x Z/4Z", ok, ", ".join(f"n={n}: {v:.4f}" for n, v in vals.items())
               + f"; closed horizontal edges={closed}, {t.elapsed:.1f}s")
    assert ok


def test_c11_srw_oracle(acceptance):
    with Timer() as t:
        sums_ok = all(abs(srw_distribution(s)[1].sum() - 1.0) < 1e-12 for s in range(0, 201, 7))
        exact_ok = all(
            srw_endpoint_prob(s, (x, x))
            == (comb(s, (s + x) // 2) / 2**s if (s + x) % 2 == 0 else 0.0)
            for s in range(21) for x in range(-s - 1, s + 2))
        steps = [100, 200, 400, 800, 1600, 3200, 6400, 10000]
        probs = [srw_endpoint_prob(s, (-4, 4)) for s in steps]
        slope = float(np.polyfit(np.log(steps), np.log(probs), 1)[0])
    ok = sums_ok and exact_ok and abs(slope + 0.5) <= 0.02 and t.elapsed < 30
    acceptance("11 SRW oracle", ok, f"sums={sums_ok}, binomial exact={exact_ok}, "
               f"slope={slope:.4f}, {t.elapsed:.1f}s")
    assert ok


COMMANDS = [
    ["ball-info", "--graph", "free:2", "--R", "5"],
    ["theta", "--graph", "free:2", "--R", "8", "--p", "0.5"],
    ["theta-curve", "--graph", "lattice:2", "--R", "8", "--p", "0.4,0.5,0.6"],
    ["pc", "--graph", "line", "--R", "16", "--tol", "0.01"],
    ["nclusters-curve", "--graph", "lattice:2", "--R", "6", "--p", "0.5,0.7"],
    ["indist", "--graph", "lattice:2", "--R", "6", "--p1", "0.6", "--prop",
     "contains-subcluster:0.45"],
    ["cluster-prop-check", "--graph", "lattice:2", "--R", "5", "--p", "0.6", "--prop", "degree:4"],
    ["acp", "--model", "two-line", "--n", "4,8", "--shift", "2"],
    ["strong-indist", "--model", "two-line", "--n", "4,8"],
    ["counterexample", "two-line", "--n", "4"],
    ["counterexample", "z-zmod4", "--n", "4"],
    ["counterexample", "free-directed", "--n", "4"],
    ["exact-measure", "--graph", "line", "--R", "4", "--p", "0.3,0.5", "--event", "random:3:0.4"],
    ["insertion-check", "--graph", "line", "--R", "3", "--p", "0.3", "--event", "root-touches"],
    ["srw-oracle", "--steps", "10,100,1000"],
]


def test_c12_determinism(acceptance, tmp_path, monkeypatch, capsys):
    monkeypatch.setattr(parallel, "CHUNK", 128)
    differing = []
    with Timer() as t:
        for argv in COMMANDS:
            outs = []
            for run, workers in enumerate((1, 1, 3)):
                path = tmp_path / f"{argv[0]}-{run}.csv"
                code = cli.main(argv + ["--trials", "600", "--seed", "12",
                                        "--workers", str(workers), "-o", str(path)])
                assert code == 0, capsys.readouterr().err
                outs.append(path.read_bytes())
            if not outs[0] == outs[1] == outs[2]:
                differing.append(" ".join(argv[:2]))
    capsys.readouterr()
    ok = not differing and t.elapsed < 120
    acceptance("12 determinism", ok, f"{len(COMMANDS)} commands x 3 runs, differing={differing}, "
               f"{t.elapsed:.1f}s")
    assert ok
