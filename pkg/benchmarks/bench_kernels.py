"""Time the numba kernels against their pure-numpy fallbacks.

    python benchmarks/bench_kernels.py [--trials 200] [--repeat 3]

Both variants run on the same inputs; outputs are checked for equality
before timings are reported.
"""
import argparse
import time

import numpy as np

from cayleyperc import kernels
from cayleyperc.groups import GroupGraphSpec, build_ball
from cayleyperc.parallel import field_keys


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def cases(ball, trials):
    fks = field_keys(1, 0, trials)
    fk = np.uint64(fks[0])
    open_mask = kernels.uniform_labels_np(ball.ekeys, fk) < 0.5
    yield "uniform_labels", (ball.ekeys, fk)
    yield "scenery_bits", (ball.vkeys, fk)
    yield "component_labels", (ball.n_vertices, ball.eu, ball.ev, open_mask)
    yield "bottlenecks", (ball.indptr, ball.nbr, ball.nbr_edge, ball.ekeys, ball.is_boundary,
                          ball.root, fks)
    yield "boundary_cluster_counts", (ball.n_vertices, ball.eu, ball.ev, ball.ekeys,
                                      ball.boundary, fks, 0.5)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=20)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    print(f"{'graph':<12}{'kernel':<26}{'numba ms':>10}{'numpy ms':>10}{'speedup':>9}")
    for graph, R in (("lattice:2", 128), ("free:2", 10)):
        ball = build_ball(GroupGraphSpec.parse(graph), R)
        for name, inputs in cases(ball, args.trials):
            nb = getattr(kernels, name + "_nb")
            np_ = getattr(kernels, name + "_np")
            nb(*inputs)  # compile outside the timed region
            t_nb, out_nb = best_of(lambda: nb(*inputs), args.repeat)
            t_np, out_np = best_of(lambda: np_(*inputs), args.repeat)
            assert np.array_equal(out_nb, out_np), name
            print(f"{graph:<12}{name:<26}{1e3 * t_nb:>10.2f}{1e3 * t_np:>10.2f}{t_np / t_nb:>9.1f}")


if __name__ == "__main__":
    main()
