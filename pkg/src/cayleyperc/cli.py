"""Batch experiment driver.

Every subcommand emits one table (CSV with a header row, or JSON with one
array per column) followed by provenance: a trailing ``# key=value`` comment
line in CSV, a ``meta`` object in JSON.  Exit status is 0 on success, 2 on a
configuration error and 1 on a runtime error.
"""
import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field

from . import asymptotic as asy
from .exact import ExactSizeError, exact_measure, insertion_tolerance_check, named_event
from .groups import BallSizeError, GroupGraphSpec, ball_size, build_ball
from .models import RadiusError, SceneryModel
from .parallel import default_workers
from .percolation import (ModelError, nclusters_curve, pc_estimate, theta_curve)
from .properties import PropertySpec, check_cluster_property, indist_statistic

SUBCOMMANDS = ("ball-info", "theta", "theta-curve", "pc", "nclusters-curve", "indist",
               "cluster-prop-check", "acp", "strong-indist", "counterexample",
               "exact-measure", "insertion-check", "srw-oracle")
COUNTEREXAMPLES = ("two-line", "z-zmod4", "free-directed")


class ConfigError(ValueError):
    pass


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _fmt(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


@dataclass
class RunConfig:
    subcommand: str
    graph: GroupGraphSpec = None
    R: int = None
    ps: list = field(default_factory=list)
    p1: float = None
    prop: PropertySpec = None
    model: str = None
    reroot: asy.ReRootingSpec = None
    shift: int = None
    ns: list = field(default_factory=list)
    F: list = None
    F_radius: int = 1
    tol: float = 0.005
    event: str = "always"
    steps: list = field(default_factory=list)
    interval: tuple = (-4, 4)
    trials: int = 1000
    seed: int = 0
    workers: int = 1
    fmt: str = "csv"
    output: str = "-"

    def validate(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(f"unknown subcommand {self.subcommand!r}")
        if self.trials < 1:
            raise ConfigError("--trials must be >= 1")
        if self.workers < 1:
            raise ConfigError("--workers must be >= 1")
        if self.R is not None and self.R < 0:
            raise ConfigError("--R must be >= 0")
        for p in self.ps:
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"--p values must lie in [0, 1], got {p}")
        if self.graph is not None and self.R is not None:
            size = ball_size(self.graph, self.R)
            if size > 10**7:
                raise ConfigError(f"ball {self.graph} R={self.R} has {size} vertices; lower --R")
        sub = self.subcommand
        needs_graph = sub in ("ball-info", "theta", "theta-curve", "pc", "nclusters-curve",
                              "indist", "cluster-prop-check", "exact-measure", "insertion-check")
        if needs_graph and (self.graph is None or self.R is None):
            raise ConfigError(f"{sub} needs --graph and --R")
        if sub in ("theta", "theta-curve", "pc") and not self.graph.transitive:
            raise ConfigError(f"{sub} needs a vertex-transitive graph, {self.graph} is not")
        if sub in ("theta", "theta-curve", "nclusters-curve", "cluster-prop-check",
                   "exact-measure", "insertion-check") and not self.ps:
            raise ConfigError(f"{sub} needs --p")
        if sub == "theta-curve" and self.ps != sorted(self.ps):
            raise ConfigError("--p must be sorted ascending for theta-curve")
        if sub == "pc" and self.tol <= 0:
            raise ConfigError("--tol must be positive")
        if sub == "indist":
            if self.p1 is None or self.prop is None:
                raise ConfigError("indist needs --p1 and --prop")
            if self.F_radius > self.R:
                raise ConfigError("--F-radius must not exceed --R")
            if self.prop.kind == "contains-subcluster" and not self.prop.p0 < self.p1:
                raise ConfigError("contains-subcluster needs p0 < p1")
        if sub == "cluster-prop-check" and self.prop is None:
            raise ConfigError("cluster-prop-check needs --prop")
        if sub == "insertion-check" and not all(0.0 < p < 1.0 for p in self.ps):
            raise ConfigError("insertion-check needs 0 < p < 1")
        if sub in ("acp", "strong-indist", "counterexample") and not self.ns:
            raise ConfigError(f"{sub} needs --n")
        if any(n < 0 for n in self.ns):
            raise ConfigError("--n values must be >= 0")
        if sub in ("acp", "strong-indist") and self.model is None:
            raise ConfigError(f"{sub} needs --model")
        if sub == "counterexample" and self.model not in COUNTEREXAMPLES:
            raise ConfigError(f"counterexample needs one of {', '.join(COUNTEREXAMPLES)}")
        if sub == "acp" and self.reroot is None and self.shift is None:
            raise ConfigError("acp needs --shift or --reroot")
        if sub == "srw-oracle":
            if not self.steps or any(s < 0 for s in self.steps):
                raise ConfigError("srw-oracle needs non-negative --steps")
        if self.R is not None and sub in ("acp", "strong-indist", "counterexample"):
            self._check_model_radius()
        return self

    def _check_model_radius(self):
        model = self.scenery_model(max(self.ns))
        try:
            if self.subcommand == "acp":
                model.check_radius(max(self.ns), self.rerooting().displacement(model.spec))
            elif self.model == "z-zmod4" or model.kind == "zmod4":
                if self.R < 2 * max(self.ns) + 2:
                    raise RadiusError(f"zmod4 with n={max(self.ns)} needs R >= {2 * max(self.ns) + 2}")
            else:
                model.check_radius(max(self.ns))
        except RadiusError as exc:
            raise ConfigError(str(exc))

    def rerooting(self):
        if self.reroot is not None:
            return self.reroot
        kind = SceneryModel.parse(self.model, 0).kind
        if kind == "free-directed":
            return asy.ReRootingSpec.directed_walk(self.shift)
        return asy.ReRootingSpec.translate((self.shift, 0))

    def scenery_model(self, n_max):
        kind = SceneryModel.parse(self.model, 0).kind
        if self.R is not None:
            return SceneryModel(kind, self.R)
        probe = SceneryModel(kind, 0)
        disp = 0
        if self.subcommand == "acp":
            disp = self.rerooting().displacement(probe.spec)
        R = probe.required_radius(n_max, disp)
        if self.F:
            R = max(R, max(probe.spec.word_length(v) for v in self.F) + n_max + probe.window_slack)
        if kind == "free-directed":
            R = 1
        return SceneryModel(kind, R)


def _default_seq(kind):
    if kind == "free-directed":
        return asy.PropertySeqSpec(PropertySpec.directed_majority(0))
    return asy.PropertySeqSpec(PropertySpec.majority_window(0))


def _run(cfg):
    sub = cfg.subcommand
    T, S, W = cfg.trials, cfg.seed, cfg.workers
    if sub == "ball-info":
        ball = build_ball(cfg.graph, cfg.R)
        return ["graph", "R", "vertices", "edges", "boundary"], [
            [str(cfg.graph), cfg.R, ball.n_vertices, ball.n_edges, int(ball.boundary.size)]]
    if sub in ("theta", "theta-curve"):
        ps = cfg.ps[:1] if sub == "theta" else cfg.ps
        rows = [[p, est.estimate, est.stderr, est.trials]
                for p, est in theta_curve(cfg.graph, ps, cfg.R, T, S, W)]
        return ["p", "theta_hat", "stderr", "trials"], rows
    if sub == "pc":
        lo, hi = pc_estimate(cfg.graph, cfg.R, T, cfg.tol, S, W)
        return ["graph", "R", "lo", "hi", "tol", "trials"], [[str(cfg.graph), cfg.R, lo, hi, cfg.tol, T]]
    if sub == "nclusters-curve":
        rows = [[p, est.estimate, est.stderr, est.trials]
                for p, est in nclusters_curve(cfg.graph, cfg.ps, cfg.R, T, S, W)]
        return ["p", "mean_clusters", "stderr", "trials"], rows
    if sub == "indist":
        est = indist_statistic(cfg.graph, cfg.p1, cfg.prop, cfg.R, cfg.F_radius, T, S, W)
        return ["p1", "agreement", "stderr", "trials"], [[cfg.p1, est.estimate, est.stderr, T]]
    if sub == "cluster-prop-check":
        rows = [[p, check_cluster_property(cfg.prop, cfg.graph, p, cfg.R, T, S, W), T] for p in cfg.ps]
        return ["p", "violations", "trials"], rows
    if sub == "acp":
        model = cfg.scenery_model(max(cfg.ns))
        r = cfg.rerooting()
        seq = asy.PropertySeqSpec(cfg.prop) if cfg.prop else _default_seq(model.kind)
        rows = []
        for n in cfg.ns:
            est = asy.acp_mismatch(model, seq, r, n, T, S, W)
            bound = ""
            if model.kind == "two-line" and r.kind == "translate" and r.g[1] == 0:
                bound = asy.srw_bound(n, r.g[0])
            rows.append([n, est.estimate, est.stderr, bound])
        return ["n", "mismatch", "stderr", "srw_bound"], rows
    if sub == "strong-indist":
        model = cfg.scenery_model(max(cfg.ns))
        F = cfg.F or _counterexample_window(model.kind)
        seq = asy.PropertySeqSpec(cfg.prop) if cfg.prop else _default_seq(model.kind)
        rows = []
        for n in cfg.ns:
            est = asy.strong_indist_statistic(model, seq, n, F, T, S, W)
            rows.append([n, est.estimate, est.stderr, T])
        return ["n", "agreement", "stderr", "trials"], rows
    if sub == "counterexample":
        rows = []
        if cfg.model == "z-zmod4":
            R = cfg.R if cfg.R is not None else 2 * max(cfg.ns) + 2
            for n in cfg.ns:
                est = asy.zxzmod4_mismatch(n, R, T, S, W)
                rows.append([n, est.estimate, est.stderr, T])
        else:
            model = cfg.scenery_model(max(cfg.ns))
            seq = _default_seq(model.kind)
            for n in cfg.ns:
                est = asy.strong_indist_statistic(model, seq, n, _counterexample_window(model.kind),
                                                  T, S, W)
                rows.append([n, 1.0 - est.estimate, est.stderr, T])
        return ["n", "mismatch", "stderr", "trials"], rows
    if sub == "exact-measure":
        ball = build_ball(cfg.graph, cfg.R)
        event = named_event(ball, cfg.event)
        return ["p", "measure", "edges"], [[p, exact_measure(ball, p, event), ball.n_edges]
                                           for p in cfg.ps]
    if sub == "insertion-check":
        ball = build_ball(cfg.graph, cfg.R)
        rows = []
        for p in cfg.ps:
            rep = insertion_tolerance_check(ball, p, named_event(ball, cfg.event))
            for e, m in enumerate(rep.measure_PiB):
                rows.append([p, e, rep.measure_B, m, rep.all_positive])
        return ["p", "edge", "measure_B", "measure_PiB", "all_positive"], rows
    if sub == "srw-oracle":
        rows = [[s, asy.srw_endpoint_prob(s, cfg.interval)] for s in cfg.steps]
        return ["steps", "probability"], rows
    raise ConfigError(f"unknown subcommand {sub!r}")


def _counterexample_window(kind):
    if kind == "two-line":
        return [(0, 0), (0, 1)]
    if kind == "free-directed":
        return [(0,), (2,)]
    raise ConfigError(f"no default window for {kind}; pass --F")


def render(columns, rows, cfg):
    meta = {"subcommand": cfg.subcommand, "seed": cfg.seed, "trials": cfg.trials}
    if cfg.fmt == "json":
        table = {c: [row[i] for row in rows] for i, c in enumerate(columns)}
        table = {c: [float(f"{x:.10g}") if isinstance(x, float) else x for x in v]
                 for c, v in table.items()}
        return json.dumps({"columns": table, "meta": meta}, indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    buf.write("# " + " ".join(f"{k}={v}" for k, v in meta.items()) + "\n")
    return buf.getvalue()


def _parse_F(text):
    return [tuple(int(x) for x in part.split(",")) for part in text.split(";") if part.strip()]


def build_parser():
    parser = argparse.ArgumentParser(prog="cayleyperc",
                                     description="Percolation experiments on Cayley graphs.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--trials", type=int, default=1000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=None,
                       help="worker processes (default: $CAYLEYPERC_WORKERS or 1)")
        p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
        p.add_argument("--output", "-o", default="-")

    def graph(p):
        p.add_argument("--graph", required=True,
                       help="free:R, lattice:D, zmod:N, line or two-line")
        p.add_argument("--R", type=int, required=True)

    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        common(p)
        if name in ("ball-info", "theta", "theta-curve", "pc", "nclusters-curve", "indist",
                    "cluster-prop-check", "exact-measure", "insertion-check"):
            graph(p)
        if name in ("theta", "theta-curve", "nclusters-curve", "cluster-prop-check",
                    "exact-measure", "insertion-check"):
            p.add_argument("--p", type=_floats, required=True)
        if name == "pc":
            p.add_argument("--tol", type=float, default=0.005)
        if name == "indist":
            p.add_argument("--p1", type=float, required=True)
            p.add_argument("--F-radius", type=int, default=1)
        if name in ("indist", "cluster-prop-check"):
            p.add_argument("--prop", required=True,
                           help="degree:K, cluster-size:M, touches-boundary, contains-subcluster:P0")
        if name in ("acp", "strong-indist"):
            p.add_argument("--model", required=True, help="two-line, zmod4 or free-directed")
            p.add_argument("--prop", default=None)
        if name == "counterexample":
            p.add_argument("model", choices=COUNTEREXAMPLES)
        if name in ("acp", "strong-indist", "counterexample"):
            p.add_argument("--n", type=_ints, required=True)
            p.add_argument("--R", type=int, default=None,
                           help="ball radius (default: smallest that fits the windows)")
        if name == "acp":
            p.add_argument("--shift", type=int, default=None)
            p.add_argument("--reroot", default=None,
                           help="translate:G, lex-walk:K or directed-walk:K")
        if name == "strong-indist":
            p.add_argument("--F", default=None, help="vertices as 'k,b;k,b' (integer normal forms)")
        if name in ("exact-measure", "insertion-check"):
            p.add_argument("--event", default="always",
                           help="always, all-closed, all-open, root-touches, root-size:M, random:SEED:DENSITY")
        if name == "srw-oracle":
            p.add_argument("--steps", type=_ints, required=True)
            p.add_argument("--interval", type=_ints, default=[-4, 4])
    return parser


def _parse_reroot(text, model_kind):
    kind, _, arg = text.partition(":")
    if kind == "translate":
        spec = SceneryModel(model_kind, 0).spec
        return asy.ReRootingSpec.translate(spec.parse_element(arg))
    if kind in ("lex-walk", "directed-walk"):
        return asy.ReRootingSpec(kind, steps=int(arg))
    raise ConfigError(f"unknown rerooting {text!r}")


def config_from_args(args):
    ns = vars(args)
    try:
        cfg = RunConfig(
            subcommand=args.subcommand,
            R=ns.get("R"),
            ps=ns.get("p") or [],
            p1=ns.get("p1"),
            ns=ns.get("n") or [],
            tol=ns.get("tol") or 0.005,
            event=ns.get("event") or "always",
            steps=ns.get("steps") or [],
            F_radius=ns.get("F_radius") if ns.get("F_radius") is not None else 1,
            trials=args.trials,
            seed=args.seed,
            workers=args.workers if args.workers is not None else default_workers(),
            fmt=args.fmt,
            output=args.output,
        )
        if ns.get("graph"):
            cfg.graph = GroupGraphSpec.parse(args.graph)
        if ns.get("prop"):
            cfg.prop = PropertySpec.parse(args.prop)
        if ns.get("model"):
            cfg.model = args.model
            if args.subcommand != "counterexample":
                SceneryModel.parse(args.model, 0)
        if ns.get("shift") is not None:
            cfg.shift = args.shift
        if ns.get("reroot"):
            cfg.reroot = _parse_reroot(args.reroot, SceneryModel.parse(args.model, 0).kind)
        if ns.get("F"):
            cfg.F = _parse_F(args.F)
        if ns.get("interval") is not None:
            if len(args.interval) != 2 or args.interval[0] > args.interval[1]:
                raise ConfigError("--interval needs LO,HI with LO <= HI")
            cfg.interval = tuple(args.interval)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc))
    return cfg.validate()


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ConfigError as exc:
        print(f"cayleyperc: error: {exc}", file=sys.stderr)
        return 2
    try:
        columns, rows = _run(cfg)
    except (ConfigError, RadiusError, BallSizeError, ExactSizeError, ModelError) as exc:
        print(f"cayleyperc: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"cayleyperc: runtime error: {exc}", file=sys.stderr)
        return 1
    text = render(columns, rows, cfg)
    if cfg.output == "-":
        sys.stdout.write(text)
    else:
        with open(cfg.output, "w", newline="") as fh:
            fh.write(text)
    print(f"{cfg.subcommand}: {len(rows)} rows, seed={cfg.seed}, trials={cfg.trials}"
          + ("" if cfg.output == "-" else f" -> {cfg.output}"), file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
