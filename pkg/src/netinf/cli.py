"""Command-line entry point: generate, simulate, infer, evaluate, run.

Exit codes: 0 success, 1 usage, 2 input format, 3 runtime.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import platform
import sys
import time
from contextlib import contextmanager
from dataclasses import dataclass, fields
from pathlib import Path

from . import __version__
from .core import DirectedNetwork, TransmissionConfig
from .formats import (FormatError, atomic_write, format_csv, format_kv, parse_cascade_file,
                      parse_kv, read_inferred, read_network, write_cascades, write_inferred,
                      write_network)
from .greedy import StoppingRule, baseline_infer, run_greedy
from .metrics import accuracy_report, influence_table, pr_sweep
from .synth import (ForestFireParams, KroneckerParams, SimulationParams, generate_forest_fire,
                    generate_kronecker, simulate_corpus)

log = logging.getLogger("netinf")

EXIT_OK, EXIT_USAGE, EXIT_FORMAT, EXIT_RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class ExperimentConfig:
    """Every knob of the generate -> simulate -> infer -> evaluate pipeline."""

    model: str = "kronecker"
    seed_matrix: str = "0.962,0.535,0.535,0.107"
    power: int = 8
    edges: int = 360
    n: int = 1024
    fwd: float = 0.20
    bwd: float = 0.17
    dist: str = "exp"
    alpha: float = 1.0
    beta: float = 0.5
    epsilon: float = 1e-9
    coverage: float = 0.99
    max_cascades: int = 100000
    missing: float = 0.0
    external: float = 0.0
    noise: float = 0.0
    algo: str = "netinf"
    strategy: str = "fast"
    k: int = -1
    stop_frac: float = 0.85
    rng_seed: int = 0
    output_dir: str = "out"

    def to_text(self) -> str:
        return format_kv((f.name, getattr(self, f.name)) for f in fields(self))

    @classmethod
    def from_text(cls, text: str, path=None) -> "ExperimentConfig":
        raw = parse_kv(text, path)
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, value in raw.items():
            if key not in known:
                raise FormatError(f"unknown config key {key!r}", path)
            typ = known[key].type
            try:
                kwargs[key] = {"int": int, "float": float}.get(typ, str)(value)
            except ValueError:
                raise FormatError(f"bad value for {key}: {value!r}", path) from None
        return cls(**kwargs)


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


class Manifest:
    """Collects config, file digests and phase timings; written once per command."""

    def __init__(self, command: str, args: dict):
        config = {k: v for k, v in args.items() if not callable(v)}
        self.data = {"command": command, "version": __version__,
                     "python": platform.python_version(), "config": config,
                     "inputs": {}, "outputs": {}, "timings": {}}

    @contextmanager
    def phase(self, name: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.data["timings"][name] = time.perf_counter() - start

    def input(self, path):
        self.data["inputs"][str(path)] = _sha256(path)

    def output(self, path):
        self.data["outputs"][str(path)] = _sha256(path)

    def write(self, path):
        atomic_write(path, json.dumps(self.data, indent=2, sort_keys=True) + "\n")


def _manifest_path(args, primary) -> Path:
    return Path(args.manifest) if getattr(args, "manifest", None) else Path(f"{primary}.manifest.json")


def _transmission(args) -> TransmissionConfig:
    try:
        return TransmissionConfig(args.dist, args.alpha, args.beta, args.epsilon,
                                  powerlaw_clamp=getattr(args, "clamp", False))
    except ValueError as err:
        raise UsageError(str(err)) from None


def _seed_matrix(text: str):
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"bad --seed-matrix {text!r}") from None
    if len(vals) != 4:
        raise UsageError("--seed-matrix needs four comma-separated values a,b,c,d")
    return ((vals[0], vals[1]), (vals[2], vals[3]))


# -- commands -----------------------------------------------------------------

def cmd_generate(args, man: Manifest | None = None) -> int:
    own = man is None
    if own:
        man = Manifest("generate", vars(args).copy())
    with man.phase("generate"):
        if args.model == "kronecker":
            if args.power is None:
                raise UsageError("kronecker needs --power")
            try:
                params = KroneckerParams(_seed_matrix(args.seed_matrix), args.power, args.edges)
            except ValueError as err:
                raise UsageError(str(err)) from None
            n = params.n
            if args.edges is not None and args.edges > n * (n - 1):
                raise UsageError(f"--edges {args.edges} exceeds n(n-1) = {n * (n - 1)}")
            try:
                net = generate_kronecker(params, args.rng_seed)
            except ValueError as err:
                raise UsageError(str(err)) from None
        else:
            if args.n is None:
                raise UsageError("forestfire needs --n")
            if args.edges is not None:
                raise UsageError("--edges only applies to the kronecker model")
            try:
                net = generate_forest_fire(ForestFireParams(args.n, args.fwd, args.bwd), args.rng_seed)
            except ValueError as err:
                raise UsageError(str(err)) from None
    write_network(args.out, net)
    man.output(args.out)
    if own:
        man.write(_manifest_path(args, args.out))
    print(f"nodes={net.n} edges={len(net.edges)}")
    return EXIT_OK


def cmd_simulate(args, man: Manifest | None = None) -> int:
    own = man is None
    if own:
        man = Manifest("simulate", vars(args).copy())
    net = read_network(args.network)
    man.input(args.network)
    cfg = _transmission(args)
    try:
        params = SimulationParams(cfg, args.coverage, args.max_cascades, args.missing,
                                  args.external, args.noise, args.rng_seed)
    except ValueError as err:
        raise UsageError(str(err)) from None
    with man.phase("simulate"):
        corpus, stats = simulate_corpus(net, params)
    write_cascades(args.out, corpus)
    report = args.report or f"{args.out}.coverage.txt"
    atomic_write(report, format_kv(stats.as_items()))
    man.output(args.out)
    man.output(report)
    if own:
        man.write(_manifest_path(args, args.out))
    print(f"cascades={stats.num_cascades} transmissions={stats.total_transmissions} "
          f"coverage={stats.covered_fraction:.4f}")
    if not stats.target_reached:
        print("warning: coverage target not reached", file=sys.stderr)
    return EXIT_OK


def cmd_infer(args, man: Manifest | None = None) -> int:
    own = man is None
    if own:
        man = Manifest("infer", vars(args).copy())
    corpus = parse_cascade_file(args.cascades)
    man.input(args.cascades)
    cfg = _transmission(args)
    audit = args.audit or f"{args.out}.audit.csv"
    with man.phase("infer"):
        if args.algo == "baseline":
            if args.k is None or args.k < 1:
                raise UsageError("baseline needs --k >= 1")
            _, ranked = baseline_infer(corpus, cfg, args.k)
            rows = [(u, v, score, it) for it, ((u, v), score) in enumerate(ranked)]
            audit_rows = [(it, u, v, s) for u, v, s, it in rows]
            audit_text = format_csv(["iteration", "src", "dst", "score"], audit_rows)
        else:
            if args.k is not None:
                stop = StoppingRule.fixed(args.k)
            else:
                try:
                    stop = StoppingRule.bound_fraction(args.stop_frac)
                except ValueError as err:
                    raise UsageError(str(err)) from None
            _, reports, state = run_greedy(corpus, cfg, stop, args.strategy, track_bounds=True)
            rows = [(c.edge[0], c.edge[1], c.gain, c.iteration) for c in state.chosen]
            audit_rows = [(c.iteration, c.edge[0], c.edge[1], c.gain, r.objective, r.online_bound,
                           r.ratio) for c, r in zip(state.chosen, reports)]
            audit_text = format_csv(["iteration", "src", "dst", "delta", "objective",
                                     "online_bound", "ratio"], audit_rows)
            man.data["gain_evaluations"] = state.evaluations
    write_inferred(args.out, rows)
    atomic_write(audit, audit_text)
    man.output(args.out)
    man.output(audit)
    if own:
        man.write(_manifest_path(args, args.out))
    print(f"edges={len(rows)}")
    return EXIT_OK


def cmd_evaluate(args, man: Manifest | None = None) -> int:
    own = man is None
    if own:
        man = Manifest("evaluate", vars(args).copy())
    if not Path(args.truth).exists():
        raise FileNotFoundError(args.truth)
    truth = read_network(args.truth)
    inferred = read_inferred(args.inferred)
    man.input(args.truth)
    man.input(args.inferred)
    if not truth.edges:
        raise FormatError("ground-truth network has no edges", args.truth)
    with man.phase("evaluate"):
        curve = pr_sweep([(u, v) for u, v, _, _ in inferred], truth)
        rep = accuracy_report(curve)
    atomic_write(args.out, format_kv([("bep", rep.bep), ("auc", rep.auc), ("k_at_bep", rep.k_at_bep),
                                      ("crossed", rep.crossed), ("inferred_edges", len(inferred)),
                                      ("truth_edges", len(truth.edges))]))
    man.output(args.out)
    curve_path = args.curve or f"{args.out}.pr.csv"
    atomic_write(curve_path, format_csv(["k", "precision", "recall"], curve.points))
    man.output(curve_path)
    if args.influence:
        n = max(truth.n, 1 + max((max(u, v) for u, v, _, _ in inferred), default=-1))
        net = DirectedNetwork(n, frozenset((u, v) for u, v, _, _ in inferred))
        atomic_write(args.influence, format_csv(["node", "influence"], enumerate(influence_table(net))))
        man.output(args.influence)
    if own:
        man.write(_manifest_path(args, args.out))
    print(f"bep={rep.bep:.4f} auc={rep.auc:.4f}")
    return EXIT_OK


def cmd_run(args) -> int:
    """Full pipeline from a key=value experiment config."""
    cfg_path = Path(args.config)
    conf = ExperimentConfig.from_text(cfg_path.read_text(encoding="utf-8"), cfg_path)
    out = Path(args.output_dir or conf.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    man = Manifest("run", conf.__dict__.copy())
    atomic_write(out / "config.txt", conf.to_text())
    man.output(out / "config.txt")
    common = dict(dist=conf.dist, alpha=conf.alpha, beta=conf.beta, epsilon=conf.epsilon,
                  rng_seed=conf.rng_seed, manifest=None, clamp=False)
    gen = argparse.Namespace(model=conf.model, seed_matrix=conf.seed_matrix, power=conf.power,
                             edges=conf.edges if conf.model == "kronecker" else None, n=conf.n,
                             fwd=conf.fwd, bwd=conf.bwd, rng_seed=conf.rng_seed,
                             out=str(out / "network.txt"), manifest=None)
    cmd_generate(gen, man)
    sim = argparse.Namespace(network=gen.out, coverage=conf.coverage, max_cascades=conf.max_cascades,
                             missing=conf.missing, external=conf.external, noise=conf.noise,
                             out=str(out / "cascades.txt"), report=None, **common)
    cmd_simulate(sim, man)
    infer = argparse.Namespace(cascades=sim.out, algo=conf.algo, strategy=conf.strategy,
                               k=None if conf.k < 0 else conf.k, stop_frac=conf.stop_frac,
                               out=str(out / "inferred.txt"), audit=None, **common)
    if conf.algo == "baseline" and infer.k is None:
        infer.k = len(read_network(gen.out).edges)
    cmd_infer(infer, man)
    ev = argparse.Namespace(inferred=infer.out, truth=gen.out, out=str(out / "metrics.txt"),
                            curve=None, influence=None, manifest=None)
    cmd_evaluate(ev, man)
    man.write(Path(args.manifest) if args.manifest else out / "run.manifest.json")
    return EXIT_OK


# -- argument parsing -----------------------------------------------------------

def _add_transmission(p):
    p.add_argument("--dist", choices=["exp", "powerlaw"], default="exp")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--epsilon", type=float, default=1e-9)
    p.add_argument("--clamp", action="store_true",
                   help="power-law only: gaps below 1 take the density at 1")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="netinf", description="Infer diffusion networks from cascade hit times.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    g = sub.add_parser("generate", help="sample a ground-truth network")
    g.add_argument("--model", choices=["kronecker", "forestfire"], required=True)
    g.add_argument("--seed-matrix", default="0.5,0.5,0.5,0.5")
    g.add_argument("--power", type=int)
    g.add_argument("--edges", type=int)
    g.add_argument("--n", type=int)
    g.add_argument("--fwd", type=float, default=0.20)
    g.add_argument("--bwd", type=float, default=0.17)
    g.add_argument("--rng-seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--manifest")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("simulate", help="simulate cascades on a network")
    s.add_argument("--network", required=True)
    _add_transmission(s)
    s.add_argument("--coverage", type=float, default=0.99)
    s.add_argument("--max-cascades", type=int, default=100000)
    s.add_argument("--missing", type=float, default=0.0)
    s.add_argument("--external", type=float, default=0.0)
    s.add_argument("--noise", type=float, default=0.0, help="std of Gaussian incubation noise")
    s.add_argument("--rng-seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--report")
    s.add_argument("--manifest")
    s.set_defaults(func=cmd_simulate)

    i = sub.add_parser("infer", help="infer a network from a cascade file")
    i.add_argument("--cascades", required=True)
    i.add_argument("--algo", choices=["netinf", "baseline"], default="netinf")
    i.add_argument("--strategy", choices=["naive", "fast"], default="fast")
    i.add_argument("--k", type=int)
    i.add_argument("--stop-frac", type=float, default=0.85)
    _add_transmission(i)
    i.add_argument("--rng-seed", type=int, default=0)
    i.add_argument("--out", required=True)
    i.add_argument("--audit")
    i.add_argument("--manifest")
    i.set_defaults(func=cmd_infer)

    e = sub.add_parser("evaluate", help="score inferred edges against ground truth")
    e.add_argument("--inferred", required=True)
    e.add_argument("--truth", required=True)
    e.add_argument("--out", required=True)
    e.add_argument("--curve")
    e.add_argument("--influence", help="write per-node influence index of the inferred network")
    e.add_argument("--manifest")
    e.set_defaults(func=cmd_evaluate)

    r = sub.add_parser("run", help="run the whole pipeline from a key=value config file")
    r.add_argument("--config", required=True)
    r.add_argument("--output-dir")
    r.add_argument("--manifest")
    r.set_defaults(func=cmd_run)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, FileNotFoundError, IsADirectoryError, UnicodeDecodeError) as err:
        print(f"input error: {err}", file=sys.stderr)
        return EXIT_FORMAT
    except Exception as err:  # noqa: BLE001
        print(f"error: {err}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
