"""Command-line interface: ``bipquant {gen,quantize,bench,tune,oracle}``.

Exit status is 0 on success, 2 on usage errors and 1 on runtime errors.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import bench as bench_mod
from .degrees import BUILTIN_RATES, builtin_pair, load_distribution
from .distortion import load_profile, linear_profile, uniform_profile
from .engine import BipParams, default_gamma, quantize, quantize_single_round
from .graph import load_graph, parse_source, sample_graph, save_graph, serialize_source
from .oracle import exact_distribution, exhaustive_quantize
from .sources import random_source
from .tuner import (
    TunerConfig,
    eval_gamma,
    fit_cubic,
    parse_gamma_file,
    parse_gamma_model,
    run_tuning,
    serialize_gamma_file,
    serialize_gamma_model,
)


class UsageError(Exception):
    pass


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {text}")
    return v


def _read(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(path, text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


# -- argument groups ------------------------------------------------------------


def _add_gen_args(p, required=True):
    p.add_argument("--n", type=_positive_int, required=required, help="number of checks (source length)")
    size = p.add_mutually_exclusive_group()
    size.add_argument("--rate", type=float, help="code rate m/n")
    size.add_argument("--m", type=_positive_int, help="number of information bits")
    p.add_argument("--check-dist", metavar="FILE", help="check-node edge distribution file")
    p.add_argument("--info-dist", metavar="FILE", help="information-bit edge distribution file")
    p.add_argument("--preset", type=float, choices=BUILTIN_RATES,
                   help="use the shipped distribution pair for this rate")


def _add_gamma_args(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--gamma", type=float, help="uniform check strength")
    g.add_argument("--gamma-file", metavar="FILE", help="one gamma per line")
    g.add_argument("--gamma-model", metavar="FILE", help="cubic model 'a3 a2 a1 a0 n'")


def _add_quantize_args(p):
    _add_gamma_args(p)
    p.add_argument("--t", type=float, default=0.8, help="bias threshold")
    p.add_argument("--max-iter", type=_positive_int, default=25)
    p.add_argument("--start-damp", type=int, default=10)
    p.add_argument("--num-min-frac", type=float, default=0.001)
    p.add_argument("--num-max-frac", type=float, default=0.01)
    p.add_argument("--profile", default="uniform", help="uniform, linear, or a weights file")
    p.add_argument("--single-round", action="store_true", help="decimate every bit after one round")


def _add_source_args(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--source", metavar="FILE", help="source bits as a 0/1 string")
    src.add_argument("--random", action="store_true", help="draw a random source from --seed")
    p.add_argument("--seed", type=int, default=0)


# -- resolvers ------------------------------------------------------------------


def _graph_from_gen_args(args, seed):
    if args.preset is not None:
        if args.check_dist or args.info_dist:
            raise UsageError("--preset cannot be combined with --check-dist/--info-dist")
        rho, lam = builtin_pair(args.preset)
    elif args.check_dist and args.info_dist:
        rho, lam = load_distribution(args.check_dist), load_distribution(args.info_dist)
    else:
        raise UsageError("give --preset or both --check-dist and --info-dist")
    if args.m is not None:
        m = args.m
    else:
        rate = args.rate if args.rate is not None else args.preset
        if rate is None:
            raise UsageError("give --rate or --m")
        if not 0 < rate <= 1:
            raise UsageError("--rate must lie in (0, 1]")
        m = max(1, int(round(rate * args.n)))
    return sample_graph(args.n, m, rho, lam, seed)


def _profile(args, n):
    if args.profile == "uniform":
        return "uniform", uniform_profile(n)
    if args.profile == "linear":
        return "linear", linear_profile(n)
    return os.path.basename(args.profile), load_profile(args.profile, n)


def _gamma(args, graph):
    if getattr(args, "gamma_file", None):
        return parse_gamma_file(_read(args.gamma_file), graph.n)
    if getattr(args, "gamma_model", None):
        return eval_gamma(parse_gamma_model(_read(args.gamma_model)), graph.n)
    if args.gamma is not None:
        if args.gamma < 0:
            raise UsageError("--gamma must be >= 0")
        return np.full(graph.n, args.gamma)
    return np.full(graph.n, default_gamma(graph.rate))


def _params(args, graph):
    if args.num_min_frac > args.num_max_frac:
        raise UsageError("--num-min-frac must not exceed --num-max-frac")
    if not 0 < args.t < 1:
        raise UsageError("--t must lie in (0, 1)")
    return BipParams.for_graph(
        graph, _gamma(args, graph), t=args.t, max_iter=args.max_iter, start_damp=args.start_damp,
        num_min_frac=args.num_min_frac, num_max_frac=args.num_max_frac,
    )


def _source(args, n):
    if args.source:
        return parse_source(_read(args.source), n)
    return random_source(n, args.seed)


# -- commands -------------------------------------------------------------------


def cmd_gen(args):
    graph = _graph_from_gen_args(args, args.seed)
    save_graph(graph, args.out)
    print(f"n={graph.n} m={graph.m} edges={graph.num_edges}")


def cmd_quantize(args):
    graph = load_graph(args.code)
    params = _params(args, graph)
    _, weights = _profile(args, graph.n)
    s = _source(args, graph.n)
    run = quantize_single_round if args.single_round else quantize
    res = run(graph, s, params, weights)
    flags = "".join("1" if r.converged else "0" for r in res.rounds)
    print(f"distortion={res.distortion:.6f}")
    print(f"rounds={len(res.rounds)} iterations={res.iterations_total} converged={res.converged}")
    print(f"round_convergence={flags}")
    if args.out_word:
        _write(args.out_word, serialize_source(res.w))


def cmd_bench(args):
    if args.code:
        graph = load_graph(args.code)
    else:
        if args.n is None:
            raise UsageError("give --code or graph generation flags (--n ...)")
        gseed = args.graph_seed if args.graph_seed is not None else args.seed
        graph = _graph_from_gen_args(args, gseed)
    params = _params(args, graph)
    name, weights = _profile(args, graph.n)
    records = bench_mod.run_bench(graph, params, args.trials, args.seed, weights, name, args.threads)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            bench_mod.write_csv(records, fh)
    else:
        bench_mod.write_csv(records, sys.stdout)
    mean = bench_mod.mean_record(records)
    print(f"mean distortion={mean.distortion:.6f} throughput={mean.throughput_bps:.0f} bits/s",
          file=sys.stderr)


def cmd_tune(args):
    graph = load_graph(args.code)
    _, weights = _profile(args, graph.n)
    rate = args.rate if args.rate is not None else graph.rate
    config = TunerConfig(k=args.k, c=args.c, iterations=args.iters, window=args.window,
                         gamma0=args.gamma0 if args.gamma0 is not None else default_gamma(rate))

    def log(it, err, gamma):
        print(f"iter={it} mean_abs_error={err:.6f} gamma_range=[{gamma.min():.4f}, {gamma.max():.4f}]")

    result = run_tuning(graph, weights, rate, config, seed=args.seed, threads=args.threads, log=log)
    if args.out_gamma:
        _write(args.out_gamma, serialize_gamma_file(result.gamma))
    if args.out_model:
        _write(args.out_model, serialize_gamma_model(fit_cubic(result.gamma, graph.n)))


def cmd_oracle(args):
    graph = load_graph(args.code)
    _, weights = _profile(args, graph.n)
    s = _source(args, graph.n)
    if args.mode == "quantize":
        w, d = exhaustive_quantize(graph, s, weights)
        print(f"distortion={d:.6f}")
        print(f"word={serialize_source(w).strip()}")
    else:
        gamma = args.gamma if args.gamma is not None else default_gamma(graph.rate)
        exact = exact_distribution(graph, s, np.full(graph.n, gamma))
        print(f"log_z={exact.log_z:.12g}")
        print("biases=" + " ".join(f"{b:.9f}" for b in exact.gaps))


# -- parser ---------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="bipquant", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="sample an LDGM graph")
    _add_gen_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen, parser=p)

    p = sub.add_parser("quantize", help="quantize one source")
    p.add_argument("--code", required=True)
    _add_source_args(p)
    _add_quantize_args(p)
    p.add_argument("--out-word", metavar="FILE")
    p.set_defaults(func=cmd_quantize, parser=p)

    p = sub.add_parser("bench", help="seeded multi-trial benchmark, CSV output")
    p.add_argument("--code")
    _add_gen_args(p, required=False)
    p.add_argument("--graph-seed", type=int)
    p.add_argument("--trials", type=_positive_int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=_positive_int, default=1)
    p.add_argument("--csv", metavar="FILE")
    _add_quantize_args(p)
    p.set_defaults(func=cmd_bench, parser=p)

    p = sub.add_parser("tune", help="calibrate per-check gamma for a profile")
    p.add_argument("--code", required=True)
    p.add_argument("--profile", default="linear")
    p.add_argument("--rate", type=float)
    p.add_argument("--k", type=_positive_int, default=100)
    p.add_argument("--c", type=float, default=3.0)
    p.add_argument("--iters", type=int, default=10)
    p.add_argument("--window", type=_positive_int, default=101)
    p.add_argument("--gamma0", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=_positive_int, default=1)
    p.add_argument("--out-gamma", metavar="FILE")
    p.add_argument("--out-model", metavar="FILE")
    p.set_defaults(func=cmd_tune, parser=p)

    p = sub.add_parser("oracle", help="exhaustive search / exact marginals on small codes")
    p.add_argument("--code", required=True)
    _add_source_args(p)
    p.add_argument("--gamma", type=float)
    p.add_argument("--profile", default="uniform")
    p.add_argument("--mode", choices=("quantize", "marginals"), default="quantize")
    p.set_defaults(func=cmd_oracle, parser=p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except UsageError as exc:
        args.parser.error(str(exc))
    except (ValueError, OSError, KeyError) as exc:
        print(f"bipquant: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
