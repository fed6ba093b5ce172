"""
Command-line interface: ``cascadelab <command> [options]``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical
non-convergence.  Results go to ``--out`` (or stdout); diagnostics go to
stderr.  Every option can also be given in a ``--config`` file of
``key=value`` lines (keys use the long option name without dashes, e.g.
``delay-max=1.0``); command-line values win.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import extract, infer, io, meanfield, rewire, simulate, spectral, stats, synthetic
from .errors import ConvergenceError, ParseError

logger = logging.getLogger("cascadelab")

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 1, 2, 3
DEFAULT_GRAPH = "powerlaw:n=10000,gamma=2,kmax=100,seed=0"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------- helpers

def _graph(spec):
    if spec is None:
        raise UsageError("--graph is required")
    if not os.path.exists(spec) and spec.partition(":")[0] in synthetic.GENERATORS:
        return synthetic.from_spec(spec)
    return io.read_graph(spec)


def _need(args, *names):
    for name in names:
        if getattr(args, name, None) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required")


def _emit_json(obj, out=None):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _logs(args):
    _need(args, "votes")
    logs = io.read_votes(args.votes)
    if getattr(args, "story", None) is not None:
        if args.story not in logs:
            raise KeyError(f"story {args.story!r} not in {args.votes}")
        return {args.story: logs[args.story]}
    return logs


def _sim_config(args, **overrides):
    kw = dict(model=args.model, delay_max=args.delay_max, runs=args.runs,
              min_size=args.min_size, seed=args.seed)
    if args.lam is not None:
        kw["lam"] = args.lam
    elif args.lambda_range is not None:
        kw["lam_range"] = tuple(args.lambda_range)
    kw.update(overrides)
    return simulate.SimConfig(**kw)


def _seed_node(graph, name):
    if name is None:
        return None
    if name not in graph.index:
        raise KeyError(f"seed node {name!r} not in graph")
    return graph.index[name]


# ---------------------------------------------------------------- commands

def cmd_ingest(args):
    graph = _graph(args.graph)
    _need(args, "out")
    io.save_graph(graph, args.out)
    summary = {"nodes": graph.node_count, "edges": graph.edge_count, **graph.notes}
    if args.votes:
        logs = io.read_votes(args.votes)
        summary["stories"] = len(logs)
        summary["votes"] = sum(len(v) for v in logs.values())
    _emit_json(summary)


def cmd_stats(args):
    graph = _graph(args.graph)
    hist = stats.degree_histogram(graph, args.direction)
    out = {"nodes": graph.node_count, "edges": graph.edge_count,
           "clustering": stats.clustering_coefficient(graph),
           "direction": args.direction,
           "mean_degree": graph.edge_count / graph.node_count}
    try:
        out["power_law_gamma"] = stats.fit_power_law(hist, args.kmin)
    except ValueError as exc:
        out["power_law_gamma"] = None
        logger.warning("power-law fit skipped: %s", exc)
    if args.hist_out:
        io.write_csv(sorted(hist.counts.items()), ("degree", "count"), args.hist_out)
    _emit_json(out, args.out)


def cmd_rewire(args):
    graph = _graph(args.graph)
    _need(args, "out")
    rewired = rewire.configuration_rewire(graph, args.seed)
    io.write_edge_list(rewired, args.out)
    _emit_json({"nodes": rewired.node_count, "edges": rewired.edge_count,
                "stubs_dropped": rewired.notes.get("stubs_dropped", 0)})


def cmd_eigen(args):
    graph = _graph(args.graph)
    res = spectral.power_iteration(graph, args.tol, args.max_iters, args.seed)
    _emit_json({"eigenvalue": res.eigenvalue, "threshold": res.threshold,
                "iterations": res.iterations, "residual": res.residual}, args.out)


def _hmf_dist(args):
    if args.graph:
        hist = stats.degree_histogram(_graph(args.graph), args.degree)
        return meanfield.DegreeDistribution.from_histogram(hist.counts)
    return meanfield.power_law_distribution(args.gamma, args.kmin, args.kmax)


def _hmf_rows(dist, lo, hi, steps, nodes):
    grid = np.linspace(lo, hi, steps)
    for lam, size in meanfield.hmf_curve(dist, grid, nodes):
        yield lam, size / nodes, size


def cmd_hmf(args):
    dist = _hmf_dist(args)
    rows = list(_hmf_rows(dist, args.lambda_min, args.lambda_max, args.steps, args.nodes))
    io.write_csv(rows, ("lambda", "r_inf", "expected_size"), args.out)
    logger.info("HMF threshold %.6g", meanfield.hmf_threshold(dist))


def _write_sweep(result, graph, out, json_out):
    io.write_csv(result.rows(graph), simulate.CSV_HEADER, out)
    if json_out:
        runs = [r.run for r in result.records]
        simulate.write_cascades_json(result.cascades, json_out, graph, runs)


def _report(summary, args):
    if args.out and args.out != "-":
        _emit_json(summary)
    else:
        sys.stderr.write(json.dumps(summary, sort_keys=True) + "\n")


def cmd_simulate(args):
    graph = _graph(args.graph)
    if args.lam is None and args.lambda_range is None:
        raise UsageError("give --lambda or --lambda-range")
    config = _sim_config(args, seed_node=_seed_node(graph, args.seed_node))
    result = simulate.sweep(graph, config, args.threads, keep_cascades=bool(args.json_out))
    _write_sweep(result, graph, args.out, args.json_out)
    _report(result.summary(), args)


def cmd_sweep(args):
    graph = _graph(args.graph)
    if not args.range:
        raise UsageError("give at least one --range LO HI RUNS")
    records, cascades, total = [], [], 0
    for lo, hi, runs in args.range:
        runs = int(runs)
        if runs != float(runs) or runs < 1:
            raise UsageError("RUNS must be a positive integer")
        config = simulate.SimConfig(model=args.model, lam_range=(lo, hi), runs=runs,
                                    min_size=args.min_size, seed=args.seed,
                                    delay_max=args.delay_max)
        part = simulate.sweep(graph, config, args.threads, bool(args.json_out), first_run=total)
        records += part.records
        cascades += part.cascades or []
        total += runs
    result = simulate.SweepResult(config, records, total, cascades if args.json_out else None)
    _write_sweep(result, graph, args.out, args.json_out)
    _report(result.summary(), args)


def cmd_extract(args):
    graph = _graph(args.graph)
    logs = _logs(args)
    summary = []
    lines = []
    for story, log in logs.items():
        ex = extract.extract_story(log, graph, args.alpha, with_phi=args.phi)
        principal = ex.principal.size if ex.principal is not None else 0
        summary.append((story, len(ex.cascades), principal, ex.total_votes))
        rec = ex.to_json(graph)
        if args.principal_only:
            keep = [ex.principal] if ex.principal is not None else []
            rec["cascades"] = [c.to_json(graph) for c in keep]
        lines.append(json.dumps(rec, sort_keys=True))
    text = "\n".join(lines) + "\n"
    if args.out and args.out != "-":
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.summary:
        io.write_csv(summary, ("story", "n_seeds", "principal_size", "total_votes"), args.summary)


def _read_cascades(path, graph, min_size):
    """Yield ``(label, cascade, other voters, true lambda)``."""
    if path.endswith((".json", ".jsonl")):
        with open(path, encoding="utf-8") as fh:
            for i, line in enumerate(fh):
                if not line.strip():
                    continue
                rec = json.loads(line)
                c = simulate.SimulatedCascade.from_json(rec, graph)
                if c.size > min_size:
                    yield rec.get("run", i), c, None, c.lam
        return
    for story, log in io.read_votes(path).items():
        if log.submitter not in graph.index:
            continue
        c = extract.principal_cascade(log, graph)
        if c.size > min_size:
            yield story, c, log.resolve(graph)[0], None


def cmd_infer(args):
    graph = _graph(args.graph)
    _need(args, "cascades")
    rows = []
    for label, c, voters, true_lam in _read_cascades(args.cascades, graph, args.min_size):
        try:
            st = infer.infer_lambda(c, graph, voters)
        except ValueError:
            continue
        row = [label, st.v, st.w, st.lam, c.size]
        if true_lam is not None:
            row.append(true_lam)
        rows.append(row)
    header = ("story_id", "v", "w", "lambda_inf", "size")
    if rows and len(rows[0]) == 6:
        header += ("lambda_true",)
    io.write_csv(rows, header, args.out)


def cmd_dynamics(args):
    graph = _graph(args.graph)
    _need(args, "story")
    if args.cascades:
        found = [c for label, c, _, _ in _read_cascades(args.cascades, graph, 0)
                 if str(label) == args.story]
        if not found:
            raise KeyError(f"cascade {args.story!r} not in {args.cascades}")
        cascade = found[0]
    else:
        log = _logs(args)[args.story]
        cascade = extract.principal_cascade(log, graph)
    series = infer.dynamics_series(cascade, graph)
    if args.bins:
        io.write_csv(infer.binned_dynamics([series], args.bins),
                     ("i_first", "i_last", "d_watching", "d_voting", "lambda"), args.out)
    else:
        io.write_csv(series.rows(), ("i", "d_watching", "d_voting", "lambda_i", "r_i"), args.out)


def cmd_exposure(args):
    graph = _graph(args.graph)
    total = stats.ExposureStats()
    used = 0
    for log in _logs(args).values():
        if len(log) >= args.min_votes:
            total = total + stats.exposure_stats(graph, log)
            used += 1
    rows = [(n, v + nv, v, nv, v / (v + nv)) for n, (v, nv) in total.vote_table().items()]
    io.write_csv(rows, ("n", "exposed", "voted", "not_voted", "p_vote"), args.out)
    summary = {"stories": used, "exposed": total.exposed,
               "fraction_multiple": total.fraction_at_least(2),
               "p_vote_n1": total.p_vote(1), "skipped_voters": total.skipped_voters}
    sys.stderr.write(json.dumps(summary, sort_keys=True) + "\n")


def cmd_compare(args):
    graph = _graph(args.graph)
    rewired = rewire.configuration_rewire(graph, args.rewire_seed)
    lo, hi = args.lambda_range
    summary = {}
    for name, g, out in (("original", graph, args.sweep_out),
                         ("rewired", rewired, args.rewired_sweep_out)):
        config = simulate.SimConfig(model=args.model, lam_range=(lo, hi), runs=args.runs,
                                    min_size=args.min_size, seed=args.seed,
                                    delay_max=args.delay_max)
        result = simulate.sweep(g, config, args.threads)
        if out:
            io.write_csv(result.rows(g), simulate.CSV_HEADER, out)
        eig = spectral.power_iteration(g)
        summary[name] = {"eigenvalue": eig.eigenvalue, "threshold": eig.threshold,
                         "clustering": stats.clustering_coefficient(g),
                         **result.summary()}
    dist = meanfield.DegreeDistribution.from_histogram(
        stats.degree_histogram(graph, args.degree).counts)
    summary["hmf_threshold"] = meanfield.hmf_threshold(dist)
    if args.hmf_out:
        rows = _hmf_rows(dist, lo, hi, args.steps, graph.node_count)
        io.write_csv(rows, ("lambda", "r_inf", "expected_size"), args.hmf_out)
    _emit_json(summary, args.out)


# ---------------------------------------------------------------- parser

def _add_sim_options(p, ranges=False):
    p.add_argument("--graph", default=DEFAULT_GRAPH,
                   help="graph file or generator spec (default: %(default)s)")
    p.add_argument("--model", choices=simulate.MODELS, default="icm")
    if not ranges:
        p.add_argument("--lambda", dest="lam", type=float)
        p.add_argument("--lambda-range", nargs=2, type=float, metavar=("LO", "HI"))
        p.add_argument("--runs", type=int, default=1000)
        p.add_argument("--seed-node", help="fixed seed node id (default: random per run)")
    p.add_argument("--min-size", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--delay-max", type=float, default=1.0)
    p.add_argument("--threads", type=int, default=simulate.default_threads())
    p.add_argument("--out")
    p.add_argument("--json-out", help="also write full cascades as JSON lines")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cascadelab", description=__doc__.split("\n\n")[0])
    parser.add_argument("--config", help="key=value file of option defaults")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("ingest", help="convert graph (and votes) to a compact archive")
    p.add_argument("--graph")
    p.add_argument("--votes")
    p.add_argument("--out")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", help="degree, clustering and power-law fit")
    p.add_argument("--graph")
    p.add_argument("--direction", choices=("in", "out"), default="out")
    p.add_argument("--kmin", type=int, default=1)
    p.add_argument("--hist-out")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("rewire", help="degree-preserving randomization")
    p.add_argument("--graph")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_rewire)

    p = sub.add_parser("eigen", help="largest eigenvalue and spectral threshold")
    p.add_argument("--graph")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iters", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eigen)

    p = sub.add_parser("hmf", help="heterogeneous mean-field cascade size curve")
    p.add_argument("--gamma", type=float, default=2.0)
    p.add_argument("--kmin", type=int, default=1)
    p.add_argument("--kmax", type=int, default=1000)
    p.add_argument("--graph", help="use this graph's degree distribution instead")
    p.add_argument("--degree", choices=("in", "out"), default="out")
    p.add_argument("--nodes", type=int, default=279_634)
    p.add_argument("--lambda-min", type=float, default=0.0)
    p.add_argument("--lambda-max", type=float, default=0.03)
    p.add_argument("--steps", type=int, default=61)
    p.add_argument("--out")
    p.set_defaults(func=cmd_hmf)

    p = sub.add_parser("simulate", help="ICM/FSM cascades at fixed or random lambda")
    _add_sim_options(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="cascades over several lambda ranges")
    _add_sim_options(p, ranges=True)
    p.add_argument("--range", action="append", nargs=3, type=float,
                   metavar=("LO", "HI", "RUNS"))
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("extract", help="split vote logs into cascades")
    p.add_argument("--votes")
    p.add_argument("--graph")
    p.add_argument("--story")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--phi", action="store_true", help="include generating-function values")
    p.add_argument("--principal-only", action="store_true")
    p.add_argument("--summary", help="per-story summary CSV")
    p.add_argument("--out")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("infer", help="maximum-likelihood transmissibility per cascade")
    p.add_argument("--cascades", help="votes CSV or simulated cascades (.jsonl)")
    p.add_argument("--graph")
    p.add_argument("--min-size", type=int, default=10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("dynamics", help="per-voter fanout and transmissibility")
    p.add_argument("--votes")
    p.add_argument("--cascades", help="simulated cascades (.jsonl); --story is the run")
    p.add_argument("--graph")
    p.add_argument("--story")
    p.add_argument("--bins", type=float, help="geometric bin ratio (e.g. 1.5)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_dynamics)

    p = sub.add_parser("exposure", help="exposure multiplicity and p(vote|n)")
    p.add_argument("--votes")
    p.add_argument("--graph")
    p.add_argument("--story")
    p.add_argument("--min-votes", type=int, default=10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_exposure)

    p = sub.add_parser("compare", help="original vs rewired sweep with HMF overlay")
    p.add_argument("--graph")
    p.add_argument("--model", choices=simulate.MODELS, default="icm")
    p.add_argument("--lambda-range", nargs=2, type=float, default=[0.0, 0.03])
    p.add_argument("--runs", type=int, default=10_000)
    p.add_argument("--min-size", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rewire-seed", type=int, default=0)
    p.add_argument("--delay-max", type=float, default=1.0)
    p.add_argument("--degree", choices=("in", "out"), default="out")
    p.add_argument("--steps", type=int, default=61)
    p.add_argument("--threads", type=int, default=simulate.default_threads())
    p.add_argument("--sweep-out")
    p.add_argument("--rewired-sweep-out")
    p.add_argument("--hmf-out")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)
    return parser


def read_config(path) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            key, sep, value = text.partition("=")
            if not sep:
                raise UsageError(f"{path}:{line_no}: expected key=value")
            out[key.strip().lstrip("-")] = value.strip()
    return out


def _apply_config(parser, argv, args):
    cfg = read_config(args.config)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    tokens = []
    given = {a.split("=")[0] for a in argv if a.startswith("--")}
    for key, value in cfg.items():
        opt = "--" + key
        if opt in given:
            continue
        action = sub._option_string_actions.get(opt)
        if action is None:
            raise UsageError(f"unknown config key {key!r} for {args.command}")
        if action.nargs == 0:
            if value.lower() in ("1", "true", "yes"):
                tokens.append(opt)
        else:
            tokens.append(opt)
            tokens.extend(value.split())
    return parser.parse_args([*argv[:argv.index(args.command) + 1], *tokens,
                              *argv[argv.index(args.command) + 1:]])


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage().strip())
        if args.config:
            args = _apply_config(parser, argv, args)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
        args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except ConvergenceError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NUMERIC
    except (ParseError, ValueError, KeyError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
