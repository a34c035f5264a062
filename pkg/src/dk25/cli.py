"""Command line driver: sample -> estimate -> postprocess -> generate -> compare.

Every subcommand reads the previous stage's file and writes its own, plus a
JSON manifest holding the resolved configuration, seeds, library versions and
timings. ``dk25 replay MANIFEST`` re-runs a recorded command.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from importlib import metadata
from pathlib import Path

import numpy as np

from . import estimation, postprocess, sampling
from .graph import GraphInputError, read_edge_list, write_edge_list
from .generation import ConstructionError, McmcConfig, generate_25k, write_trace_csv
from .metrics import METRICS, Budgets, compare

log = logging.getLogger("dk25")

EXIT_OK, EXIT_VALIDATION, EXIT_STAGE, EXIT_NOT_CONVERGED = 0, 2, 3, 4


class ValidationError(Exception):
    pass


class StageError(Exception):
    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage


# ---------------------------------------------------------------------------
# config handling


def read_config(path) -> dict:
    """Flat ``key = value`` file; '#' starts a comment. Keys use flag names without dashes."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        if "=" not in s:
            raise ValidationError(f"{path}:{lineno}: expected 'key = value'")
        k, v = (x.strip() for x in s.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def _versions() -> dict:
    out = {"python": platform.python_version()}
    for pkg in ("numpy", "scipy", "networkx", "artifact"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            out[pkg] = None
    return out


def write_manifest(path, command: str, args: argparse.Namespace, timings: dict, extra=None) -> None:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "config") and not callable(v)}
    doc = {"command": command, "config": cfg, "versions": _versions(), "timings": timings}
    if extra:
        doc.update(extra)
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True, default=str) + "\n", encoding="utf-8")


def _manifest_path(out) -> Path:
    out = Path(out)
    return out / "manifest.json" if out.is_dir() else out.with_name(out.name + ".manifest.json")


def _need_file(path, what):
    if path is None:
        raise ValidationError(f"--input ({what}) is required")
    if not Path(path).exists():
        raise ValidationError(f"{what} not found: {path}")


def _need_out(args):
    if not args.out:
        raise ValidationError("--out is required")


# ---------------------------------------------------------------------------
# stage bodies (no argument parsing, reusable from the pipeline)


def _stage(name, fn, *a, **kw):
    t0 = time.perf_counter()
    try:
        res = fn(*a, **kw)
    except (ValidationError, StageError):
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc
    return res, time.perf_counter() - t0


def _mcmc_cfg(args, **over) -> McmcConfig:
    kw = dict(variant=args.mcmc, nmae_stop=args.nmae_stop, max_swaps=args.max_swaps, seed=args.seed,
              max_seconds=args.max_seconds, progress_interval=args.progress_interval)
    kw.update(over)
    return McmcConfig(**kw)


def _estimator_cfg(args, n_nodes=None) -> estimation.EstimatorConfig:
    return estimation.EstimatorConfig(margin=args.margin, hybrid_threshold=args.hybrid_threshold,
                                      known_n=args.known_n or n_nodes, known_e=args.known_e,
                                      rw_estimator=args.rw_estimator)


def _budgets(args) -> Budgets:
    return Budgets(path_sources=args.path_sources, clique_timeout=args.clique_timeout,
                   cycle_candidates=args.cycle_candidates, seed=args.seed, workers=args.workers)


# ---------------------------------------------------------------------------
# subcommands


def cmd_sample(args) -> int:
    _need_file(args.input, "graph edge list")
    _need_out(args)
    g = read_edge_list(args.input)
    n = sampling.sample_size(args.pct, g.n_nodes)
    trace, dt = _stage("sample", sampling.sample, g, args.method, n, args.seed,
                       replace=not getattr(args, "no_replacement", False))
    sampling.write_trace(trace, args.out)
    write_manifest(_manifest_path(args.out), "sample", args, {"sample": dt},
                   {"n_nodes": g.n_nodes, "n_edges": g.n_edges})
    print(f"sampled {len(trace)} nodes ({args.method.upper()}, {args.pct}%) -> {args.out}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    _need_file(args.input, "sample trace")
    _need_out(args)
    if not args.known_n:
        raise ValidationError("--known-n (number of nodes of the sampled graph) is required")
    try:
        trace = sampling.read_trace(args.input)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    bundle, dt = _stage("estimate", estimation.estimate, trace, _estimator_cfg(args))
    estimation.write_bundle(bundle, args.out)
    write_manifest(Path(args.out) / "manifest.json", "estimate", args, {"estimate": dt})
    print(f"estimated {len(bundle.jdd)} JDD entries, {len(bundle.ck)} c(k) values -> {args.out}")
    return EXIT_OK


def cmd_postprocess(args) -> int:
    _need_file(args.input, "estimate bundle")
    _need_out(args)
    try:
        bundle = estimation.read_bundle(args.input)
    except (OSError, ValueError) as exc:
        raise ValidationError(str(exc)) from exc
    spec, dt = _stage("postprocess", postprocess.build_target, bundle.jdd, bundle.ck, args.seed,
                      smooth=not args.no_smooth, rounding=args.rounding)
    postprocess.write_target(spec, args.out)
    write_manifest(_manifest_path(args.out), "postprocess", args, {"postprocess": dt},
                   {"edges_changed": spec.edges_changed})
    print(f"target: {spec.n_nodes} nodes, {spec.n_edges} edges, {spec.edges_changed} entries changed "
          f"-> {args.out}")
    return EXIT_OK


PAIRINGS = (("2kt", "improved"), ("2kt", "plain"), ("2k", "improved"), ("2k", "plain"))


def cmd_generate(args) -> int:
    _need_file(args.input, "target spec")
    _need_out(args)
    try:
        spec = postprocess.read_target(args.input)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    if args.all_pairings:
        return _generate_pairings(args, spec)
    res, dt = _stage("generate", generate_25k, spec, _mcmc_cfg(args), args.generator)
    write_edge_list(res.graph, args.out)
    if args.trace:
        write_trace_csv(res.mcmc.trace, args.trace)
    write_manifest(_manifest_path(args.out), "generate", args, res.timings,
                   {"converged": res.converged, "nmae_ck": res.mcmc.nmae, "proposals": res.mcmc.proposals})
    print(f"generated {res.graph.n_nodes} nodes / {res.graph.n_edges} edges, c(k) NMAE "
          f"{res.mcmc.nmae:.4f} ({'converged' if res.converged else 'NOT converged'}) -> {args.out}")
    return EXIT_OK if res.converged else EXIT_NOT_CONVERGED


def _generate_pairings(args, spec) -> int:
    """Time all four construction/MCMC pairings on one spec and write a timing CSV."""
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows, all_ok, timings = [], True, {}
    for gen, var in PAIRINGS:
        res, _ = _stage("generate", generate_25k, spec, _mcmc_cfg(args, variant=var), gen)
        name = f"{gen}+{var}"
        write_edge_list(res.graph, out / f"{gen}_{var}.txt")
        rows.append([name, f"{res.timings['construction']:.3f}", f"{res.timings['mcmc']:.3f}",
                     f"{res.timings['total']:.3f}", res.converged, f"{res.mcmc.nmae:.5f}", res.mcmc.proposals])
        timings[name] = res.timings
        all_ok &= res.converged
    with open(out / "timing.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["pairing", "construction_s", "mcmc_s", "total_s", "converged", "nmae", "proposals"])
        w.writerows(rows)
    write_manifest(out / "manifest.json", "generate", args, timings)
    for r in rows:
        print(f"{r[0]:<14} total {r[3]:>9}s  converged={r[4]}")
    return EXIT_OK if all_ok else EXIT_NOT_CONVERGED


def cmd_compare(args) -> int:
    _need_file(args.input, "reference graph")
    _need_file(args.generated, "generated graph")
    _need_out(args)
    g_ref, g_gen = read_edge_list(args.input), read_edge_list(args.generated)
    rep, dt = _stage("compare", compare, g_ref, g_gen, _budgets(args))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rep.write_csv(out / "report.csv")
    rep.write_binned(out / "binned")
    (out / "report.txt").write_text(rep.table() + "\n", encoding="utf-8")
    write_manifest(out / "manifest.json", "compare", args, {"compare": dt, **rep.runtime},
                   {"status": rep.status})
    print(rep.table())
    return EXIT_OK


def _run_pipeline(args, seed: int, out: Path) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    timings = {}
    g = read_edge_list(args.input)
    n = sampling.sample_size(args.pct, g.n_nodes)
    trace, timings["sample"] = _stage("sample", sampling.sample, g, args.method, n, seed,
                                        replace=not getattr(args, "no_replacement", False))
    sampling.write_trace(trace, out / "trace.txt")
    est_args = argparse.Namespace(**{**vars(args), "seed": seed})
    bundle, timings["estimate"] = _stage("estimate", estimation.estimate, trace,
                                         _estimator_cfg(est_args, n_nodes=g.n_nodes))
    estimation.write_bundle(bundle, out / "estimate")
    spec, timings["postprocess"] = _stage("postprocess", postprocess.build_target, bundle.jdd, bundle.ck,
                                          seed, smooth=not args.no_smooth, rounding=args.rounding)
    postprocess.write_target(spec, out / "target.txt")
    res, timings["generate"] = _stage("generate", generate_25k, spec,
                                      _mcmc_cfg(args, seed=seed), args.generator)
    write_edge_list(res.graph, out / "generated.txt")
    write_trace_csv(res.mcmc.trace, out / "convergence.csv")
    rep, timings["compare"] = _stage("compare", compare, g, res.graph, _budgets(est_args))
    rep.write_csv(out / "report.csv")
    rep.write_binned(out / "binned")
    (out / "report.txt").write_text(rep.table() + "\n", encoding="utf-8")
    write_manifest(out / "manifest.json", "pipeline", est_args, timings,
                   {"converged": res.converged, "edges_changed": spec.edges_changed, "nmae": rep.nmae})
    return {"seed": seed, "nmae": rep.nmae, "converged": res.converged}


def _pipeline_worker(payload):
    args, seed, out = payload
    return _run_pipeline(args, seed, Path(out))


def cmd_pipeline(args) -> int:
    _need_file(args.input, "graph edge list")
    _need_out(args)
    out = Path(args.out)
    if args.runs <= 1:
        results = [_run_pipeline(args, args.seed, out)]
    else:
        jobs = [(args, args.seed + i, str(out / f"run_{i}")) for i in range(args.runs)]
        plain = argparse.Namespace(**{k: v for k, v in vars(args).items() if k != "func"})
        jobs = [(plain, s, o) for _, s, o in jobs]
        with ProcessPoolExecutor(max_workers=min(args.runs, args.workers or args.runs)) as ex:
            results = list(ex.map(_pipeline_worker, jobs))
        _write_summary(out, results)
    for r in results:
        vals = " ".join(f"{m}={r['nmae'][m]:.3f}" for m in METRICS if r["nmae"].get(m) is not None)
        print(f"seed {r['seed']}: {vals}")
    return EXIT_OK if all(r["converged"] for r in results) else EXIT_NOT_CONVERGED


def _write_summary(out: Path, results) -> None:
    with open(out / "summary.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["metric", "mean", "std", "runs"])
        for m in METRICS:
            vals = [r["nmae"][m] for r in results if r["nmae"].get(m) is not None]
            if vals:
                w.writerow([m, f"{np.mean(vals):.6g}", f"{np.std(vals):.6g}", len(vals)])


def cmd_replay(args) -> int:
    _need_file(args.manifest, "manifest")
    doc = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
    cfg = dict(doc["config"])
    if args.out:
        cfg["out"] = args.out
    argv = [doc["command"]]
    parser = build_parser()
    sub = parser._subparsers._group_actions[0].choices[doc["command"]]
    for action in sub._actions:
        if not action.option_strings or action.dest not in cfg or action.dest == "help":
            continue
        val = cfg[action.dest]
        flag = action.option_strings[-1]
        if isinstance(action, argparse._StoreTrueAction):
            if val:
                argv.append(flag)
        elif val is not None:
            argv += [flag, str(val)]
    return main(argv)


# ---------------------------------------------------------------------------
# parser


def _add_common(p, *, needs_input=True):
    p.add_argument("--config", help="flat key=value file; explicit flags override it")
    if needs_input:
        p.add_argument("--input", help="stage input file or directory")
    p.add_argument("--out", help="stage output path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-v", "--verbose", action="store_true")


def _add_sampling(p):
    p.add_argument("--method", choices=("uis", "wis", "rw"), default="rw")
    p.add_argument("--pct", type=float, default=20.0, help="sample size as %% of nodes, in (0, 100]")
    p.add_argument("--no-replacement", action="store_true", help="UIS only: draw distinct nodes")


def _add_estimation(p):
    p.add_argument("--margin", type=int, default=50, help="safety margin M between induced RW pairs")
    p.add_argument("--hybrid-threshold", type=float, default=None)
    p.add_argument("--rw-estimator", choices=("hybrid", "induced", "traversed"), default="hybrid")
    p.add_argument("--known-n", type=int, default=None)
    p.add_argument("--known-e", type=int, default=None)


def _add_postprocess(p):
    p.add_argument("--no-smooth", action="store_true")
    p.add_argument("--rounding", choices=("stochastic", "nearest"), default="stochastic")


def _add_generation(p):
    p.add_argument("--generator", choices=("2k", "2kt"), default="2kt")
    p.add_argument("--mcmc", choices=("plain", "improved"), default="improved")
    p.add_argument("--nmae-stop", type=float, default=0.02)
    p.add_argument("--max-swaps", type=int, default=None)
    p.add_argument("--max-seconds", type=float, default=None)
    p.add_argument("--progress-interval", type=int, default=10_000)


def _add_metrics(p):
    p.add_argument("--path-sources", type=int, default=None)
    p.add_argument("--clique-timeout", type=float, default=60.0)
    p.add_argument("--cycle-candidates", type=int, default=200_000)
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dk25", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="crawl a graph with UIS, WIS or a random walk")
    _add_common(p)
    _add_sampling(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("estimate", help="estimate JDD and c(k) from a sample trace")
    _add_common(p)
    _add_estimation(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("postprocess", help="smooth, round and repair an estimate into a target spec")
    _add_common(p)
    _add_postprocess(p)
    p.set_defaults(func=cmd_postprocess)

    p = sub.add_parser("generate", help="build a graph matching a target spec")
    _add_common(p)
    _add_generation(p)
    p.add_argument("--trace", help="write the convergence trace CSV here")
    p.add_argument("--all-pairings", action="store_true",
                   help="time all four construction/MCMC pairings; --out becomes a directory")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("compare", help="score a generated graph against a reference graph")
    _add_common(p)
    p.add_argument("--generated", help="generated graph edge list")
    _add_metrics(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("pipeline", help="run every stage on one input graph")
    _add_common(p)
    _add_sampling(p)
    _add_estimation(p)
    _add_postprocess(p)
    _add_generation(p)
    _add_metrics(p)
    p.add_argument("--runs", type=int, default=1, help="seeded repetitions, run in parallel")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", help="override the recorded output path")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_replay)
    return ap


def _apply_config(parser, argv):
    """Re-parse with defaults taken from --config, so flags > file > defaults."""
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    if not Path(args.config).exists():
        raise ValidationError(f"config file not found: {args.config}")
    values = read_config(args.config)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest: a for a in sub._actions}
    typed = {}
    for k, v in values.items():
        if k not in known:
            raise ValidationError(f"{args.config}: unknown key {k!r}")
        a = known[k]
        if isinstance(a, argparse._StoreTrueAction):
            typed[k] = v.lower() in ("1", "true", "yes", "on")
        else:
            typed[k] = a.type(v) if a.type else v
            if a.choices and typed[k] not in a.choices:
                raise ValidationError(f"{args.config}: {k} must be one of {a.choices}")
    sub.set_defaults(**typed)
    return parser.parse_args(argv)


def _validate(args):
    if hasattr(args, "pct") and not 0 < args.pct <= 100:
        raise ValidationError("--pct must lie in (0, 100]")
    if hasattr(args, "nmae_stop") and not args.nmae_stop > 0:
        raise ValidationError("--nmae-stop must be > 0")
    if hasattr(args, "runs") and args.runs < 1:
        raise ValidationError("--runs must be >= 1")
    if hasattr(args, "margin") and args.margin < 0:
        raise ValidationError("--margin must be >= 0")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except SystemExit as exc:  # argparse reports usage errors with status 2
        return EXIT_VALIDATION if exc.code else EXIT_OK
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _validate(args)
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except GraphInputError as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (StageError, ConstructionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
