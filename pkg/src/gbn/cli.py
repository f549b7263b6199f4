"""Command-line interface: ``gbn <command> [options]``.

Exit status is 0 on success, 1 when an input or option is invalid, and 2 on a
numeric failure (for example a violated identity in ``theory-check``).
"""
from __future__ import annotations

import argparse
import json
import re
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .experiment import ExperimentConfig, run_experiment, write_outputs, load_graph
from .generators import FAMILIES, GeneratorSpec, cycle_graph, complete_graph, generate, grid_graph, path_graph
from .graph import Graph, geodesic_distances, graph_to_csv, laplacian, read_graph_csv
from .metrics import (pair_correlation, partition_from_pattern, principal_wavelength, lambda_partition,
                      uniqueness_constant_ks)
from .pattern import SamplingPattern, read_pattern
from .reconstruct import add_noise, reconstruct_ls, sample_signal
from .samplers import VacParams, greedy_sigma_min, greedy_spectral_proxy, vac, white_noise
from .spectral import (eigendecompose, lambda_set, parse_signal_csv, power_spectrum, redness, signal_to_csv,
                       spectrum_to_csv)
from .theory import random_patterns, run_theory_checks, uniqueness_diagnostics


class NumericFailure(RuntimeError):
    """A computation finished but its result violates an expected property."""


_SHORT = re.compile(r"^(p|c|k)(\d+)$|^grid(\d+)x(\d+)$")


def resolve_graph(text: str) -> Graph:
    """Graph from a CSV path or a shorthand.

    Shorthands: ``p5`` (path), ``c6`` (cycle), ``k4`` (complete),
    ``grid3x4``, and ``family:key=value,...`` for generated graphs, e.g.
    ``sensor:n=300,seed=1``.
    """
    m = _SHORT.match(text)
    if m:
        if m.group(1):
            n = int(m.group(2))
            return {"p": path_graph, "c": cycle_graph, "k": complete_graph}[m.group(1)](n)
        return grid_graph(int(m.group(3)), int(m.group(4)))
    head, sep, rest = text.partition(":")
    if sep and head in FAMILIES:
        kw: dict = {"family": head}
        for item in filter(None, rest.split(",")):
            key, eq, val = item.partition("=")
            if not eq:
                raise ValueError(f"graph option {item!r} must look like key=value")
            kw[key] = float(val) if key in ("p_in", "p_out") else int(val)
        if "n" not in kw:
            raise ValueError("generated graph needs n=...")
        return generate(GeneratorSpec.from_dict(kw))
    path = Path(text)
    if not path.is_file():
        raise ValueError(f"--graph {text!r} is neither a known shorthand nor an existing CSV file")
    return read_graph_csv(path)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _scalar(name: str, value: float, fmt: str) -> str:
    if fmt == "json":
        return json.dumps({name: value}) + "\n"
    return f"{name}\n{value!r}\n"


def _patterns(paths: list[str], n: int) -> list[SamplingPattern]:
    if not paths:
        raise ValueError("--pattern is required")
    pats = [read_pattern(p) for p in paths]
    for p, path in zip(pats, paths):
        if p.n != n:
            raise ValueError(f"pattern {path} has n={p.n} but the graph has {n} nodes")
    return pats


# -- commands -----------------------------------------------------------------------

def cmd_gen_graph(a) -> int:
    spec = GeneratorSpec(a.family, a.n, a.seed, a.k_max, a.communities, a.m_attach, a.p_in, a.p_out,
                         a.rows, a.cols)
    g = generate(spec)
    if a.out:
        Path(a.out).write_text(graph_to_csv(g))
        side = Path(a.out).with_suffix(".json")
        meta = {"generator": spec.to_dict(), "n": g.n, "n_edges": g.n_edges, "version": __version__}
        side.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(graph_to_csv(g))
    return 0


def cmd_sample(a) -> int:
    g = resolve_graph(a.graph)
    if not 1 <= a.m <= g.n:
        raise ValueError(f"--m must be in [1, {g.n}], got {a.m}")
    if a.method == "random":
        p = white_noise(g.n, a.m, a.seed)
    elif a.method == "vac":
        params = VacParams(a.m, a.sigma, a.tau, a.num_iter, a.seed)
        p = vac(geodesic_distances(g), params)
    elif a.method == "chen":
        if a.k is None:
            raise ValueError("--k is required for the chen sampler")
        p = greedy_sigma_min(eigendecompose(laplacian(g)), a.k, a.m)
    else:
        p = greedy_spectral_proxy(laplacian(g), a.m, a.q)
    if a.format == "csv":
        text = "node\n" + "".join(f"{i}\n" for i in p.support)
    else:
        text = p.to_json() + "\n"
    _emit(text, a.out)
    return 0


def cmd_metrics(a) -> int:
    g = resolve_graph(a.graph)
    kind = a.kind
    if kind == "wavelength":
        if a.d is None:
            raise ValueError("--d is required for wavelength")
        _emit(_scalar("lambda_b", principal_wavelength(geodesic_distances(g), a.d), a.format), a.out)
        return 0
    pats = _patterns(a.pattern, g.n)
    if kind == "pair-correlation":
        pc = pair_correlation(geodesic_distances(g), pats, a.theta, graph=g)
        if a.format == "json":
            text = json.dumps({"theta": pc.theta, "rho": pc.rho_grid.tolist(), "R": pc.values.tolist()}) + "\n"
        else:
            text = pc.to_csv()
    elif kind == "spectrum":
        basis = eigendecompose(laplacian(g))
        p = power_spectrum(basis, pats)
        if a.format == "json":
            text = json.dumps({"mu": basis.mu[1:].tolist(), "p": p.tolist()}) + "\n"
        else:
            text = spectrum_to_csv(basis, p)
    elif kind == "redness":
        basis = eigendecompose(laplacian(g))
        vals = [redness(basis, p) for p in pats]
        text = _scalar("redness", vals[0], a.format) if len(vals) == 1 else (
            json.dumps({"redness": vals}) + "\n" if a.format == "json"
            else "redness\n" + "".join(f"{v!r}\n" for v in vals))
    elif kind == "ks":
        text = _scalar("K_S", uniqueness_constant_ks(g, pats[0].support), a.format)
    elif kind == "lambda-set":
        L = laplacian(g)
        p = pats[0]
        lam_s = lambda_set(L, p.support) if p.m else 0.0
        lam_c = lambda_set(L, p.complement()) if p.m < g.n else 0.0
        if a.format == "json":
            text = json.dumps({"lambda_S": lam_s, "lambda_Sc": lam_c}) + "\n"
        else:
            text = f"lambda_S,lambda_Sc\n{lam_s!r},{lam_c!r}\n"
    else:  # partition
        part = partition_from_pattern(geodesic_distances(g), pats[0], g.degrees())
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            lam = lambda_partition(g, part)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        if a.format == "json":
            obj = json.loads(part.to_json())
            obj["lambda_P"] = lam
            text = json.dumps(obj) + "\n"
        else:
            text = "node,cell\n" + "".join(
                f"{v},{j}" + "\n" for j, cell in enumerate(part.cells) for v in cell)
    _emit(text, a.out)
    return 0


def cmd_reconstruct(a) -> int:
    g = resolve_graph(a.graph)
    x = parse_signal_csv(Path(a.signal).read_text())
    if x.size != g.n:
        raise ValueError(f"signal has {x.size} values but the graph has {g.n} nodes")
    p = read_pattern(a.pattern)
    if p.n != g.n:
        raise ValueError("pattern size does not match the graph")
    basis = eigendecompose(laplacian(g))
    if not 1 <= a.k <= g.n:
        raise ValueError(f"--k must be in [1, {g.n}]")
    y = sample_signal(x, p)
    if a.snr_db is not None:
        y = add_noise(y, a.snr_db, a.seed)
    x_rec, rep = reconstruct_ls(basis, a.k, p, y, x_true=x)
    if a.format == "json":
        text = json.dumps({"x_rec": x_rec.tolist(), "mse": rep.mse, "relative_error": rep.relative_error,
                           "sigma_min": rep.sigma_min, "rank_deficient": rep.rank_deficient}) + "\n"
    else:
        text = signal_to_csv(x_rec)
        print(f"mse={rep.mse!r} relative_error={rep.relative_error!r} sigma_min={rep.sigma_min!r}"
              f"{' (rank deficient)' if rep.rank_deficient else ''}", file=sys.stderr)
    _emit(text, a.out)
    return 0


def cmd_experiment(a) -> int:
    if not a.config:
        raise ValueError("--config is required")
    obj = json.loads(Path(a.config).read_text())
    if a.seed is not None:
        obj["seed"] = a.seed
    if a.out:
        obj["output_dir"] = a.out
    cfg = ExperimentConfig.from_dict(obj)
    g = load_graph(cfg.graph)
    table = run_experiment(cfg, g)
    if cfg.output_dir:
        paths = write_outputs(table, cfg, cfg.output_dir, g)
        print(f"wrote {paths['results']}", file=sys.stderr)
    else:
        sys.stdout.write(table.to_csv())
    return 0


def cmd_theory_check(a) -> int:
    g = resolve_graph(a.graph)
    seed = 0 if a.seed is None else a.seed
    pats = random_patterns(g.n, a.patterns, seed)
    basis = eigendecompose(laplacian(g))
    results = run_theory_checks(g, pats, basis=basis)
    lines = [r.line() for r in results]
    ok = all(r.passed for r in results if not r.informational)
    if g.n <= 30:
        tally = uniqueness_diagnostics(g, pats, basis)
        passed = tally.counterexamples == 0
        ok &= passed
        lines.append(f"{'PASS' if passed else 'FAIL'} uniqueness-rank: {tally.cases} cases, "
                     f"{tally.counterexamples} counterexamples")
    if a.format == "json":
        text = json.dumps({"passed": ok, "checks": [
            {"name": r.name, "passed": r.passed, "cases": r.cases, "worst": r.worst,
             "informational": r.informational, "note": r.note} for r in results]}) + "\n"
    else:
        text = "\n".join(lines) + "\n"
    _emit(text, a.out)
    if not ok:
        raise NumericFailure("one or more identities failed")
    return 0


# -- parser -------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser, fmt_default: str = "csv") -> None:
    p.add_argument("--seed", type=int, default=None, help="random seed")
    p.add_argument("--out", default=None, help="output file (stdout if omitted)")
    p.add_argument("--format", choices=("csv", "json"), default=fmt_default)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gbn", description="Blue-noise sampling on graphs")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-graph", help="generate a graph as an edge-list CSV")
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k-max", type=int, default=6)
    p.add_argument("--communities", type=int, default=16)
    p.add_argument("--m-attach", type=int, default=2)
    p.add_argument("--p-in", type=float, default=0.3)
    p.add_argument("--p-out", type=float, default=0.005)
    p.add_argument("--rows", type=int)
    p.add_argument("--cols", type=int)
    _common(p)
    p.set_defaults(func=cmd_gen_graph)

    p = sub.add_parser("sample", help="build a sampling pattern")
    p.add_argument("--graph", required=True)
    p.add_argument("--method", choices=("random", "vac", "chen", "anis"), required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, help="bandwidth for chen")
    p.add_argument("--q", type=int, default=2, help="proxy order for anis")
    p.add_argument("--sigma", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--num-iter", type=int)
    _common(p, "json")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("metrics", help="pattern quality metrics")
    p.add_argument("kind", choices=("pair-correlation", "redness", "wavelength", "ks", "lambda-set",
                                    "partition", "spectrum"))
    p.add_argument("--graph", required=True)
    p.add_argument("--pattern", nargs="*", default=[], help="pattern JSON file(s)")
    p.add_argument("--d", type=float, help="sampling density for wavelength")
    p.add_argument("--theta", type=float, help="annulus half-width (default: mean edge weight)")
    _common(p)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("reconstruct", help="least-squares reconstruction from samples")
    p.add_argument("--graph", required=True)
    p.add_argument("--signal", required=True, help="CSV node,value")
    p.add_argument("--pattern", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--snr-db", type=float)
    _common(p)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("experiment", help="run a config-driven experiment")
    p.add_argument("--config", help="experiment JSON")
    _common(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("theory-check", help="check spectral identities on random patterns")
    p.add_argument("--graph", required=True)
    p.add_argument("--patterns", type=int, default=200)
    _common(p)
    p.set_defaults(func=cmd_theory_check)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with status 2
        return 1 if exc.code else 0
    if getattr(args, "seed", None) is None and args.command in ("sample", "reconstruct"):
        args.seed = 0
    try:
        return args.func(args)
    except NumericFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"error: numeric failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, IndexError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
