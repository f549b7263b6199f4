"""Config-driven sampling/reconstruction experiments.

A run loops over samplers, sampling rates and trials. For every trial it draws
a signal, samples it, optionally adds noise, reconstructs by least squares and
records one :class:`ResultRow`. All randomness comes from seeds derived from
the base seed and a tuple of labels, so a run is byte-for-byte repeatable and
adding a sampler does not change the streams seen by the others.

Config JSON schema::

    {
      "graph": {"family": "sensor", "n": 500, "seed": 1}  |  "path/to/graph.csv",
      "signal_model": {"kind": "sm1", "k": 50}
                    | {"kind": "sm2", "ref_index": 50, "k": 50},
      "samplers": [{"method": "random"}, {"method": "vac", "params": {"sigma": 0.01}},
                   {"method": "chen"}, {"method": "anis", "params": {"q": 2}}],
      "sampling_rates": [60, 75, 100, 150],
      "trials": 50,
      "snr_db": 20.0,            # or null for noise-free samples
      "seed": 0,
      "output_dir": "runs/fig9", # or null
      "record_runtime": false
    }
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .generators import GeneratorSpec, generate
from .graph import Graph, geodesic_distances, laplacian, read_graph_csv
from .pattern import SamplingPattern
from .reconstruct import add_noise, reconstruct_ls, sample_signal
from .samplers import (VacParams, greedy_sigma_min_order, greedy_spectral_proxy_order, vac,
                       white_noise)
from .spectral import SpectralBasis, eigendecompose, redness, signal_sm1, signal_sm2

METHODS = ("random", "vac", "chen", "anis")
SIGNAL_KINDS = ("sm1", "sm2")
CSV_COLUMNS = ("sampler", "m", "trial", "mse", "relative_error", "sigma_min", "redness", "runtime_ms")
_METHOD_PARAMS = {
    "random": set(),
    "vac": {"sigma", "tau", "num_iter"},
    "chen": {"k"},
    "anis": {"q"},
}


class ConfigError(ValueError):
    """An experiment config field is missing or invalid."""


def derive_rng(base: int, *labels) -> np.random.Generator:
    """Independent generator for ``(base, *labels)``; string labels are hashed with CRC-32."""
    words = [int(base)]
    for lab in labels:
        words.append(zlib.crc32(lab.encode()) if isinstance(lab, str) else int(lab))
    return np.random.default_rng(np.random.SeedSequence(words))


@dataclass(frozen=True)
class SamplerSpec:
    method: str
    params: dict = field(default_factory=dict)
    label: str | None = None

    @property
    def name(self) -> str:
        return self.label or self.method

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"method": self.method}
        if self.params:
            out["params"] = dict(self.params)
        if self.label is not None:
            out["label"] = self.label
        return out

    @classmethod
    def from_dict(cls, obj, where: str = "samplers") -> "SamplerSpec":
        if isinstance(obj, str):
            obj = {"method": obj}
        if not isinstance(obj, dict):
            raise ConfigError(f"{where}: expected an object or a method name")
        extra = set(obj) - {"method", "params", "label"}
        if extra:
            raise ConfigError(f"{where}: unknown key(s) {sorted(extra)}")
        method = obj.get("method")
        if method not in METHODS:
            raise ConfigError(f"{where}.method: expected one of {METHODS}, got {method!r}")
        params = obj.get("params") or {}
        if not isinstance(params, dict):
            raise ConfigError(f"{where}.params: expected an object")
        bad = set(params) - _METHOD_PARAMS[method]
        if bad:
            raise ConfigError(f"{where}.params: {method} does not accept {sorted(bad)}")
        label = obj.get("label")
        if label is not None and not isinstance(label, str):
            raise ConfigError(f"{where}.label: expected a string")
        return cls(method, dict(params), label)


@dataclass(frozen=True)
class ExperimentConfig:
    graph: GeneratorSpec | str
    signal_model: dict
    samplers: tuple[SamplerSpec, ...]
    sampling_rates: tuple[int, ...]
    trials: int = 1
    snr_db: float | None = None
    seed: int = 0
    output_dir: str | None = None
    record_runtime: bool = False

    def __post_init__(self):
        if isinstance(self.trials, bool) or not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError(f"trials: must be an integer >= 1, got {self.trials!r}")
        if not self.samplers:
            raise ConfigError("samplers: at least one sampler is required")
        names = [s.name for s in self.samplers]
        if len(set(names)) != len(names):
            raise ConfigError(f"samplers: duplicate sampler labels {names}")
        if not self.sampling_rates:
            raise ConfigError("sampling_rates: at least one rate is required")
        for m in self.sampling_rates:
            if isinstance(m, bool) or not isinstance(m, int) or m < 1:
                raise ConfigError(f"sampling_rates: {m!r} is not a positive integer")
            if isinstance(self.graph, GeneratorSpec) and m > self.graph.n:
                raise ConfigError(f"sampling_rates: {m} exceeds the graph size {self.graph.n}")
        if self.snr_db is not None and not (isinstance(self.snr_db, (int, float)) and math.isfinite(self.snr_db)):
            raise ConfigError(f"snr_db: expected a finite number or null, got {self.snr_db!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed: must be a non-negative integer, got {self.seed!r}")
        _check_signal_model(self.signal_model)

    @property
    def k(self) -> int:
        """Reconstruction bandwidth."""
        sm = self.signal_model
        return int(sm.get("k", sm.get("ref_index", 0)))

    def to_dict(self) -> dict:
        return {
            "graph": self.graph.to_dict() if isinstance(self.graph, GeneratorSpec) else self.graph,
            "signal_model": dict(self.signal_model),
            "samplers": [s.to_dict() for s in self.samplers],
            "sampling_rates": list(self.sampling_rates),
            "trials": self.trials,
            "snr_db": self.snr_db,
            "seed": self.seed,
            "output_dir": self.output_dir,
            "record_runtime": self.record_runtime,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config: expected a JSON object")
        known = {"graph", "signal_model", "samplers", "sampling_rates", "trials", "snr_db",
                 "seed", "output_dir", "record_runtime"}
        extra = set(obj) - known
        if extra:
            raise ConfigError(f"config: unknown key(s) {sorted(extra)}")
        for key in ("graph", "signal_model", "samplers", "sampling_rates"):
            if key not in obj:
                raise ConfigError(f"{key}: required field is missing")
        graph = obj["graph"]
        if isinstance(graph, dict):
            try:
                graph = GeneratorSpec.from_dict(graph)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"graph: {exc}") from None
        elif not isinstance(graph, str):
            raise ConfigError("graph: expected a generator object or a CSV path")
        samplers = obj["samplers"]
        if not isinstance(samplers, list):
            raise ConfigError("samplers: expected a list")
        specs = tuple(SamplerSpec.from_dict(s, f"samplers[{i}]") for i, s in enumerate(samplers))
        rates = obj["sampling_rates"]
        if not isinstance(rates, list):
            raise ConfigError("sampling_rates: expected a list of integers")
        out_dir = obj.get("output_dir")
        if out_dir is not None and not isinstance(out_dir, str):
            raise ConfigError("output_dir: expected a string or null")
        return cls(
            graph=graph,
            signal_model=dict(obj["signal_model"]) if isinstance(obj["signal_model"], dict) else obj["signal_model"],
            samplers=specs,
            sampling_rates=tuple(rates),
            trials=obj.get("trials", 1),
            snr_db=obj.get("snr_db"),
            seed=obj.get("seed", 0),
            output_dir=out_dir,
            record_runtime=bool(obj.get("record_runtime", False)),
        )

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON ({exc})") from None
        return cls.from_dict(obj)


def _check_signal_model(sm) -> None:
    if not isinstance(sm, dict):
        raise ConfigError("signal_model: expected an object")
    kind = sm.get("kind")
    if kind not in SIGNAL_KINDS:
        raise ConfigError(f"signal_model.kind: expected one of {SIGNAL_KINDS}, got {kind!r}")
    allowed = {"kind", "k"} if kind == "sm1" else {"kind", "k", "ref_index"}
    extra = set(sm) - allowed
    if extra:
        raise ConfigError(f"signal_model: unknown key(s) {sorted(extra)} for {kind}")
    need = "k" if kind == "sm1" else "ref_index"
    if need not in sm:
        raise ConfigError(f"signal_model.{need}: required for {kind}")
    for key in ("k", "ref_index"):
        if key in sm and (isinstance(sm[key], bool) or not isinstance(sm[key], int) or sm[key] < 1):
            raise ConfigError(f"signal_model.{key}: must be a positive integer")


@dataclass(frozen=True)
class ResultRow:
    sampler: str
    m: int
    trial: int
    mse: float
    relative_error: float
    sigma_min: float
    redness: float
    runtime_ms: float | None = None


def _fmt(x: float | None) -> str:
    return "" if x is None else repr(float(x))


@dataclass
class ResultTable:
    rows: list[ResultRow]

    def __len__(self) -> int:
        return len(self.rows)

    def samplers(self) -> list[str]:
        return list(dict.fromkeys(r.sampler for r in self.rows))

    def rates(self) -> list[int]:
        return sorted({r.m for r in self.rows})

    def mean(self, column: str = "mse") -> dict[str, dict[int, float]]:
        """``out[sampler][m]`` = mean of ``column`` over trials."""
        acc: dict[str, dict[int, list[float]]] = {}
        for r in self.rows:
            acc.setdefault(r.sampler, {}).setdefault(r.m, []).append(getattr(r, column))
        return {s: {m: float(np.mean(v)) for m, v in by_m.items()} for s, by_m in acc.items()}

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(CSV_COLUMNS) + "\n")
        for r in self.rows:
            buf.write(",".join([r.sampler, str(r.m), str(r.trial), _fmt(r.mse), _fmt(r.relative_error),
                                _fmt(r.sigma_min), _fmt(r.redness), _fmt(r.runtime_ms)]) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ResultTable":
        reader = csv.DictReader(io.StringIO(text))
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"result CSV must have columns {','.join(CSV_COLUMNS)}")
        rows = [ResultRow(d["sampler"], int(d["m"]), int(d["trial"]), float(d["mse"]),
                          float(d["relative_error"]), float(d["sigma_min"]), float(d["redness"]),
                          float(d["runtime_ms"]) if d["runtime_ms"] else None)
                for d in reader]
        return cls(rows)


def load_graph(source: GeneratorSpec | str) -> Graph:
    if isinstance(source, GeneratorSpec):
        return generate(source)
    path = Path(source)
    if not path.is_file():
        raise ConfigError(f"graph: file {source!r} does not exist")
    return read_graph_csv(path)


def _thread_count() -> int:
    raw = os.environ.get("GBN_THREADS", "")
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"GBN_THREADS must be an integer, got {raw!r}") from None


class _Context:
    """Per-run cache of the graph, its spectrum, distances and greedy orders."""

    def __init__(self, cfg: ExperimentConfig, g: Graph):
        self.cfg = cfg
        self.g = g
        self.L = laplacian(g)
        self.basis: SpectralBasis = eigendecompose(self.L)
        needs_gamma = any(s.method == "vac" for s in cfg.samplers)
        self.gamma = geodesic_distances(g) if needs_gamma else None
        top = max(cfg.sampling_rates)
        self.orders: dict[str, list[int]] = {}
        for s in cfg.samplers:
            if s.method == "chen":
                k = int(s.params.get("k", cfg.k))
                self.orders[s.name] = greedy_sigma_min_order(self.basis, k, top)
            elif s.method == "anis":
                self.orders[s.name] = greedy_spectral_proxy_order(self.L, top, int(s.params.get("q", 2)))

    def signal(self, trial: int) -> np.ndarray:
        sm = self.cfg.signal_model
        rng = derive_rng(self.cfg.seed, "signal", trial)
        if sm["kind"] == "sm1":
            return signal_sm1(self.basis, int(sm["k"]), rng)
        return signal_sm2(self.basis, int(sm["ref_index"]), rng)

    def pattern(self, spec: SamplerSpec, m: int, trial: int) -> SamplingPattern:
        n = self.g.n
        if spec.method in ("chen", "anis"):
            return SamplingPattern.from_support(n, self.orders[spec.name][:m])
        rng = derive_rng(self.cfg.seed, spec.name, m, trial)
        if spec.method == "random":
            return white_noise(n, m, rng)
        p = spec.params
        seed = int(rng.integers(2 ** 63))
        return vac(self.gamma, VacParams(m, p.get("sigma"), p.get("tau"), p.get("num_iter"), seed))

    def run_one(self, spec: SamplerSpec, m: int, trial: int) -> ResultRow:
        t0 = time.perf_counter()
        x = self.signal(trial)
        pat = self.pattern(spec, m, trial)
        y = sample_signal(x, pat)
        if self.cfg.snr_db is not None:
            y = add_noise(y, self.cfg.snr_db, derive_rng(self.cfg.seed, "noise", m, trial))
        _, rep = reconstruct_ls(self.basis, self.cfg.k, pat, y, x_true=x)
        red = redness(self.basis, pat)
        elapsed = (time.perf_counter() - t0) * 1e3 if self.cfg.record_runtime else None
        return ResultRow(spec.name, m, trial, rep.mse, rep.relative_error, rep.sigma_min, red, elapsed)


def run_experiment(config: ExperimentConfig, graph: Graph | None = None) -> ResultTable:
    """Run every (sampler, rate, trial) cell of ``config``.

    Trials of one (sampler, rate) pair run on up to ``GBN_THREADS`` threads;
    rows come back in (sampler, rate, trial) order regardless.
    """
    g = graph if graph is not None else load_graph(config.graph)
    for m in config.sampling_rates:
        if m > g.n:
            raise ConfigError(f"sampling_rates: {m} exceeds the graph size {g.n}")
    if not 1 <= config.k <= g.n:
        raise ConfigError(f"signal_model: bandwidth {config.k} is outside [1, {g.n}]")
    ctx = _Context(config, g)
    rows: list[ResultRow] = []
    threads = _thread_count()
    pool = ThreadPoolExecutor(threads) if threads > 1 else None
    try:
        for spec in config.samplers:
            for m in config.sampling_rates:
                trials = range(config.trials)
                if pool is None:
                    rows.extend(ctx.run_one(spec, m, t) for t in trials)
                else:
                    rows.extend(pool.map(lambda t: ctx.run_one(spec, m, t), trials))
    finally:
        if pool is not None:
            pool.shutdown()
    return ResultTable(rows)


def manifest(config: ExperimentConfig, g: Graph | None = None) -> dict:
    from . import __version__

    out = {"config": config.to_dict(), "version": __version__}
    if g is not None:
        out["graph_summary"] = {"n": g.n, "n_edges": g.n_edges}
    return out


def write_outputs(table: ResultTable, config: ExperimentConfig, out_dir: str | Path,
                  g: Graph | None = None) -> dict[str, Path]:
    """Write ``results.csv``, ``manifest.json`` and the MSE curve (SVG plus CSV)."""
    from .plots import emit_plots

    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output_dir: cannot write to {str(out)!r} ({exc.strerror or exc})") from None
    paths = {"results": out / "results.csv", "manifest": out / "manifest.json"}
    paths["results"].write_text(table.to_csv())
    paths["manifest"].write_text(json.dumps(manifest(config, g), indent=2, sort_keys=True) + "\n")
    paths["mse_curve"] = emit_plots(table, "mse-curve", out / "mse-curve.svg")
    return paths
