"""Dependency-free SVG line plots with a CSV dump of the plotted data.

Output is deterministic: the same data always yields the same bytes, so
figures can be diffed in version control.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np

KINDS = ("mse-curve", "pair-correlation", "spectrum", "redness-trace")
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")

WIDTH, HEIGHT = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 150, 40, 50


@dataclass
class Series:
    label: str
    x: np.ndarray
    y: np.ndarray


@dataclass
class Figure:
    title: str
    xlabel: str
    ylabel: str
    series: list[Series]
    log_y: bool = False
    csv_header: tuple[str, str, str] = ("series", "x", "y")


def _as_series(data, unpack) -> list[Series]:
    if isinstance(data, Mapping):
        items = list(data.items())
    else:
        items = [("data", data)]
    out = []
    for label, value in items:
        x, y = unpack(value)
        out.append(Series(str(label), np.asarray(x, dtype=float), np.asarray(y, dtype=float)))
    return out


def _pc(value):
    return value.rho_grid, value.values


def _pairs(value):
    if isinstance(value, tuple) and len(value) == 2:
        return value
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 1:
        return np.arange(len(arr)), arr
    return arr[:, 0], arr[:, 1]


def build_figure(data, kind: str) -> Figure:
    """Turn ``data`` into a :class:`Figure` for the requested plot ``kind``.

    ``mse-curve`` takes a :class:`~gbn.experiment.ResultTable` or a mapping
    ``label -> (m values, mean MSE)``. ``pair-correlation`` takes a
    :class:`~gbn.metrics.PairCorrelation` or a mapping of them. ``spectrum``
    and ``redness-trace`` take an ``(x, y)`` pair, a sequence of ``(x, y)``
    rows, or a mapping from labels to either.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown plot kind {kind!r}; expected one of {KINDS}")
    if kind == "mse-curve":
        if hasattr(data, "mean") and hasattr(data, "rows"):
            means = data.mean("mse")
            data = {s: (sorted(means[s]), [means[s][m] for m in sorted(means[s])]) for s in data.samplers()}
        series = _as_series(data, _pairs)
        fig = Figure("Reconstruction error", "samples m", "mean MSE", series, True, ("sampler", "m", "mse"))
    elif kind == "pair-correlation":
        fig = Figure("Pair correlation", "rho", "R(rho)", _as_series(data, _pc), False, ("series", "rho", "R"))
    elif kind == "spectrum":
        fig = Figure("Power spectrum", "mu", "p", _as_series(data, _pairs), False, ("series", "mu", "p"))
    else:
        fig = Figure("Redness", "iteration", "redness", _as_series(data, _pairs), False,
                     ("series", "iteration", "redness"))
    if not fig.series or all(s.x.size == 0 for s in fig.series):
        raise ValueError("nothing to plot: data is empty")
    for s in fig.series:
        if s.x.shape != s.y.shape:
            raise ValueError(f"series {s.label!r}: x and y lengths differ")
    return fig


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((c * mag for c in (1, 2, 2.5, 5, 10) if c * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step - 1e-9) * step
    out = []
    t = start
    while t <= hi + 1e-9 * step:
        out.append(round(t, 12))
        t += step
    return out


def _num(v: float) -> str:
    return f"{v:.2f}"


def _label(v: float) -> str:
    return f"{v:.4g}"


def render_svg(fig: Figure) -> str:
    xs = np.concatenate([s.x for s in fig.series])
    ys = np.concatenate([s.y for s in fig.series])
    finite = np.isfinite(ys) & np.isfinite(xs)
    if fig.log_y:
        finite &= ys > 0
    if not finite.any():
        raise ValueError("no finite points to plot")
    x0, x1 = float(xs[finite].min()), float(xs[finite].max())
    if fig.log_y:
        y0 = math.floor(math.log10(ys[finite].min()))
        y1 = math.ceil(math.log10(ys[finite].max()))
        if y1 == y0:
            y1 += 1
    else:
        y0, y1 = float(min(0.0, ys[finite].min())), float(ys[finite].max())
        if y1 == y0:
            y1 = y0 + 1.0
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(x):
        return LEFT + (x - x0) / (x1 - x0) * pw

    def py(y):
        v = math.log10(y) if fig.log_y else y
        return TOP + ph - (v - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{LEFT + pw / 2:.2f}" y="22" text-anchor="middle" font-size="14">{escape(fig.title)}</text>',
        f'<line x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}" stroke="black"/>',
        f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        X = px(t)
        out.append(f'<line x1="{_num(X)}" y1="{TOP + ph}" x2="{_num(X)}" y2="{TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{_num(X)}" y="{TOP + ph + 18}" text-anchor="middle">{_label(t)}</text>')
    if fig.log_y:
        yt = [10.0 ** e for e in range(int(y0), int(y1) + 1)]
    else:
        yt = _ticks(y0, y1)
    for t in yt:
        Y = py(t)
        text = f"1e{int(round(math.log10(t)))}" if fig.log_y else _label(t)
        out.append(f'<line x1="{LEFT - 5}" y1="{_num(Y)}" x2="{LEFT}" y2="{_num(Y)}" stroke="black"/>')
        out.append(f'<line x1="{LEFT}" y1="{_num(Y)}" x2="{LEFT + pw}" y2="{_num(Y)}" stroke="#dddddd"/>')
        out.append(f'<text x="{LEFT - 8}" y="{_num(Y + 4)}" text-anchor="end">{text}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.2f}" y="{HEIGHT - 12}" text-anchor="middle">{escape(fig.xlabel)}</text>')
    out.append(f'<text x="16" y="{TOP + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {TOP + ph / 2:.2f})">{escape(fig.ylabel)}'
               f'{" (log scale)" if fig.log_y else ""}</text>')
    for i, s in enumerate(fig.series):
        color = PALETTE[i % len(PALETTE)]
        keep = np.isfinite(s.x) & np.isfinite(s.y) & ((s.y > 0) if fig.log_y else True)
        pts = " ".join(f"{_num(px(a))},{_num(py(b))}" for a, b in zip(s.x[keep], s.y[keep]))
        out.append(f'<polyline class="series" data-label="{escape(s.label)}" fill="none" '
                   f'stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = TOP + 10 + 18 * i
        out.append(f'<line x1="{WIDTH - RIGHT + 15}" y1="{ly}" x2="{WIDTH - RIGHT + 40}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{WIDTH - RIGHT + 46}" y="{ly + 4}">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _csv_x(v: float) -> str:
    v = float(v)
    return str(int(v)) if v.is_integer() and abs(v) < 2 ** 53 else repr(v)


def figure_csv(fig: Figure) -> str:
    lines = [",".join(fig.csv_header)]
    for s in fig.series:
        for a, b in zip(s.x, s.y):
            lines.append(f"{s.label},{_csv_x(a)},{float(b)!r}")
    return "\n".join(lines) + "\n"


def emit_plots(data, kind: str, out: str | Path) -> Path:
    """Write ``out`` as an SVG plot of ``data`` and the plotted values next to it as CSV.

    Returns the SVG path. Raises ``ValueError`` for an unknown ``kind`` or
    empty data.
    """
    fig = build_figure(data, kind)
    out = Path(out)
    if out.suffix != ".svg":
        out = out.with_suffix(".svg")
    svg = render_svg(fig)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(svg)
    out.with_suffix(".csv").write_text(figure_csv(fig))
    return out
