"""Self-contained SVG charts of sweep aggregates (no plotting library needed)."""

from __future__ import annotations

import math
from pathlib import Path
from xml.sax.saxutils import escape

from .evaluation import AggregateRow

WIDTH, HEIGHT = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 80, 150, 40, 60
PALETTE = ("#1f5fa8", "#b8327a", "#6a3fa0", "#2a8f5a", "#c07a12", "#555555")


def _ticks_linear(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def _fmt(v: float) -> str:
    return f"{v:.3g}"


def line_chart(rows: list[AggregateRow], metric: str = "mse", title: str = "") -> str:
    """Mean ``metric`` against budget with a one-standard-error band per method.

    ``metric="mse"`` uses a log-scaled y axis, ``metric="prec"`` a linear one.
    """
    if metric not in ("mse", "prec"):
        raise ValueError(f"metric must be 'mse' or 'prec', got {metric!r}")
    log_y = metric == "mse"
    methods = sorted({r.method for r in rows})
    series = {}
    for m in methods:
        pts = sorted((r for r in rows if r.method == m), key=lambda r: r.budget)
        mean = [getattr(r, f"{metric}_mean") for r in pts]
        se = [getattr(r, f"{metric}_se") for r in pts]
        se = [0.0 if math.isnan(s) else s for s in se]
        series[m] = ([r.budget for r in pts], mean, se)

    xs = [x for b, _, _ in series.values() for x in b] or [0, 1]
    x_lo, x_hi = min(xs), max(xs)
    if x_hi == x_lo:
        x_hi = x_lo + 1
    lows = [m - s for _, mean, se in series.values() for m, s in zip(mean, se)]
    highs = [m + s for _, mean, se in series.values() for m, s in zip(mean, se)]
    if log_y:
        positive = [v for v in lows + highs if v > 0] or [1.0]
        floor = min(positive) / 10
        y_lo, y_hi = math.log10(floor), math.log10(max(positive))
        if y_hi - y_lo < 1:
            y_hi = y_lo + 1

        def ty(v):
            return math.log10(max(v, floor))
    else:
        y_lo, y_hi = min(0.0, min(lows, default=0.0)), max(1.0, max(highs, default=1.0))

        def ty(v):
            return v

    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(x):
        return LEFT + (x - x_lo) / (x_hi - x_lo) * pw

    def py(v):
        return TOP + ph - (ty(v) - y_lo) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line class="axis" x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}" stroke="black"/>',
        f'<line class="axis" x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}" stroke="black"/>',
        f'<text class="xlabel" x="{LEFT + pw / 2:.1f}" y="{HEIGHT - 15}" text-anchor="middle">budget (oracle calls)</text>',
        f'<text class="ylabel" x="18" y="{TOP + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {TOP + ph / 2:.1f})">'
        f'{"mean MSE (log scale)" if log_y else "mean Prec@10"}</text>',
    ]
    for x in sorted(set(xs)):
        out.append(
            f'<text x="{px(x):.1f}" y="{TOP + ph + 18}" text-anchor="middle">{x}</text>'
        )
    if log_y:
        yt = [10.0**e for e in range(math.ceil(y_lo), math.floor(y_hi) + 1)]
    else:
        yt = _ticks_linear(y_lo, y_hi)
    for v in yt:
        out.append(
            f'<text x="{LEFT - 6}" y="{py(v) + 4:.1f}" text-anchor="end">{_fmt(v)}</text>'
            f'<line x1="{LEFT - 3}" y1="{py(v):.1f}" x2="{LEFT}" y2="{py(v):.1f}" stroke="black"/>'
        )
    for i, (m, (bx, mean, se)) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        upper = [f"{px(x):.1f},{py(v + s):.1f}" for x, v, s in zip(bx, mean, se)]
        lower = [f"{px(x):.1f},{py(v - s):.1f}" for x, v, s in zip(bx, mean, se)]
        out.append(
            f'<polygon class="band" points="{" ".join(upper + lower[::-1])}" '
            f'fill="{color}" fill-opacity="0.2" stroke="none"/>'
        )
        d = " ".join(
            f"{'M' if j == 0 else 'L'}{px(x):.1f},{py(v):.1f}" for j, (x, v) in enumerate(zip(bx, mean))
        )
        out.append(
            f'<path class="series" data-method="{escape(m)}" d="{d}" fill="none" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        ly = TOP + 16 * i + 8
        out.append(
            f'<line x1="{WIDTH - RIGHT + 12}" y1="{ly}" x2="{WIDTH - RIGHT + 32}" y2="{ly}" '
            f'stroke="{color}" stroke-width="2"/>'
            f'<text x="{WIDTH - RIGHT + 38}" y="{ly + 4}">{escape(m)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_sweep_charts(rows: list[AggregateRow], outdir) -> list[Path]:
    """One MSE chart and one Prec@10 chart per (kind, order)."""
    outdir = Path(outdir)
    written = []
    for kind, order in sorted({(r.kind, r.order) for r in rows}):
        sub = [r for r in rows if r.kind == kind and r.order == order]
        for metric in ("mse", "prec"):
            path = outdir / f"{metric}_{kind.lower()}_k{order}.svg"
            label = "MSE" if metric == "mse" else "Prec@10"
            path.write_text(line_chart(sub, metric, f"{kind} order {order}: {label}"), encoding="utf-8")
            written.append(path)
    return written
