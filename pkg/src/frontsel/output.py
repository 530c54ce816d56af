"""Output directory bookkeeping, CSV/JSON writers and a dependency-free SVG line plot."""
from __future__ import annotations

import csv
import json
import math
import time
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

from . import __version__

JSON_SCHEMA_VERSION = "frontsel.output/1"


class OutputDir:
    """Single writer for one run; records every file for the run record."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.manifest: List[str] = []
        self._record_written = False

    def path(self, name: str) -> Path:
        return self.root / name

    def _add(self, name: str) -> Path:
        if name not in self.manifest:
            self.manifest.append(name)
        return self.path(name)

    def write_json(self, name: str, payload: dict) -> Path:
        p = self._add(name)
        body = {"schema": JSON_SCHEMA_VERSION, **payload}
        p.write_text(json.dumps(body, indent=2, sort_keys=True, default=_jsonable) + "\n")
        return p

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
        p = self._add(name)
        with open(p, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(list(header))
            for row in rows:
                wr.writerow([_cell(v) for v in row])
        return p

    def write_svg(self, name: str, **kw) -> Path:
        p = self._add(name)
        p.write_text(line_plot_svg(**kw))
        return p

    def register(self, name: str) -> Path:
        return self._add(name)

    def write_record(self, command: str, cfg_hash: str, started: float, status: str = "ok") -> Path:
        if self._record_written:
            raise RuntimeError("run record already written")
        self._record_written = True
        record = {
            "schema": "frontsel.run_record/1",
            "command": command,
            "config_hash": cfg_hash,
            "version": __version__,
            "wall_time_s": round(time.perf_counter() - started, 3),
            "finished_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            "status": status,
            "manifest": [m for m in self.manifest if self.path(m).exists()],
        }
        p = self.path("run_record.json")
        p.write_text(json.dumps(record, indent=2) + "\n")
        return p


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _jsonable(o):
    try:
        import numpy as np

        if isinstance(o, np.generic):
            return o.item()
        if isinstance(o, np.ndarray):
            return o.tolist()
    except ImportError:  # pragma: no cover
        pass
    if isinstance(o, tuple):
        return list(o)
    return str(o)


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def line_plot_svg(series: Sequence[Tuple[str, Sequence[float], Sequence[float]]],
                  hlines: Sequence[Tuple[float, str]] = (), title: str = "",
                  xlabel: str = "", ylabel: str = "", width: int = 640, height: int = 400,
                  ylim: Optional[Tuple[float, float]] = None) -> str:
    """Polyline plot of ``(label, xs, ys)`` series with optional horizontal reference lines."""
    xs_all = [x for _, xs, ys in series for x, y in zip(xs, ys) if math.isfinite(x) and math.isfinite(y)]
    ys_all = [y for _, xs, ys in series for x, y in zip(xs, ys) if math.isfinite(x) and math.isfinite(y)]
    ys_all += [y for y, _ in hlines]
    if not xs_all:
        xs_all, ys_all = [0.0, 1.0], [0.0, 1.0]
    x0, x1 = min(xs_all), max(xs_all)
    y0, y1 = ylim if ylim else (min(ys_all), max(ys_all))
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    ml, mr, mt, mb = 60, 20, 30, 40
    pw, ph = width - ml - mr, height - mt - mb

    def px(x):
        return ml + (x - x0) / (x1 - x0) * pw

    def py(y):
        return mt + (1.0 - (y - y0) / (y1 - y0)) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
           f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
           f'<text x="{width / 2:.0f}" y="18" text-anchor="middle">{title}</text>',
           f'<text x="{width / 2:.0f}" y="{height - 8}" text-anchor="middle">{xlabel}</text>',
           f'<text x="14" y="{height / 2:.0f}" transform="rotate(-90 14 {height / 2:.0f})" '
           f'text-anchor="middle">{ylabel}</text>',
           f'<text x="{ml - 4}" y="{mt + ph}" text-anchor="end" font-size="10">{y0:.4g}</text>',
           f'<text x="{ml - 4}" y="{mt + 10}" text-anchor="end" font-size="10">{y1:.4g}</text>',
           f'<text x="{ml}" y="{mt + ph + 14}" font-size="10">{x0:.4g}</text>',
           f'<text x="{ml + pw}" y="{mt + ph + 14}" text-anchor="end" font-size="10">{x1:.4g}</text>']
    for y, label in hlines:
        if y0 <= y <= y1:
            out.append(f'<line x1="{ml}" x2="{ml + pw}" y1="{py(y):.2f}" y2="{py(y):.2f}" '
                       f'stroke="orange" stroke-dasharray="4 3"/>')
            out.append(f'<text x="{ml + pw - 4}" y="{py(y) - 4:.2f}" text-anchor="end" '
                       f'font-size="10" fill="orange">{label}</text>')
    for k, (label, xs, ys) in enumerate(series):
        pts = " ".join(f"{px(x):.2f},{py(min(max(y, y0), y1)):.2f}" for x, y in zip(xs, ys)
                       if math.isfinite(x) and math.isfinite(y))
        col = _COLORS[k % len(_COLORS)]
        out.append(f'<polyline fill="none" stroke="{col}" stroke-width="1.5" points="{pts}"/>')
        out.append(f'<text x="{ml + 8}" y="{mt + 14 + 14 * k}" font-size="11" fill="{col}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
