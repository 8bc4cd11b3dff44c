"""
File emitters: CSV and JSON for report rows, SVG line plots for curves.
"""
import json
import logging
import math
import os
from dataclasses import asdict, is_dataclass
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union
from xml.sax.saxutils import escape

import numpy as np
import pandas as pd

from ..core.errors import ConfigError, EmitError
from .experiment import Curves, ErrorReportRow

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json", "svg")
ERROR_COLUMNS = ["n", "gm_l1", "mk_l1", "gm_sup", "mk_sup"]
FLOAT_FORMAT = "%.6f"

WIDTH, HEIGHT = 960, 600
MARGIN = {"left": 80, "right": 200, "top": 50, "bottom": 70}
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"]


def _record(row) -> Dict[str, Any]:
    if hasattr(row, "as_record"):
        return row.as_record()
    if is_dataclass(row):
        return asdict(row)
    if isinstance(row, dict):
        return dict(row)
    raise ConfigError(f"cannot emit rows of type {type(row).__name__}")


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def _json_record(row) -> Dict[str, Any]:
    # wall-clock seconds stay out of files so reruns are byte-identical
    if isinstance(row, ErrorReportRow):
        return {**row.as_record(), "empty_window": row.empty_window}
    return _record(row)


def rows_to_frame(rows: Sequence) -> pd.DataFrame:
    records = [_record(r) for r in rows]
    if not records:
        return pd.DataFrame(columns=ERROR_COLUMNS)
    return pd.DataFrame.from_records(records, columns=list(records[0]))


def render_csv(rows: Sequence) -> str:
    return rows_to_frame(rows).to_csv(index=False, float_format=FLOAT_FORMAT, na_rep="nan", lineterminator="\n")


def render_json(payload) -> str:
    if isinstance(payload, Curves):
        data = curves_to_dict(payload)
    elif hasattr(payload, "to_dict"):
        data = payload.to_dict()
    elif isinstance(payload, (list, tuple)):
        data = [_json_record(r) for r in payload]
    else:
        data = payload
    return json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n"


def curves_to_dict(curves: Curves) -> Dict[str, Any]:
    return {
        "function": curves.function,
        "kernel": curves.kernel,
        "kind": curves.kind,
        "grid": curves.grid,
        "target": curves.target,
        "curves": [{"operator": op, "n": n, "values": v} for (op, n), v in curves.curves.items()],
    }


class _Frame:
    """Maps data coordinates into the plot area of the viewBox."""

    def __init__(self, x: np.ndarray, ys: List[np.ndarray]):
        self.x0, self.x1 = float(np.min(x)), float(np.max(x))
        finite = np.concatenate([y[np.isfinite(y)] for y in ys]) if ys else np.zeros(1)
        lo, hi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
        pad = 0.05 * (hi - lo) if hi > lo else 0.5
        self.y0, self.y1 = lo - pad, hi + pad
        self.left = MARGIN["left"]
        self.right = WIDTH - MARGIN["right"]
        self.top = MARGIN["top"]
        self.bottom = HEIGHT - MARGIN["bottom"]

    def px(self, x):
        span = self.x1 - self.x0 or 1.0
        return self.left + (np.asarray(x) - self.x0) / span * (self.right - self.left)

    def py(self, y):
        return self.bottom - (np.asarray(y) - self.y0) / (self.y1 - self.y0) * (self.bottom - self.top)


def _polyline(frame: _Frame, x, y, color: str, cls: str, extra: str = "", dash: str = "") -> str:
    ok = np.isfinite(y)
    pts = " ".join(f"{px:.2f},{py:.2f}" for px, py in zip(frame.px(x[ok]), frame.py(y[ok])))
    dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
    return (
        f'<polyline class="{cls}"{extra} fill="none" stroke="{color}" stroke-width="1.5"{dash_attr} '
        f'points="{pts}"/>'
    )


def _axes(frame: _Frame, title: str, ylabel: str) -> List[str]:
    out = [
        f'<line x1="{frame.left}" y1="{frame.bottom}" x2="{frame.right}" y2="{frame.bottom}" stroke="black"/>',
        f'<line x1="{frame.left}" y1="{frame.top}" x2="{frame.left}" y2="{frame.bottom}" stroke="black"/>',
    ]
    for t in np.linspace(frame.x0, frame.x1, 6):
        x = float(frame.px(t))
        out.append(f'<line x1="{x:.2f}" y1="{frame.bottom}" x2="{x:.2f}" y2="{frame.bottom + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{frame.bottom + 20}" text-anchor="middle" font-size="12">{t:.2f}</text>')
    for t in np.linspace(frame.y0, frame.y1, 6):
        y = float(frame.py(t))
        out.append(f'<line x1="{frame.left - 5}" y1="{y:.2f}" x2="{frame.left}" y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{frame.left - 8}" y="{y + 4:.2f}" text-anchor="end" font-size="12">{t:.3f}</text>')
    mid_x = (frame.left + frame.right) / 2
    mid_y = (frame.top + frame.bottom) / 2
    out.append(f'<text x="{mid_x:.1f}" y="{HEIGHT - 20}" text-anchor="middle" font-size="14">z</text>')
    out.append(
        f'<text x="20" y="{mid_y:.1f}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 20 {mid_y:.1f})">{escape(ylabel)}</text>'
    )
    out.append(f'<text x="{mid_x:.1f}" y="30" text-anchor="middle" font-size="16">{escape(title)}</text>')
    return out


def render_svg(curves: Curves) -> str:
    """Target as a solid black polyline, one coloured polyline per (operator, n)."""
    x = np.asarray(curves.grid, dtype=float)
    series = list(curves.curves.items())
    ys = [np.asarray(v, dtype=float) for _, v in series]
    if curves.target is not None:
        ys.append(np.asarray(curves.target, dtype=float))
    frame = _Frame(x, ys)

    ns = sorted({n for op, n in curves.curves})
    what = "error" if curves.kind == "error" else "approximation"
    title = f"{curves.function}: {what}, {curves.kernel} kernel, n = {', '.join(str(n) for n in ns)}"
    ylabel = "|F - Op(F)|" if curves.kind == "error" else "value"

    body = _axes(frame, title, ylabel)
    legend = []
    if curves.target is not None:
        body.append(_polyline(frame, x, np.asarray(curves.target, dtype=float), "#000000", "target"))
        legend.append(("#000000", "", "target"))
    for i, ((op, n), values) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        dash = "6,3" if op == "mk" else ""
        extra = f' data-operator="{op}" data-n="{n}"'
        body.append(_polyline(frame, x, np.asarray(values, dtype=float), color, "curve", extra, dash))
        legend.append((color, dash, f"{op} n={n}"))

    lx = WIDTH - MARGIN["right"] + 20
    for i, (color, dash, label) in enumerate(legend):
        y = MARGIN["top"] + 20 * i + 10
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        body.append(f'<line x1="{lx}" y1="{y}" x2="{lx + 25}" y2="{y}" stroke="{color}" stroke-width="2"{dash_attr}/>')
        body.append(f'<text x="{lx + 32}" y="{y + 4}" font-size="12">{escape(label)}</text>')

    head = f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">'
    bg = f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>'
    return "\n".join([head, bg, *body, "</svg>"]) + "\n"


def render(payload, fmt: str) -> str:
    if fmt not in FORMATS:
        raise ConfigError(f"Unsupported output format: {fmt!r} (expected csv, json or svg)")
    if fmt == "svg":
        if not isinstance(payload, Curves):
            raise ConfigError("svg output needs curve data (use the approx subcommand)")
        return render_svg(payload)
    if fmt == "json":
        return render_json(payload)
    if isinstance(payload, Curves):
        frame = pd.DataFrame({"z": payload.grid})
        if payload.target is not None:
            frame["target"] = payload.target
        for (op, n), values in payload.curves.items():
            frame[f"{op}_{n}"] = values
        return frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    if hasattr(payload, "to_frame"):
        return payload.to_frame().to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return render_csv(payload)


def emit(report: Union[Sequence[ErrorReportRow], Curves, Any], fmt: str, path) -> Path:
    """Render and write; I/O failures surface as EmitError carrying the path."""
    text = render(report, fmt)
    path = Path(path)
    try:
        if path.parent and str(path.parent) not in ("", "."):
            os.makedirs(path.parent, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    except OSError as exc:
        raise EmitError(path, exc) from exc
    logger.info("wrote %s (%s)", path, fmt)
    return path
