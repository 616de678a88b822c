"""Deterministic CSV / JSON / SVG writers shared by the CLI and fixtures.

All float formatting uses ``repr`` (shortest round-trip), so identical
inputs produce byte-identical files.  The JSON payload carries one clearly
labeled timestamp under provenance; everything else is reproducible.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone

import numpy as np


def format_float(x: float) -> str:
    return repr(float(x))


def write_csv(path, columns: dict, provenance: dict) -> None:
    """Column-oriented CSV with '#'-prefixed provenance comment lines."""
    names = list(columns)
    arrays = [np.asarray(columns[k]) for k in names]
    length = len(arrays[0])
    if any(len(a) != length for a in arrays):
        raise ValueError("CSV columns must share one length")
    lines = [f"# {key}: {value}" for key, value in provenance.items()]
    lines.append(",".join(names))
    for i in range(length):
        lines.append(",".join(_format_cell(a[i]) for a in arrays))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _format_cell(value) -> str:
    if isinstance(value, (str, np.str_)):
        return str(value)
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    x = float(value)
    return "" if np.isnan(x) else format_float(x)


def write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_jsonify)
        fh.write("\n")


def _jsonify(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj)!r}")


def utc_timestamp() -> str:
    return datetime.now(timezone.utc).isoformat()


def write_line_svg(path, x, curves: dict, title: str, fingerprint: str,
                   width: int = 720, height: int = 440) -> None:
    """Static line plot: one polyline per named curve, decimated to <= 4000
    points per curve.  Deterministic byte output for identical inputs."""
    x = np.asarray(x, dtype=float)
    margin = 56
    inner_w, inner_h = width - 2 * margin, height - 2 * margin
    ys = {k: np.asarray(v, dtype=float) for k, v in curves.items()}
    y_all = np.concatenate(list(ys.values()))
    y_lo, y_hi = float(np.min(y_all)), float(np.max(y_all))
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    x_lo, x_hi = float(x[0]), float(x[-1])
    palette = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2")

    def sx(v):
        return margin + (v - x_lo) / (x_hi - x_lo) * inner_w

    def sy(v):
        return height - margin - (v - y_lo) / (y_hi - y_lo) * inner_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f"<!-- fingerprint: {fingerprint} -->",
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{margin}" y="{margin}" width="{inner_w}" height="{inner_h}" '
        'fill="none" stroke="#444" stroke-width="1"/>',
        f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15">{title}</text>',
    ]
    for tick in np.linspace(x_lo, x_hi, 6):
        parts.append(
            f'<text x="{sx(tick):.2f}" y="{height - margin + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{tick:.4g}</text>'
        )
    for tick in np.linspace(y_lo, y_hi, 6):
        parts.append(
            f'<text x="{margin - 6}" y="{sy(tick) + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{tick:.4g}</text>'
        )
    step = max(1, len(x) // 4000)
    for i, (name, y) in enumerate(ys.items()):
        color = palette[i % len(palette)]
        points = " ".join(
            f"{sx(xv):.2f},{sy(yv):.2f}" for xv, yv in zip(x[::step], y[::step])
        )
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{points}"/>'
        )
        parts.append(
            f'<text x="{width - margin - 8}" y="{margin + 16 + 14 * i}" text-anchor="end" '
            f'font-family="sans-serif" font-size="12" fill="{color}">{name}</text>'
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")
