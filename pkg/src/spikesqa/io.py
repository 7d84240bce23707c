"""Result files: canonical JSON, self-describing CSV and a small SVG plot."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from pathlib import Path

import numpy as np

from . import __version__

CODE_VERSION = f"spikesqa {__version__}"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        obj = float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def canonical_json(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, separators=(",", ":"))


def fingerprint(params: dict) -> str:
    """SHA-256 of the canonical JSON encoding of ``params``."""
    return hashlib.sha256(canonical_json(params).encode()).hexdigest()


def write_json(path, payload: dict, params: dict) -> Path:
    doc = {"code_version": CODE_VERSION, "params": _plain(params), **_plain(payload)}
    path = Path(path)
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return path


def write_csv(path, header, rows, params: dict) -> Path:
    """CSV whose leading ``#`` lines carry the code version and parameters."""
    buf = io.StringIO()
    buf.write(f"# code_version={CODE_VERSION}\n")
    buf.write(f"# params={canonical_json(params)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    path = Path(path)
    path.write_text(buf.getvalue())
    return path


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def read_csv(path) -> list:
    """Rows of a CSV as dicts, skipping ``#`` metadata lines."""
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def write_table(path_stem, fmt: str, header, rows, params: dict) -> Path:
    if fmt == "csv":
        return write_csv(Path(f"{path_stem}.csv"), header, rows, params)
    records = [dict(zip(header, r)) for r in rows]
    return write_json(Path(f"{path_stem}.json"), {"rows": records}, params)


def loglog_svg(xs, ys, slope=None, intercept=None, xlabel="n", ylabel="tau_s", width=480, height=360,
               params=None) -> str:
    """Minimal log-log scatter plot with an optional fitted line.

    With ``params`` the code version and parameters go in a leading XML comment.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    pad = 50
    lx, ly = np.log10(xs), np.log10(ys)
    x0, x1 = math.floor(lx.min()), math.ceil(lx.max())
    y0, y1 = math.floor(ly.min()), math.ceil(ly.max())
    x1 = max(x1, x0 + 1)
    y1 = max(y1, y0 + 1)

    def px(v):
        return pad + (v - x0) / (x1 - x0) * (width - 2 * pad)

    def py(v):
        return height - pad - (v - y0) / (y1 - y0) * (height - 2 * pad)

    out = []
    if params is not None:
        meta = canonical_json(params).replace("--", "- -")
        out.append(f"<!-- code_version={CODE_VERSION} params={meta} -->")
    out += [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" '
        'fill="none" stroke="black"/>',
    ]
    for d in range(x0, x1 + 1):
        out.append(f'<text x="{px(d):.1f}" y="{height - pad + 18}" font-size="11" '
                   f'text-anchor="middle">1e{d}</text>')
    for d in range(y0, y1 + 1):
        out.append(f'<text x="{pad - 6}" y="{py(d) + 4:.1f}" font-size="11" '
                   f'text-anchor="end">1e{d}</text>')
    out.append(f'<text x="{width / 2}" y="{height - 10}" font-size="12" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="14" y="{height / 2}" font-size="12" text-anchor="middle" '
               f'transform="rotate(-90 14 {height / 2})">{ylabel}</text>')
    if slope is not None and intercept is not None and math.isfinite(slope):
        a, b = lx.min(), lx.max()
        ya = (slope * a * math.log(10) + intercept) / math.log(10)
        yb = (slope * b * math.log(10) + intercept) / math.log(10)
        out.append(f'<line x1="{px(a):.1f}" y1="{py(ya):.1f}" x2="{px(b):.1f}" y2="{py(yb):.1f}" '
                   'stroke="steelblue"/>')
        out.append(f'<text x="{pad + 8}" y="{pad + 16}" font-size="12">z = {slope:.3f}</text>')
    for a, b in zip(lx, ly):
        out.append(f'<circle cx="{px(a):.1f}" cy="{py(b):.1f}" r="3.5" fill="black"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
