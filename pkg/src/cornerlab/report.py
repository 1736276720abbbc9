"""CSV tables, SVG log-log plots and plain-text summaries."""
from __future__ import annotations

import math
import os

import numpy as np


def fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


def write_csv(path, header, names, rows):
    """Comma separated table; ``header`` lines are written as ``#`` comments."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        fh.write(",".join(names) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) if not isinstance(v, str) else v for v in row) + "\n")
    return path


def read_csv(path):
    """Column names and float rows of a table written by :func:`write_csv`."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    names = lines[0].split(",")
    rows = [[float(v) for v in ln.split(",")] for ln in lines[1:]]
    return names, rows


def svg_loglog(path, x, y, title, fit=None, predicted=None, xlabel="eps", ylabel="value"):
    """Log-log scatter with the fitted line and a guide of the predicted slope."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    W, H, m = 480, 360, 60
    lx, ly = np.log10(x), np.log10(y)
    x0, x1 = lx.min(), lx.max()
    y0, y1 = ly.min(), ly.max()
    if x1 - x0 < 1e-12:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 - y0 < 1e-12:
        y0, y1 = y0 - 0.5, y1 + 0.5
    padx, pady = 0.05 * (x1 - x0), 0.1 * (y1 - y0)
    x0, x1, y0, y1 = x0 - padx, x1 + padx, y0 - pady, y1 + pady

    def px(v):
        return m + (v - x0) / (x1 - x0) * (W - 2 * m)

    def py(v):
        return H - m - (v - y0) / (y1 - y0) * (H - 2 * m)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
           f'font-family="sans-serif" font-size="12">',
           f'<rect width="{W}" height="{H}" fill="white"/>',
           f'<line x1="{m}" y1="{H - m}" x2="{W - m}" y2="{H - m}" stroke="black"/>',
           f'<line x1="{m}" y1="{m}" x2="{m}" y2="{H - m}" stroke="black"/>',
           f'<text x="{W / 2}" y="{m / 2}" text-anchor="middle">{_esc(title)}</text>',
           f'<text x="{W / 2}" y="{H - m / 4}" text-anchor="middle">log10 {_esc(xlabel)}</text>',
           f'<text x="{m / 4}" y="{H / 2}" text-anchor="middle" '
           f'transform="rotate(-90 {m / 4} {H / 2})">log10 {_esc(ylabel)}</text>']
    for k in range(5):
        tx = x0 + (x1 - x0) * k / 4
        ty = y0 + (y1 - y0) * k / 4
        out.append(f'<text x="{px(tx):.1f}" y="{H - m + 16}" text-anchor="middle">{tx:.2f}</text>')
        out.append(f'<text x="{m - 6}" y="{py(ty) + 4:.1f}" text-anchor="end">{ty:.2f}</text>')
    for a, b in zip(lx, ly):
        out.append(f'<circle cx="{px(a):.2f}" cy="{py(b):.2f}" r="4" fill="steelblue"/>')
    xs = np.array([lx.min(), lx.max()])
    if fit is not None:
        ys = (fit.slope * xs * math.log(10) + fit.intercept) / math.log(10)
        out.append(_line(px, py, xs, ys, "firebrick", ""))
        out.append(f'<text x="{W - m}" y="{m + 14}" text-anchor="end" fill="firebrick">'
                   f'fit slope {fit.slope:.4f}</text>')
    if predicted is not None and np.isfinite(predicted):
        xm, ym = lx.mean(), ly.mean()
        ys = ym + predicted * (xs - xm)
        out.append(_line(px, py, xs, ys, "gray", ' stroke-dasharray="6,4"'))
        out.append(f'<text x="{W - m}" y="{m + 30}" text-anchor="end" fill="gray">'
                   f'predicted {predicted:.4f}</text>')
    out.append("</svg>")
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")
    return path


def _line(px, py, xs, ys, color, extra):
    return (f'<line x1="{px(xs[0]):.2f}" y1="{py(ys[0]):.2f}" x2="{px(xs[1]):.2f}" '
            f'y2="{py(ys[1]):.2f}" stroke="{color}" stroke-width="1.5"{extra}/>')


def _esc(s):
    return str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def fit_line(name, fit, tol=None):
    status = ""
    if tol is not None:
        status = "  PASS" if fit.deviation <= tol else "  FAIL"
    return (f"{name}: slope {fit.slope:.6f}  predicted {fit.predicted:.6f}  "
            f"|dev| {fit.deviation:.6f}  R2 {fit.r2:.6f}{status}")
