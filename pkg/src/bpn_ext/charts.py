"""Adams charts (x = t - s, y = s) rendered as ASCII or SVG.

Both renderers are pure functions of an Ext table.  The window is capped;
anything outside it is counted in a footnote, and odd classes to the right
of the vanishing line are always listed explicitly.
"""
from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from typing import Optional
from xml.sax.saxutils import escape

MAX_COLUMNS = 160
MAX_ROWS = 60


def _collect(entries):
    grid = defaultdict(lambda: [0, 0])   # (x, s) -> [odd dim, even dim]
    for e in entries:
        if not e["dim"]:
            continue
        x = e["t"] - e["s"]
        grid[(x, e["s"])][0 if x % 2 else 1] += e["dim"]
    return grid


def _window(grid, xmin, xmax, smax):
    xs = [x for x, _ in grid] or [0]
    ss = [s for _, s in grid] or [0]
    hi = max(xs) if xmax is None else xmax
    lo = min(xs) if xmin is None else xmin
    if hi - lo + 1 > MAX_COLUMNS:
        lo = hi - MAX_COLUMNS + 1
    top = max(ss) if smax is None else smax
    top = min(top, MAX_ROWS - 1)
    return lo, hi, top


def _footnotes(grid, lo, hi, top, line_x):
    notes = []
    hidden = {k: v for k, v in grid.items() if not (lo <= k[0] <= hi and 0 <= k[1] <= top)}
    if hidden:
        total = sum(a + b for a, b in hidden.values())
        notes.append(f"{total} classes in {len(hidden)} positions lie outside the displayed window")
    if line_x is not None:
        bad = sorted(k for k, v in grid.items() if v[0] and k[0] > line_x)
        for x, s in bad:
            notes.append(f"odd class right of t-s={line_x}: t-s={x}, s={s}")
    return notes


def _on_line(x, s, line_x, epsilon):
    # the line eps*s + x = line_x, i.e. x = line_x - eps*s
    if epsilon is None:
        return x == line_x
    return x == round(line_x - Fraction(epsilon) * s)


def render_ascii(entries, line_x: Optional[int] = None, epsilon=None,
                 xmin=None, xmax=None, smax=None) -> str:
    """Odd classes print as their dimension (or '#' above 9), even ones as '.'."""
    grid = _collect(entries)
    lo, hi, top = _window(grid, xmin, xmax, smax)
    lines = []
    for s in range(top, -1, -1):
        row = []
        for x in range(lo, hi + 1):
            odd, even = grid.get((x, s), (0, 0))
            if odd:
                row.append(str(odd) if odd < 10 else "#")
            elif even:
                row.append(".")
            elif line_x is not None and _on_line(x, s, line_x, epsilon):
                row.append("|" if epsilon is None else "\\")
            else:
                row.append(" ")
        lines.append(f"{s:>3} " + "".join(row).rstrip())
    lines.append("    " + "-" * (hi - lo + 1))
    lines.append(f"    t-s from {lo} to {hi}")
    for note in _footnotes(grid, lo, hi, top, line_x):
        lines.append("note: " + note)
    return "\n".join(lines) + "\n"


def render_svg(entries, line_x: Optional[int] = None, epsilon=None,
               xmin=None, xmax=None, smax=None) -> str:
    grid = _collect(entries)
    lo, hi, top = _window(grid, xmin, xmax, smax)
    cell, margin = 12, 40
    width = (hi - lo + 1) * cell + 2 * margin
    height = (top + 1) * cell + 2 * margin
    notes = _footnotes(grid, lo, hi, top, line_x)
    height += 14 * len(notes)

    def px(x):
        return margin + (x - lo) * cell + cell / 2

    def py(s):
        return margin + (top - s) * cell + cell / 2

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<line x1="{margin}" y1="{py(0) + cell / 2}" x2="{width - margin}" y2="{py(0) + cell / 2}" '
           f'stroke="black"/>']
    for (x, s), (odd, even) in sorted(grid.items()):
        if not (lo <= x <= hi and 0 <= s <= top):
            continue
        colour = "crimson" if odd else "steelblue"
        out.append(f'<circle cx="{px(x)}" cy="{py(s)}" r="{cell / 3:.1f}" fill="{colour}">'
                   f'<title>t-s={x} s={s} dim={odd + even}</title></circle>')
    if line_x is not None:
        if epsilon is None:
            x2, s2 = line_x, top
        else:
            s2 = top
            x2 = float(line_x - Fraction(epsilon) * top)
        out.append(f'<line x1="{px(line_x)}" y1="{py(0)}" x2="{px(x2)}" y2="{py(s2)}" '
                   f'stroke="darkorange" stroke-dasharray="4 2"/>')
    out.append(f'<text x="{margin}" y="{margin / 2}" font-size="11">t-s from {lo} to {hi}, '
               f's from 0 to {top}</text>')
    for i, note in enumerate(notes):
        y = (top + 1) * cell + 2 * margin + 14 * i
        out.append(f'<text x="{margin}" y="{y}" font-size="11">{escape(note)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
