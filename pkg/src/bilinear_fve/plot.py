"""Self-contained SVG log-log convergence plot."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

COLORS = {"e_S": "#d62728", "e_L2": "#1f77b4", "e_H1": "#2ca02c", "e_close": "#9467bd", "e_inf": "#8c564b"}
W, H = 640, 480
ML, MR, MT, MB = 70, 130, 20, 50


def convergence_svg(report, columns=("e_S", "e_L2", "e_H1", "e_close")) -> str:
    hs = [lv.h for lv in report.levels]
    series = {c: [(h, getattr(lv, c)) for h, lv in zip(hs, report.levels)
                  if getattr(lv, c) is not None and getattr(lv, c) > 0] for c in columns}
    pts = [v for s in series.values() for _, v in s]
    if not pts:
        raise ValueError("nothing to plot")
    lx0, lx1 = math.log10(min(hs)), math.log10(max(hs))
    ly0, ly1 = math.log10(min(pts)), math.log10(max(pts))
    if lx1 == lx0:
        lx0, lx1 = lx0 - 0.5, lx1 + 0.5
    if ly1 == ly0:
        ly0, ly1 = ly0 - 0.5, ly1 + 0.5
    pad_x, pad_y = 0.05 * (lx1 - lx0), 0.05 * (ly1 - ly0)
    lx0, lx1, ly0, ly1 = lx0 - pad_x, lx1 + pad_x, ly0 - pad_y, ly1 + pad_y

    def px(h):
        return ML + (math.log10(h) - lx0) / (lx1 - lx0) * (W - ML - MR)

    def py(e):
        return H - MB - (math.log10(e) - ly0) / (ly1 - ly0) * (H - MT - MB)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
           f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
           f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
           f'<rect x="{ML}" y="{MT}" width="{W - ML - MR}" height="{H - MT - MB}" '
           f'fill="none" stroke="black"/>']
    for k in range(math.ceil(ly0), math.floor(ly1) + 1):
        y = py(10.0**k)
        out.append(f'<line x1="{ML}" y1="{y:.1f}" x2="{W - MR}" y2="{y:.1f}" stroke="#ddd"/>')
        out.append(f'<text x="{ML - 6}" y="{y + 4:.1f}" text-anchor="end">1e{k}</text>')
    for h in hs:
        x = px(h)
        out.append(f'<text x="{x:.1f}" y="{H - MB + 16}" text-anchor="middle">{h:.3g}</text>')
    out.append(f'<text x="{(ML + W - MR) / 2}" y="{H - 12}" text-anchor="middle">h</text>')

    # slope-2 reference anchored at the coarsest e_S (or first available) point
    anchor = next((s[0] for s in series.values() if s), None)
    if anchor is not None:
        h0, e0 = anchor
        h1 = min(hs)
        e1 = e0 * (h1 / h0) ** 2
        out.append(f'<line x1="{px(h0):.1f}" y1="{py(e0 * 1.5):.1f}" x2="{px(h1):.1f}" '
                   f'y2="{py(e1 * 1.5):.1f}" stroke="gray" stroke-dasharray="6,4"/>')

    for i, (col, s) in enumerate(series.items()):
        color = COLORS.get(col, "black")
        if len(s) > 1:
            path = " ".join(f"{px(h):.1f},{py(e):.1f}" for h, e in s)
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="2"/>')
        for h, e in s:
            out.append(f'<circle cx="{px(h):.1f}" cy="{py(e):.1f}" r="3" fill="{color}"/>')
        ly = MT + 20 + 18 * i
        out.append(f'<line x1="{W - MR + 10}" y1="{ly}" x2="{W - MR + 30}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{W - MR + 36}" y="{ly + 4}">{escape(col)}</text>')
    ly = MT + 20 + 18 * len(series)
    out.append(f'<line x1="{W - MR + 10}" y1="{ly}" x2="{W - MR + 30}" y2="{ly}" '
               f'stroke="gray" stroke-dasharray="6,4"/>')
    out.append(f'<text x="{W - MR + 36}" y="{ly + 4}">slope 2</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
