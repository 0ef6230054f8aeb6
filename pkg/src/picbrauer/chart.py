"""Deterministic chart emission for spectral-sequence pages.

Two formats share one cell encoding: a fixed-width text grid that parses back
to a structurally equal page, and an SVG 1.1 subset (rect, circle, line,
path, text).  Glyphs follow the usual legend: circle = Z/2, numbered circle =
p-power torsion, cross = torsion prime to p, square = a free Z_p summand.
Output is byte-identical for structurally identical input.
"""

from __future__ import annotations

from .fgab import FgModule, p_part
from .sseq import Differential, SseqPage, Window

CELL = 56
PAD = 40


def cell_token(module: FgModule):
    """Compact cell encoding: 'F' per free summand, decimal order per torsion."""
    if module.is_trivial():
        return "."
    parts = ["F"] * module.free_rank + [str(d) for d in module.torsion]
    return "+".join(parts)


def parse_cell_token(token, p, precision):
    if token == ".":
        return FgModule.zero(p, precision)
    orders = [0 if part == "F" else int(part) for part in token.split("+")]
    return FgModule.from_orders(p, precision, orders)


def emit_chart(page: SseqPage, fmt="svg", script=None):
    """Render a page; fmt is 'svg' or 'text'.  Pure function of its arguments."""
    if fmt == "text":
        return emit_text(page, script)
    if fmt == "svg":
        return emit_svg(page, script)
    raise ValueError(f"unknown chart format {fmt!r}")


def _stem_range(page):
    lo = page.window.t_min - page.window.s_max
    hi = page.window.t_max
    return lo, hi


def emit_text(page: SseqPage, script=None):
    lo, hi = _stem_range(page)
    header = (
        f"# name={page.name} page={page.r} smax={page.window.s_max} "
        f"tmin={page.window.t_min} tmax={page.window.t_max} p={page.p} N={page.precision}"
    )
    cells = {}
    width = 1
    for s in range(page.window.s_max + 1):
        for x in range(lo, hi + 1):
            t = x + s
            if page.window.contains(s, t):
                tok = cell_token(page.entry(s, t))
            elif page.known_zero(s, t):
                tok = "."
            else:
                tok = "?"
            cells[(s, x)] = tok
            width = max(width, len(tok))
    width = max(width, 4)
    lines = [header]
    for s in range(page.window.s_max, -1, -1):
        row = " ".join(cells[(s, x)].rjust(width) for x in range(lo, hi + 1))
        lines.append(f"s={s:2d} | {row}")
    lines.append("     +-" + "-" * ((width + 1) * (hi - lo + 1)))
    lines.append("       " + " ".join(str(x).rjust(width) for x in range(lo, hi + 1)))
    if script is not None:
        for d in sorted(script.entries, key=lambda e: (e.page, e.source)):
            lines.append(f"# d{d.page}: {d.source} -> {d.target()} [{d.provenance}]")
    return "\n".join(lines) + "\n"


def parse_text_chart(text):
    """Inverse of emit_text up to structural equality (labels are not kept)."""
    lines = [l for l in text.splitlines() if l.strip()]
    head = lines[0]
    if not head.startswith("# name="):
        raise ValueError("missing chart header")
    fields = {}
    for item in head[2:].split():
        k, v = item.split("=", 1)
        fields[k] = v
    window = Window(int(fields["smax"]), int(fields["tmin"]), int(fields["tmax"]))
    p = int(fields["p"])
    precision = int(fields["N"])
    lo = window.t_min - window.s_max
    entries = {}
    for line in lines[1:]:
        if not line.startswith("s="):
            continue
        s_part, row = line.split("|", 1)
        s = int(s_part[2:].strip())
        toks = row.split()
        for i, tok in enumerate(toks):
            if tok in (".", "?"):
                continue
            x = lo + i
            t = x + s
            m = parse_cell_token(tok, p, precision)
            if not m.is_trivial():
                entries[(s, t)] = m
    return SseqPage(
        name=fields["name"],
        r=int(fields["page"]),
        window=window,
        p=p,
        precision=precision,
        entries=entries,
    )


def _glyphs_for(module: FgModule, p):
    """Glyph list for one module: ('free'|'z2'|'ppow'|'tame', label)."""
    out = [("free", "")] * module.free_rank
    for d in module.torsion:
        if d == 2:
            out.append(("z2", ""))
        elif p_part(d, p) == d:
            out.append(("ppow", str(d)))
        else:
            out.append(("tame", "" if d == 2 else str(d)))
    return out


def emit_svg(page: SseqPage, script=None):
    lo, hi = _stem_range(page)
    ncols = hi - lo + 1
    nrows = page.window.s_max + 1
    w = PAD * 2 + ncols * CELL
    h = PAD * 2 + nrows * CELL + 20

    def cx(x):
        return PAD + (x - lo) * CELL + CELL // 2

    def cy(s):
        return PAD + (page.window.s_max - s) * CELL + CELL // 2

    parts = []
    parts.append('<?xml version="1.0" encoding="UTF-8"?>')
    parts.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}" font-family="monospace" font-size="11">'
    )
    parts.append(
        f'<text x="{PAD}" y="{PAD - 20}" class="header">'
        f"{page.name} | E_{page.r} | window {page.window.render()} | p={page.p} N={page.precision}</text>"
    )
    # grid
    for i in range(ncols + 1):
        x = PAD + i * CELL
        parts.append(f'<line x1="{x}" y1="{PAD}" x2="{x}" y2="{PAD + nrows * CELL}" stroke="#ddd"/>')
    for j in range(nrows + 1):
        y = PAD + j * CELL
        parts.append(f'<line x1="{PAD}" y1="{y}" x2="{PAD + ncols * CELL}" y2="{y}" stroke="#ddd"/>')
    for x in range(lo, hi + 1):
        parts.append(f'<text x="{cx(x) - 4}" y="{PAD + nrows * CELL + 16}" class="axis">{x}</text>')
    for s in range(nrows):
        parts.append(f'<text x="{PAD - 24}" y="{cy(s) + 4}" class="axis">{s}</text>')
    # glyphs
    for (s, t) in sorted(page.entries):
        x = t - s
        if x < lo or x > hi:
            continue
        glyphs = _glyphs_for(page.entries[(s, t)], page.p)
        n = len(glyphs)
        for i, (kind, label) in enumerate(glyphs):
            gx = cx(x) + (i - (n - 1) / 2) * 14
            gx = int(gx * 2) / 2
            gy = cy(s)
            if kind == "free":
                parts.append(f'<rect class="g-free" x="{gx - 5}" y="{gy - 5}" width="10" height="10" fill="none" stroke="black"/>')
            elif kind == "z2":
                parts.append(f'<circle class="g-z2" cx="{gx}" cy="{gy}" r="5" fill="none" stroke="black"/>')
            elif kind == "ppow":
                parts.append(f'<circle class="g-ppow" cx="{gx}" cy="{gy}" r="7" fill="none" stroke="black"/>')
                parts.append(f'<text x="{gx - 3}" y="{gy + 3}" class="glyph-label" font-size="8">{label}</text>')
            else:
                parts.append(
                    f'<path class="g-tame" d="M {gx - 5} {gy - 5} L {gx + 5} {gy + 5} M {gx - 5} {gy + 5} L {gx + 5} {gy - 5}" stroke="black"/>'
                )
                if label:
                    parts.append(f'<text x="{gx + 6}" y="{gy + 3}" class="glyph-label" font-size="8">{label}</text>')
    # differentials
    if script is not None:
        for d in sorted(script.entries, key=lambda e: (e.page, e.source)):
            s, t = d.source
            s2, t2 = d.target()
            if not (page.window.contains(s, t) and page.window.contains(s2, t2)):
                continue
            parts.append(
                f'<line class="diff" x1="{cx(t - s)}" y1="{cy(s)}" x2="{cx(t2 - s2)}" y2="{cy(s2)}" '
                f'stroke="#c00" stroke-width="1"/>'
            )
    parts.append(
        f'<text x="{PAD}" y="{h - 6}" class="legend">legend: square=Z_{page.p} circle=Z/2 '
        f"numbered circle=Z/{page.p}^k cross=prime-to-{page.p} torsion</text>"
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
