"""SVG drawings of configurations and trees, and the verification report figure.

The SVG text is assembled by hand with fixed float formatting so equal
inputs give byte-identical files.
"""
from __future__ import annotations

from fractions import Fraction

from .geometry import FULL, INF, Configuration, format_ext

SCALE = 200
MARGIN = 20


def _f(x) -> str:
    return f"{float(x):.3f}"


def _svg(width: int, height: int, body: list) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">')
    return "\n".join([head, *body, "</svg>"]) + "\n"


def _text(x, y, s, size=12) -> str:
    return (f'<text x="{_f(x)}" y="{_f(y)}" font-family="monospace" font-size="{size}" '
            f'text-anchor="middle">{s}</text>')


def config_svg(cfg: Configuration) -> str:
    if cfg.d == 2:
        return _config_svg_2(cfg)
    if cfg.d == 1:
        return _config_svg_1(cfg)
    raise ValueError("only d = 1 and d = 2 configurations can be drawn")


def _config_svg_2(cfg: Configuration) -> str:
    full = cfg.target == FULL
    width = 2 * SCALE + 2 * MARGIN
    height = width if full else SCALE + 2 * MARGIN
    ox, oy = MARGIN + SCALE, MARGIN + SCALE

    def pt(c):
        return ox + SCALE * c[0], oy - SCALE * c[1]

    body = []
    if full:
        body.append(f'<circle class="boundary" cx="{_f(ox)}" cy="{_f(oy)}" r="{SCALE}" '
                    'fill="none" stroke="black" stroke-width="2"/>')
    else:
        body.append(_half_path(ox, oy, SCALE, "boundary", 'fill="none" stroke="black" stroke-width="2"'))
    for i, disc in enumerate(cfg.full):
        x, y = pt(disc.c)
        body.append(f'<circle class="full" cx="{_f(x)}" cy="{_f(y)}" r="{_f(SCALE * disc.r)}" '
                    'fill="#cfe2f3" stroke="black"/>')
        body.append(_text(x, y + 4, f"f{i + 1}"))
    for j, disc in enumerate(cfg.half):
        x, _ = pt(tuple(disc.c[:1]) + (Fraction(0),))
        r = SCALE * disc.r
        body.append(_half_path(x, oy, r, "half", 'fill="#f4cccc" stroke="black"'))
        body.append(_text(x, oy - r / 2 + 4, f"h{j + 1}"))
    return _svg(width, height, body)


def _half_path(cx, cy, r, cls, style) -> str:
    return (f'<path class="{cls}" d="M {_f(cx - r)} {_f(cy)} A {_f(r)} {_f(r)} 0 0 1 '
            f'{_f(cx + r)} {_f(cy)} Z" {style}/>')


def _config_svg_1(cfg: Configuration) -> str:
    full = cfg.target == FULL
    width = 2 * SCALE + 2 * MARGIN if full else SCALE + 2 * MARGIN
    height = 80
    ox = MARGIN + (SCALE if full else 0)
    y = 40
    lo = -1 if full else 0
    body = [f'<line class="boundary" x1="{_f(ox + SCALE * lo)}" y1="{y}" x2="{_f(ox + SCALE)}" '
            f'y2="{y}" stroke="black" stroke-width="2"/>']
    if not full:
        body.append(f'<line class="anchor" x1="{_f(ox)}" y1="{y - 10}" x2="{_f(ox)}" '
                    f'y2="{y + 10}" stroke="black" stroke-width="2"/>')
    for i, disc in enumerate(cfg.full):
        a = ox + SCALE * (disc.c[0] - disc.r)
        w = 2 * SCALE * disc.r
        body.append(f'<rect class="full" x="{_f(a)}" y="{y - 8}" width="{_f(w)}" height="16" '
                    'fill="#cfe2f3" stroke="black"/>')
        body.append(_text(a + w / 2, y - 12, f"f{i + 1}"))
    for j, disc in enumerate(cfg.half):
        w = SCALE * disc.r
        body.append(f'<rect class="half" x="{_f(ox)}" y="{y - 8}" width="{_f(w)}" height="16" '
                    'fill="#f4cccc" stroke="black"/>')
        body.append(_text(ox + w / 2, y + 24, f"h{j + 1}"))
    return _svg(width, height, body)


# ---------------------------------------------------------------- trees

def _vertex_text(label) -> str:
    if isinstance(label, Configuration):
        if label.target == FULL:
            return f"E{label.d}({label.n})"
        return f"SC({label.n},{label.m})"
    return str(label)


def tree_svg(t, label_text=_vertex_text) -> str:
    """Root at the top; edges carry their lengths, leaves their positions."""
    from .trees import Edge, Leaf

    xs: dict = {}
    counter = [0]
    rows: list = []

    def layout(item, depth, path):
        rows.append(depth)
        if isinstance(item, Leaf):
            xs[path] = counter[0]
            counter[0] += 1
            return
        node = item
        for j, ch in enumerate(node.children):
            layout(ch if isinstance(ch, Leaf) else ch.node, depth + 1, path + (j,))
        kids = [xs[path + (j,)] for j in range(len(node.children))]
        if kids:
            xs[path] = sum(kids) / len(kids)
        else:
            xs[path] = counter[0]
            counter[0] += 1

    layout(t, 0, ())
    step_x, step_y = 60, 70
    width = max(1, counter[0]) * step_x + 2 * MARGIN
    height = (max(rows) + 1) * step_y + 2 * MARGIN

    def pos(path):
        return MARGIN + step_x / 2 + step_x * xs[path], MARGIN + 20 + step_y * len(path)

    body = []

    def draw(item, path):
        x, y = pos(path)
        if isinstance(item, Leaf):
            body.append(_text(x, y + 4, f"{item.color}{item.pos}"))
            return
        for j, ch in enumerate(item.children):
            cx, cy = pos(path + (j,))
            body.append(f'<line x1="{_f(x)}" y1="{_f(y)}" x2="{_f(cx)}" y2="{_f(cy - 10)}" '
                        'stroke="black"/>')
            if isinstance(ch, Edge):
                body.append(_text((x + cx) / 2 + 10, (y + cy) / 2, format_ext(ch.length), 10))
                draw(ch.node, path + (j,))
            else:
                draw(ch, path + (j,))
        body.append(f'<circle class="vertex" cx="{_f(x)}" cy="{_f(y)}" r="6" fill="black"/>')
        body.append(_text(x, y - 10, label_text(item.label), 10))

    draw(t, ())
    return _svg(int(width), int(height), body)


# ---------------------------------------------------------------- report figure

def report_figure(results: list, path: str):
    """Bar chart of check durations colored by outcome; ``results`` holds
    dicts with keys name, ok and seconds."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    names = [r["name"] for r in results]
    secs = [r["seconds"] for r in results]
    colors = ["#6aa84f" if r["ok"] else "#cc0000" for r in results]
    fig, ax = plt.subplots(figsize=(7, 0.5 * len(results) + 1.5))
    ax.barh(range(len(results)), secs, color=colors)
    ax.set_yticks(range(len(results)))
    ax.set_yticklabels(names)
    ax.invert_yaxis()
    ax.set_xlabel("seconds")
    ax.set_title("verification checks (green: pass, red: fail)")
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None} if path.endswith(".png") else None)
    plt.close(fig)
