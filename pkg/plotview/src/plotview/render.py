"""Deterministic scene rendering.

A scene file describes a finite lattice, the primal interface edges of a
two-replica configuration, its dual-lattice domain walls, optional rungs,
box overlays, and text annotations.  The SVG backend writes every element
itself so output bytes depend only on the input scene: path coordinates are
the scene's own data coordinates (a group transform handles scaling and the
y-flip), which also makes the drawn geometry machine-recoverable.

Conventions follow the usual figures for this material: interface edges are
thick solid segments, domain walls are dotted dual polylines (tethered ones
darker), rungs are highlighted paths between walls.
"""

from __future__ import annotations

import json
from importlib.resources import files as resource_files

from jsonschema import Draft202012Validator

SCALE = 40.0          # pixels per lattice unit
MARGIN = 1.2          # lattice units around the drawing
ANNOTATION_SPACE = 2.0

STYLE = {
    "lattice": 'stroke="#c8c8c8" stroke-width="0.045" fill="none"',
    "site": 'fill="#b0b0b0"',
    "interface": 'stroke="#1a1a1a" stroke-width="0.14" fill="none" stroke-linecap="round"',
    "wall": 'stroke="#4466bb" stroke-width="0.08" fill="none" stroke-dasharray="0.18,0.14"',
    "wall_tethered": 'stroke="#223377" stroke-width="0.09" fill="none" '
                     'stroke-dasharray="0.18,0.14"',
    "rung": 'stroke="#cc8844" stroke-width="0.09" fill="none" stroke-linecap="round"',
    "rung_highlight": 'stroke="#cc3333" stroke-width="0.12" fill="none" '
                      'stroke-linecap="round"',
    "box": 'stroke="#559955" stroke-width="0.05" fill="none" stroke-dasharray="0.3,0.2"',
}


class SceneError(ValueError):
    """Scene fails validation; carries a JSON-pointer-ish location."""

    def __init__(self, message, pointer="$"):
        super().__init__(message)
        self.pointer = pointer


def load_schema() -> dict:
    return json.loads(resource_files("plotview").joinpath("scene.schema.json").read_text())


def validate_scene(scene: dict):
    """Schema validation plus the geometric consistency the schema cannot see."""
    validator = Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(scene), key=lambda e: e.json_path)
    if errors:
        first = errors[0]
        raise SceneError(first.message, first.json_path)

    verts = [tuple(v) for v in scene["lattice"]["vertices"]]
    n = len(verts)
    for i, (u, v) in enumerate(scene["lattice"]["edges"]):
        if not (0 <= u < n and 0 <= v < n):
            raise SceneError("edge endpoint out of range", f"$.lattice.edges[{i}]")
    interface = set()
    for i, (u, v) in enumerate(scene["interface_edges"]):
        if not (0 <= u < n and 0 <= v < n):
            raise SceneError("interface endpoint out of range",
                             f"$.interface_edges[{i}]")
        interface.add(frozenset((verts[u], verts[v])))
    for wi, wall in enumerate(scene["walls"]):
        for ei, ((x1, y1), (x2, y2)) in enumerate(wall["dual_edges"]):
            mx, my = (x1 + x2) / 2.0, (y1 + y2) / 2.0
            if x1 == x2:
                primal = frozenset(((mx - 0.5, my), (mx + 0.5, my)))
            elif y1 == y2:
                primal = frozenset(((mx, my - 0.5), (mx, my + 0.5)))
            else:
                raise SceneError("dual edge is not axis-aligned",
                                 f"$.walls[{wi}].dual_edges[{ei}]")
            if primal not in interface:
                raise SceneError("dual edge does not cross an interface edge",
                                 f"$.walls[{wi}].dual_edges[{ei}]")


def _fmt(v: float) -> str:
    return f"{v:.10g}"


def _bounds(scene: dict):
    xs = [v[0] for v in scene["lattice"]["vertices"]]
    ys = [v[1] for v in scene["lattice"]["vertices"]]
    for wall in scene["walls"]:
        for (x1, y1), (x2, y2) in wall["dual_edges"]:
            xs += [x1, x2]
            ys += [y1, y2]
    for note in scene.get("annotations", []):
        xs.append(note["xy"][0])
        ys.append(note["xy"][1])
    return min(xs), min(ys), max(xs), max(ys)


def render_svg(scene: dict) -> str:
    """Byte-stable SVG for a validated scene."""
    validate_scene(scene)
    verts = [tuple(v) for v in scene["lattice"]["vertices"]]
    xmin, ymin, xmax, ymax = _bounds(scene)
    width = (xmax - xmin + 2 * MARGIN) * SCALE
    height = (ymax - ymin + 2 * MARGIN) * SCALE
    tx = MARGIN * SCALE - xmin * SCALE
    ty = MARGIN * SCALE + ymax * SCALE

    def px(x, y):
        return tx + SCALE * x, ty - SCALE * y

    out = []
    out.append('<?xml version="1.0" encoding="UTF-8"?>')
    out.append(f'<svg xmlns="http://www.w3.org/2000/svg" '
               f'width="{_fmt(width)}" height="{_fmt(height)}" '
               f'viewBox="0 0 {_fmt(width)} {_fmt(height)}">')
    out.append('<rect width="100%" height="100%" fill="#ffffff"/>')
    # data-coordinate group: scale by SCALE, flip y
    out.append(f'<g transform="translate({_fmt(tx)},{_fmt(ty)}) '
               f'scale({_fmt(SCALE)},-{_fmt(SCALE)})">')

    segs = []
    for u, v in scene["lattice"]["edges"]:
        (x1, y1), (x2, y2) = verts[u], verts[v]
        segs.append(f"M {_fmt(x1)} {_fmt(y1)} L {_fmt(x2)} {_fmt(y2)}")
    if segs:
        out.append(f'<path class="lattice" {STYLE["lattice"]} d="{" ".join(segs)}"/>')
    for x, y in verts:
        out.append(f'<circle class="site" {STYLE["site"]} cx="{_fmt(x)}" '
                   f'cy="{_fmt(y)}" r="0.07"/>')

    iface = []
    for u, v in scene["interface_edges"]:
        (x1, y1), (x2, y2) = verts[u], verts[v]
        iface.append(f"M {_fmt(x1)} {_fmt(y1)} L {_fmt(x2)} {_fmt(y2)}")
    if iface:
        out.append(f'<path class="interface" {STYLE["interface"]} d="{" ".join(iface)}"/>')

    for wall in scene["walls"]:
        style = STYLE["wall_tethered"] if wall["tethered"] else STYLE["wall"]
        cls = "wall tethered" if wall["tethered"] else "wall"
        for (x1, y1), (x2, y2) in wall["dual_edges"]:
            out.append(f'<path class="{cls}" {style} d="M {_fmt(x1)} {_fmt(y1)} '
                       f'L {_fmt(x2)} {_fmt(y2)}"/>')

    for rung in scene.get("rungs", []):
        pts = rung["dual_vertices"]
        d = f"M {_fmt(pts[0][0])} {_fmt(pts[0][1])} " + " ".join(
            f"L {_fmt(x)} {_fmt(y)}" for x, y in pts[1:])
        if rung.get("highlight"):
            out.append(f'<path class="rung highlight" {STYLE["rung_highlight"]} d="{d}"/>')
        else:
            out.append(f'<path class="rung" {STYLE["rung"]} d="{d}"/>')

    for box in scene.get("boxes", []):
        x0, y0, x1, y1 = box["rect"]
        out.append(f'<rect class="box" {STYLE["box"]} x="{_fmt(x0)}" y="{_fmt(y0)}" '
                   f'width="{_fmt(x1 - x0)}" height="{_fmt(y1 - y0)}"/>')

    out.append("</g>")

    # text lives outside the flipped group to stay upright
    for box in scene.get("boxes", []):
        x0, y0, x1, y1 = box["rect"]
        bx, by = px(x0, y1)
        out.append(f'<text x="{_fmt(bx)}" y="{_fmt(by - 4)}" font-family="monospace" '
                   f'font-size="11" fill="#559955">{box["label"]}</text>')
    for note in scene.get("annotations", []):
        ax, ay = px(note["xy"][0], note["xy"][1])
        out.append(f'<text x="{_fmt(ax)}" y="{_fmt(ay)}" font-family="monospace" '
                   f'font-size="12" fill="#1a1a1a">{note["text"]}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_png(scene: dict, path: str):
    """Raster rendering of the same scene through matplotlib."""
    validate_scene(scene)
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    verts = [tuple(v) for v in scene["lattice"]["vertices"]]
    xmin, ymin, xmax, ymax = _bounds(scene)
    fig, ax = plt.subplots(figsize=((xmax - xmin + 2) * 0.5 + 1,
                                    (ymax - ymin + 2) * 0.5 + 1))
    for u, v in scene["lattice"]["edges"]:
        (x1, y1), (x2, y2) = verts[u], verts[v]
        ax.plot([x1, x2], [y1, y2], color="#c8c8c8", lw=1, zorder=1)
    ax.scatter([v[0] for v in verts], [v[1] for v in verts], s=6, color="#b0b0b0",
               zorder=2)
    for u, v in scene["interface_edges"]:
        (x1, y1), (x2, y2) = verts[u], verts[v]
        ax.plot([x1, x2], [y1, y2], color="#1a1a1a", lw=3, zorder=3)
    for wall in scene["walls"]:
        color = "#223377" if wall["tethered"] else "#4466bb"
        for (x1, y1), (x2, y2) in wall["dual_edges"]:
            ax.plot([x1, x2], [y1, y2], color=color, lw=1.6, ls=":", zorder=4)
    for rung in scene.get("rungs", []):
        pts = rung["dual_vertices"]
        color = "#cc3333" if rung.get("highlight") else "#cc8844"
        ax.plot([p[0] for p in pts], [p[1] for p in pts], color=color,
                lw=2.4 if rung.get("highlight") else 1.8, zorder=5)
    for box in scene.get("boxes", []):
        x0, y0, x1, y1 = box["rect"]
        ax.add_patch(plt.Rectangle((x0, y0), x1 - x0, y1 - y0, fill=False,
                                   edgecolor="#559955", ls="--", lw=1.2, zorder=6))
        ax.annotate(box["label"], (x0, y1), textcoords="offset points",
                    xytext=(2, 3), fontsize=8, color="#559955")
    for note in scene.get("annotations", []):
        ax.annotate(note["text"], tuple(note["xy"]), fontsize=9, family="monospace")
    ax.set_aspect("equal")
    ax.set_xlim(xmin - MARGIN, xmax + MARGIN)
    ax.set_ylim(ymin - MARGIN, ymax + MARGIN)
    ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)


def render(scene_path: str, out_path: str, fmt: str = "svg"):
    with open(scene_path) as f:
        scene = json.load(f)
    if fmt == "svg":
        svg = render_svg(scene)
        with open(out_path, "w") as f:
            f.write(svg)
    elif fmt == "png":
        render_png(scene, out_path)
    else:
        raise SceneError(f"unknown format {fmt!r}", "$.format")


def recover_wall_edges(svg_text: str) -> set:
    """Exact dual-edge coordinate pairs drawn as walls, parsed back from the SVG."""
    import re
    out = set()
    for m in re.finditer(r'<path class="wall[^"]*"[^>]* d="M ([-0-9.e]+) ([-0-9.e]+) '
                         r'L ([-0-9.e]+) ([-0-9.e]+)"/>', svg_text):
        x1, y1, x2, y2 = (float(g) for g in m.groups())
        out.add(frozenset(((x1, y1), (x2, y2))))
    return out
