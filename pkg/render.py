"""
Drawings of two-dimensional bodies: a deterministic SVG (ElementTree) and an
interactive plotly figure.

Vertex labels carry the exact rationals; only pixel positions are rounded.

Usage:
    from render import render_svg, write_svg, body_figure

    svg = render_svg(body, title="P2, H, flag (0,1)")
    write_svg(body, "body.svg")
    body_figure(body).write_html("body.html")
"""
from __future__ import annotations

import functools
import xml.etree.ElementTree as ET
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

from errors import DimensionMismatch
from exactgeom import Polytope, QVector, fmt_q

SIZE = 360
MARGIN = 40
FILL = "#cfe3f7"
STROKE = "#1f5f99"

# ---------------------- Geometry ----------------------

def cyclic_vertices(p: Polytope) -> List[QVector]:
    """Vertices of a planar polytope in counter-clockwise order, starting from the lexicographic minimum."""
    if p.ambient_dim != 2:
        raise DimensionMismatch(f"only planar bodies can be drawn, got ambient dimension {p.ambient_dim}")
    pts = sorted(p.vertices)
    if len(pts) < 3:
        return pts
    x0, y0 = pts[0]

    def turn(a: QVector, b: QVector) -> int:
        # a precedes b when b lies to the left of the ray from pts[0] through a
        cross = (a[0] - x0) * (b[1] - y0) - (a[1] - y0) * (b[0] - x0)
        return -1 if cross > 0 else (1 if cross < 0 else 0)

    return [pts[0]] + sorted(pts[1:], key=functools.cmp_to_key(turn))


def _frame(pts: Sequence[QVector]) -> Tuple[Fraction, Fraction, Fraction]:
    """(xmin, ymax, pixels per unit) fitting every point into the drawing area."""
    xs = [v[0] for v in pts] + [Fraction(0)]
    ys = [v[1] for v in pts] + [Fraction(0)]
    span = max(max(xs) - min(xs), max(ys) - min(ys), Fraction(1))
    return min(xs), max(ys), Fraction(SIZE - 2 * MARGIN) / span


def _px(v: QVector, frame: Tuple[Fraction, Fraction, Fraction]) -> Tuple[str, str]:
    xmin, ymax, unit = frame
    x = MARGIN + (v[0] - xmin) * unit
    y = MARGIN + (ymax - v[1]) * unit
    return f"{float(x):.2f}", f"{float(y):.2f}"


def _label(v: QVector) -> str:
    return f"({fmt_q(v[0])}, {fmt_q(v[1])})"

# ---------------------- SVG ----------------------

def render_svg(p: Polytope, title: str = "") -> ET.Element:
    """SVG element of a point, segment or polygon with exact vertex labels."""
    pts = cyclic_vertices(p)
    root = ET.Element("svg", xmlns="http://www.w3.org/2000/svg", version="1.1",
                      width=f"{SIZE}px", height=f"{SIZE}px", viewBox=f"0 0 {SIZE} {SIZE}")
    if title:
        ET.SubElement(root, "title").text = title
    if not pts:
        ET.SubElement(root, "text", x=str(MARGIN), y=str(MARGIN)).text = "empty"
        return root
    frame = _frame(pts)
    axes = ET.SubElement(root, "g", stroke="#999999", attrib={"stroke-width": "1"})
    ox, oy = _px((Fraction(0), Fraction(0)), frame)
    ET.SubElement(axes, "line", x1=ox, y1=oy, x2=str(SIZE - MARGIN / 2), y2=oy)
    ET.SubElement(axes, "line", x1=ox, y1=oy, x2=ox, y2=str(MARGIN / 2))

    body = ET.SubElement(root, "g", fill=FILL, stroke=STROKE, attrib={"stroke-width": "2"})
    coords = [_px(v, frame) for v in pts]
    if len(pts) == 1:
        ET.SubElement(body, "circle", cx=coords[0][0], cy=coords[0][1], r="4")
    elif len(pts) == 2:
        ET.SubElement(body, "line", x1=coords[0][0], y1=coords[0][1], x2=coords[1][0], y2=coords[1][1])
    else:
        d = "M" + " L".join(f"{x} {y}" for x, y in coords) + " Z"
        ET.SubElement(body, "path", d=d)

    labels = ET.SubElement(root, "g", attrib={"font-family": "monospace", "font-size": "11"})
    for v, (x, y) in zip(pts, coords):
        ET.SubElement(labels, "circle", cx=x, cy=y, r="2.5", fill=STROKE)
        ET.SubElement(labels, "text", x=f"{float(x) + 5:.2f}", y=f"{float(y) - 5:.2f}").text = _label(v)
    return root


def svg_text(p: Polytope, title: str = "") -> str:
    return ET.tostring(render_svg(p, title), encoding="unicode")


def write_svg(p: Polytope, path: Union[str, Path], title: str = "") -> Path:
    path = Path(path)
    ET.ElementTree(render_svg(p, title)).write(path, encoding="utf-8", xml_declaration=True)
    return path

# ---------------------- Plotly ----------------------

def body_figure(p: Polytope, title: Optional[str] = None):
    """Interactive figure of a planar body; hover shows the exact vertices."""
    import plotly.graph_objects as go

    pts = cyclic_vertices(p)
    closed = pts + pts[:1] if len(pts) > 2 else pts
    fig = go.Figure()
    fig.add_trace(go.Scatter(
        x=[float(v[0]) for v in closed],
        y=[float(v[1]) for v in closed],
        mode="lines+markers" if len(pts) > 1 else "markers",
        fill="toself" if len(pts) > 2 else None,
        fillcolor="rgba(31, 95, 153, 0.2)",
        line=dict(color=STROKE, width=2),
        marker=dict(size=8, color=STROKE),
        text=[_label(v) for v in closed],
        hovertemplate="%{text}<extra></extra>",
        showlegend=False,
    ))
    fig.update_layout(
        title=title or "",
        xaxis=dict(title="nu_1", zeroline=True),
        yaxis=dict(title="nu_2", zeroline=True, scaleanchor="x", scaleratio=1),
        template="plotly_white",
    )
    return fig


def write_html(p: Polytope, path: Union[str, Path], title: Optional[str] = None) -> Path:
    path = Path(path)
    body_figure(p, title).write_html(str(path), include_plotlyjs="cdn")
    return path


# ---------------------- Quick self-test ----------------------
if __name__ == "__main__":
    from exactgeom import hull

    print(svg_text(hull([(0, 0), (1, 0), (0, 1)], 2), "simplex"))
