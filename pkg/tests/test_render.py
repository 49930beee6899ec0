from fractions import Fraction as F

import pytest

from errors import DimensionMismatch
from exactgeom import hull
from render import body_figure, cyclic_vertices, render_svg, svg_text, write_svg

TRIANGLE = hull([(0, 0), (1, 0), (0, 1)])


def _tag(el):
    return el.tag.rsplit("}", 1)[-1]


def _shapes(root):
    body = [g for g in root if _tag(g) == "g"][1]
    return [_tag(el) for el in body]


def test_cyclic_order_starts_at_lexicographic_minimum():
    assert cyclic_vertices(TRIANGLE) == [(0, 0), (1, 0), (0, 1)]


def _left_turns(pts):
    n = len(pts)
    for i in range(n):
        (ax, ay), (bx, by), (cx, cy) = pts[i], pts[(i + 1) % n], pts[(i + 2) % n]
        yield (bx - ax) * (cy - ay) - (by - ay) * (cx - ax) > 0


@pytest.mark.parametrize("points", [
    [(0, 0), (2, 0), (3, 1), (2, 3), (0, 2), (-1, 1)],
    [(k * 10 ** 12, k * k) for k in range(8)],
    [(F(1, 3), 0), (F(7, 5), F(1, 9)), (F(3, 2), F(2, 3)), (1, 1), (0, F(1, 2))],
])
def test_cyclic_order_is_exact_and_counter_clockwise(points):
    poly = hull(points)
    ordered = cyclic_vertices(poly)
    assert sorted(ordered) == list(poly.vertices)
    assert ordered[0] == min(poly.vertices)
    assert all(_left_turns(ordered))


def test_polygon_is_a_path():
    root = render_svg(TRIANGLE, "simplex")
    assert _shapes(root) == ["path"]
    labels = [el.text for el in root.iter() if _tag(el) == "text"]
    assert labels == ["(0, 0)", "(1, 0)", "(0, 1)"]


def test_segment_and_point():
    assert _shapes(render_svg(hull([(0, 0), (0, F(3, 2))]))) == ["line"]
    root = render_svg(hull([(F(1, 2), 0)]))
    assert _shapes(root) == ["circle"]
    assert any(el.text == "(1/2, 0)" for el in root.iter())


def test_three_dimensional_body_rejected():
    with pytest.raises(DimensionMismatch):
        render_svg(hull([(0, 0, 0), (1, 0, 0)]))


def test_svg_is_deterministic(tmp_path):
    assert svg_text(TRIANGLE, "t") == svg_text(hull([(0, 1), (0, 0), (1, 0)]), "t")
    path = write_svg(TRIANGLE, tmp_path / "body.svg")
    assert path.read_text(encoding="utf-8").startswith("<?xml")


def test_plotly_figure_closes_polygon():
    fig = body_figure(TRIANGLE, "simplex")
    trace = fig.data[0]
    assert list(trace.x) == [0.0, 1.0, 0.0, 0.0]
    assert trace.fill == "toself"
