from fractions import Fraction as F

import numpy as np
import pytest

from errors import DimensionMismatch, ExtrapolationError, InfeasibleError, NotCoordinateFlat, UnboundedError
from exactgeom import (affine_image, cone, contains, coordinate_slice, equals, extrapolate_scalar,
                       extrapolate_to_zero, flat_volume, fmt_q, from_halfspaces, hull, inertia,
                       lattice_points, lp_optimize, minkowski_sum, q, scale, stable_value, translate,
                       volume)

SIMPLEX = [(0, 0), (1, 0), (0, 1)]
SCHEDULE = tuple(F(1, 2 ** k) for k in range(1, 9))


def test_q_rejects_floats():
    assert q("3/6") == F(1, 2)
    assert fmt_q(F(4, 2)) == "2"
    with pytest.raises(TypeError):
        q(0.5)


def test_hull_drops_interior_points():
    p = hull(SIMPLEX + [(F(1, 4), F(1, 4))])
    assert p.vertices == ((0, 0), (0, 1), (1, 0))
    assert p.affine_dim == 2
    assert len(p.halfspaces) == 3


def test_hull_of_segment_and_point():
    seg = hull([(0, 0), (2, 0), (1, 0)])
    assert seg.vertices == ((0, 0), (2, 0))
    assert seg.affine_dim == 1
    assert hull([(F(1, 3), 5)]).affine_dim == 0


def test_hull_mixed_dimensions():
    with pytest.raises(DimensionMismatch):
        hull([(0, 0), (1, 0, 0)])


def test_empty_hull():
    assert hull([]).is_empty
    assert hull([]).affine_dim == -1
    empty = hull([], 3)
    assert empty.is_empty and empty.ambient_dim == 3
    assert volume(empty, (0, 1, 2)) == 0


def test_cone_keeps_its_apex():
    c = cone([(0, 1), (1, -1)], 2)
    assert c.vertices == ((0, 0),)
    assert set(c.rays) == {(0, 1), (1, -1)}
    assert c.affine_dim == 2
    shifted = from_halfspaces([((1, 0), 2), ((0, 1), -1)])
    assert shifted.vertices == ((2, -1),)
    assert len(shifted.rays) == 2


def test_from_halfspaces_round_trip():
    square = from_halfspaces([((1, 0), 0), ((0, 1), 0), ((-1, 0), -1), ((0, -1), -1)])
    assert equals(square, hull([(0, 0), (1, 0), (0, 1), (1, 1)]))


def test_infeasible_halfspaces_give_empty():
    p = from_halfspaces([((1,), 1), ((-1,), 0)])
    assert p.is_empty
    with pytest.raises(InfeasibleError):
        lp_optimize((1,), p)


def test_volume_in_coordinates():
    assert volume(hull(SIMPLEX), (0, 1)) == F(1, 2)
    segment = hull([(0, 0), (0, 3)])
    assert volume(segment, (1,)) == 3
    with pytest.raises(NotCoordinateFlat):
        volume(hull([(1, 0), (1, 2)]), (1,))


def test_flat_volume():
    assert flat_volume(hull([(1, 0), (1, F(5, 2))])) == F(5, 2)
    assert flat_volume(hull([(F(1, 2), 0)])) == 1
    with pytest.raises(NotCoordinateFlat):
        flat_volume(hull([(0, 0), (1, 1)]))


def test_lattice_points_of_dilated_simplex():
    assert len(lattice_points(scale(hull(SIMPLEX), 2))) == 6
    assert lattice_points(hull([(F(1, 3), F(1, 3)), (F(2, 3), F(1, 3)), (F(1, 3), F(2, 3))])) == []


def test_lp_optimize_and_unbounded():
    res = lp_optimize((1, 1), hull(SIMPLEX), "max")
    assert res.value == 1
    with pytest.raises(UnboundedError):
        lp_optimize((1, 0), cone([(1, 0), (0, 1)], 2), "max")


def test_contains_and_slice():
    tri = hull(SIMPLEX)
    assert contains(tri, hull([(0, 0), (F(1, 2), F(1, 2))]))
    assert not contains(tri, hull([(0, 0), (1, 1)]))
    assert equals(coordinate_slice(tri, 1), hull([(0, 0), (0, 1)]))


def test_affine_image_and_minkowski():
    tri = hull(SIMPLEX)
    swapped = affine_image(tri, (((0, 1), (1, 0)), (0, 0)))
    assert equals(swapped, tri)
    moved = translate(tri, (1, 1))
    assert moved.vertices == ((1, 1), (1, 2), (2, 1))
    square = minkowski_sum(hull([(0, 0), (1, 0)]), hull([(0, 0), (0, 1)]))
    assert volume(square, (0, 1)) == 1


def test_inertia_of_hyperbolic_plane():
    assert inertia([[0, 1], [1, 0]]) == (1, 1, 0)
    assert inertia([[1, 0], [0, -1]]) == (1, 1, 0)
    assert inertia([[0, 1], [1, -2]]) == (1, 1, 0)


def test_extrapolate_affine_paths():
    limit = extrapolate_to_zero(lambda e: {"a": (1 + 2 * e, -e), "b": (F(1, 2), 3 * e)}, SCHEDULE)
    assert limit == {"a": (1, 0), "b": (F(1, 2), 0)}
    assert extrapolate_scalar(lambda e: 5 - e, SCHEDULE) == 5


def test_extrapolate_waits_for_stable_labels():
    # labels settle once eps < 1/8
    def sample(e):
        keys = ["x"] if e >= F(1, 8) else ["x", "y"]
        return {k: (e,) for k in keys}

    assert extrapolate_to_zero(sample, SCHEDULE) == {"x": (0,), "y": (0,)}


def test_extrapolate_raises_when_not_affine():
    with pytest.raises(ExtrapolationError):
        extrapolate_scalar(lambda e: e * e, SCHEDULE)


def test_stable_value():
    assert stable_value(lambda e: frozenset({1}) if e < F(1, 4) else frozenset(), SCHEDULE) == frozenset({1})
    with pytest.raises(ExtrapolationError):
        stable_value(lambda e: e, SCHEDULE)


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("n", [2, 3])
def test_random_hulls_round_trip(seed, n):
    rng = np.random.default_rng(seed)
    points = [tuple(row) for row in rng.integers(-4, 5, size=(8, n)).tolist()]
    p = hull(points)
    back = from_halfspaces(p.halfspaces, n)
    assert back.vertices == p.vertices
    assert equals(back, p)
    assert all(p.contains_point(x) for x in points)


@pytest.mark.parametrize("seed", range(6))
def test_volume_scales_with_dimension(seed):
    rng = np.random.default_rng(100 + seed)
    n = 2 + seed % 2
    points = [tuple(row) for row in rng.integers(-3, 4, size=(7, n)).tolist()]
    p = hull(points)
    if p.affine_dim < n:
        pytest.skip("degenerate sample")
    lam = F(int(rng.integers(1, 7)), int(rng.integers(1, 7)))
    coords = range(n)
    assert volume(scale(p, lam), coords) == lam ** n * volume(p, coords)


@pytest.mark.parametrize("seed", range(4))
def test_ehrhart_counts_of_dilates(seed):
    m = int(np.random.default_rng(200 + seed).integers(1, 8))
    square = hull([(0, 0), (1, 0), (0, 1), (1, 1)])
    assert len(lattice_points(scale(square, m))) == (m + 1) ** 2
    assert len(lattice_points(scale(hull(SIMPLEX), m))) == (m + 1) * (m + 2) // 2
    cube_simplex = hull([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)])
    assert len(lattice_points(scale(cube_simplex, m))) == (m + 1) * (m + 2) * (m + 3) // 6


@pytest.mark.parametrize("seed", range(4))
def test_coordinate_slices_nest(seed):
    rng = np.random.default_rng(300 + seed)
    points = [tuple(row) for row in rng.integers(-3, 4, size=(9, 3)).tolist()] + [(0, 0, 0)]
    p = hull(points)
    for k in range(4):
        sliced = coordinate_slice(p, k)
        assert contains(p, sliced)
        assert equals(coordinate_slice(sliced, k), sliced)
        assert all(v[i] == 0 for v in sliced.vertices for i in range(3 - k))
