"""
Exact rational polytopes, linear programming over them, and the exact linear
algebra the rest of okbodies builds on.

Vertex and halfspace representations are kept together on every Polytope;
conversions go through cddlib's double description in fraction mode, small
dense linear algebra through sympy. No floating point is used anywhere.

Usage:
    from fractions import Fraction
    from exactgeom import hull, volume, coordinate_slice

    tri = hull([(0, 0), (1, 0), (0, 1), (Fraction(1, 4), Fraction(1, 4))])
    volume(tri, (0, 1))          # Fraction(1, 2)
    coordinate_slice(tri, 1)     # segment {0} x [0, 1]
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import (Any, Callable, Dict, Hashable, Iterable, List, Mapping,
                    NamedTuple, Optional, Sequence, Tuple, TypeVar)

import cdd
import sympy as sp

from errors import (DimensionMismatch, ExtrapolationError, InfeasibleError,
                    NotCoordinateFlat, UnboundedError)

log = logging.getLogger(__name__)

Rational = Fraction
QVector = Tuple[Fraction, ...]
QMatrix = Tuple[QVector, ...]

CDD_NUMBER_TYPE = "fraction"

T = TypeVar("T")

# ---------------------- Rationals and vectors ----------------------

def q(x: Any) -> Fraction:
    """Coerce an int, a "p/q" string, a Fraction or a sympy rational to Fraction.

    Floats are refused: every number entering the core must be exact.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, sp.Rational):
        return Fraction(int(x.p), int(x.q))
    raise TypeError(f"not an exact rational: {x!r}")


def qvec(xs: Iterable[Any]) -> QVector:
    return tuple(q(x) for x in xs)


def fmt_q(x: Fraction) -> str:
    """Serialize as "p/q", or "p" when the denominator is 1."""
    return str(q(x))


def dot(a: Sequence[Any], b: Sequence[Any]) -> Fraction:
    if len(a) != len(b):
        raise DimensionMismatch(f"dot of vectors of length {len(a)} and {len(b)}")
    return sum((Fraction(x) * Fraction(y) for x, y in zip(a, b)), Fraction(0))


def vadd(a: Sequence[Fraction], b: Sequence[Fraction]) -> QVector:
    if len(a) != len(b):
        raise DimensionMismatch(f"adding vectors of length {len(a)} and {len(b)}")
    return tuple(Fraction(x) + Fraction(y) for x, y in zip(a, b))


def vsub(a: Sequence[Fraction], b: Sequence[Fraction]) -> QVector:
    if len(a) != len(b):
        raise DimensionMismatch(f"subtracting vectors of length {len(a)} and {len(b)}")
    return tuple(Fraction(x) - Fraction(y) for x, y in zip(a, b))


def vscale(c: Any, a: Sequence[Fraction]) -> QVector:
    c = q(c)
    return tuple(c * Fraction(x) for x in a)


def unit(n: int, i: int) -> QVector:
    return tuple(Fraction(1) if j == i else Fraction(0) for j in range(n))


def zero(n: int) -> QVector:
    return (Fraction(0),) * n


def mat_vec(matrix: Sequence[Sequence[Fraction]], v: Sequence[Fraction]) -> QVector:
    return tuple(dot(row, v) for row in matrix)

# ---------------------- Exact linear algebra (sympy) ----------------------

def _to_sympy(rows: Sequence[Sequence[Any]]) -> sp.Matrix:
    return sp.Matrix([[sp.Rational(q(x).numerator, q(x).denominator) for x in row] for row in rows])


def rank(rows: Sequence[Sequence[Any]]) -> int:
    rows = [r for r in rows]
    if not rows or not len(rows[0]):
        return 0
    return int(_to_sympy(rows).rank())


def det(rows: Sequence[Sequence[Any]]) -> Fraction:
    if not rows:
        return Fraction(1)
    if any(len(r) != len(rows) for r in rows):
        raise DimensionMismatch("determinant of a non-square matrix")
    return q(sp.Rational(_to_sympy(rows).det(method="bareiss")))


def solve(matrix: Sequence[Sequence[Any]], rhs: Sequence[Any]) -> QVector:
    """Solve matrix @ x = rhs for a square nonsingular matrix."""
    if len(matrix) != len(rhs):
        raise DimensionMismatch("right-hand side length differs from row count")
    if not matrix:
        return ()
    if det(matrix) == 0:
        raise ValueError("singular system")
    x = _to_sympy(matrix).LUsolve(_to_sympy([[v] for v in rhs]))
    return tuple(q(sp.Rational(v)) for v in x)


def inertia(form: Sequence[Sequence[Any]]) -> Tuple[int, int, int]:
    """(positive, negative, zero) eigenvalue counts of a symmetric matrix.

    The characteristic polynomial of a real symmetric matrix has only real
    roots, so Descartes' sign rule counts the positive ones exactly.
    """
    n = len(form)
    if n == 0:
        return (0, 0, 0)
    coeffs = [sp.Rational(c) for c in _to_sympy(form).charpoly().all_coeffs()]
    zeros = 0
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
        zeros += 1
    signs = [1 if c > 0 else -1 for c in coeffs if c != 0]
    positive = sum(1 for a, b in zip(signs, signs[1:]) if a != b)
    return (positive, n - positive - zeros, zeros)

# ---------------------- Halfspaces and polytopes ----------------------

@dataclass(frozen=True)
class Halfspace:
    """The set {u : <normal, u> >= offset}."""
    normal: QVector
    offset: Fraction

    def __post_init__(self):
        if not any(self.normal):
            raise ValueError("halfspace normal must be nonzero")

    @classmethod
    def normalized(cls, normal: Sequence[Any], offset: Any) -> "Halfspace":
        """Rescale by a positive factor so the normal is a primitive integer vector."""
        normal = qvec(normal)
        offset = q(offset)
        den = math.lcm(*(v.denominator for v in normal))
        g = math.gcd(*(int(v * den) for v in normal))
        if g == 0:
            raise ValueError("halfspace normal must be nonzero")
        factor = Fraction(den, g)
        return cls(tuple(v * factor for v in normal), offset * factor)

    def slack(self, point: Sequence[Any]) -> Fraction:
        return dot(self.normal, point) - self.offset

    def contains(self, point: Sequence[Any]) -> bool:
        return self.slack(point) >= 0

    def is_tight(self, point: Sequence[Any]) -> bool:
        return self.slack(point) == 0


@dataclass(frozen=True)
class Polytope:
    """Convex polyhedron with both representations.

    Build with hull() or from_halfspaces(). A Polytope constructed directly with
    only one representation is completed by convert().
    """
    ambient_dim: int
    vertices: Tuple[QVector, ...] = ()
    halfspaces: Tuple[Halfspace, ...] = ()
    rays: Tuple[QVector, ...] = ()
    affine_dim: int = -1

    @classmethod
    def empty(cls, ambient_dim: int) -> "Polytope":
        if ambient_dim < 1:
            return cls(ambient_dim=0)
        e = unit(ambient_dim, 0)
        return cls(
            ambient_dim=ambient_dim,
            halfspaces=(Halfspace(e, Fraction(1)), Halfspace(vscale(-1, e), Fraction(0))),
            affine_dim=-1,
        )

    @property
    def is_empty(self) -> bool:
        return not self.vertices

    @property
    def is_bounded(self) -> bool:
        return not self.rays

    def contains_point(self, point: Sequence[Any]) -> bool:
        point = qvec(point)
        if len(point) != self.ambient_dim:
            raise DimensionMismatch(f"point of dimension {len(point)} in a {self.ambient_dim}-dimensional polytope")
        if self.is_empty:
            return False
        return all(h.contains(point) for h in self.halfspaces)

    def __repr__(self) -> str:
        verts = ", ".join("(" + ", ".join(fmt_q(x) for x in v) + ")" for v in self.vertices)
        extra = f", rays={len(self.rays)}" if self.rays else ""
        return f"Polytope(dim={self.affine_dim}/{self.ambient_dim}, vertices=[{verts}]{extra})"


class LPResult(NamedTuple):
    value: Fraction
    witness: QVector

# ---------------------- cddlib conversions ----------------------

def _cdd_matrix(rows: List[List[Fraction]], rep_type) -> "cdd.Matrix":
    mat = cdd.Matrix(rows, number_type=CDD_NUMBER_TYPE)
    mat.rep_type = rep_type
    return mat


def _inequalities_of(points: Sequence[QVector], rays: Sequence[QVector]) -> Tuple[List[Halfspace], List[Tuple[QVector, Fraction]]]:
    """Facet inequalities and affine-hull equations of conv(points) + cone(rays)."""
    rows = [[Fraction(1), *p] for p in points] + [[Fraction(0), *r] for r in rays]
    poly = cdd.Polyhedron(_cdd_matrix(rows, cdd.RepType.GENERATOR))
    ineq = poly.get_inequalities()
    ineq.canonicalize()
    inequalities: List[Halfspace] = []
    equations: List[Tuple[QVector, Fraction]] = []
    for i in range(ineq.row_size):
        row = [Fraction(x) for x in ineq[i]]
        b, normal = row[0], tuple(row[1:])
        if not any(normal):
            continue
        if i in ineq.lin_set:
            equations.append((normal, -b))
        else:
            inequalities.append(Halfspace.normalized(normal, -b))
    return inequalities, equations


def _generators_of(halfspaces: Sequence[Halfspace]) -> Tuple[List[QVector], List[QVector]]:
    """Vertices and extreme rays (lines as two opposite rays) of an H-representation."""
    rows = [[-h.offset, *h.normal] for h in halfspaces]
    # 1 >= 0 keeps the apex of a pointed cone in the generator output
    rows.append([Fraction(1)] + [Fraction(0)] * len(halfspaces[0].normal))
    poly = cdd.Polyhedron(_cdd_matrix(rows, cdd.RepType.INEQUALITY))
    gen = poly.get_generators()
    points: List[QVector] = []
    rays: List[QVector] = []
    for i in range(gen.row_size):
        row = [Fraction(x) for x in gen[i]]
        if row[0] != 0:
            points.append(tuple(x / row[0] for x in row[1:]))
        else:
            ray = tuple(row[1:])
            rays.append(ray)
            if i in gen.lin_set:
                rays.append(vscale(-1, ray))
    return points, rays


def _affine_rank(points: Sequence[QVector], rays: Sequence[QVector]) -> int:
    if not points:
        return -1
    base = points[0]
    return rank([vsub(p, base) for p in points[1:]] + list(rays))


def _primitive(v: QVector) -> QVector:
    den = math.lcm(*(x.denominator for x in v))
    g = math.gcd(*(int(x * den) for x in v))
    return tuple(x * den / g for x in v)

# ---------------------- Construction ----------------------

def hull(points: Iterable[Sequence[Any]], ambient_dim: Optional[int] = None,
         rays: Iterable[Sequence[Any]] = ()) -> Polytope:
    """Convex hull of points (plus the cone of rays), with minimal V-rep."""
    pts = [qvec(p) for p in points]
    rs = [qvec(r) for r in rays if any(q(x) for x in r)]
    dims = {len(p) for p in pts} | {len(r) for r in rs}
    if ambient_dim is not None:
        dims.add(ambient_dim)
    if len(dims) > 1:
        raise DimensionMismatch(f"points of mixed dimension {sorted(dims)}")
    if not pts:
        return Polytope.empty(dims.pop() if dims else 0)
    n = dims.pop()
    if n < 1:
        raise DimensionMismatch("ambient dimension must be at least 1")

    inequalities, equations = _inequalities_of(pts, rs)
    hs = set(inequalities)
    for normal, offset in equations:
        hs.add(Halfspace.normalized(normal, offset))
        hs.add(Halfspace.normalized(vscale(-1, normal), -offset))
    halfspaces = tuple(sorted(hs, key=lambda h: (h.normal, h.offset)))

    if halfspaces:
        vertices, extreme = _generators_of(halfspaces)
    else:
        # whole space: only possible with rays spanning every direction
        vertices, extreme = pts[:1], rs
    vertices = sorted(set(vertices))
    extreme = sorted({_primitive(r) for r in extreme})
    return Polytope(
        ambient_dim=n,
        vertices=tuple(vertices),
        halfspaces=halfspaces,
        rays=tuple(extreme),
        affine_dim=_affine_rank(vertices, extreme),
    )


def from_halfspaces(halfspaces: Iterable[Any], ambient_dim: Optional[int] = None) -> Polytope:
    """Polytope of an H-representation; accepts Halfspace or (normal, offset) pairs."""
    hs = [h if isinstance(h, Halfspace) else Halfspace(qvec(h[0]), q(h[1])) for h in halfspaces]
    if not hs:
        raise ValueError("an H-representation needs at least one halfspace")
    dims = {len(h.normal) for h in hs}
    if ambient_dim is not None:
        dims.add(ambient_dim)
    if len(dims) > 1:
        raise DimensionMismatch(f"halfspaces of mixed dimension {sorted(dims)}")
    n = dims.pop()
    points, rays = _generators_of(hs)
    if not points:
        return Polytope.empty(n)
    return hull(points, n, rays=rays)


def convert(p: Polytope) -> Polytope:
    """Complete whichever representation is missing."""
    if p.vertices:
        return hull(p.vertices, p.ambient_dim, rays=p.rays)
    if p.halfspaces:
        return from_halfspaces(p.halfspaces, p.ambient_dim)
    return Polytope.empty(p.ambient_dim)


def cone(generators: Iterable[Sequence[Any]], ambient_dim: int) -> Polytope:
    """The polyhedral cone spanned by generators, apex at the origin."""
    return hull([zero(ambient_dim)], ambient_dim, rays=generators)

# ---------------------- Queries ----------------------

def facets(p: Polytope) -> List[Polytope]:
    """Facets of a bounded polytope, as polytopes in the same ambient space."""
    if p.is_empty or p.affine_dim == 0:
        return []
    out: Dict[Tuple[QVector, ...], Polytope] = {}
    for h in p.halfspaces:
        tight = [v for v in p.vertices if h.is_tight(v)]
        if len(tight) == len(p.vertices):
            continue
        face = hull(tight, p.ambient_dim)
        if face.affine_dim == p.affine_dim - 1:
            out.setdefault(face.vertices, face)
    return [out[k] for k in sorted(out)]


def _simplices(p: Polytope) -> List[Tuple[QVector, ...]]:
    """Pulling triangulation from the lexicographically first vertex."""
    if p.is_empty:
        return []
    if len(p.vertices) == p.affine_dim + 1:
        return [p.vertices]
    apex = p.vertices[0]
    out: List[Tuple[QVector, ...]] = []
    for facet in facets(p):
        if apex in facet.vertices:
            continue
        out.extend((apex,) + simplex for simplex in _simplices(facet))
    return out


def volume(p: Polytope, coords: Iterable[int]) -> Fraction:
    """Lebesgue volume inside the coordinate subspace spanned by coords (0-based)."""
    coords = sorted(set(coords))
    if any(i < 0 or i >= p.ambient_dim for i in coords):
        raise DimensionMismatch(f"coordinates {coords} outside ambient dimension {p.ambient_dim}")
    if p.is_empty:
        return Fraction(0)
    if p.rays:
        raise UnboundedError("volume of an unbounded polyhedron")
    others = [i for i in range(p.ambient_dim) if i not in coords]
    for v in p.vertices:
        if any(v[i] != 0 for i in others):
            raise NotCoordinateFlat(f"vertex {tuple(fmt_q(x) for x in v)} leaves coordinates {coords}")
    k = len(coords)
    if k == 0:
        return Fraction(1)
    if p.affine_dim < k:
        return Fraction(0)
    projected = hull([tuple(v[i] for i in coords) for v in p.vertices], k)
    total = Fraction(0)
    for simplex in _simplices(projected):
        base = simplex[0]
        total += abs(det([vsub(v, base) for v in simplex[1:]]))
    return total / math.factorial(k)


def flat_volume(p: Polytope) -> Fraction:
    """Volume of p in the coordinate directions it spans, measured from its first vertex.

    A point has volume 1; a segment along one axis has its length.
    """
    if p.is_empty:
        return Fraction(0)
    moved = translate(p, vscale(-1, p.vertices[0]))
    coords = [i for i in range(p.ambient_dim) if any(v[i] != 0 for v in moved.vertices)]
    if len(coords) != p.affine_dim:
        raise NotCoordinateFlat(f"a {p.affine_dim}-dimensional polytope spanning coordinates {coords}")
    return volume(moved, coords)


def lattice_points(p: Polytope) -> List[Tuple[int, ...]]:
    """Integer points of a bounded polytope in lexicographic order."""
    if p.is_empty:
        return []
    if p.rays:
        raise UnboundedError("lattice points of an unbounded polyhedron")
    lo = [math.ceil(min(v[i] for v in p.vertices)) for i in range(p.ambient_dim)]
    hi = [math.floor(max(v[i] for v in p.vertices)) for i in range(p.ambient_dim)]
    return [
        pt
        for pt in itertools.product(*(range(a, b + 1) for a, b in zip(lo, hi)))
        if all(h.contains(pt) for h in p.halfspaces)
    ]


def lp_optimize(objective: Sequence[Any], p: Polytope, sense: str = "min") -> LPResult:
    """Optimum over p attained at a vertex; ties go to the lexicographically smallest vertex."""
    c = qvec(objective)
    if len(c) != p.ambient_dim:
        raise DimensionMismatch(f"objective of length {len(c)} for a {p.ambient_dim}-dimensional polytope")
    if sense not in ("min", "max"):
        raise ValueError(f"sense must be 'min' or 'max', got {sense!r}")
    if p.is_empty:
        raise InfeasibleError("linear program over an empty polytope")
    sign = 1 if sense == "min" else -1
    if any(sign * dot(c, r) < 0 for r in p.rays):
        raise UnboundedError(f"objective unbounded ({sense})")
    best = min(sign * dot(c, v) for v in p.vertices)
    witness = next(v for v in p.vertices if sign * dot(c, v) == best)
    return LPResult(sign * best, witness)


def contains(p: Polytope, other: Polytope) -> bool:
    """True iff other is a subset of p."""
    if p.ambient_dim != other.ambient_dim:
        raise DimensionMismatch(f"comparing dimensions {p.ambient_dim} and {other.ambient_dim}")
    if other.is_empty:
        return True
    if p.is_empty:
        return False
    return (all(p.contains_point(v) for v in other.vertices)
            and all(dot(h.normal, r) >= 0 for h in p.halfspaces for r in other.rays))


def equals(p: Polytope, other: Polytope) -> bool:
    """Set equality."""
    return contains(p, other) and contains(other, p)

# ---------------------- Constructions on polytopes ----------------------

def coordinate_slice(p: Polytope, k: int) -> Polytope:
    """p intersected with {0}^(n-k) x R^k, in ambient coordinates."""
    n = p.ambient_dim
    if not 0 <= k <= n:
        raise DimensionMismatch(f"cannot keep {k} coordinates of {n}")
    if p.is_empty:
        return p
    extra: List[Halfspace] = []
    for i in range(n - k):
        e = unit(n, i)
        extra += [Halfspace(e, Fraction(0)), Halfspace(vscale(-1, e), Fraction(0))]
    return from_halfspaces(list(p.halfspaces) + extra, n)


def affine_image(p: Polytope, affine_map: Tuple[Sequence[Sequence[Any]], Sequence[Any]]) -> Polytope:
    """Image of p under u -> M u + b."""
    matrix, shift = affine_map
    matrix = [qvec(row) for row in matrix]
    shift = qvec(shift)
    if len(matrix) != len(shift):
        raise DimensionMismatch("affine map rows and offset differ in length")
    if any(len(row) != p.ambient_dim for row in matrix):
        raise DimensionMismatch(f"affine map does not accept dimension {p.ambient_dim}")
    m = len(shift)
    if p.is_empty:
        return Polytope.empty(m)
    return hull(
        [vadd(mat_vec(matrix, v), shift) for v in p.vertices],
        m,
        rays=[mat_vec(matrix, r) for r in p.rays],
    )


def translate(p: Polytope, shift: Sequence[Any]) -> Polytope:
    n = p.ambient_dim
    return affine_image(p, ([unit(n, i) for i in range(n)], shift))


def scale(p: Polytope, factor: Any) -> Polytope:
    n = p.ambient_dim
    return affine_image(p, ([vscale(factor, unit(n, i)) for i in range(n)], zero(n)))


def minkowski_sum(p: Polytope, other: Polytope) -> Polytope:
    if p.ambient_dim != other.ambient_dim:
        raise DimensionMismatch(f"Minkowski sum of dimensions {p.ambient_dim} and {other.ambient_dim}")
    if p.is_empty or other.is_empty:
        return Polytope.empty(p.ambient_dim)
    return hull(
        [vadd(a, b) for a in p.vertices for b in other.vertices],
        p.ambient_dim,
        rays=list(p.rays) + list(other.rays),
    )

# ---------------------- Epsilon limits ----------------------

def _on_line(values: Sequence[QVector], eps: Sequence[Fraction]) -> Optional[Tuple[QVector, QVector]]:
    """(intercept, slope) if all values lie on one affine path in eps."""
    (e0, v0), (e1, v1) = (eps[0], values[0]), (eps[1], values[1])
    slope = vscale(1 / (e1 - e0), vsub(v1, v0))
    intercept = vsub(v0, vscale(e0, slope))
    for e, v in zip(eps[2:], values[2:]):
        if vadd(intercept, vscale(e, slope)) != v:
            return None
    return intercept, slope


def extrapolate_to_zero(sample: Callable[[Fraction], Mapping[Hashable, QVector]],
                        schedule: Sequence[Fraction]) -> Dict[Hashable, QVector]:
    """Exact eps -> 0 limit of labelled points that are eventually affine in eps.

    The labels must agree on three consecutive steps and every path must be
    affine through them; a fourth step confirms the fit before the intercepts
    are returned.
    """
    history: List[Tuple[Fraction, Dict[Hashable, QVector]]] = []
    for eps in schedule:
        history.append((eps, dict(sample(eps))))
        if len(history) < 4:
            continue
        window = history[-4:]
        keys = set(window[0][1])
        if any(set(values) != keys for _, values in window):
            log.debug("eps=%s: combinatorics still moving", eps)
            continue
        eps_values = [e for e, _ in window]
        limit: Dict[Hashable, QVector] = {}
        for key in keys:
            fit = _on_line([values[key] for _, values in window], eps_values)
            if fit is None:
                break
            limit[key] = fit[0]
        else:
            log.debug("stabilized at eps=%s with %d labels", eps, len(keys))
            return limit
    raise ExtrapolationError(f"no stabilization within {len(schedule)} epsilon steps")


def extrapolate_scalar(sample: Callable[[Fraction], Fraction], schedule: Sequence[Fraction]) -> Fraction:
    limit = extrapolate_to_zero(lambda eps: {"value": (q(sample(eps)),)}, schedule)
    return limit["value"][0]


def stable_value(sample: Callable[[Fraction], T], schedule: Sequence[Fraction]) -> T:
    """The value a sampled family takes on four consecutive steps."""
    window: List[T] = []
    for eps in schedule:
        window = (window + [sample(eps)])[-4:]
        if len(window) == 4 and all(w == window[0] for w in window):
            return window[0]
    raise ExtrapolationError(f"no stable value within {len(schedule)} epsilon steps")


# ---------------------- Quick self-test ----------------------
if __name__ == "__main__":
    tri = hull([(0, 0), (1, 0), (0, 1), (Fraction(1, 4), Fraction(1, 4))])
    print(tri)
    print("area:", volume(tri, (0, 1)))
    print("slice:", coordinate_slice(tri, 1))
    print("lattice points of 2*tri:", lattice_points(scale(tri, 2)))
