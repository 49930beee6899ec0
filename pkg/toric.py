"""
Smooth complete toric varieties: divisor classification, section polytopes,
asymptotic invariants, Zariski-type decompositions and Okounkov bodies for
torus-invariant flags, plus graded linear series generated in degree one.

Divisors are handled through their section polytopes
P_D = {u : <u, v_i> >= -a_i}, so effectivity and bodies follow the R-linear
series convention. Limits in epsilon use the affine-extrapolation kernel of
exactgeom.

Usage:
    from toric import ToricVariety, ToricDivisor, InvariantFlag, okounkov_body

    P2 = ToricVariety.from_data([(1, 0), (0, 1), (-1, -1)], [(0, 1), (1, 2), (2, 0)])
    H = ToricDivisor.of(0, 0, 1)
    okounkov_body(P2, H, InvariantFlag((0, 1)), "big")   # unit simplex
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

from config import get_settings
from decomposition import DecompositionKind, ZariskiDecomposition
from errors import ClosedFormRefuted, DimensionMismatch, HypothesisUnmet, InvalidModel
from exactgeom import (Halfspace, Polytope, QVector, affine_image, coordinate_slice,
                       det, dot, extrapolate_scalar, extrapolate_to_zero, fmt_q,
                       from_halfspaces, hull, lattice_points, lp_optimize, mat_vec,
                       q, qvec, scale, solve, stable_value, vadd, volume as polytope_volume)

log = logging.getLogger(__name__)

NEG_INF = float("-inf")
Dimension = Union[int, float]
Cone = Tuple[int, ...]

GROWTH_SPREAD = 16

# ---------------------- Varieties, divisors, flags ----------------------

@dataclass(frozen=True)
class ToricVariety:
    rays: Tuple[Tuple[int, ...], ...]
    max_cones: Tuple[Cone, ...]
    name: str = field(default="", compare=False)

    @classmethod
    def from_data(cls, rays: Iterable[Sequence[int]], max_cones: Iterable[Sequence[int]], name: str = "") -> "ToricVariety":
        return cls(
            rays=tuple(tuple(int(x) for x in r) for r in rays),
            max_cones=tuple(tuple(int(i) for i in c) for c in max_cones),
            name=name,
        )

    @property
    def dim(self) -> int:
        return len(self.rays[0]) if self.rays else 0

    @property
    def n_rays(self) -> int:
        return len(self.rays)

    def ray(self, i: int) -> QVector:
        return qvec(self.rays[i])

    def cones(self) -> Tuple[Cone, ...]:
        """Every cone of the fan (faces of maximal cones), the zero cone () included."""
        faces = set()
        for c in self.max_cones:
            for k in range(len(c) + 1):
                faces.update(tuple(sorted(s)) for s in itertools.combinations(c, k))
        return tuple(sorted(faces, key=lambda c: (len(c), c)))

    def is_max_cone(self, cone: Iterable[int]) -> bool:
        key = tuple(sorted(cone))
        return any(tuple(sorted(c)) == key for c in self.max_cones)

    def label(self) -> str:
        return self.name or f"toric(n={self.dim}, rays={self.n_rays})"


@dataclass(frozen=True)
class ToricDivisor:
    """D = sum a_i D_i over the rays of a fan."""
    coeffs: QVector

    @classmethod
    def of(cls, *coeffs: Any) -> "ToricDivisor":
        return cls(qvec(coeffs))

    @classmethod
    def prime(cls, X: ToricVariety, i: int) -> "ToricDivisor":
        return cls(tuple(Fraction(1 if j == i else 0) for j in range(X.n_rays)))

    @classmethod
    def zero(cls, X: ToricVariety) -> "ToricDivisor":
        return cls((Fraction(0),) * X.n_rays)

    def _check(self, other: "ToricDivisor") -> None:
        if len(self.coeffs) != len(other.coeffs):
            raise DimensionMismatch(f"divisors on {len(self.coeffs)} and {len(other.coeffs)} rays")

    def __add__(self, other: "ToricDivisor") -> "ToricDivisor":
        self._check(other)
        return ToricDivisor(vadd(self.coeffs, other.coeffs))

    def __sub__(self, other: "ToricDivisor") -> "ToricDivisor":
        self._check(other)
        return ToricDivisor(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "ToricDivisor":
        return ToricDivisor(tuple(-a for a in self.coeffs))

    def __mul__(self, c: Any) -> "ToricDivisor":
        c = q(c)
        return ToricDivisor(tuple(c * a for a in self.coeffs))

    __rmul__ = __mul__

    def floor(self) -> "ToricDivisor":
        return ToricDivisor(tuple(Fraction(math.floor(a)) for a in self.coeffs))

    @property
    def is_integral(self) -> bool:
        return all(a.denominator == 1 for a in self.coeffs)

    def __str__(self) -> str:
        return "(" + ", ".join(fmt_q(a) for a in self.coeffs) + ")"


@dataclass(frozen=True)
class InvariantFlag:
    """Y_i = D_{r_1} cap ... cap D_{r_i} for the ordered rays of a maximal cone."""
    rays: Tuple[int, ...]

    @property
    def cone(self) -> Cone:
        return tuple(sorted(self.rays))


class BodyKind(str, Enum):
    BIG = "big"
    VAL = "val"
    LIM = "lim"


@dataclass
class ValidationReport:
    ok: bool
    problems: List[str] = field(default_factory=list)
    witnesses: Dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Classification:
    psef: bool
    big: bool
    nef: bool
    semiample: bool

    def to_json(self) -> Dict[str, bool]:
        return {"psef": self.psef, "big": self.big, "nef": self.nef, "semiample": self.semiample}


@dataclass(frozen=True)
class BaseLoci:
    """Loci as sets of cones; the zero cone () marks the whole variety."""
    stable: FrozenSet[Cone]
    augmented: FrozenSet[Cone]
    restricted: FrozenSet[Cone]

    def to_json(self) -> Dict[str, List[List[int]]]:
        return {
            "SB": [list(c) for c in sorted(self.stable)],
            "B+": [list(c) for c in sorted(self.augmented)],
            "B-": [list(c) for c in sorted(self.restricted)],
        }

# ---------------------- Wall relations ----------------------

@dataclass(frozen=True)
class Wall:
    """Two maximal cones tau+{left}, tau+{right}; v_left + v_right + sum b_i v_i = 0."""
    tau: Cone
    left: int
    right: int
    relation: Tuple[Tuple[int, Fraction], ...]

    def intersect(self, D: ToricDivisor) -> Fraction:
        """D . V(tau)."""
        a = D.coeffs
        return a[self.left] + a[self.right] + sum((b * a[i] for i, b in self.relation), Fraction(0))


def _coordinates(X: ToricVariety, basis: Sequence[int], target: Sequence[Any]) -> QVector:
    """Coefficients of target in the basis of rays listed."""
    n = X.dim
    matrix = [[X.ray(j)[row] for j in basis] for row in range(n)]
    return solve(matrix, qvec(target))


@lru_cache(maxsize=None)
def walls(X: ToricVariety) -> Tuple[Wall, ...]:
    """Wall relations of every pair of adjacent maximal cones."""
    by_face: Dict[Cone, List[int]] = {}
    for c in X.max_cones:
        for i in c:
            tau = tuple(sorted(set(c) - {i}))
            by_face.setdefault(tau, []).append(i)
    out: List[Wall] = []
    for tau, others in sorted(by_face.items()):
        if len(others) != 2:
            continue
        left, right = sorted(others)
        lam = _coordinates(X, list(tau) + [left], X.rays[right])
        if lam[-1] != -1:
            raise InvalidModel(f"cones over face {tau} do not meet as a smooth fan (coefficient {lam[-1]})")
        out.append(Wall(tau, left, right, tuple((i, -c) for i, c in zip(tau, lam[:-1]))))
    return tuple(out)


def curve_intersection(X: ToricVariety, D: ToricDivisor, wall: Wall) -> Fraction:
    return wall.intersect(D)

# ---------------------- Validation ----------------------

_PROBES = (Fraction(7, 5), Fraction(-2, 3), Fraction(11, 13), Fraction(-3, 17), Fraction(5, 19), Fraction(-13, 23))


def _search_directions(n: int) -> Iterable[QVector]:
    for combo in itertools.permutations(_PROBES, n):
        yield tuple(combo)


def _cone_interior_contains(X: ToricVariety, cone: Cone, w: QVector) -> Optional[bool]:
    """True inside, False outside, None on the boundary."""
    lam = _coordinates(X, cone, w)
    if all(x > 0 for x in lam):
        return True
    if any(x < 0 for x in lam):
        return False
    return None


def validate(X: ToricVariety) -> ValidationReport:
    """Check smoothness and completeness, listing every violation found."""
    report = ValidationReport(ok=True)

    def problem(text: str, key: Optional[str] = None, witness: Any = None) -> None:
        report.ok = False
        report.problems.append(text)
        if key is not None:
            report.witnesses[key] = witness

    if not X.rays:
        problem("no rays")
        return report
    n = X.dim
    if n < 1 or any(len(r) != n for r in X.rays):
        problem("rays of mixed or zero dimension")
        return report
    for i, r in enumerate(X.rays):
        if math.gcd(*r) != 1:
            problem(f"ray {i} {r} is not primitive", f"ray {i}", list(r))
    seen = set()
    for c in X.max_cones:
        key = tuple(sorted(c))
        if len(set(c)) != n or any(not 0 <= i < X.n_rays for i in c):
            problem(f"cone {list(c)} does not have {n} distinct rays", "cone", list(c))
            return report
        if key in seen:
            problem(f"cone {list(c)} listed twice", "cone", list(c))
        seen.add(key)
        d = det([X.rays[i] for i in c])
        if abs(d) != 1:
            problem(f"not smooth: cone {list(c)} has |det| = {abs(d)}", "not smooth", list(c))
    if not report.ok:
        return report

    by_face: Dict[Cone, List[int]] = {}
    for c in X.max_cones:
        for i in c:
            by_face.setdefault(tuple(sorted(set(c) - {i})), []).append(i)
    for tau, others in sorted(by_face.items()):
        if len(others) > 2:
            problem(f"not a fan: face {list(tau)} lies in {len(others)} maximal cones", "face", list(tau))
        elif len(others) == 1:
            w = _uncovered_direction(X, tau, others[0])
            problem(f"not complete: face {list(tau)} borders a single cone", "not complete", [fmt_q(x) for x in w])
        else:
            left, right = others
            lam = _coordinates(X, list(tau) + [left], X.rays[right])
            if lam[-1] >= 0:
                problem(f"not a fan: cones over face {list(tau)} lie on the same side", "face", list(tau))
    if not report.ok:
        return report

    for w in _search_directions(n):
        hits = [_cone_interior_contains(X, c, w) for c in X.max_cones]
        if None in hits:
            continue
        covered = sum(1 for h in hits if h)
        if covered == 0:
            problem("not complete", "not complete", [fmt_q(x) for x in w])
        elif covered > 1:
            problem(f"not a fan: direction covered by {covered} cones", "overlap", [fmt_q(x) for x in w])
        break
    return report


def _uncovered_direction(X: ToricVariety, tau: Cone, inner: int) -> QVector:
    """A direction just across a face that borders one cone only."""
    n = X.dim
    centre = tuple(sum((X.ray(i)[k] for i in tau), Fraction(0)) for k in range(n))
    step = Fraction(1, 2)
    for _ in range(12):
        w = tuple(c - step * x for c, x in zip(centre, X.ray(inner)))
        if not any(_cone_interior_contains(X, c, w) is not False for c in X.max_cones):
            return w
        step /= 2
    return tuple(c - step * x for c, x in zip(centre, X.ray(inner)))

# ---------------------- Section polytopes and classification ----------------------

@lru_cache(maxsize=4096)
def section_polytope(X: ToricVariety, D: ToricDivisor) -> Polytope:
    """P_D = {u : <u, v_i> >= -a_i for every ray}."""
    if len(D.coeffs) != X.n_rays:
        raise DimensionMismatch(f"divisor has {len(D.coeffs)} coefficients for {X.n_rays} rays")
    return from_halfspaces([Halfspace(X.ray(i), -a) for i, a in enumerate(D.coeffs)], X.dim)


def iitaka_dim(X: ToricVariety, D: ToricDivisor) -> Dimension:
    P = section_polytope(X, D)
    return NEG_INF if P.is_empty else P.affine_dim


def numerical_dim(X: ToricVariety, D: ToricDivisor) -> Dimension:
    """kappa_nu; equal to kappa under the toric abundance assumption."""
    log.debug("numerical dimension on %s taken as Iitaka dimension (toric abundance)", X.label())
    return iitaka_dim(X, D)


def is_nef(X: ToricVariety, D: ToricDivisor) -> bool:
    return all(w.intersect(D) >= 0 for w in walls(X))


def is_ample(X: ToricVariety, D: ToricDivisor) -> bool:
    return all(w.intersect(D) > 0 for w in walls(X))


def classify(X: ToricVariety, D: ToricDivisor) -> Classification:
    P = section_polytope(X, D)
    nef = is_nef(X, D)
    return Classification(
        psef=not P.is_empty,
        big=P.affine_dim == X.dim,
        nef=nef,
        semiample=nef,
    )


def _require_psef(X: ToricVariety, D: ToricDivisor) -> Polytope:
    P = section_polytope(X, D)
    if P.is_empty:
        raise HypothesisUnmet(f"divisor {D} is not pseudoeffective on {X.label()}")
    return P


def volume(X: ToricVariety, D: ToricDivisor) -> Fraction:
    """vol_X(D) = n! vol(P_D); zero unless D is big."""
    P = section_polytope(X, D)
    if P.affine_dim < X.dim:
        return Fraction(0)
    return math.factorial(X.dim) * polytope_volume(P, range(X.dim))

# ---------------------- Ample classes ----------------------

@lru_cache(maxsize=None)
def reference_ample(X: ToricVariety) -> ToricDivisor:
    """Sum of all D_i when ample; otherwise the LP-minimal ample class normalized on the first cone."""
    total = ToricDivisor(tuple(Fraction(1) for _ in X.rays))
    if is_ample(X, total):
        return total
    first = set(X.max_cones[0])
    free = [i for i in range(X.n_rays) if i not in first]
    constraints: List[Halfspace] = []
    for w in walls(X):
        coeff = {i: Fraction(0) for i in free}
        for i, b in ((w.left, Fraction(1)), (w.right, Fraction(1))) + w.relation:
            if i in coeff:
                coeff[i] += b
        normal = tuple(coeff[i] for i in free)
        if not any(normal):
            raise InvalidModel(f"{X.label()} is not projective: a wall pairs to zero with every class")
        constraints.append(Halfspace(normal, Fraction(1)))
    for k in range(len(free)):
        constraints.append(Halfspace(tuple(Fraction(1 if j == k else 0) for j in range(len(free))), Fraction(0)))
    region = from_halfspaces(constraints, len(free))
    if region.is_empty:
        raise InvalidModel(f"{X.label()} is not projective: no ample class")
    best = lp_optimize((1,) * len(free), region).witness
    coeffs = [Fraction(0)] * X.n_rays
    for i, value in zip(free, best):
        coeffs[i] = value
    A = ToricDivisor(tuple(coeffs))
    log.info("sum of boundary divisors is not ample on %s; using %s", X.label(), A)
    return A


def alternate_ample(X: ToricVariety, A: Optional[ToricDivisor] = None) -> ToricDivisor:
    """k A + D_0 with the least integer k keeping it ample."""
    A = A or reference_ample(X)
    D0 = ToricDivisor.prime(X, 0)
    k = 1
    for w in walls(X):
        bound = -w.intersect(D0) / w.intersect(A)
        k = max(k, math.floor(bound) + 1)
    return k * A + D0


def _schedule(schedule: Optional[Sequence[Fraction]]) -> Sequence[Fraction]:
    return schedule or get_settings().epsilon_schedule

# ---------------------- Asymptotic invariants ----------------------

def _order_on(X: ToricVariety, D: ToricDivisor, i: int) -> Fraction:
    P = section_polytope(X, D)
    return D.coeffs[i] + lp_optimize(X.ray(i), P).value


def asymptotic_order(X: ToricVariety, D: ToricDivisor, i: int,
                     A: Optional[ToricDivisor] = None,
                     schedule: Optional[Sequence[Fraction]] = None) -> Fraction:
    """ord_{D_i}(||D||): an LP over P_D when D is big, an epsilon limit otherwise."""
    P = _require_psef(X, D)
    if P.affine_dim == X.dim:
        return _order_on(X, D, i)
    A = A or reference_ample(X)
    return extrapolate_scalar(lambda eps: _order_on(X, D + eps * A, i), _schedule(schedule))


def _decomposition(X: ToricVariety, D: ToricDivisor, orders: Sequence[Fraction],
                   kind: DecompositionKind, assumptions: Tuple[str, ...] = ()) -> ZariskiDecomposition:
    positive = tuple(a - c for a, c in zip(D.coeffs, orders))
    negative = tuple((f"D{i}", c) for i, c in enumerate(orders) if c != 0)
    return ZariskiDecomposition(positive, negative, kind, semiample=is_nef(X, ToricDivisor(positive)),
                                assumptions=assumptions)


def sigma_s_decomposition(X: ToricVariety, D: ToricDivisor,
                          A: Optional[ToricDivisor] = None,
                          schedule: Optional[Sequence[Fraction]] = None) -> Tuple[ZariskiDecomposition, ZariskiDecomposition]:
    """(sigma, s) decompositions; the negative parts are computed independently and must agree."""
    P = _require_psef(X, D)
    sigma = [asymptotic_order(X, D, i, A, schedule) for i in range(X.n_rays)]
    s = [D.coeffs[i] + lp_optimize(X.ray(i), P).value for i in range(X.n_rays)]
    if sigma != s:
        raise ClosedFormRefuted(
            f"sigma and s negative parts differ on {X.label()} for {D}",
            witness={"sigma": [fmt_q(x) for x in sigma], "s": [fmt_q(x) for x in s]},
        )
    return (
        _decomposition(X, D, sigma, DecompositionKind.SIGMA),
        _decomposition(X, D, s, DecompositionKind.S, ("toric abundance: kappa = kappa_nu",)),
    )


def stable_base_locus(X: ToricVariety, D: ToricDivisor) -> FrozenSet[Cone]:
    """Cones whose face of P_D is empty."""
    P = section_polytope(X, D)
    cones = X.cones()
    if P.is_empty:
        return frozenset(cones)
    out = set()
    for c in cones:
        on_face = any(all(dot(v, X.ray(i)) == -D.coeffs[i] for i in c) for v in P.vertices)
        if not on_face:
            out.add(c)
    return frozenset(out)


def base_loci(X: ToricVariety, D: ToricDivisor,
              A: Optional[ToricDivisor] = None,
              schedule: Optional[Sequence[Fraction]] = None) -> BaseLoci:
    A = A or reference_ample(X)
    sched = _schedule(schedule)
    stable = stable_base_locus(X, D)
    augmented = stable_value(lambda eps: stable_base_locus(X, D - eps * A), sched)
    restricted = stable_value(lambda eps: stable_base_locus(X, D + eps * A), sched)
    if not (restricted <= stable <= augmented):
        raise ClosedFormRefuted(
            f"base loci not nested for {D} on {X.label()}",
            witness={"SB": sorted(stable), "B+": sorted(augmented), "B-": sorted(restricted)},
        )
    return BaseLoci(stable, augmented, restricted)

# ---------------------- Okounkov bodies ----------------------

def _check_flag(X: ToricVariety, flag: InvariantFlag) -> None:
    if len(flag.rays) != X.dim or not X.is_max_cone(flag.rays):
        raise ValueError(f"flag {list(flag.rays)} is not an ordered maximal cone of {X.label()}")


def flag_map(X: ToricVariety, D: ToricDivisor, flag: InvariantFlag) -> Tuple[Tuple[QVector, ...], QVector]:
    """u -> (<u, v_r> + a_r) over the ordered flag rays."""
    return tuple(X.ray(r) for r in flag.rays), tuple(D.coeffs[r] for r in flag.rays)


def _tight_rays(X: ToricVariety, D: ToricDivisor, u: QVector) -> Tuple[int, ...]:
    return tuple(i for i in range(X.n_rays) if dot(u, X.ray(i)) == -D.coeffs[i])


def okounkov_body(X: ToricVariety, D: ToricDivisor, flag: InvariantFlag, kind: Any = BodyKind.BIG,
                  A: Optional[ToricDivisor] = None,
                  schedule: Optional[Sequence[Fraction]] = None) -> Polytope:
    kind = BodyKind(kind)
    _check_flag(X, flag)
    P = section_polytope(X, D)
    if kind is BodyKind.BIG and P.affine_dim != X.dim:
        raise HypothesisUnmet(f"divisor {D} is not big on {X.label()}")
    if kind is BodyKind.VAL and P.is_empty:
        raise HypothesisUnmet(f"divisor {D} has no effective representative on {X.label()}")
    if kind is not BodyKind.LIM:
        return affine_image(P, flag_map(X, D, flag))
    _require_psef(X, D)
    return limiting_body(X, D, flag, A, schedule)


def limiting_body(X: ToricVariety, D: ToricDivisor, flag: InvariantFlag,
                  A: Optional[ToricDivisor] = None,
                  schedule: Optional[Sequence[Fraction]] = None) -> Polytope:
    """Flag image of NumP(D), extrapolated from the vertices of P_{D + eps A}."""
    A = A or reference_ample(X)

    def sample(eps: Fraction) -> Dict[Tuple[int, ...], QVector]:
        De = D + eps * A
        matrix, shift = flag_map(X, De, flag)
        return {
            _tight_rays(X, De, v): vadd(mat_vec(matrix, v), shift)
            for v in section_polytope(X, De).vertices
        }

    limit = extrapolate_to_zero(sample, _schedule(schedule))
    return hull(limit.values(), X.dim)


def restricted_body(X: ToricVariety, D: ToricDivisor, flag: InvariantFlag, k: int) -> Polytope:
    """Body of the restricted series on Y_{n-k}: flag image of the face of P_D over its cone."""
    _check_flag(X, flag)
    n = X.dim
    P = section_polytope(X, D)
    tau = flag.rays[: n - k]
    face = [v for v in P.vertices if all(dot(v, X.ray(i)) == -D.coeffs[i] for i in tau)]
    return affine_image(hull(face, n), flag_map(X, D, flag)) if face else Polytope.empty(n)


def face_counts(X: ToricVariety, D: ToricDivisor, cone: Sequence[int], m_max: int) -> List[int]:
    """#(face of P_{mD} over the cone) for m = 1..m_max: sections of mD restricted to V(cone)."""
    P = section_polytope(X, D)
    face = [v for v in P.vertices if all(dot(v, X.ray(i)) == -D.coeffs[i] for i in cone)]
    if not face:
        return [0] * m_max
    base = hull(face, X.dim)
    return [len(lattice_points(scale(base, m))) for m in range(1, m_max + 1)]


def restricted_volume(X: ToricVariety, D: ToricDivisor, flag: InvariantFlag, k: int,
                      A: Optional[ToricDivisor] = None,
                      schedule: Optional[Sequence[Fraction]] = None,
                      check_growth: bool = True) -> Fraction:
    """vol_{X|Y_{n-k}}(D) = k! vol(slice of the body), with a section-count cross-check."""
    _check_flag(X, flag)
    n = X.dim
    if not 1 <= k <= n:
        raise DimensionMismatch(f"restricted volume needs 1 <= k <= {n}, got {k}")
    tau = tuple(sorted(flag.rays[: n - k]))
    loci = base_loci(X, D, A, schedule)
    if tau in loci.augmented:
        raise HypothesisUnmet(f"restricted volume undefined here: V{list(tau)} lies in B+({D})")
    body = okounkov_body(X, D, flag, BodyKind.BIG)
    value = math.factorial(k) * polytope_volume(coordinate_slice(body, k), range(n - k, n))
    if check_growth:
        _check_face_growth(X, D, tau, k, value)
    return value


def face_count_volume(X: ToricVariety, D: ToricDivisor, tau: Sequence[int], k: int) -> Fraction:
    """k! vol of the face of P_D over tau, read off the k-th difference of its section counts.

    The face is dilated to a lattice polytope first; the result is rescaled back.
    """
    P = section_polytope(X, D)
    face = [v for v in P.vertices if all(dot(v, X.ray(i)) == -D.coeffs[i] for i in tau)]
    if not face:
        return Fraction(0)
    L = math.lcm(*(x.denominator for v in face for x in v))
    counts = face_counts(X, L * D, tau, k + 1)
    leading = sum((-1) ** (k - j) * math.comb(k, j) * counts[j] for j in range(k + 1))
    return Fraction(leading, L ** k)


def _check_face_growth(X: ToricVariety, D: ToricDivisor, tau: Cone, k: int, value: Fraction) -> None:
    """k-th difference of lattice counts on the face equals k! times its volume."""
    counted = face_count_volume(X, D, tau, k)
    if counted != value:
        raise ClosedFormRefuted(
            f"section counts on V{list(tau)} grow with leading term {fmt_q(counted)}, body gives {fmt_q(value)}",
            witness={"counted": fmt_q(counted), "volume": fmt_q(value)},
        )

# ---------------------- Abundance sanity check ----------------------

@dataclass(frozen=True)
class AbundanceReport:
    kappa: Dimension
    counts: Tuple[int, ...]
    consistent: bool
    assumption: str = "toric abundance: kappa = kappa_nu"


def abundance_report(X: ToricVariety, D: ToricDivisor, m_max: int = 12,
                     A: Optional[ToricDivisor] = None) -> AbundanceReport:
    """Lattice counts of floor(mD) + A should grow like m^kappa."""
    A = A or reference_ample(X)
    kappa = iitaka_dim(X, D)
    counts = tuple(len(lattice_points(section_polytope(X, (m * D).floor() + A))) for m in range(1, m_max + 1))
    consistent = True
    if kappa != NEG_INF:
        tail = range(m_max // 2, m_max + 1)
        ratios = [Fraction(counts[m - 1], m ** int(kappa)) for m in tail]
        consistent = min(ratios) > 0 and max(ratios) <= GROWTH_SPREAD * min(ratios)
    if not consistent:
        log.warning("section growth of %s on %s does not look like m^%s: %s", D, X.label(), kappa, counts)
    return AbundanceReport(kappa, counts, consistent)

# ---------------------- Graded linear series ----------------------

@dataclass(frozen=True)
class GradedSeries:
    """Series generated by a degree-one piece W_1 of lattice points of P_D."""
    variety: ToricVariety
    divisor: ToricDivisor
    generators: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        if not self.generators:
            raise ValueError("a graded series needs a nonempty degree-one piece")
        if not self.divisor.is_integral:
            raise ValueError("graded series are built on integral divisors")
        P = section_polytope(self.variety, self.divisor)
        for u in self.generators:
            if not P.contains_point(u):
                raise ValueError(f"generator {u} is not a section of {self.divisor}")


def series_generate(W: GradedSeries, k: int) -> List[Tuple[int, ...]]:
    """Degree-k piece: k-fold sums of the generators."""
    if k < 0:
        raise ValueError("degree must be nonnegative")
    piece = {tuple(0 for _ in range(W.variety.dim))}
    for _ in range(k):
        piece = {tuple(a + b for a, b in zip(p, g)) for p in piece for g in W.generators}
    return sorted(piece)


def series_body(W: GradedSeries, flag: InvariantFlag, degree: int = 1) -> Polytope:
    """Hull of the normalized valuations of the degree-`degree` piece."""
    X, D = W.variety, W.divisor
    _check_flag(X, flag)
    matrix, shift = flag_map(X, degree * D, flag)
    points = [tuple(x / degree for x in vadd(mat_vec(matrix, u), shift)) for u in series_generate(W, degree)]
    return hull(points, X.dim)


def series_volume(W: GradedSeries) -> Fraction:
    """vol_X(W) = n! vol(conv W_1)."""
    n = W.variety.dim
    return math.factorial(n) * polytope_volume(hull(W.generators, n), range(n))

# ---------------------- Blowups ----------------------

@dataclass(frozen=True)
class Blowup:
    variety: ToricVariety
    center: Cone
    new_ray: int

    def pullback(self, D: ToricDivisor) -> ToricDivisor:
        return ToricDivisor(D.coeffs + (sum((D.coeffs[i] for i in self.center), Fraction(0)),))


def blowup_fixed_point(X: ToricVariety, cone: Sequence[int]) -> Blowup:
    """Star subdivision of a maximal cone at the sum of its rays."""
    center = tuple(sorted(cone))
    if not X.is_max_cone(center):
        raise ValueError(f"blowup center {list(center)} is not a maximal cone")
    w = tuple(sum(X.rays[i][k] for i in center) for k in range(X.dim))
    r = X.n_rays
    cones: List[Cone] = []
    for c in X.max_cones:
        if tuple(sorted(c)) != center:
            cones.append(tuple(c))
            continue
        for i in center:
            cones.append(tuple(sorted((set(center) - {i}) | {r})))
    name = f"Bl{X.name}" if X.name else ""
    return Blowup(ToricVariety(X.rays + (w,), tuple(cones), name), center, r)


# ---------------------- Quick self-test ----------------------
if __name__ == "__main__":
    P2 = ToricVariety.from_data([(1, 0), (0, 1), (-1, -1)], [(0, 1), (1, 2), (2, 0)], "P2")
    H = ToricDivisor.of(0, 0, 1)
    print(validate(P2))
    print(classify(P2, H))
    print(okounkov_body(P2, H, InvariantFlag((0, 1))))
    print(restricted_volume(P2, H, InvariantFlag((0, 1)), 1))
