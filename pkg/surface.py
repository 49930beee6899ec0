"""
Lattice-model surfaces: Néron-Severi lattice, intersection form, a curated list
of irreducible curves and generators of the effective cone.

Zariski decomposition runs Bauer's support-growing iteration; Okounkov polygons
for a flag (C, general point of C) come out of an exact chamber sweep along
D - tC, where every chamber boundary is the root of an affine function of t.

Usage:
    from surface import LatticeSurface, SurfFlag, okounkov_polygon

    S = LatticeSurface.from_data(2, [[1, 0], [0, -1]],
                                 curves=[("E", [0, 1]), ("H-E", [1, -1])],
                                 effective_generators=[[0, 1], [1, -1]])
    okounkov_polygon(S, (1, 0), SurfFlag("H-E"), "big")   # triangle (0,0),(1,0),(0,1)
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from config import get_settings
from decomposition import DecompositionKind, ZariskiDecomposition
from errors import DimensionMismatch, HypothesisUnmet, InvalidModel, UnboundedError
from exactgeom import (Polytope, QMatrix, QVector, cone, dot, extrapolate_to_zero,
                       extrapolate_scalar, fmt_q, from_halfspaces, hull, inertia,
                       qvec, rank, solve, vadd, vscale, vsub, zero)
from toric import (NEG_INF, BodyKind, Classification, Dimension, ToricDivisor, ToricVariety,
                   ValidationReport, curve_intersection, walls)

log = logging.getLogger(__name__)

SurfDivisor = QVector

# ---------------------- Model ----------------------

@dataclass(frozen=True)
class Curve:
    name: str
    cls: QVector


@dataclass(frozen=True)
class SurfFlag:
    """(C, x) with x a general point of the curve C."""
    curve: str
    point: str = "general"

    def __post_init__(self):
        if self.point != "general":
            raise ValueError(f"only general flag points are supported, got {self.point!r}")


@dataclass(frozen=True)
class LatticeSurface:
    rank: int
    form: QMatrix
    curves: Tuple[Curve, ...]
    effective_generators: Tuple[QVector, ...]
    fibrations: Tuple[QVector, ...] = ()
    abundant: bool = False
    ample: Optional[QVector] = None
    name: str = field(default="", compare=False)

    @classmethod
    def from_data(cls, rank: int, form: Sequence[Sequence[Any]],
                  curves: Iterable[Tuple[str, Sequence[Any]]],
                  effective_generators: Iterable[Sequence[Any]],
                  fibrations: Iterable[Sequence[Any]] = (),
                  abundant: bool = False,
                  ample: Optional[Sequence[Any]] = None,
                  name: str = "") -> "LatticeSurface":
        return cls(
            rank=int(rank),
            form=tuple(qvec(row) for row in form),
            curves=tuple(Curve(str(n), qvec(c)) for n, c in curves),
            effective_generators=tuple(qvec(g) for g in effective_generators),
            fibrations=tuple(qvec(f) for f in fibrations),
            abundant=bool(abundant),
            ample=qvec(ample) if ample is not None else None,
            name=name,
        )

    def curve(self, name: str) -> Curve:
        for c in self.curves:
            if c.name == name:
                return c
        raise ValueError(f"no curve named {name!r}; known: {[c.name for c in self.curves]}")

    def label(self) -> str:
        return self.name or f"surface(rho={self.rank})"


def pairing(S: LatticeSurface, a: Sequence[Any], b: Sequence[Any]) -> Fraction:
    a, b = qvec(a), qvec(b)
    if len(a) != S.rank or len(b) != S.rank:
        raise DimensionMismatch(f"classes of length {len(a)}, {len(b)} on a rank {S.rank} lattice")
    return sum((a[i] * S.form[i][j] * b[j] for i in range(S.rank) for j in range(S.rank)), Fraction(0))


def _div(S: LatticeSurface, D: Sequence[Any]) -> SurfDivisor:
    D = qvec(D)
    if len(D) != S.rank:
        raise DimensionMismatch(f"class of length {len(D)} on a rank {S.rank} lattice")
    return D


@lru_cache(maxsize=None)
def effective_cone(S: LatticeSurface) -> Polytope:
    return cone(S.effective_generators, S.rank)


@lru_cache(maxsize=None)
def nef_rays(S: LatticeSurface) -> Tuple[QVector, ...]:
    """Extremal rays of the nef cone, dual to the effective cone."""
    normals = [tuple(dot(row, g) for row in S.form) for g in S.effective_generators]
    nef = from_halfspaces([(n, 0) for n in normals if any(n)], S.rank)
    return nef.rays

# ---------------------- Validation ----------------------

def validate(S: LatticeSurface) -> ValidationReport:
    report = ValidationReport(ok=True)

    def problem(text: str, key: Optional[str] = None, witness: Any = None) -> None:
        report.ok = False
        report.problems.append(text)
        if key is not None:
            report.witnesses[key] = witness

    rho = S.rank
    if rho < 1 or len(S.form) != rho or any(len(r) != rho for r in S.form):
        problem(f"intersection form is not {rho}x{rho}")
        return report
    for c in S.curves:
        if len(c.cls) != rho:
            problem(f"curve {c.name} has a class of length {len(c.cls)}")
    if any(len(g) != rho for g in S.effective_generators) or not S.effective_generators:
        problem("effective generators missing or of the wrong length")
    if not report.ok:
        return report

    asym = [(i, j) for i in range(rho) for j in range(i) if S.form[i][j] != S.form[j][i]]
    if asym:
        problem("intersection form is not symmetric", "asymmetric entry", list(asym[0]))
        return report
    sig = inertia(S.form)
    if sig != (1, rho - 1, 0):
        problem(f"signature not (1,rho-1): inertia {sig}", "inertia", list(sig))

    Eff = effective_cone(S)
    if Eff.affine_dim != rho or rank([h.normal for h in Eff.halfspaces]) != rho:
        problem("effective generators do not span a full pointed cone")
    for c in S.curves:
        if not Eff.contains_point(c.cls):
            problem(f"curve {c.name} is not in the effective cone", "curve", c.name)
        if pairing(S, c.cls, c.cls) < 0 and c.cls not in S.effective_generators:
            problem(f"negative curve {c.name} is not an effective generator", "curve", c.name)
    for F in S.fibrations:
        if len(F) != rho or not any(F) or pairing(S, F, F) != 0 or any(pairing(S, F, g) < 0 for g in S.effective_generators):
            problem(f"fibration class {[fmt_q(x) for x in F]} is not a nef class of square 0", "fibration",
                    [fmt_q(x) for x in F])
    if S.ample is not None:
        if pairing(S, S.ample, S.ample) <= 0 or any(pairing(S, S.ample, g) <= 0 for g in S.effective_generators):
            problem("declared ample class is not ample", "ample", [fmt_q(x) for x in S.ample])
    return report

# ---------------------- Zariski decomposition ----------------------

def _lex_negative(value: Fraction, slope: Fraction) -> bool:
    return value < 0 or (value == 0 and slope < 0)


def _coefficients(S: LatticeSurface, D: SurfDivisor, support: Sequence[Curve]) -> QVector:
    """Solve (D - sum x_i C_i) . C_j = 0 over the support."""
    if not support:
        return ()
    gram = [[pairing(S, a.cls, b.cls) for b in support] for a in support]
    if inertia(gram) != (0, len(support), 0):
        raise InvalidModel(f"curves {[c.name for c in support]} have a Gram matrix that is not negative definite")
    return solve(gram, [pairing(S, D, c.cls) for c in support])


def _subtract(D: SurfDivisor, support: Sequence[Curve], coeffs: Sequence[Fraction]) -> SurfDivisor:
    out = D
    for c, x in zip(support, coeffs):
        out = vsub(out, vscale(x, c.cls))
    return out


def _negative_support(S: LatticeSurface, D: SurfDivisor, direction: Optional[SurfDivisor] = None) -> Tuple[Curve, ...]:
    """Support of N for D, or for D + delta*direction as delta -> 0+."""
    direction = direction or zero(S.rank)
    support: List[Curve] = []
    while True:
        P0 = _subtract(D, support, _coefficients(S, D, support))
        P1 = _subtract(direction, support, _coefficients(S, direction, support))
        new = [c for c in S.curves if c not in support
               and _lex_negative(pairing(S, P0, c.cls), pairing(S, P1, c.cls))]
        if not new:
            return tuple(support)
        log.debug("support %s grows by %s", [c.name for c in support], [c.name for c in new])
        support = sorted(support + new, key=lambda c: c.name)


def is_psef(S: LatticeSurface, D: Sequence[Any]) -> bool:
    return effective_cone(S).contains_point(_div(S, D))


def _require_psef(S: LatticeSurface, D: SurfDivisor) -> None:
    if not is_psef(S, D):
        raise HypothesisUnmet(f"class {[fmt_q(x) for x in D]} is not pseudoeffective on {S.label()}")


def zariski_decompose(S: LatticeSurface, D: Sequence[Any], kind: Any = DecompositionKind.SIGMA) -> ZariskiDecomposition:
    kind = DecompositionKind(kind)
    D = _div(S, D)
    _require_psef(S, D)
    if kind is not DecompositionKind.SIGMA and not S.abundant:
        raise HypothesisUnmet(f"{kind.value}-decomposition needs the abundance flag on {S.label()}")
    support = _negative_support(S, D)
    coeffs = _coefficients(S, D, support)
    if any(x <= 0 for x in coeffs):
        raise InvalidModel(f"Zariski iteration produced a non-positive coefficient on {S.label()}")
    P = _subtract(D, support, coeffs)
    if any(pairing(S, P, g) < 0 for g in S.effective_generators):
        raise InvalidModel(f"positive part is not nef on {S.label()}: curve list incomplete")
    assumptions: Tuple[str, ...] = ()
    semiample = False
    if kind is DecompositionKind.S:
        assumptions = ("abundance: kappa = kappa_nu",)
    elif kind is DecompositionKind.GOOD:
        assumptions = ("abundant model: nef positive part taken semiample",)
        semiample = True
    return ZariskiDecomposition(
        positive=P,
        negative=tuple((c.name, x) for c, x in zip(support, coeffs)),
        kind=kind,
        semiample=semiample,
        assumptions=assumptions,
    )


def numerical_dim(S: LatticeSurface, D: Sequence[Any]) -> Dimension:
    D = _div(S, D)
    if not is_psef(S, D):
        return NEG_INF
    P = zariski_decompose(S, D).positive
    if pairing(S, P, P) > 0:
        return 2
    return 0 if not any(P) else 1


def iitaka_dim(S: LatticeSurface, D: Sequence[Any]) -> Dimension:
    if not S.abundant:
        raise HypothesisUnmet(f"Iitaka dimension on {S.label()} needs the abundance flag")
    return numerical_dim(S, D)


def classify(S: LatticeSurface, D: Sequence[Any]) -> Classification:
    D = _div(S, D)
    psef = is_psef(S, D)
    nef = all(pairing(S, D, g) >= 0 for g in S.effective_generators)
    big = psef and numerical_dim(S, D) == 2
    return Classification(psef=psef, big=big, nef=nef, semiample=nef and S.abundant)


def volume(S: LatticeSurface, D: Sequence[Any]) -> Fraction:
    """vol_X(D) = P^2 for big D, zero otherwise."""
    D = _div(S, D)
    if numerical_dim(S, D) != 2:
        return Fraction(0)
    P = zariski_decompose(S, D).positive
    return pairing(S, P, P)

# ---------------------- Ample classes ----------------------

def reference_ample(S: LatticeSurface) -> SurfDivisor:
    """Declared ample class, or the sum of the primitive extremal nef rays."""
    if S.ample is not None:
        return S.ample
    total = zero(S.rank)
    for r in nef_rays(S):
        total = vadd(total, r)
    return total


def alternate_ample(S: LatticeSurface) -> SurfDivisor:
    return vadd(reference_ample(S), nef_rays(S)[0])

# ---------------------- Chamber sweep ----------------------

def mu(S: LatticeSurface, D: Sequence[Any], curve: str) -> Fraction:
    """max{t : D - tC pseudoeffective}."""
    D = _div(S, D)
    C = S.curve(curve).cls
    _require_psef(S, D)
    bounds = [h.slack(D) / dot(h.normal, C) for h in effective_cone(S).halfspaces if dot(h.normal, C) > 0]
    if not bounds:
        raise UnboundedError(f"D - t{curve} stays pseudoeffective for every t")
    return min(bounds)


@dataclass(frozen=True)
class Chamber:
    """On [start, end]: N_t = sum (n0 + t n1) C and beta(t) = b0 + t b1."""
    start: Fraction
    end: Fraction
    negative: Tuple[Tuple[str, Fraction, Fraction], ...]
    beta: Tuple[Fraction, Fraction]

    def beta_at(self, t: Fraction) -> Fraction:
        return self.beta[0] + t * self.beta[1]


@dataclass(frozen=True)
class SweepResult:
    a: Fraction
    mu: Fraction
    breakpoints: Tuple[Tuple[Fraction, Fraction], ...]
    chambers: Tuple[Chamber, ...]

    def polygon(self) -> Polytope:
        points = [(t, Fraction(0)) for t, _ in self.breakpoints] + list(self.breakpoints)
        return hull(points, 2)


def parametric_sweep(S: LatticeSurface, D: Sequence[Any], curve: str) -> SweepResult:
    """Chambers of D - tC on [a, mu] with affine negative parts and beta(t) = P_t . C."""
    D = _div(S, D)
    C = S.curve(curve)
    a = zariski_decompose(S, D).coefficient(C.name)
    top = mu(S, D, C.name)
    minus_C = vscale(-1, C.cls)
    breakpoints: List[Tuple[Fraction, Fraction]] = []
    chambers: List[Chamber] = []
    t = a
    while True:
        Dt = vadd(D, vscale(t, minus_C))
        support = _negative_support(S, Dt, minus_C if t < top else None)
        x0 = _coefficients(S, D, support)
        x1 = _coefficients(S, minus_C, support)
        P0 = _subtract(D, support, x0)
        P1 = _subtract(minus_C, support, x1)
        beta = (pairing(S, P0, C.cls), pairing(S, P1, C.cls))
        breakpoints.append((t, beta[0] + t * beta[1]))
        if t >= top:
            break
        events = [top]
        for other in S.curves:
            if other in support:
                continue
            p0, p1 = pairing(S, P0, other.cls), pairing(S, P1, other.cls)
            if p1 < 0 and -p0 / p1 > t:
                events.append(-p0 / p1)
        for n0, n1 in zip(x0, x1):
            if n1 < 0 and -n0 / n1 > t:
                events.append(-n0 / n1)
        nxt = min(events)
        chambers.append(Chamber(
            t, nxt,
            tuple((c.name, n0, n1) for c, n0, n1 in zip(support, x0, x1)),
            beta,
        ))
        log.debug("chamber [%s, %s] support %s", t, nxt, [c.name for c in support])
        t = nxt
    return SweepResult(a, top, tuple(breakpoints), tuple(chambers))

# ---------------------- Okounkov polygons ----------------------

def _flag_curve(S: LatticeSurface, flag: SurfFlag) -> Curve:
    return S.curve(flag.curve)


def _fibration_multiple(S: LatticeSurface, P: SurfDivisor) -> Optional[Tuple[QVector, Fraction]]:
    """(F, d) with P = d F for a declared fibration class F."""
    for F in S.fibrations:
        if not any(F):
            continue
        k = next(i for i, x in enumerate(F) if x != 0)
        d = P[k] / F[k]
        if d > 0 and vscale(d, F) == P:
            return F, d
    return None


def okounkov_polygon(S: LatticeSurface, D: Sequence[Any], flag: SurfFlag, kind: Any = BodyKind.BIG) -> Polytope:
    kind = BodyKind(kind)
    D = _div(S, D)
    C = _flag_curve(S, flag)
    nd = numerical_dim(S, D)
    if kind is BodyKind.BIG:
        if nd != 2:
            raise HypothesisUnmet(f"class {[fmt_q(x) for x in D]} is not big on {S.label()}")
        return parametric_sweep(S, D, C.name).polygon()
    if nd == NEG_INF:
        raise HypothesisUnmet(f"class {[fmt_q(x) for x in D]} is not pseudoeffective on {S.label()}")
    if nd == 2:
        return parametric_sweep(S, D, C.name).polygon()
    if kind is BodyKind.VAL and not S.abundant:
        raise HypothesisUnmet(f"valuative body of a non-big class needs the abundance flag on {S.label()}")

    dec = zariski_decompose(S, D)
    a = dec.coefficient(C.name)
    P = dec.positive
    if kind is BodyKind.LIM:
        height = pairing(S, P, C.cls)
        if nd == 1 and height > 0:
            return hull([(a, 0), (a, height)], 2)
        return hull([(a, 0), (mu(S, D, C.name), 0)], 2)

    if nd == 0:
        return hull([(a, 0)], 2)
    found = _fibration_multiple(S, P)
    if found is None:
        raise HypothesisUnmet("fibration data required")
    F, d = found
    if pairing(S, C.cls, F) >= 1:
        return hull([(a, 0), (a, d)], 2)
    if C.cls == F:
        return hull([(a, 0), (a + d, 0)], 2)
    raise HypothesisUnmet(f"fibration data required: {C.name} is a fibre component")


def limiting_polygon_by_extrapolation(S: LatticeSurface, D: Sequence[Any], flag: SurfFlag,
                                      A: Optional[Sequence[Any]] = None,
                                      schedule: Optional[Sequence[Fraction]] = None) -> Polytope:
    """Extrapolate the big polygons of D + eps A to eps = 0."""
    D = _div(S, D)
    A = _div(S, A) if A is not None else reference_ample(S)
    C = _flag_curve(S, flag)
    _require_psef(S, D)

    def sample(eps: Fraction) -> Dict[Tuple[str, int], QVector]:
        sweep = parametric_sweep(S, vadd(D, vscale(eps, A)), C.name)
        out: Dict[Tuple[str, int], QVector] = {}
        for i, (t, b) in enumerate(sweep.breakpoints):
            out[("bottom", i)] = (t, Fraction(0))
            out[("top", i)] = (t, b)
        return out

    limit = extrapolate_to_zero(sample, schedule or get_settings().epsilon_schedule)
    return hull(limit.values(), 2)

# ---------------------- Restricted volumes and base loci ----------------------

@dataclass(frozen=True)
class DivisorialLoci:
    restricted: Tuple[str, ...]
    augmented: Optional[Tuple[str, ...]]

    def to_json(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"B-": list(self.restricted)}
        if self.augmented is not None:
            out["B+"] = list(self.augmented)
        return out


def base_loci_divisorial(S: LatticeSurface, D: Sequence[Any], augmented: bool = True) -> DivisorialLoci:
    """B- = supp N; B+ = supp N plus the curves P is trivial on (big D only)."""
    D = _div(S, D)
    dec = zariski_decompose(S, D)
    minus = tuple(sorted(dec.support))
    if not augmented:
        return DivisorialLoci(minus, None)
    if numerical_dim(S, D) != 2:
        raise HypothesisUnmet("augmented base locus of a non-big class is the whole surface")
    plus = set(minus) | {c.name for c in S.curves if pairing(S, dec.positive, c.cls) == 0}
    return DivisorialLoci(minus, tuple(sorted(plus)))


def restricted_volumes(S: LatticeSurface, D: Sequence[Any], curve: str,
                       A: Optional[Sequence[Any]] = None,
                       schedule: Optional[Sequence[Fraction]] = None) -> Tuple[Optional[Fraction], Fraction]:
    """(vol_{X|C}(D), vol+_{X|C}(D)).

    vol is None when C lies in B+(D); vol+ only needs C outside B-(D).
    """
    D = _div(S, D)
    C = S.curve(curve)
    _require_psef(S, D)
    dec = zariski_decompose(S, D)
    P = dec.positive
    if C.name in dec.support:
        raise HypothesisUnmet(f"{C.name} lies in B-(D): restricted volumes undefined")

    if numerical_dim(S, D) == 2:
        loci = base_loci_divisorial(S, D)
        A = _div(S, A) if A is not None else reference_ample(S)
        plus = extrapolate_scalar(
            lambda eps: pairing(S, zariski_decompose(S, vadd(D, vscale(eps, A))).positive, C.cls),
            schedule or get_settings().epsilon_schedule,
        )
        return (None if C.name in loci.augmented else pairing(S, P, C.cls)), plus

    plus = pairing(S, P, C.cls)
    if not any(P):
        return Fraction(0), plus
    found = _fibration_multiple(S, P)
    if found is None:
        raise HypothesisUnmet("fibration data required")
    F, d = found
    return (d if pairing(S, C.cls, F) >= 1 else Fraction(0)), plus

# ---------------------- Toric surfaces ----------------------

def _basis(X: ToricVariety) -> List[int]:
    first = set(X.max_cones[0])
    return [i for i in range(X.n_rays) if i not in first]


def toric_class(X: ToricVariety, D: ToricDivisor) -> SurfDivisor:
    """Class of a torus-invariant divisor in the basis D_i, i outside the first cone."""
    first = X.max_cones[0]
    u = solve([X.ray(i) for i in first], [-D.coeffs[i] for i in first])
    return tuple(D.coeffs[j] + dot(u, X.ray(j)) for j in _basis(X))


def _fibre_classes(X: ToricVariety) -> List[SurfDivisor]:
    out: List[SurfDivisor] = []
    for i, j in ((i, j) for i in range(X.n_rays) for j in range(i + 1, X.n_rays)):
        if tuple(-x for x in X.rays[i]) != X.rays[j]:
            continue
        m = (-X.rays[i][1], X.rays[i][0])
        F = ToricDivisor(tuple(Fraction(max(dot(m, X.ray(w)), 0)) for w in range(X.n_rays)))
        cls = toric_class(X, F)
        if cls not in out:
            out.append(cls)
    return out


def from_toric(X: ToricVariety) -> LatticeSurface:
    """Lattice model of a smooth complete toric surface."""
    if X.dim != 2:
        raise DimensionMismatch(f"from_toric needs a toric surface, got dimension {X.dim}")
    basis = _basis(X)
    by_ray = {w.tau[0]: w for w in walls(X)}
    form = tuple(
        tuple(curve_intersection(X, ToricDivisor.prime(X, i), by_ray[j]) for j in basis)
        for i in basis
    )
    curves = [Curve(f"D{i}", toric_class(X, ToricDivisor.prime(X, i))) for i in range(X.n_rays)]
    generators: List[QVector] = []
    for c in curves:
        if c.cls not in generators:
            generators.append(c.cls)
    return LatticeSurface(
        rank=len(basis),
        form=form,
        curves=tuple(curves),
        effective_generators=tuple(generators),
        fibrations=tuple(_fibre_classes(X)),
        abundant=True,
        name=f"{X.name} model" if X.name else "",
    )


# ---------------------- Quick self-test ----------------------
if __name__ == "__main__":
    S = LatticeSurface.from_data(2, [[1, 0], [0, -1]],
                                 curves=[("E", [0, 1]), ("H-E", [1, -1])],
                                 effective_generators=[[0, 1], [1, -1]],
                                 fibrations=[[1, -1]], abundant=True, name="Bl1P2")
    print(validate(S))
    print(zariski_decompose(S, (1, 1)).to_json())
    print(parametric_sweep(S, (1, 0), "H-E"))
    print(okounkov_polygon(S, (1, 0), SurfFlag("H-E")))
