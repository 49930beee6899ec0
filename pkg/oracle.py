"""
Sampling oracle for toric Okounkov bodies.

Sections of mD are finite sums of characters chi^u over lattice points of
P_{mD}; their valuation vectors along a flag are computed literally (iterated
order of vanishing), normalized by m, and hulled. The hulls are inner
approximations of the body and are compared against the closed forms.

Usage:
    from oracle import SampleConfig, sample_body, convergence_report

    levels = sample_body(X, D, InvariantFlag((0, 1)), SampleConfig(degrees=(1, 2, 4)))
    report = convergence_report(levels, okounkov_body(X, D, InvariantFlag((0, 1))))
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import sympy as sp

from config import get_settings
from errors import ClosedFormRefuted, DimensionMismatch, HypothesisUnmet, NotCoordinateFlat
from exactgeom import (Polytope, QVector, contains, dot, equals, flat_volume, fmt_q, hull,
                       lattice_points, q, solve, vscale)
from toric import InvariantFlag, ToricDivisor, ToricVariety, section_polytope

log = logging.getLogger(__name__)

Lattice = Tuple[int, ...]

# ---------------------- Types ----------------------

@dataclass(frozen=True)
class Section:
    """sum c_u chi^u, a section of O(mD)."""
    level: int
    terms: Tuple[Tuple[Lattice, Fraction], ...]

    def __post_init__(self):
        if self.level < 1:
            raise ValueError(f"section level must be positive, got {self.level}")
        if not self.terms:
            raise ValueError("a section needs at least one term")
        if any(c == 0 for _, c in self.terms):
            raise ValueError("section terms must have nonzero coefficients")

    @classmethod
    def of(cls, level: int, terms: Mapping[Sequence[int], Any]) -> "Section":
        return cls(level, tuple(sorted((tuple(int(x) for x in u), q(c)) for u, c in terms.items() if q(c) != 0)))

    def check(self, X: ToricVariety, D: ToricDivisor) -> None:
        P = section_polytope(X, self.level * D)
        for u, _ in self.terms:
            if not P.contains_point(u):
                raise ValueError(f"term {u} is not a lattice point of P_mD at m={self.level}")


@dataclass(frozen=True)
class ValuationVector:
    """nu(s) / m."""
    entries: QVector
    level: int

    def __post_init__(self):
        if any(x < 0 for x in self.entries):
            raise ValueError(f"valuation entries must be nonnegative: {[fmt_q(x) for x in self.entries]}")

    @property
    def raw(self) -> QVector:
        return vscale(self.level, self.entries)


@dataclass(frozen=True)
class GeneralCurveFlag:
    """Y_1 = D_ray on a toric surface, Y_2 a general point of it (torus coordinate x0)."""
    ray: int
    x0: Optional[Fraction] = None


@dataclass(frozen=True)
class SampleConfig:
    degrees: Tuple[int, ...] = (1, 2, 4, 8)
    samples: int = 64
    seed: int = field(default_factory=lambda: get_settings().seed)
    pool: int = 3
    workers: int = field(default_factory=lambda: get_settings().workers)

    def __post_init__(self):
        if not self.degrees or any(m < 1 for m in self.degrees):
            raise ValueError("sampling degrees must be positive")
        if self.samples < 1:
            raise ValueError("samples per degree must be positive")
        if self.pool < 1:
            raise ValueError("coefficient pool must be positive")

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "SampleConfig":
        kwargs: Dict[str, Any] = {}
        if "degrees" in data:
            kwargs["degrees"] = tuple(int(m) for m in data["degrees"])
        for key in ("samples", "seed", "pool", "workers"):
            if key in data:
                kwargs[key] = int(data[key])
        return cls(**kwargs)

    def to_json(self) -> Dict[str, Any]:
        return {"degrees": list(self.degrees), "samples": self.samples, "seed": self.seed, "pool": self.pool}

# ---------------------- Valuations ----------------------

def nu_invariant(X: ToricVariety, D: ToricDivisor, s: Section, flag: InvariantFlag) -> ValuationVector:
    """Iterated minima of <u, v_r> + m a_r over the surviving terms."""
    m = s.level
    terms = dict(s.terms)
    entries: List[Fraction] = []
    for r in flag.rays:
        v, a = X.ray(r), D.coeffs[r]
        order = {u: dot(u, v) + m * a for u in terms}
        low = min(order.values())
        terms = {u: c for u, c in terms.items() if order[u] == low}
        entries.append(low / m)
    return ValuationVector(tuple(entries), m)


def _neighbour(X: ToricVariety, ray: int) -> int:
    for c in X.max_cones:
        if ray in c:
            return next(i for i in c if i != ray)
    raise ValueError(f"ray {ray} lies in no maximal cone")


def _dual_basis(X: ToricVariety, ray: int) -> Tuple[QVector, QVector, int]:
    """(m_c, m') dual to (v_ray, v_neighbour), and the neighbour index."""
    other = _neighbour(X, ray)
    basis = [X.ray(ray), X.ray(other)]
    m_c = solve(basis, (1, 0))
    m_o = solve(basis, (0, 1))
    return m_c, m_o, other


def _restriction(X: ToricVariety, D: ToricDivisor, s: Section, ray: int) -> Tuple[Fraction, sp.Poly]:
    """nu_1 and the restriction of the leading terms to D_ray as a polynomial in y."""
    if X.dim != 2:
        raise DimensionMismatch(f"general-point flags need a toric surface, got dimension {X.dim}")
    m = s.level
    other = _neighbour(X, ray)
    v, a = X.ray(ray), D.coeffs[ray]
    order = {u: dot(u, v) + m * a for u, _ in s.terms}
    low = min(order.values())
    leading = [(int(dot(u, X.ray(other))), c) for u, c in s.terms if order[u] == low]
    base = min(e for e, _ in leading)
    y = sp.Symbol("y")
    return low, sp.Poly(sum(_sym(c) * y ** (e - base) for e, c in leading), y)


def _sym(x: Fraction) -> sp.Rational:
    return sp.Rational(x.numerator, x.denominator)


def _root_multiplicity(poly: sp.Poly, x0: Fraction) -> int:
    root = _sym(x0)
    factor = sp.Poly(poly.gen - root, poly.gen)
    k = 0
    while not poly.is_zero and poly.eval(root) == 0:
        poly = poly.quo(factor)
        k += 1
    return k


def nu_general_surface(X: ToricVariety, D: ToricDivisor, s: Section, ray: int, x0: Any) -> ValuationVector:
    """(ord_{D_ray}, ord at the point y = x0 of D_ray) of s, over m."""
    x0 = q(x0)
    if x0 == 0:
        raise ValueError("x0 = 0 is a torus-fixed point of the flag curve")
    low, poly = _restriction(X, D, s, ray)
    k = _root_multiplicity(poly, x0)
    return ValuationVector((low / s.level, Fraction(k, s.level)), s.level)

# ---------------------- Section constructions ----------------------

def monomial_sections(X: ToricVariety, D: ToricDivisor, m: int) -> List[Section]:
    return [Section(m, ((u, Fraction(1)),)) for u in lattice_points(section_polytope(X, m * D))]


def multiply_sections(s: Section, t: Section) -> Optional[Section]:
    """Product section of level s.level + t.level; None if everything cancels."""
    out: Dict[Lattice, Fraction] = {}
    for u, c in s.terms:
        for w, d in t.terms:
            key = tuple(a + b for a, b in zip(u, w))
            out[key] = out.get(key, Fraction(0)) + c * d
    out = {u: c for u, c in out.items() if c != 0}
    return Section.of(s.level + t.level, out) if out else None


def _rows(X: ToricVariety, D: ToricDivisor, m: int, ray: int) -> Dict[Fraction, List[Lattice]]:
    """Lattice points of P_mD grouped by their order along D_ray."""
    v, a = X.ray(ray), D.coeffs[ray]
    rows: Dict[Fraction, List[Lattice]] = {}
    for u in lattice_points(section_polytope(X, m * D)):
        rows.setdefault(dot(u, v) + m * a, []).append(u)
    return rows


def vanishing_section(X: ToricVariety, D: ToricDivisor, m: int, ray: int, level_row: Any,
                      x0: Any, k: int, extra: Sequence[Any] = ()) -> Section:
    """y^lo (y - x0)^k g(y) on one row of P_mD, with g = 1 + extra coefficients."""
    x0 = q(x0)
    level_row = q(level_row)
    rows = _rows(X, D, m, ray)
    if level_row not in rows:
        raise ValueError(f"no lattice points of P_mD at order {level_row} along D{ray}")
    m_c, m_o, other = _dual_basis(X, ray)
    exps = sorted(int(dot(u, X.ray(other))) for u in rows[level_row])
    lo, hi = exps[0], exps[-1]
    if not 0 <= k <= hi - lo:
        raise ValueError(f"vanishing order {k} outside 0..{hi - lo}")
    y = sp.Symbol("y")
    g = sp.Integer(1) + sum(_sym(q(c)) * y ** (i + 1) for i, c in enumerate(extra[: hi - lo - k]))
    poly = sp.Poly((y - _sym(x0)) ** k * g, y)
    shift_c = level_row - m * D.coeffs[ray]
    terms: Dict[Lattice, Fraction] = {}
    for (e,), c in poly.terms():
        u = tuple(shift_c * a + (lo + e) * b for a, b in zip(m_c, m_o))
        terms[tuple(int(x) for x in u)] = q(sp.Rational(c))
    return Section.of(m, terms)

# ---------------------- Sampling ----------------------

def draw_x0(seed: int) -> Fraction:
    """A small-height nonzero rational: the torus coordinate of the general point."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    p = int(rng.integers(1, 6)) * (1 if rng.integers(0, 2) else -1)
    return Fraction(p, int(rng.integers(1, 6)))


def _pool(rng: np.random.Generator, size: int, pool: int) -> List[Fraction]:
    values = [c for c in range(-pool, pool + 1) if c != 0]
    return [Fraction(values[int(i)]) for i in rng.integers(0, len(values), size=size)]


def _sample_level(X: ToricVariety, D: ToricDivisor, flag: Union[InvariantFlag, GeneralCurveFlag],
                  cfg: SampleConfig, m: int, seq: np.random.SeedSequence, x0: Fraction) -> Tuple[int, Optional[Polytope]]:
    rng = np.random.default_rng(seq)
    points = lattice_points(section_polytope(X, m * D))
    if not points:
        return m, None

    def nu(s: Section) -> ValuationVector:
        if isinstance(flag, GeneralCurveFlag):
            return nu_general_surface(X, D, s, flag.ray, x0)
        return nu_invariant(X, D, s, flag)

    values = [nu(s).entries for s in monomial_sections(X, D, m)]
    for _ in range(cfg.samples):
        size = int(rng.integers(1, min(len(points), 6) + 1))
        idx = rng.choice(len(points), size=size, replace=False)
        coeffs = _pool(rng, size, cfg.pool)
        s = Section.of(m, {points[int(i)]: c for i, c in zip(idx, coeffs)})
        values.append(nu(s).entries)
    if isinstance(flag, GeneralCurveFlag):
        for row, members in sorted(_rows(X, D, m, flag.ray).items()):
            width = len(members) - 1
            orders = {0, width} | {int(rng.integers(0, width + 1))}
            for k in sorted(orders):
                extra = _pool(rng, max(width - k, 0), cfg.pool)
                s = vanishing_section(X, D, m, flag.ray, row, x0, k, extra)
                values.append(nu(s).entries)
    log.debug("m=%d: %d valuation points", m, len(values))
    return m, hull(values, X.dim)


def sample_body(X: ToricVariety, D: ToricDivisor, flag: Union[InvariantFlag, GeneralCurveFlag],
                cfg: Optional[SampleConfig] = None) -> List[Tuple[int, Polytope]]:
    """Inner hulls Delta_m for each requested degree, deterministic in the seed."""
    cfg = cfg or SampleConfig()
    if section_polytope(X, D).is_empty:
        raise HypothesisUnmet(f"divisor {D} has no sections at any level")
    x0 = Fraction(0)
    if isinstance(flag, GeneralCurveFlag):
        x0 = q(flag.x0) if flag.x0 is not None else draw_x0(cfg.seed)
        if x0 == 0:
            raise ValueError("x0 = 0 is a torus-fixed point of the flag curve")
    streams = np.random.SeedSequence(cfg.seed).spawn(len(cfg.degrees))
    jobs = list(zip(cfg.degrees, streams))
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(lambda job: _sample_level(X, D, flag, cfg, job[0], job[1], x0), jobs))
    else:
        results = [_sample_level(X, D, flag, cfg, m, seq, x0) for m, seq in jobs]
    levels = [(m, hull_m) for m, hull_m in results if hull_m is not None]
    if not levels:
        raise HypothesisUnmet(f"P_mD has no lattice points for any of the degrees {list(cfg.degrees)}")
    return sorted(levels, key=lambda pair: pair[0])

# ---------------------- Convergence ----------------------

@dataclass(frozen=True)
class LevelReport:
    m: int
    contained: bool
    ratio: Fraction
    witness: Optional[QVector] = None

    def to_json(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"m": self.m, "contained": self.contained, "ratio": fmt_q(self.ratio)}
        if self.witness is not None:
            out["witness"] = [fmt_q(x) for x in self.witness]
        return out


@dataclass(frozen=True)
class ConvergenceReport:
    levels: Tuple[LevelReport, ...]
    monotone: bool

    @property
    def refuted(self) -> bool:
        return any(not lv.contained for lv in self.levels)

    @property
    def final_ratio(self) -> Fraction:
        return self.levels[-1].ratio if self.levels else Fraction(0)

    def raise_if_refuted(self) -> None:
        for lv in self.levels:
            if not lv.contained:
                raise ClosedFormRefuted(f"closed-form refuted: sampled point outside the body at m={lv.m}",
                                        witness=[fmt_q(x) for x in lv.witness or ()])

    def to_json(self) -> Dict[str, Any]:
        return {
            "levels": [lv.to_json() for lv in self.levels],
            "monotone": self.monotone,
            "refuted": self.refuted,
        }


def _ratio(inner: Polytope, target: Polytope) -> Fraction:
    """vol(inner) / vol(target), both measured in the affine span of the target."""
    if target.is_empty or inner.is_empty or inner.affine_dim < target.affine_dim:
        return Fraction(0)
    try:
        return flat_volume(inner) / flat_volume(target)
    except NotCoordinateFlat:
        return Fraction(1) if equals(inner, target) else Fraction(0)


def convergence_report(hulls: Sequence[Tuple[int, Polytope]], target: Polytope) -> ConvergenceReport:
    """Containment, volume ratio and monotonicity of the sampled hulls against a closed form."""
    levels: List[LevelReport] = []
    for m, inner in hulls:
        outside = next((v for v in inner.vertices if not target.contains_point(v)), None)
        if outside is not None:
            levels.append(LevelReport(m, False, Fraction(0), outside))
            continue
        levels.append(LevelReport(m, contains(target, inner), _ratio(inner, target)))
    ratios = [lv.ratio for lv in levels]
    monotone = all(a <= b for a, b in zip(ratios, ratios[1:]))
    return ConvergenceReport(tuple(levels), monotone)


# ---------------------- Quick self-test ----------------------
if __name__ == "__main__":
    P2 = ToricVariety.from_data([(1, 0), (0, 1), (-1, -1)], [(0, 1), (1, 2), (2, 0)], "P2")
    H = ToricDivisor.of(0, 0, 1)
    s = Section.of(1, {(1, 0): 1, (0, 1): 1})
    print(nu_invariant(P2, H, s, InvariantFlag((0, 1))))
    print(nu_general_surface(P2, H, vanishing_section(P2, H, 1, 0, 0, 2, 1), 0, 2))
