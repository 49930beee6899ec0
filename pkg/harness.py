"""
Executable property checks over a curated instance library.

Each check returns a CheckReport with status "pass", "fail" or "gated" (the
check's hypothesis does not hold for the instance). Failures always carry a
witness. The library lives under the data directory:

    data/models/*.json     toric varieties and lattice surfaces
    data/instances.json    instances, birational pairs

Usage:
    from harness import load_library, run_suite, summary_table

    lib = load_library()
    reports = run_suite(lib)
    print(summary_table(reports).to_string())
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

import surface
import toric
from config import get_settings
from decomposition import DecompositionKind
from errors import ClosedFormRefuted, HypothesisUnmet, OklabError, SchemaError
from exactgeom import (Polytope, QVector, contains, coordinate_slice, equals, flat_volume, fmt_q,
                       hull, inertia, volume)
from jsonio import Flag, Model, load_json, parse_divisor, parse_flag, parse_model
from oracle import GeneralCurveFlag, SampleConfig, convergence_report, sample_body
from surface import LatticeSurface, SurfFlag
from toric import NEG_INF, BodyKind, InvariantFlag, ToricDivisor, ToricVariety

log = logging.getLogger(__name__)

PASS, FAIL, GATED = "pass", "fail", "gated"
CHAIN = (Fraction(1), Fraction(1, 2), Fraction(1, 4), Fraction(1, 8))
RANDOM_SURFACES = ("Bl1P2", "P1xP1-surface", "F2-surface")

# ---------------------- Types ----------------------

@dataclass
class Instance:
    id: str
    model: Model
    divisor: Union[ToricDivisor, QVector]
    flag: Optional[Flag] = None
    checks: Tuple[str, ...] = ()
    k: Tuple[int, ...] = (1,)
    expect: Dict[str, Any] = field(default_factory=dict)
    note: str = ""
    sample: Dict[str, Any] = field(default_factory=dict)

    @property
    def is_toric(self) -> bool:
        return isinstance(self.model, ToricVariety)


@dataclass
class BirationalPair:
    id: str
    base: str
    model: Optional[str] = None
    exceptional: Optional[str] = None
    blowup_cone: Optional[Tuple[int, ...]] = None


@dataclass
class Library:
    models: Dict[str, Model]
    instances: List[Instance]
    pairs: List[BirationalPair] = field(default_factory=list)

    def instance(self, iid: str) -> Instance:
        for inst in self.instances:
            if inst.id == iid:
                return inst
        raise KeyError(iid)


@dataclass
class CheckReport:
    check: str
    instance_id: str
    status: str
    witness: Any = None
    notes: List[str] = field(default_factory=list)

    def __post_init__(self):
        if self.status == FAIL and self.witness is None:
            raise ValueError(f"{self.check}/{self.instance_id}: a failed check needs a witness")

    def to_json(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"check": self.check, "instance": self.instance_id, "status": self.status}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def _poly(p: Polytope) -> List[List[str]]:
    return [[fmt_q(x) for x in v] for v in p.vertices]


def _vec(v: Sequence[Fraction]) -> List[str]:
    return [fmt_q(x) for x in v]


def _verdict(check: str, inst_id: str, ok: bool, witness: Any, notes: Iterable[str] = ()) -> CheckReport:
    return CheckReport(check, inst_id, PASS if ok else FAIL, None if ok else witness, list(notes))

# ---------------------- Library ----------------------

def _validate_model(name: str, model: Model) -> None:
    report = toric.validate(model) if isinstance(model, ToricVariety) else surface.validate(model)
    if not report.ok:
        raise SchemaError(f"model {name}: {'; '.join(report.problems)}")


def _parse_instance(raw: Mapping[str, Any], models: Mapping[str, Model]) -> Instance:
    iid = str(raw.get("id", ""))
    if not iid:
        raise SchemaError("instance without an id")
    name = raw.get("model")
    if name not in models:
        raise SchemaError(f"instance {iid}: unknown model {name!r}")
    model = models[name]
    k = raw.get("k", [1])
    expect = dict(raw.get("expect", {}))
    kappa, kappa_nu = expect.get("kappa"), expect.get("kappa_nu")
    if kappa is not None and kappa_nu is not None and kappa > kappa_nu:
        raise SchemaError(f"instance {iid}: expected kappa {kappa} exceeds kappa_nu {kappa_nu}")
    return Instance(
        id=iid,
        model=model,
        divisor=parse_divisor(model, raw.get("divisor")),
        flag=parse_flag(model, raw["flag"]) if "flag" in raw else None,
        checks=tuple(raw.get("checks", ())),
        k=tuple(int(x) for x in (k if isinstance(k, list) else [k])),
        expect=expect,
        note=str(raw.get("note", "")),
        sample=dict(raw.get("sample", {})),
    )


def load_library(data_dir: Optional[Union[str, Path]] = None) -> Library:
    data_dir = Path(data_dir or get_settings().data_dir)
    models: Dict[str, Model] = {}
    for path in sorted((data_dir / "models").glob("*.json")):
        doc = load_json(path)
        model = parse_model(doc)
        name = doc.get("name", path.stem)
        _validate_model(name, model)
        models[name] = model
    doc = load_json(data_dir / "instances.json")
    instances = [_parse_instance(raw, models) for raw in doc.get("instances", [])]
    pairs = [
        BirationalPair(
            id=str(p["id"]), base=str(p["base"]), model=p.get("model"), exceptional=p.get("exceptional"),
            blowup_cone=tuple(p["blowup_cone"]) if "blowup_cone" in p else None,
        )
        for p in doc.get("pairs", [])
    ]
    log.info("library %s: %d models, %d instances, %d pairs", data_dir, len(models), len(instances), len(pairs))
    return Library(models, instances, pairs)


def random_instances(library: Library, seed: Optional[int] = None, count: int = 200) -> List[Instance]:
    """Seeded nonnegative combinations of effective generators on the surface models."""
    seed = get_settings().seed if seed is None else seed
    names = [n for n in RANDOM_SURFACES if n in library.models]
    if not names:
        return []
    per_model = math.ceil(count / len(names))
    streams = np.random.SeedSequence(seed).spawn(len(names))
    out: List[Instance] = []
    for name, seq in zip(names, streams):
        S = library.models[name]
        rng = np.random.default_rng(seq)
        for i in range(per_model):
            D = tuple(Fraction(0) for _ in range(S.rank))
            for g in S.effective_generators:
                c = Fraction(int(rng.integers(0, 5)), int(rng.integers(1, 4)))
                D = tuple(a + c * b for a, b in zip(D, g))
            if not any(D):
                D = S.effective_generators[0]
            out.append(Instance(f"random-{name}-{i:03d}", S, D, checks=("zariski",)))
    return out

# ---------------------- Helpers ----------------------

def _body(inst: Instance, kind: BodyKind, divisor: Any = None) -> Polytope:
    D = inst.divisor if divisor is None else divisor
    if inst.is_toric:
        return toric.okounkov_body(inst.model, D, inst.flag, kind)
    return surface.okounkov_polygon(inst.model, D, inst.flag, kind)


def _in_coordinate_subspace(p: Polytope, free: int) -> bool:
    """p inside {0}^(n-free) x R^free."""
    lead = p.ambient_dim - free
    return all(v[i] == 0 for v in p.vertices for i in range(lead))


def _require_flag(inst: Instance, kind: type) -> None:
    if not isinstance(inst.flag, kind):
        raise HypothesisUnmet(f"needs a {kind.__name__}, instance has {type(inst.flag).__name__}")

# ---------------------- Checks ----------------------

def check_slicing(inst: Instance, k: int) -> CheckReport:
    """k-th coordinate slice of the body against the restricted body on Y_{n-k}.

    On toric models k! vol(slice) must also match the growth of section counts on the face.
    """
    name = "slicing"
    if inst.is_toric:
        X, D = inst.model, inst.divisor
        _require_flag(inst, InvariantFlag)
        tau = tuple(sorted(inst.flag.rays[: X.dim - k]))
        loci = toric.base_loci(X, D)
        if tau in loci.augmented:
            raise HypothesisUnmet(f"Y_{X.dim - k} = V{list(tau)} lies in B+(D)")
        body = toric.okounkov_body(X, D, inst.flag, BodyKind.BIG)
        sliced = coordinate_slice(body, k)
        restricted = toric.restricted_body(X, D, inst.flag, k)
        sliced_vol = math.factorial(k) * volume(sliced, range(X.dim - k, X.dim))
        counted = toric.face_count_volume(X, D, tau, k)
        problems: Dict[str, Any] = {}
        if not equals(sliced, restricted):
            problems["slice != restricted"] = {"slice": _poly(sliced), "restricted": _poly(restricted)}
        if sliced_vol != counted:
            problems["k! vol"] = {"slice": fmt_q(sliced_vol), "section counts": fmt_q(counted)}
        return _verdict(name, inst.id, not problems, problems, [f"k={k}", f"vol={fmt_q(counted)}"])

    S, D = inst.model, inst.divisor
    _require_flag(inst, SurfFlag)
    if k == 2:
        return _verdict(name, inst.id, True, None, ["k=2: slice is the whole body"])
    vol, _ = surface.restricted_volumes(S, D, inst.flag.curve)
    if vol is None:
        raise HypothesisUnmet(f"{inst.flag.curve} lies in B+(D)")
    sliced = coordinate_slice(surface.okounkov_polygon(S, D, inst.flag, BodyKind.BIG), 1)
    restricted = hull([(0, 0), (0, vol)], 2)
    return _verdict(name, inst.id, equals(sliced, restricted),
                    {"slice": _poly(sliced), "restricted": _poly(restricted)}, [f"k={k}"])


def check_dim_vol(inst: Instance) -> CheckReport:
    """dim of the valuative / limiting bodies against kappa / kappa_nu, with the volume identities."""
    name = "dim_vol"
    notes: List[str] = []
    problems: Dict[str, Any] = {}
    if inst.is_toric:
        X, D = inst.model, inst.divisor
        _require_flag(inst, InvariantFlag)
        kappa = toric.iitaka_dim(X, D)
        if kappa == NEG_INF:
            raise HypothesisUnmet("divisor is not pseudoeffective")
        kappa_nu = toric.numerical_dim(X, D)
        val = _body(inst, BodyKind.VAL)
        lim = _body(inst, BodyKind.LIM)
        if val.affine_dim != kappa:
            problems["dim val"] = [val.affine_dim, kappa]
        if lim.affine_dim != kappa_nu:
            problems["dim lim"] = [lim.affine_dim, kappa_nu]
        if not equals(val, lim):
            problems["val != lim"] = {"val": _poly(val), "lim": _poly(lim)}
        if kappa == X.dim:
            lhs = math.factorial(X.dim) * volume(val, range(X.dim))
            if lhs != toric.volume(X, D):
                problems["n! vol"] = [fmt_q(lhs), fmt_q(toric.volume(X, D))]
    else:
        S, D = inst.model, inst.divisor
        _require_flag(inst, SurfFlag)
        kappa_nu = surface.numerical_dim(S, D)
        if kappa_nu == NEG_INF:
            raise HypothesisUnmet("class is not pseudoeffective")
        kappa = surface.iitaka_dim(S, D) if S.abundant else None
        val = _body(inst, BodyKind.VAL) if S.abundant else None
        lim = _body(inst, BodyKind.LIM)
        if val is None:
            notes.append("no abundance flag: valuative body skipped")
        elif val.affine_dim != kappa:
            problems["dim val"] = [val.affine_dim, kappa]
        if lim.affine_dim != kappa_nu:
            problems["dim lim"] = [lim.affine_dim, kappa_nu]
        if kappa_nu == 2:
            lhs = 2 * volume(lim, (0, 1))
            if lhs != surface.volume(S, D):
                problems["2 vol"] = [fmt_q(lhs), fmt_q(surface.volume(S, D))]
        elif kappa_nu == 1:
            vol, vol_plus = surface.restricted_volumes(S, D, inst.flag.curve)
            if kappa == 1 and _in_coordinate_subspace(val, 1) and flat_volume(val) != vol:
                problems["vol val"] = [fmt_q(flat_volume(val)), fmt_q(vol)]
            if _in_coordinate_subspace(lim, 1) and flat_volume(lim) != vol_plus:
                problems["vol lim"] = [fmt_q(flat_volume(lim)), fmt_q(vol_plus)]
            notes.append(f"widths ({fmt_q(vol)}, {fmt_q(vol_plus)})")
    for key, want in (("kappa", kappa), ("kappa_nu", kappa_nu)):
        if want is not None and key in inst.expect and inst.expect[key] != want:
            problems[f"expected {key}"] = [inst.expect[key], want]
    return _verdict(name, inst.id, not problems, problems, notes)


def check_criteria(inst: Instance) -> CheckReport:
    """Positive-volume / Nakayama criteria on a surface flag (C, general x)."""
    name = "criteria"
    S, D = inst.model, inst.divisor
    if inst.is_toric:
        raise HypothesisUnmet("criteria checks run on surface models")
    _require_flag(inst, SurfFlag)
    C = S.curve(inst.flag.curve)
    kappa_nu = surface.numerical_dim(S, D)
    if kappa_nu == NEG_INF:
        raise HypothesisUnmet("class is not pseudoeffective")
    dec = surface.zariski_decompose(S, D)
    lim = _body(inst, BodyKind.LIM)
    holds = _in_coordinate_subspace(lim, kappa_nu) and lim.affine_dim == kappa_nu

    if C.name in dec.support:
        # C inside B-: no positive volume subvariety, and the body leaves the axis
        anchored = any(v[0] == 0 for v in lim.vertices)
        ok = not anchored and (kappa_nu == 2 or not holds)
        return _verdict(name, inst.id, ok, {"lim": _poly(lim)}, ["converse: flag curve in B-"])

    P = dec.positive
    if kappa_nu == 2:
        predicted = True
    elif kappa_nu == 1:
        predicted = surface.pairing(S, P, C.cls) > 0
    else:
        predicted = True
    witness: Dict[str, Any] = {"lim": _poly(lim), "predicted": predicted, "criterion": holds}
    ok = predicted == holds
    notes = ["positive volume criterion"]
    if S.abundant:
        try:
            val = _body(inst, BodyKind.VAL)
        except HypothesisUnmet as e:
            notes.append(f"Nakayama criterion skipped: {e}")
        else:
            kappa = surface.iitaka_dim(S, D)
            val_holds = _in_coordinate_subspace(val, kappa) and val.affine_dim == kappa
            ok = ok and val_holds == predicted
            witness["val"] = _poly(val)
            notes.append("Nakayama criterion")
    return _verdict(name, inst.id, ok, witness, notes)


def check_positive_part(inst: Instance) -> CheckReport:
    """Bodies of D and of its positive part coincide."""
    name = "positive_part"
    if inst.is_toric:
        X, D = inst.model, inst.divisor
        _require_flag(inst, InvariantFlag)
        _, s_dec = toric.sigma_s_decomposition(X, D)
        if any(f"D{r}" in s_dec.support for r in inst.flag.rays):
            raise HypothesisUnmet("a flag ray lies in the support of N_s")
        P = ToricDivisor(s_dec.positive)
        pairs = [(kind, _body(inst, kind), _body(inst, kind, P)) for kind in (BodyKind.VAL, BodyKind.LIM)]
    else:
        S, D = inst.model, inst.divisor
        _require_flag(inst, SurfFlag)
        dec = surface.zariski_decompose(S, D)
        a = dec.coefficient(inst.flag.curve)
        if a:
            raise HypothesisUnmet(f"flag curve in supp N_sigma; bodies differ by the translate ({fmt_q(a)}, 0)")
        pairs = [(BodyKind.LIM, _body(inst, BodyKind.LIM), _body(inst, BodyKind.LIM, dec.positive))]
        if S.abundant:
            try:
                pairs.append((BodyKind.VAL, _body(inst, BodyKind.VAL), _body(inst, BodyKind.VAL, dec.positive)))
            except HypothesisUnmet as e:
                log.debug("%s: valuative comparison skipped: %s", inst.id, e)
    bad = {kind.value: {"D": _poly(a), "P": _poly(b)} for kind, a, b in pairs if not equals(a, b)}
    return _verdict(name, inst.id, not bad, bad, [f"compared {', '.join(k.value for k, _, _ in pairs)}"])


def _permuted(S: LatticeSurface) -> LatticeSurface:
    curves = S.curves[::-1]
    return replace(S, curves=curves[1:] + curves[:1])


def _surface_zariski(S: LatticeSurface, D: QVector) -> Dict[str, Any]:
    problems: Dict[str, Any] = {}
    dec = surface.zariski_decompose(S, D)
    P = dec.positive
    if any(surface.pairing(S, P, g) < 0 for g in S.effective_generators):
        problems["P not nef"] = _vec(P)
    support = [S.curve(n) for n in dec.support]
    if any(surface.pairing(S, P, c.cls) != 0 for c in support):
        problems["P.N_i != 0"] = list(dec.support)
    gram = [[surface.pairing(S, a.cls, b.cls) for b in support] for a in support]
    if support and inertia(gram) != (0, len(support), 0):
        problems["Gram not negative definite"] = list(dec.support)
    if any(c <= 0 for _, c in dec.negative):
        problems["N not positive"] = dec.to_json()["N"]
    if not all(isinstance(x, Fraction) for x in P):
        problems["irrational"] = _vec(P)
    again = surface.zariski_decompose(S, P)
    if again.negative or again.positive != P:
        problems["not idempotent"] = again.to_json()
    if not surface.zariski_decompose(_permuted(S), D).same_parts(dec):
        problems["order dependent"] = dec.to_json()
    if S.abundant:
        s_dec = surface.zariski_decompose(S, D, DecompositionKind.S)
        good = surface.zariski_decompose(S, D, DecompositionKind.GOOD)
        if not s_dec.same_parts(dec):
            problems["sigma != s"] = {"sigma": dec.to_json(), "s": s_dec.to_json()}
        if not (good.semiample and good.same_parts(s_dec)):
            problems["good decomposition"] = good.to_json()
    return problems


def check_zariski(inst: Instance) -> CheckReport:
    name = "zariski"
    if not inst.is_toric:
        S, D = inst.model, inst.divisor
        if not surface.is_psef(S, D):
            raise HypothesisUnmet("class is not pseudoeffective")
        problems = _surface_zariski(S, D)
        return _verdict(name, inst.id, not problems, problems)

    X, D = inst.model, inst.divisor
    sigma, s_dec = toric.sigma_s_decomposition(X, D)
    problems = {}
    if not sigma.same_parts(s_dec):
        problems["sigma != s"] = {"sigma": sigma.to_json(), "s": s_dec.to_json()}
    if not toric.is_nef(X, ToricDivisor(sigma.positive)):
        problems["P not nef"] = _vec(sigma.positive)
    notes: List[str] = []
    if X.dim == 2:
        S = surface.from_toric(X)
        model_dec = surface.zariski_decompose(S, surface.toric_class(X, D))
        if model_dec.positive != surface.toric_class(X, ToricDivisor(sigma.positive)):
            problems["cross-model P"] = {"toric": _vec(sigma.positive), "surface": _vec(model_dec.positive)}
        if model_dec.negative_map() != sigma.negative_map():
            problems["cross-model N"] = {"toric": sigma.to_json()["N"], "surface": model_dec.to_json()["N"]}
        notes.append("cross-model against the lattice model")
    return _verdict(name, inst.id, not problems, problems, notes)


def check_simplex(inst: Instance) -> CheckReport:
    """Bodies with a flag through a general member of the positive part are simplices."""
    name = "simplex"
    notes = ["general member of |P| modeled by class equality"]
    if inst.is_toric:
        raise HypothesisUnmet("simplex checks run on surface models")
    S, D = inst.model, inst.divisor
    _require_flag(inst, SurfFlag)
    C = S.curve(inst.flag.curve)
    kappa_nu = surface.numerical_dim(S, D)
    if kappa_nu == NEG_INF:
        raise HypothesisUnmet("class is not pseudoeffective")
    dec = surface.zariski_decompose(S, D)
    P = dec.positive
    if C.name in dec.support:
        raise HypothesisUnmet("flag curve in supp N_sigma")
    if kappa_nu == 2:
        if C.cls != P:
            raise HypothesisUnmet("flag curve is not a member of |P|")
        body = _body(inst, BodyKind.BIG)
        expected = hull([(0, 0), (1, 0), (0, surface.pairing(S, P, P))], 2)
    elif kappa_nu == 1:
        body = _body(inst, BodyKind.LIM)
        expected = hull([(0, 0), (0, surface.pairing(S, P, C.cls))], 2)
    else:
        body = _body(inst, BodyKind.LIM)
        expected = hull([(0, 0)], 2)
    notes.append(f"{len(body.vertices)} vertices")
    return _verdict(name, inst.id, equals(body, expected), {"body": _poly(body), "expected": _poly(expected)}, notes)


def check_limiting_limit(inst: Instance) -> CheckReport:
    """The limiting body sits in every Delta(D + eps A), the chain shrinks to it, and A does not matter."""
    name = "limiting_limit"
    problems: Dict[str, Any] = {}
    if inst.is_toric:
        X, D = inst.model, inst.divisor
        _require_flag(inst, InvariantFlag)
        A, A2 = toric.reference_ample(X), toric.alternate_ample(X)
        # pseudoeffective toric classes are effective: the closed form is the image of P_D
        closed = toric.okounkov_body(X, D, inst.flag, BodyKind.VAL)
        chain = [toric.okounkov_body(X, D + eps * A, inst.flag, BodyKind.BIG) for eps in CHAIN]
        extrapolated = toric.okounkov_body(X, D, inst.flag, BodyKind.LIM, A)
        other = toric.okounkov_body(X, D, inst.flag, BodyKind.LIM, A2)
    else:
        S, D = inst.model, inst.divisor
        _require_flag(inst, SurfFlag)
        A, A2 = surface.reference_ample(S), surface.alternate_ample(S)
        closed = surface.okounkov_polygon(S, D, inst.flag, BodyKind.LIM)
        chain = [surface.okounkov_polygon(S, tuple(d + eps * a for d, a in zip(D, A)), inst.flag, BodyKind.BIG)
                 for eps in CHAIN]
        extrapolated = surface.limiting_polygon_by_extrapolation(S, D, inst.flag, A)
        other = surface.limiting_polygon_by_extrapolation(S, D, inst.flag, A2)
    for eps, body in zip(CHAIN, chain):
        if not contains(body, closed):
            problems[f"not inside eps={eps}"] = _poly(body)
    for eps, (outer, inner) in zip(CHAIN[1:], zip(chain, chain[1:])):
        if not contains(outer, inner):
            problems[f"chain grows at eps={eps}"] = _poly(inner)
    if not equals(extrapolated, closed):
        problems["extrapolated != closed form"] = {"extrapolated": _poly(extrapolated), "closed": _poly(closed)}
    if not equals(other, closed):
        problems["depends on A"] = {"A'": _poly(other), "A": _poly(closed)}
    return _verdict(name, inst.id, not problems, problems)


def check_birational(pair: BirationalPair, library: Library) -> CheckReport:
    """Limiting bodies agree on a model when the flag avoids the modified locus."""
    name = "birational"
    base = library.instance(pair.base)
    if pair.blowup_cone is not None:
        X, D = base.model, base.divisor
        _require_flag(base, InvariantFlag)
        if tuple(sorted(pair.blowup_cone)) == base.flag.cone:
            raise HypothesisUnmet("flag cone is the blown-up cone")
        up = toric.blowup_fixed_point(X, pair.blowup_cone)
        lhs = toric.okounkov_body(X, D, base.flag, BodyKind.BIG)
        rhs = toric.okounkov_body(up.variety, up.pullback(D), base.flag, BodyKind.BIG)
    else:
        model = library.instance(pair.model)
        S = model.model
        _require_flag(model, SurfFlag)
        C = S.curve(model.flag.curve)
        if pair.exceptional and surface.pairing(S, C.cls, S.curve(pair.exceptional).cls) != 0:
            raise HypothesisUnmet(f"flag curve {C.name} meets the exceptional curve {pair.exceptional}")
        lhs = _body(base, BodyKind.LIM)
        rhs = _body(model, BodyKind.LIM)
    return _verdict(name, pair.id, equals(lhs, rhs), {"base": _poly(lhs), "model": _poly(rhs)})


def check_oracle(inst: Instance, threshold: Optional[Fraction] = None) -> CheckReport:
    """Sampled valuation hulls stay inside the closed form and fill it."""
    name = "oracle"
    if not inst.is_toric:
        raise HypothesisUnmet("the oracle samples toric sections")
    if not isinstance(inst.flag, (InvariantFlag, GeneralCurveFlag)):
        raise HypothesisUnmet("the oracle needs an invariant or a general-point flag")
    X, D = inst.model, inst.divisor
    threshold = get_settings().oracle_threshold if threshold is None else threshold
    if isinstance(inst.flag, GeneralCurveFlag):
        S = surface.from_toric(X)
        target = surface.okounkov_polygon(S, surface.toric_class(X, D), SurfFlag(f"D{inst.flag.ray}"), BodyKind.VAL)
    else:
        target = toric.okounkov_body(X, D, inst.flag, BodyKind.VAL)
    cfg = SampleConfig.from_json(inst.sample)
    report = convergence_report(sample_body(X, D, inst.flag, cfg), target)
    ok = not report.refuted and report.final_ratio >= threshold
    return _verdict(name, inst.id, ok, report.to_json(),
                    [f"ratio {fmt_q(report.final_ratio)} at m={report.levels[-1].m}"])


def check_rational_bodies(bodies: Mapping[str, Polytope]) -> CheckReport:
    """Every body is a polytope with finitely many rational vertices."""
    bad = {
        key: _poly(p) for key, p in bodies.items()
        if p.rays or not all(isinstance(x, Fraction) for v in p.vertices for x in v)
    }
    counts = {key: len(p.vertices) for key, p in sorted(bodies.items())}
    return CheckReport("rational", "suite", FAIL if bad else PASS, bad or None,
                       [f"{len(counts)} bodies, vertex counts {sorted(set(counts.values()))}"])

# ---------------------- Suite ----------------------

CHECKS: Dict[str, Callable[[Instance], CheckReport]] = {
    "dim_vol": check_dim_vol,
    "criteria": check_criteria,
    "positive_part": check_positive_part,
    "zariski": check_zariski,
    "simplex": check_simplex,
    "limiting_limit": check_limiting_limit,
    "oracle": check_oracle,
}


def _guarded(check: str, inst_id: str, fn: Callable[[], CheckReport]) -> CheckReport:
    try:
        return fn()
    except HypothesisUnmet as e:
        return CheckReport(check, inst_id, GATED, notes=[f"hypothesis unmet: {e}"])
    except ClosedFormRefuted as e:
        return CheckReport(check, inst_id, FAIL, e.witness or str(e), [str(e)])
    except OklabError as e:
        log.warning("%s/%s raised %s", check, inst_id, e)
        return CheckReport(check, inst_id, FAIL, {"error": type(e).__name__, "message": str(e)})


def _instance_bodies(inst: Instance) -> Dict[str, Polytope]:
    out: Dict[str, Polytope] = {}
    if inst.flag is None or isinstance(inst.flag, GeneralCurveFlag):
        return out
    for kind in BodyKind:
        try:
            out[f"{inst.id}/{kind.value}"] = _body(inst, kind)
        except OklabError:
            continue
    return out


def run_suite(library: Library, checks: Optional[Iterable[str]] = None,
              include_random: bool = True, seed: Optional[int] = None) -> List[CheckReport]:
    """Run every requested check over the library; reports sorted by (check, instance)."""
    wanted = set(checks) if checks is not None else set(CHECKS) | {"slicing", "birational", "rational"}
    reports: List[CheckReport] = []
    bodies: Dict[str, Polytope] = {}
    instances = list(library.instances)
    if include_random and "zariski" in wanted:
        instances += random_instances(library, seed)
    for inst in instances:
        for check in inst.checks:
            if check not in wanted:
                continue
            if check == "slicing":
                for k in inst.k:
                    reports.append(_guarded(check, inst.id, lambda k=k: check_slicing(inst, k)))
            elif check in CHECKS:
                reports.append(_guarded(check, inst.id, lambda fn=CHECKS[check]: fn(inst)))
            else:
                raise SchemaError(f"instance {inst.id}: unknown check {check!r}")
        if "rational" in wanted and not inst.id.startswith("random-"):
            bodies.update(_instance_bodies(inst))
    if "birational" in wanted:
        for pair in library.pairs:
            reports.append(_guarded("birational", pair.id, lambda p=pair: check_birational(p, library)))
    if "rational" in wanted:
        reports.append(check_rational_bodies(bodies))
    return sorted(reports, key=lambda r: (r.check, r.instance_id))


@dataclass(frozen=True)
class SuiteSummary:
    total: int
    passed: int
    failed: int
    gated: int

    @classmethod
    def of(cls, reports: Sequence[CheckReport]) -> "SuiteSummary":
        count = lambda status: sum(1 for r in reports if r.status == status)
        return cls(len(reports), count(PASS), count(FAIL), count(GATED))

    def to_json(self) -> Dict[str, int]:
        return {"total": self.total, "pass": self.passed, "fail": self.failed, "gated": self.gated}


def summary_table(reports: Sequence[CheckReport]) -> pd.DataFrame:
    """Counts per check and status."""
    frame = pd.DataFrame([{"check": r.check, "status": r.status} for r in reports], columns=["check", "status"])
    table = frame.pivot_table(index="check", columns="status", aggfunc="size", fill_value=0)
    for status in (PASS, FAIL, GATED):
        if status not in table.columns:
            table[status] = 0
    return table[[PASS, FAIL, GATED]].astype(int)
