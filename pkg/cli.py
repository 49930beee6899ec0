"""
okbodies command line.

Every result is exact JSON (rationals as "p/q" strings). Exit codes:
0 ok, 1 a check failed, 2 bad input, 3 hypothesis unmet, 4 refuted.

Usage:
    python main.py --input data/models/P2.json --input divisor.json --task body --flag 0,1 --svg body.svg
    python main.py --input data/models/Bl1P2.json --input divisor.json --task decompose
    python main.py --task check                      # full library under OKLAB_DATA
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import harness
import surface
import toric
from config import configure_logging, get_settings
from decomposition import DecompositionKind
from errors import ClosedFormRefuted, DimensionMismatch, HypothesisUnmet, OklabError, SchemaError
from exactgeom import Polytope, fmt_q
from jsonio import (Flag, Model, dumps, load_documents, parse_divisor, parse_flag,
                    parse_flag_option, parse_model, parse_sample_config, parse_schedule,
                    polytope_from_json, polytope_to_json)
from oracle import GeneralCurveFlag, convergence_report, sample_body
from render import write_html, write_svg
from surface import LatticeSurface, SurfFlag
from toric import BodyKind, InvariantFlag, ToricVariety

log = logging.getLogger(__name__)

TASKS = ("classify", "decompose", "body", "invariants", "check", "sample", "render")
KINDS = tuple(k.value for k in BodyKind) + tuple(k.value for k in DecompositionKind)

# ---------------------- Job ----------------------

@dataclass
class Job:
    inputs: List[Path] = field(default_factory=list)
    task: str = "classify"
    kind: Optional[str] = None
    flag: Optional[str] = None
    epsilon_schedule: Optional[Tuple[Fraction, ...]] = None
    seed: Optional[int] = None
    out: Optional[Path] = None
    svg: Optional[Path] = None
    html: Optional[Path] = None

    def __post_init__(self):
        if self.task not in TASKS:
            raise SchemaError(f"--task: expected one of {', '.join(TASKS)}, got {self.task!r}")
        if self.kind is not None and self.kind not in KINDS:
            raise SchemaError(f"--kind: expected one of {', '.join(KINDS)}, got {self.kind!r}")
        if self.task == "body" and self.kind in {k.value for k in DecompositionKind}:
            raise SchemaError(f"--kind {self.kind} is a decomposition kind, not a body kind")
        if self.task == "decompose" and self.kind in {k.value for k in BodyKind}:
            raise SchemaError(f"--kind {self.kind} is a body kind, not a decomposition kind")
        if self.task != "check" and not self.inputs:
            raise SchemaError(f"task {self.task} needs at least one --input")


@dataclass
class _Context:
    doc: Dict[str, Any]
    model: Model
    divisor: Any
    flag: Optional[Flag]


def _context(job: Job, need_flag: bool = False) -> _Context:
    doc = load_documents(job.inputs)
    model = parse_model(doc)
    report = toric.validate(model) if isinstance(model, ToricVariety) else surface.validate(model)
    if not report.ok:
        raise SchemaError("; ".join(report.problems))
    if "divisor" not in doc:
        raise SchemaError("input: no divisor given")
    divisor = parse_divisor(model, doc["divisor"])
    if job.flag is not None:
        flag = parse_flag_option(model, job.flag)
    elif "flag" in doc:
        flag = parse_flag(model, doc["flag"])
    else:
        flag = None
    if need_flag and flag is None:
        raise SchemaError(f"task {job.task} needs a flag (--flag or a \"flag\" field)")
    return _Context(doc, model, divisor, flag)

# ---------------------- Tasks ----------------------

def task_classify(job: Job) -> Dict[str, Any]:
    ctx = _context(job)
    module = toric if isinstance(ctx.model, ToricVariety) else surface
    return {"model": ctx.model.label(), "classification": module.classify(ctx.model, ctx.divisor).to_json()}


def task_decompose(job: Job) -> Dict[str, Any]:
    ctx = _context(job)
    kind = DecompositionKind(job.kind or "sigma")
    if isinstance(ctx.model, LatticeSurface):
        return surface.zariski_decompose(ctx.model, ctx.divisor, kind).to_json()
    sigma, s_dec = toric.sigma_s_decomposition(ctx.model, ctx.divisor, schedule=job.epsilon_schedule)
    if kind is DecompositionKind.SIGMA:
        return sigma.to_json()
    if kind is DecompositionKind.GOOD and not s_dec.semiample:
        raise HypothesisUnmet("positive part is not semiample")
    return s_dec.to_json()


def _body(job: Job, ctx: _Context) -> Polytope:
    kind = BodyKind(job.kind or "big")
    if isinstance(ctx.model, ToricVariety):
        if not isinstance(ctx.flag, InvariantFlag):
            raise SchemaError("toric bodies need an invariant flag (an ordered maximal cone)")
        return toric.okounkov_body(ctx.model, ctx.divisor, ctx.flag, kind, schedule=job.epsilon_schedule)
    return surface.okounkov_polygon(ctx.model, ctx.divisor, ctx.flag, kind)


def _draw(job: Job, body: Polytope, title: str) -> Dict[str, str]:
    written: Dict[str, str] = {}
    if body.ambient_dim != 2:
        if job.svg or job.html:
            log.warning("body of ambient dimension %d is not drawn", body.ambient_dim)
        return written
    if job.svg:
        written["svg"] = str(write_svg(body, job.svg, title))
    if job.html:
        written["html"] = str(write_html(body, job.html, title))
    return written


def task_body(job: Job) -> Dict[str, Any]:
    ctx = _context(job, need_flag=True)
    body = _body(job, ctx)
    out = {"kind": job.kind or "big", "body": polytope_to_json(body)}
    artifacts = _draw(job, body, f"{ctx.model.label()} {job.kind or 'big'}")
    if artifacts:
        out["artifacts"] = artifacts
    return out


def _toric_invariants(job: Job, ctx: _Context) -> Dict[str, Any]:
    X, D = ctx.model, ctx.divisor
    out: Dict[str, Any] = {
        "kappa": _dim(toric.iitaka_dim(X, D)),
        "kappa_nu": _dim(toric.numerical_dim(X, D)),
        "volume": fmt_q(toric.volume(X, D)),
        "base_loci": toric.base_loci(X, D, schedule=job.epsilon_schedule).to_json(),
        "orders": [fmt_q(toric.asymptotic_order(X, D, i, schedule=job.epsilon_schedule)) for i in range(X.n_rays)],
    }
    if isinstance(ctx.flag, InvariantFlag):
        restricted: Dict[str, str] = {}
        for k in range(1, X.dim + 1):
            try:
                restricted[str(k)] = fmt_q(toric.restricted_volume(X, D, ctx.flag, k, schedule=job.epsilon_schedule))
            except HypothesisUnmet as e:
                log.info("restricted volume k=%d skipped: %s", k, e)
        out["restricted_volumes"] = restricted
    return out


def _surface_invariants(job: Job, ctx: _Context) -> Dict[str, Any]:
    S, D = ctx.model, ctx.divisor
    big = surface.numerical_dim(S, D) == 2
    out: Dict[str, Any] = {
        "kappa_nu": _dim(surface.numerical_dim(S, D)),
        "volume": fmt_q(surface.volume(S, D)),
        "base_loci": surface.base_loci_divisorial(S, D, augmented=big).to_json(),
    }
    if S.abundant:
        out["kappa"] = _dim(surface.iitaka_dim(S, D))
    if isinstance(ctx.flag, SurfFlag):
        name = ctx.flag.curve
        out["mu"] = fmt_q(surface.mu(S, D, name))
        try:
            vol, vol_plus = surface.restricted_volumes(S, D, name, schedule=job.epsilon_schedule)
        except HypothesisUnmet as e:
            log.info("restricted volumes skipped: %s", e)
        else:
            restricted = {"vol+": fmt_q(vol_plus)}
            if vol is not None:
                restricted["vol"] = fmt_q(vol)
            out["restricted_volumes"] = restricted
    return out


def _dim(d: Any) -> Any:
    return "-inf" if d == toric.NEG_INF else int(d)


def task_invariants(job: Job) -> Dict[str, Any]:
    ctx = _context(job)
    if isinstance(ctx.model, ToricVariety):
        return _toric_invariants(job, ctx)
    return _surface_invariants(job, ctx)


def task_sample(job: Job) -> Dict[str, Any]:
    ctx = _context(job, need_flag=True)
    if not isinstance(ctx.model, ToricVariety):
        raise SchemaError("sampling needs a toric variety")
    cfg = parse_sample_config(ctx.doc.get("sample"), job.seed)
    if isinstance(ctx.flag, GeneralCurveFlag):
        S = surface.from_toric(ctx.model)
        target = surface.okounkov_polygon(S, surface.toric_class(ctx.model, ctx.divisor),
                                          SurfFlag(f"D{ctx.flag.ray}"), BodyKind.VAL)
    else:
        target = toric.okounkov_body(ctx.model, ctx.divisor, ctx.flag, BodyKind.VAL)
    hulls = sample_body(ctx.model, ctx.divisor, ctx.flag, cfg)
    report = convergence_report(hulls, target)
    report.raise_if_refuted()
    return {
        "config": cfg.to_json(),
        "target": polytope_to_json(target),
        "hulls": [{"m": m, "body": polytope_to_json(p)} for m, p in hulls],
        "report": report.to_json(),
    }


def task_render(job: Job) -> Dict[str, Any]:
    doc = load_documents(job.inputs)
    raw = doc.get("body", doc.get("polytope"))
    if raw is not None:
        body = polytope_from_json(raw)
        title = str(doc.get("title", ""))
    else:
        ctx = _context(job, need_flag=True)
        body = _body(job, ctx)
        title = ctx.model.label()
    if job.svg is None and job.html is None:
        job.svg = (job.out or Path("body.json")).with_suffix(".svg")
    if body.ambient_dim != 2:
        raise DimensionMismatch(f"render needs a planar body, got ambient dimension {body.ambient_dim}")
    return {"body": polytope_to_json(body), "artifacts": _draw(job, body, title)}


def _check_job(job: Job) -> Tuple[Dict[str, Any], int]:
    data_dirs = [p for p in job.inputs if p.is_dir()]
    library = harness.load_library(data_dirs[0] if data_dirs else None)
    files = [p for p in job.inputs if not p.is_dir()]
    if files:
        doc = load_documents(files)
        model = parse_model(doc)
        inst = harness.Instance(
            id=str(doc.get("id", "input")),
            model=model,
            divisor=parse_divisor(model, doc.get("divisor")),
            flag=parse_flag_option(model, job.flag) if job.flag else (parse_flag(model, doc["flag"]) if "flag" in doc else None),
            checks=tuple(doc.get("checks", ("slicing",) + tuple(harness.CHECKS))),
            k=tuple(doc.get("k", [1])),
        )
        library = harness.Library(library.models, [inst], [])
        reports = harness.run_suite(library, include_random=False)
    else:
        reports = harness.run_suite(library, seed=job.seed)
    summary = harness.SuiteSummary.of(reports)
    log.info("\n%s", harness.summary_table(reports).to_string())
    return {"summary": summary.to_json(), "reports": [r.to_json() for r in reports]}, (1 if summary.failed else 0)

# ---------------------- Entry points ----------------------

HANDLERS = {
    "classify": task_classify,
    "decompose": task_decompose,
    "body": task_body,
    "invariants": task_invariants,
    "sample": task_sample,
    "render": task_render,
}


def _emit(job: Job, result: Dict[str, Any]) -> None:
    text = dumps(result)
    if job.out:
        job.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def run(job: Job) -> int:
    """Run one job; the return value is the process exit code."""
    try:
        if job.task == "check":
            result, code = _check_job(job)
        else:
            result, code = HANDLERS[job.task](job), 0
        _emit(job, result)
        return code
    except ClosedFormRefuted as e:
        sys.stderr.write(f"refuted: {e}\n")
        if e.witness is not None:
            sys.stderr.write(dumps({"witness": e.witness}))
        return e.exit_code
    except OklabError as e:
        sys.stderr.write(f"{type(e).__name__}: {e}\n")
        return e.exit_code
    except (KeyError, ValueError) as e:
        sys.stderr.write(f"invalid input: {e}\n")
        return SchemaError.exit_code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="okbodies", description="Exact Okounkov bodies and Zariski decompositions.")
    p.add_argument("--input", action="append", type=Path, default=[], help="JSON input file (repeatable)")
    p.add_argument("--task", choices=TASKS, default="classify")
    p.add_argument("--kind", choices=KINDS, help="body kind (big, val, lim) or decomposition kind (sigma, s, good)")
    p.add_argument("--flag", help="ray indices \"0,1\", a curve name, or flag JSON")
    p.add_argument("--epsilon-schedule", help="comma-separated decreasing rationals, e.g. 1/2,1/4,1/8,1/16")
    p.add_argument("--seed", type=int, help="sampling seed (default OKLAB_SEED)")
    p.add_argument("--out", type=Path, help="results JSON (default stdout)")
    p.add_argument("--svg", type=Path, help="SVG drawing of a planar body")
    p.add_argument("--html", type=Path, help="plotly HTML figure of a planar body")
    p.add_argument("--log-level", default=None, help="overrides OKLAB_LOG_LEVEL")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level or get_settings().log_level)
    try:
        job = Job(
            inputs=list(args.input),
            task=args.task,
            kind=args.kind,
            flag=args.flag,
            epsilon_schedule=parse_schedule(args.epsilon_schedule) if args.epsilon_schedule else None,
            seed=args.seed,
            out=args.out,
            svg=args.svg,
            html=args.html,
        )
    except SchemaError as e:
        sys.stderr.write(f"SchemaError: {e}\n")
        return e.exit_code
    return run(job)


if __name__ == "__main__":
    sys.exit(main())
