"""Numerical predicates for the curvature classes, and the implication suite.

Each predicate turns a defining equation into a residual (max-norm over
samples and indices) paired with a comparable scale; verdicts use a
scale-normalized tolerance with an explicit indeterminate band one decade
wide, so borderline cases surface instead of silently flipping.  The
implication suite re-checks the containment theorems between the classes on
every metric it is given; a violated implication means the engine and the
theory disagree, which is treated as a hard failure by the CLI.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .engine import DOWN, UP, GeometryContext, default_spec
from .jets import JetSpec
from .metrics import MetricDef, SamplePlan

HOLDS = "holds"
FAILS = "fails"
INDETERMINATE = "indeterminate"

DEFAULT_TOL = 1e-6
INDETERMINATE_DECADES = 10.0


@dataclass
class PredicateResult:
    """Residual-based verdict for one defining equation on one metric."""

    name: str
    residual: float
    scale: float
    tol: float
    verdict: str
    samples_used: int
    worst_sample: int = -1
    per_sample: list[float] = field(default_factory=list)

    @property
    def threshold(self) -> float:
        return self.tol * max(1.0, self.scale)


def _verdict(residual: float, scale: float, tol: float) -> str:
    thr = tol * max(1.0, scale)
    if residual < thr:
        return HOLDS
    if residual < INDETERMINATE_DECADES * thr:
        return INDETERMINATE
    return FAILS


def _sign_ok(verdict: str, want_holds: bool) -> bool:
    return verdict == (HOLDS if want_holds else FAILS)


# -- per-sample residual extractors ------------------------------------------
# each returns (residual, scale); scales are invariant under F -> cF

def _berwald(ctx: GeometryContext):
    return np.abs(ctx.spray.B).max(), np.abs(ctx.spray.N).max()

def _weakly_berwald(ctx: GeometryContext):
    return np.abs(ctx.spray.E).max(), np.abs(ctx.spray.B).max()

def _douglas(ctx: GeometryContext):
    return np.abs(ctx.spray.D).max(), np.abs(ctx.spray.B).max()

def _gdw(ctx: GeometryContext):
    drift = ctx.spray.hcov0(ctx.spray.D_jet, (DOWN, UP, DOWN, DOWN))
    return np.abs(ctx.gdw_tensor).max(), np.abs(drift).max()

def _gb_weyl(ctx: GeometryContext):
    drift = ctx.spray.hcov0(ctx.spray.B_jet, (DOWN, UP, DOWN, DOWN))
    return np.abs(ctx.gbweyl_tensor).max(), np.abs(drift).max()

def _h_vanishes(ctx: GeometryContext):
    return np.abs(ctx.spray.H).max(), np.abs(ctx.spray.E_bar).max()

def _r_quadratic(ctx: GeometryContext):
    return np.abs(ctx.spray.R4_y).max(), np.abs(ctx.spray.R4).max()

def _scalar_curvature(ctx: GeometryContext):
    return ctx.scalar_curvature_residual, np.abs(ctx.spray.R_ik).max()

def _cproj_weyl_vanishes(ctx: GeometryContext):
    return np.abs(ctx.spray.cproj_weyl).max(), np.abs(ctx.spray.R_ik).max()


_EXTRACTORS = {
    "berwald": _berwald,
    "weakly_berwald": _weakly_berwald,
    "douglas": _douglas,
    "gdw": _gdw,
    "gb_weyl": _gb_weyl,
    "h_vanishes": _h_vanishes,
    "r_quadratic": _r_quadratic,
    "scalar_curvature": _scalar_curvature,
    "cproj_weyl_vanishes": _cproj_weyl_vanishes,
}

PREDICATE_NAMES = tuple(_EXTRACTORS) + ("constant_curvature",)


def evaluate_predicates(metric: MetricDef, samples: SamplePlan | list,
                        tol: float = DEFAULT_TOL,
                        spec: JetSpec | None = None,
                        names=None) -> dict[str, PredicateResult]:
    """Evaluate the requested predicates (default: all) over shared samples.

    Contexts are built once per sample and reused across predicates; the
    reduction over samples is sequential and deterministic.
    """
    if names is None:
        names = PREDICATE_NAMES
    names = list(names)
    want_constant = "constant_curvature" in names
    plain = [n for n in names if n != "constant_curvature"]
    if want_constant and "scalar_curvature" not in plain:
        plain.append("scalar_curvature")
    unknown = set(plain) - set(_EXTRACTORS)
    if unknown:
        raise KeyError(f"unknown predicates: {sorted(unknown)}")

    spec = spec if spec is not None else default_spec(metric.dim)
    pts = list(samples)
    per: dict[str, list[tuple[float, float]]] = {n: [] for n in plain}
    flags = []
    for x, y in pts:
        ctx = GeometryContext(metric, x, y, spec=spec)
        for n in plain:
            per[n].append(_EXTRACTORS[n](ctx))
        if want_constant:
            flags.append(ctx.flag_curvature)

    out: dict[str, PredicateResult] = {}
    for n in plain:
        residuals = [r for r, _ in per[n]]
        scale = max(s for _, s in per[n])
        worst = int(np.argmax(residuals))
        res = float(residuals[worst])
        out[n] = PredicateResult(n, res, float(scale), tol,
                                 _verdict(res, scale, tol), len(pts),
                                 worst, [float(r) for r in residuals])

    if want_constant:
        flags = np.asarray(flags)
        dispersion = float(flags.std() / max(1.0, abs(flags.mean())))
        verdict = _verdict(dispersion, 1.0, tol)
        scal = out["scalar_curvature"]
        if scal.verdict == FAILS:
            verdict = FAILS
        elif scal.verdict == INDETERMINATE and verdict == HOLDS:
            verdict = INDETERMINATE
        out["constant_curvature"] = PredicateResult(
            "constant_curvature", dispersion, 1.0, tol, verdict, len(pts),
            int(np.argmax(np.abs(flags - flags.mean()))),
            [float(abs(k - flags.mean())) for k in flags])
    if "scalar_curvature" not in names and "scalar_curvature" in out:
        del out["scalar_curvature"]
    return out


def _single(metric, samples, tol, name) -> PredicateResult:
    return evaluate_predicates(metric, samples, tol, names=[name])[name]


def is_berwald(metric, samples, tol=DEFAULT_TOL):
    return _single(metric, samples, tol, "berwald")

def is_weakly_berwald(metric, samples, tol=DEFAULT_TOL):
    return _single(metric, samples, tol, "weakly_berwald")

def is_douglas(metric, samples, tol=DEFAULT_TOL):
    return _single(metric, samples, tol, "douglas")

def is_gdw(metric, samples, tol=DEFAULT_TOL):
    """Drift of the Douglas tensor along geodesics is proportional to y,
    tested as vanishing of its angular projection."""
    return _single(metric, samples, tol, "gdw")

def is_gb_weyl(metric, samples, tol=DEFAULT_TOL):
    """Berwald curvature splits into a horizontally parallel part plus a
    y-proportional part, tested as vanishing of the angular projection of
    B_{|m} y^m."""
    return _single(metric, samples, tol, "gb_weyl")

def h_vanishes(metric, samples, tol=DEFAULT_TOL):
    return _single(metric, samples, tol, "h_vanishes")

def is_r_quadratic(metric, samples, tol=DEFAULT_TOL):
    """R_j{}^i{}_{kl} independent of y (its y-derivative vanishes)."""
    return _single(metric, samples, tol, "r_quadratic")

def is_scalar_curvature(metric, samples, tol=DEFAULT_TOL):
    return _single(metric, samples, tol, "scalar_curvature")

def is_constant_curvature(metric, samples, tol=DEFAULT_TOL):
    return _single(metric, samples, tol, "constant_curvature")

def cproj_weyl_vanishes(metric, samples, tol=DEFAULT_TOL):
    return _single(metric, samples, tol, "cproj_weyl_vanishes")


# -- implication suite ---------------------------------------------------------

@dataclass
class ImplicationReport:
    name: str
    status: str  # consistent | violated | untested
    vacuous: bool
    detail: str


CONSISTENT = "consistent"
VIOLATED = "violated"
UNTESTED = "untested"

# (name, [(predicate, required_truth)], (consequent, required_truth), needs_n_gt_2)
IMPLICATIONS = [
    ("gb_weyl_implies_gdw",
     [("gb_weyl", True)], ("gdw", True), False),
    ("gb_weyl_implies_h_vanishes",
     [("gb_weyl", True)], ("h_vanishes", True), False),
    ("gdw_with_h_vanishing_implies_gb_weyl",
     [("gdw", True), ("h_vanishes", True)], ("gb_weyl", True), False),
    ("r_quadratic_implies_gb_weyl",
     [("r_quadratic", True)], ("gb_weyl", True), False),
    ("scalar_nonconstant_excludes_gb_weyl",
     [("scalar_curvature", True), ("constant_curvature", False)],
     ("gb_weyl", False), True),
]


def run_theorem_checks(metric: MetricDef, samples, tol: float = DEFAULT_TOL,
                       predicates: dict[str, PredicateResult] | None = None,
                       ) -> tuple[dict[str, PredicateResult], list[ImplicationReport]]:
    """Evaluate the containment implications between the curvature classes as
    material conditionals on the predicate verdicts."""
    if predicates is None:
        predicates = evaluate_predicates(metric, samples, tol)
    reports = []
    for name, antecedents, (cons, cons_truth), needs_n3 in IMPLICATIONS:
        if needs_n3 and metric.dim <= 2:
            reports.append(ImplicationReport(
                name, UNTESTED, False, "requires chart dimension > 2"))
            continue
        ants = [(predicates[p], truth) for p, truth in antecedents]
        if any(r.verdict == INDETERMINATE for r, _ in ants):
            reports.append(ImplicationReport(
                name, UNTESTED, False,
                "antecedent indeterminate at this tolerance"))
            continue
        if not all(_sign_ok(r.verdict, truth) for r, truth in ants):
            reports.append(ImplicationReport(
                name, CONSISTENT, True, "antecedent not satisfied"))
            continue
        cons_res = predicates[cons]
        if cons_res.verdict == INDETERMINATE:
            reports.append(ImplicationReport(
                name, UNTESTED, False,
                "consequent indeterminate at this tolerance"))
        elif _sign_ok(cons_res.verdict, cons_truth):
            reports.append(ImplicationReport(name, CONSISTENT, False, ""))
        else:
            want = HOLDS if cons_truth else FAILS
            reports.append(ImplicationReport(
                name, VIOLATED, False,
                f"consequent {cons} is {cons_res.verdict}, expected {want} "
                f"(residual {cons_res.residual:.3e}, "
                f"threshold {cons_res.threshold:.3e})"))
    return predicates, reports
