"""Built-in metric catalog, chart domains, and admissible-point sampling.

Each catalog entry is a canonical expression text plus parameter defaults, a
chart-domain predicate, and the classification verdicts the metric is known
to satisfy (consumed by the acceptance suite).  The catalog covers the flat
Euclidean norm, a curved Riemannian quadratic form, a Randers family with a
non-closed drift 1-form, the Funk norm on the unit ball, the one-parameter
family of projectively flat norms with constant flag curvature, a
scalar-curvature norm built from a constant vector, and an engineered
quartic perturbation used as a falsifiability control.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .jets import Jet, JetSpec


class CatalogError(KeyError):
    """Unknown catalog metric name."""


class SamplingError(RuntimeError):
    """Domain sampling failed (predicate too restrictive or degenerate)."""


# -- chart domains -------------------------------------------------------------

@dataclass(frozen=True)
class Domain:
    """Chart-domain predicate for x; `kind` is 'ball', 'box' or 'all'.

    `contains(x, margin)` asks whether the closed ball of radius `margin`
    around x still lies inside the domain, which is exact for these shapes.
    """

    kind: str
    size: float = 0.0
    sample_halfwidth: float = 1.0  # box half-width used when drawing samples

    def contains(self, x, margin: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        if self.kind == "all":
            return True
        if self.kind == "ball":
            return float(np.linalg.norm(x)) + margin <= self.size
        if self.kind == "box":
            return float(np.abs(x).max()) + margin <= self.size
        raise ValueError(f"unknown domain kind {self.kind!r}")

    def draw_halfwidth(self) -> float:
        if self.kind != "all" and self.size > 0:
            return self.size
        return self.sample_halfwidth


def never_domain() -> Domain:
    """Degenerate domain that admits no point; used to exercise sampling errors."""
    return Domain("ball", 0.0)


# -- metric definition ----------------------------------------------------------

@dataclass
class MetricDef:
    """An evaluatable metric on one chart: expression, domain, expectations."""

    name: str
    dim: int
    expr: ex.MetricExpr
    domain: Domain
    expected: dict[str, bool] = field(default_factory=dict)

    def f2_jet(self, spec: JetSpec, x, y) -> Jet:
        return ex.eval_f2_jet(self.expr, spec, x, y)

    def f2_value(self, x, y) -> np.ndarray:
        return ex.eval_f2_value(self.expr, x, y)

    def f_value(self, x, y) -> np.ndarray:
        return ex.eval_f_value(self.expr, x, y)

    def scaled(self, c: float) -> "MetricDef":
        """The metric c*F on the same chart (sprays and verdicts unchanged)."""
        ast = self.expr.ast
        if self.expr.declared_form == ex.FORM_F:
            ast = ex.BinOp("*", ex.Num(c), ast)
        else:
            ast = ex.BinOp("*", ex.Num(c * c), ast)
        scaled_expr = ex.MetricExpr(ast, self.expr.declared_form, self.expr.params)
        return MetricDef(f"{self.name}*{c:g}", self.dim, scaled_expr, self.domain,
                         dict(self.expected))


# -- catalog ---------------------------------------------------------------------

FUNK_TEXT = ("(sqrt(norm2(y) - (norm2(x)*norm2(y) - dot(x,y)^2)) + dot(x,y))"
             " / (1 - norm2(x))")

# Phi = eps*|y|^2 + (|x|^2 |y|^2 - <x,y>^2),  Psi = 1 + 2 eps |x|^2 + |x|^4,
# inlined textually so the evaluation order matches the printed closed form.
BRYANT_TEXT = (
    "(sqrt((1 + 2*eps*norm2(x) + norm2(x)^2)"
    "*((1/2)*(sqrt((eps*norm2(y) + (norm2(x)*norm2(y) - dot(x,y)^2))^2"
    " + (1 - eps^2)*norm2(y)^2)"
    " + (eps*norm2(y) + (norm2(x)*norm2(y) - dot(x,y)^2))))"
    " + (1 - eps^2)*dot(x,y)^2)"
    " + sqrt(1 - eps^2)*dot(x,y))"
    " / (1 + 2*eps*norm2(x) + norm2(x)^2)"
)

# A = |x|^2 <a,y> - 2 <a,x> <x,y>;  F = (sqrt(A^2 + |y|^2 (1 - |a|^2 |x|^4)) - A)
#                                       / (1 - |a|^2 |x|^4)
AVECTOR_TEXT = (
    "(sqrt((norm2(x)*dot(a,y) - 2*dot(a,x)*dot(x,y))^2"
    " + norm2(y)*(1 - norm2(a)*norm2(x)^2))"
    " - (norm2(x)*dot(a,y) - 2*dot(a,x)*dot(x,y)))"
    " / (1 - norm2(a)*norm2(x)^2)"
)

RANDERS_TEXT = "sqrt(norm2(y)) + dot(b0, y) + dot(u, y)*dot(v, x)"

QUADRATIC_TEXT = "norm2(y) + q*dot(x,y)^2"

# 2-homogeneous quartic perturbation of the flat norm with an x-dependent
# coefficient; engineered to break the angular-projection predicates.
PERTURBED_TEXT = "norm2(y) + c*(1 + dot(w,x))*dot(u,y)^2*dot(v,y)^2/norm2(y)"


def _unit(dim: int, axis: int, scale: float = 1.0) -> tuple[float, ...]:
    return tuple(scale if i == axis % dim else 0.0 for i in range(dim))


def _catalog_entry(name: str, dim: int, overrides: dict) -> MetricDef:
    if name == "euclidean":
        e = ex.MetricExpr.from_text("norm2(y)", ex.FORM_F2, {})
        return MetricDef(name, dim, e, Domain("all", sample_halfwidth=1.0),
                         expected={"berwald": True, "weakly_berwald": True,
                                   "douglas": True, "gdw": True, "gb_weyl": True,
                                   "h_vanishes": True, "r_quadratic": True,
                                   "scalar_curvature": True,
                                   "constant_curvature": True,
                                   "cproj_weyl_vanishes": True})
    if name == "riemannian_quadratic":
        params = {"q": 0.3}
        params.update(overrides)
        e = ex.MetricExpr.from_text(QUADRATIC_TEXT, ex.FORM_F2, params)
        return MetricDef(name, dim, e, Domain("box", 1.0),
                         expected={"berwald": True, "weakly_berwald": True,
                                   "douglas": True, "gdw": True, "gb_weyl": True,
                                   "h_vanishes": True, "r_quadratic": True})
    if name == "randers_general":
        params = {"b0": _unit(dim, 0, 0.1), "u": _unit(dim, 1, 0.15),
                  "v": _unit(dim, 0, 0.2)}
        params.update(overrides)
        e = ex.MetricExpr.from_text(RANDERS_TEXT, ex.FORM_F, params)
        return MetricDef(name, dim, e, Domain("box", 1.0),
                         expected={"berwald": False})
    if name == "funk":
        e = ex.MetricExpr.from_text(FUNK_TEXT, ex.FORM_F, overrides or {})
        return MetricDef(name, dim, e, Domain("ball", 0.9),
                         expected={"berwald": False, "h_vanishes": True,
                                   "gb_weyl": True, "gdw": True,
                                   "scalar_curvature": True,
                                   "constant_curvature": True,
                                   "cproj_weyl_vanishes": True,
                                   "r_quadratic": False})
    if name == "bryant":
        params = {"eps": 0.5}
        params.update(overrides)
        if not abs(params["eps"]) < 1:
            raise CatalogError(f"bryant parameter eps must satisfy |eps| < 1, "
                               f"got {params['eps']}")
        e = ex.MetricExpr.from_text(BRYANT_TEXT, ex.FORM_F, params)
        return MetricDef(name, dim, e, Domain("box", 1.5),
                         expected={"berwald": False, "constant_curvature": True,
                                   "scalar_curvature": True,
                                   "cproj_weyl_vanishes": True,
                                   "gb_weyl": True, "gdw": True,
                                   "h_vanishes": True})
    if name == "shen_avector":
        params = {"a": _unit(dim, 0, 0.1)}
        params.update(overrides)
        e = ex.MetricExpr.from_text(AVECTOR_TEXT, ex.FORM_F, params)
        return MetricDef(name, dim, e, Domain("box", 1.0),
                         expected={"berwald": False, "scalar_curvature": True,
                                   "constant_curvature": False,
                                   "h_vanishes": False, "gdw": True,
                                   "gb_weyl": False})
    if name == "perturbed_quartic":
        params = {"c": 0.05, "w": _unit(dim, 0, 0.5),
                  "u": _unit(dim, 0), "v": _unit(dim, 1)}
        params.update(overrides)
        e = ex.MetricExpr.from_text(PERTURBED_TEXT, ex.FORM_F2, params)
        return MetricDef(name, dim, e, Domain("box", 1.0),
                         expected={"berwald": False, "gdw": False})
    raise CatalogError(f"unknown catalog metric {name!r}; known: {CATALOG_NAMES}")


CATALOG_NAMES = ("euclidean", "riemannian_quadratic", "randers_general", "funk",
                 "bryant", "shen_avector", "perturbed_quartic")


def catalog_get(name: str, dim: int = 3, **param_overrides) -> MetricDef:
    """Fetch a catalog metric, optionally overriding parameter defaults."""
    if name not in CATALOG_NAMES:
        raise CatalogError(f"unknown catalog metric {name!r}; known: {CATALOG_NAMES}")
    if dim < 2:
        raise CatalogError(f"chart dimension must be >= 2, got {dim}")
    return _catalog_entry(name, dim, param_overrides)


# -- sampling --------------------------------------------------------------------

@dataclass(frozen=True)
class SamplePlan:
    """Deterministic-for-seed admissible sample points (x inside the domain
    with margin, y on the unit sphere)."""

    metric_name: str
    seed: int
    points: tuple[tuple[tuple[float, ...], tuple[float, ...]], ...]

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


MARGIN = 0.05
_MAX_REJECTIONS = 100_000


def sample_domain(metric: MetricDef, count: int, seed: int,
                  margin: float = MARGIN) -> SamplePlan:
    """Rejection-sample (x, y) pairs: x strictly interior (a radius-`margin`
    ball around x stays in the domain), y uniform on the unit Euclidean
    sphere.  A larger margin yields better-conditioned points (high-order
    derivatives of the catalog metrics blow up toward chart boundaries)."""
    if count < 1:
        raise ValueError(f"sample count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    half = metric.domain.draw_halfwidth()
    points = []
    rejections = 0
    while len(points) < count:
        x = rng.uniform(-half, half, size=metric.dim)
        if not metric.domain.contains(x, margin=margin):
            rejections += 1
            if rejections > _MAX_REJECTIONS:
                raise SamplingError(
                    f"gave up sampling domain of {metric.name!r} after "
                    f"{_MAX_REJECTIONS} rejections")
            continue
        y = rng.normal(size=metric.dim)
        norm = np.linalg.norm(y)
        if norm < 1e-8:
            continue
        y = y / norm
        points.append((tuple(float(v) for v in x), tuple(float(v) for v in y)))
    return SamplePlan(metric.name, seed, tuple(points))


# -- catalog fixture identities ----------------------------------------------------

def funk_pde_residual(metric: MetricDef, samples: SamplePlan) -> float:
    """max |dF/dx^k - F dF/dy^k| over samples: the defining equation of the
    Funk norm, used to certify the projectively flat fixture."""
    spec = JetSpec(metric.dim, 1, 1)
    worst = 0.0
    for x, y in samples:
        f = metric.f2_jet(spec, x, y).sqrt()
        fval = f.value
        for k in range(metric.dim):
            res = abs(f.dx(k).value - fval * f.dy(k).value)
            worst = max(worst, res)
    return worst
