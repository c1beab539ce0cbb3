"""Catalog metrics: domains, sampling determinism, fixture identities."""

import numpy as np
import pytest

from finslerlab import expr as ex
from finslerlab.engine import GeometryContext
from finslerlab.jets import JetSpec
from finslerlab.metrics import (
    CATALOG_NAMES,
    CatalogError,
    Domain,
    MetricDef,
    SamplingError,
    catalog_get,
    funk_pde_residual,
    never_domain,
    sample_domain,
)


def test_catalog_unknown_name():
    with pytest.raises(CatalogError):
        catalog_get("poincare")


def test_catalog_has_required_entries():
    for name in ("euclidean", "riemannian_quadratic", "randers_general",
                 "funk", "bryant", "shen_avector"):
        assert name in CATALOG_NAMES
        m = catalog_get(name, dim=3)
        assert m.dim == 3


def test_bryant_epsilon_validated():
    with pytest.raises(CatalogError):
        catalog_get("bryant", eps=1.5)


def test_funk_expected_verdicts():
    m = catalog_get("funk")
    assert m.expected["berwald"] is False
    assert m.expected["h_vanishes"] is True
    assert m.expected["gb_weyl"] is True


def test_shen_avector_expected_verdicts():
    m = catalog_get("shen_avector")
    assert m.expected["scalar_curvature"] is True
    assert m.expected["h_vanishes"] is False
    assert m.expected["gdw"] is True
    assert m.expected["gb_weyl"] is False


def test_sampling_deterministic_and_in_domain():
    m = catalog_get("funk", dim=3)
    a = sample_domain(m, 20, seed=7)
    b = sample_domain(m, 20, seed=7)
    assert a.points == b.points
    assert len(a) == 20
    for x, y in a:
        assert np.linalg.norm(x) <= 0.9
        assert abs(np.linalg.norm(y) - 1.0) < 1e-12
    c = sample_domain(m, 20, seed=8)
    assert c.points != a.points


def test_sampling_euclidean_unrestricted():
    m = catalog_get("euclidean", dim=2)
    plan = sample_domain(m, 5, seed=1)
    assert len(plan) == 5


def test_sampling_degenerate_domain_errors():
    m = catalog_get("euclidean", dim=2)
    bad = MetricDef("empty", 2, m.expr, never_domain())
    with pytest.raises(SamplingError):
        sample_domain(bad, 1, seed=0)


def test_sample_count_validated():
    m = catalog_get("euclidean", dim=2)
    with pytest.raises(ValueError):
        sample_domain(m, 0, seed=0)


def test_domain_margins():
    d = Domain("ball", 0.9)
    assert d.contains((0.5, 0.0))
    assert d.contains((0.84, 0.0), margin=0.05)
    assert not d.contains((0.86, 0.0), margin=0.05)
    b = Domain("box", 1.0)
    assert b.contains((0.9, -0.9))
    assert not b.contains((1.05, 0.0))


def test_funk_pde_certifies_fixture():
    m = catalog_get("funk", dim=3)
    plan = sample_domain(m, 10, seed=3)
    assert funk_pde_residual(m, plan) < 1e-8


def test_avector_spray_divergence_identity():
    m = catalog_get("shen_avector", dim=3)
    a = np.asarray(m.expr.params["a"])
    worst = 0.0
    for x, y in sample_domain(m, 8, seed=5):
        ctx = GeometryContext(m, x, y)
        S = ctx.spray.S_jet.value
        want = (m.dim + 1) * float(a @ np.asarray(x)) * ctx.F_jet.value
        scale = max(1.0, abs(want))
        worst = max(worst, abs(S - want) / scale)
    assert worst < 1e-6


@pytest.mark.parametrize("name", CATALOG_NAMES)
def test_catalog_homogeneity_and_positive_definite(name):
    m = catalog_get(name, dim=3)
    plan = sample_domain(m, 6, seed=2)
    assert ex.check_homogeneity(m.expr, list(plan), tol=1e-9).passed
    for x, y in plan:
        GeometryContext(m, x, y).g  # raises SingularMetricError if not pd


@pytest.mark.parametrize("name", CATALOG_NAMES)
def test_catalog_reparse_is_bit_identical(name):
    m = catalog_get(name, dim=3)
    fresh = ex.MetricExpr.from_text(m.expr.text, m.expr.declared_form,
                                    m.expr.params)
    spec = JetSpec(3, 2, 7)
    for x, y in sample_domain(m, 2, seed=9):
        a = ex.eval_f2_jet(m.expr, spec, x, y)
        b = ex.eval_f2_jet(fresh, spec, x, y)
        assert np.array_equal(a.c, b.c)  # bit-for-bit


def test_scaled_metric_same_spray():
    m = catalog_get("funk", dim=3)
    s = m.scaled(2.0)
    x, y = next(iter(sample_domain(m, 1, seed=4)))
    a = GeometryContext(m, x, y)
    b = GeometryContext(s, x, y)
    assert abs(b.F2 - 4.0 * a.F2) < 1e-12 * a.F2
    assert np.abs(a.spray.G - b.spray.G).max() < 1e-10
