"""Parser, printer round-trip, and evaluator consistency for the metric DSL."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finslerlab import expr as ex
from finslerlab.jets import JetSpec

FUNK_TEXT = ("(sqrt(norm2(y) - (norm2(x)*norm2(y) - dot(x,y)^2)) + dot(x,y))"
             " / (1 - norm2(x))")


def test_parse_norm2():
    ast = ex.parse("norm2(y)")
    assert ast == ex.Norm2(ex.Vec("y"))


def test_parse_funk_shape():
    ast = ex.parse(FUNK_TEXT)
    assert isinstance(ast, ex.BinOp) and ast.op == "/"
    assert isinstance(ast.left, ex.BinOp) and ast.left.op == "+"


def test_syntax_error_position():
    with pytest.raises(ex.MetricExprError) as err:
        ex.parse("dot(x y)")
    assert err.value.line == 1
    assert err.value.col == 7  # the 'y' where a comma was expected


def test_vector_outside_call_rejected():
    with pytest.raises(ex.MetricExprError):
        ex.parse("x + 1")


def test_unbound_parameter():
    with pytest.raises(ex.MetricExprError) as err:
        ex.MetricExpr.from_text("q * norm2(y)", ex.FORM_F2, {})
    assert "unbound" in str(err.value)


def test_scalar_vector_kind_mismatch():
    with pytest.raises(ex.MetricExprError):
        ex.MetricExpr.from_text("dot(a, y)", ex.FORM_F2, {"a": 2.0})
    with pytest.raises(ex.MetricExprError):
        ex.MetricExpr.from_text("a * norm2(y)", ex.FORM_F2, {"a": (1.0, 0.0)})


def test_half_power_canonicalized_to_sqrt():
    assert ex.parse("norm2(y)^(1/2)") == ex.Sqrt(ex.Norm2(ex.Vec("y")))


def test_euclidean_jet_values():
    e = ex.MetricExpr.from_text("norm2(y)", ex.FORM_F2, {})
    spec = JetSpec(2, 2, 4)
    j = ex.eval_f2_jet(e, spec, (0.3, -0.2), (3.0, 4.0))
    assert j.value == pytest.approx(25.0)
    assert j.partial((0, 0), (2, 0)) == pytest.approx(2.0)
    assert j.partial((0, 0), (1, 1)) == pytest.approx(0.0)


def test_funk_at_origin_is_euclidean():
    f = ex.MetricExpr.from_text(FUNK_TEXT, ex.FORM_F, {})
    spec = JetSpec(2, 2, 4)
    j = ex.eval_f2_jet(f, spec, (0.0, 0.0), (1.0, 0.0))
    assert j.value == pytest.approx(1.0, rel=1e-12)
    # F^2 = |y|^2 at the origin, so its y-Hessian is 2*I there
    assert j.partial((0, 0), (2, 0)) == pytest.approx(2.0, rel=1e-10)
    assert j.partial((0, 0), (0, 2)) == pytest.approx(2.0, rel=1e-10)


def test_funk_outside_ball_domain_error():
    f = ex.MetricExpr.from_text(FUNK_TEXT, ex.FORM_F, {})
    spec = JetSpec(2, 1, 2)
    with pytest.raises(ex.MetricDomainError) as err:
        ex.eval_f2_jet(f, spec, (1.2, 0.0), (0.0, 1.0))
    assert "sqrt" in str(err.value)


def test_value_eval_batched():
    f = ex.MetricExpr.from_text("norm2(y) + q*dot(x,y)^2", ex.FORM_F2, {"q": 0.5})
    x = np.zeros((4, 2))
    x[:, 0] = [0.0, 0.1, 0.2, 0.3]
    y = np.tile([1.0, 1.0], (4, 1))
    vals = ex.eval_f2_value(f, x, y)
    want = 2.0 + 0.5 * x[:, 0] ** 2
    np.testing.assert_allclose(vals, want, rtol=1e-14)


def test_jet_and_value_agree():
    f = ex.MetricExpr.from_text(FUNK_TEXT, ex.FORM_F, {})
    x, y = (0.2, -0.1), (0.8, 0.6)
    j = ex.eval_f2_jet(f, JetSpec(2, 1, 2), x, y)
    v = ex.eval_f2_value(f, np.array(x), np.array(y))
    assert j.value == pytest.approx(float(v), rel=1e-14)


def test_homogeneity_euclidean_and_funk():
    pts = [((0.1, 0.2), (0.9, 0.1)), ((0.0, 0.0), (0.3, -0.7))]
    e = ex.MetricExpr.from_text("norm2(y)", ex.FORM_F2, {})
    assert ex.check_homogeneity(e, pts, tol=1e-12).passed
    f = ex.MetricExpr.from_text(FUNK_TEXT, ex.FORM_F, {})
    rep = ex.check_homogeneity(f, pts, tol=1e-12)
    assert rep.passed


def test_homogeneity_detects_wrong_form():
    # |y|^2 declared as F is 2-homogeneous, so the 1-homogeneity check fails
    wrong = ex.MetricExpr.from_text("norm2(y)", ex.FORM_F, {})
    rep = ex.check_homogeneity(wrong, [((0.0, 0.0), (1.0, 0.5))], tol=1e-9)
    assert not rep.passed
    assert rep.max_residual > 0.5


# -- round-trip property -------------------------------------------------------

_VECS = [ex.Vec("x"), ex.Vec("y"), ex.Vec("a")]


def _asts(depth: int):
    leaf = st.one_of(
        st.sampled_from([ex.Num(1.0), ex.Num(2.0), ex.Num(0.5), ex.Param("q")]),
        st.builds(ex.Dot, st.sampled_from(_VECS), st.sampled_from(_VECS)),
        st.builds(ex.Norm2, st.sampled_from(_VECS)),
    )
    if depth == 0:
        return leaf
    sub = _asts(depth - 1)
    return st.one_of(
        leaf,
        st.builds(ex.BinOp, st.sampled_from(["+", "-", "*", "/"]), sub, sub),
        st.builds(ex.Neg, sub),
        st.builds(ex.Sqrt, sub),
        st.builds(ex.Pow, sub, st.sampled_from([2, 3]), st.sampled_from([1, 3])),
    )


@given(_asts(3))
@settings(max_examples=200, deadline=None)
def test_print_parse_roundtrip(ast):
    assert ex.parse(ex.print_expr(ast)) == ast
