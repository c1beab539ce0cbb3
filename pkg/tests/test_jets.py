"""Jet arithmetic: exactness on polynomials, algebra closure, Leibniz rule."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finslerlab.jets import (
    Jet,
    JetBaseMismatch,
    JetDomainError,
    JetSpec,
    JetSpecError,
    extract_partial,
    lift_coordinate,
    lift_point,
    multi_indices,
)

SPEC2 = JetSpec(2, 2, 4)


def test_multi_index_graded_prefix():
    small = multi_indices(3, 2)
    big = multi_indices(3, 4)
    assert big[: len(small)] == small
    assert small[0] == (0, 0, 0)
    assert len(multi_indices(3, 7)) == 120


def test_lift_coordinate_y():
    j = lift_coordinate(SPEC2, (0.0, 0.0), (1.0, 0.0), "y", 0)
    assert j.value == 1.0
    assert j.partial((0, 0), (1, 0)) == 1.0
    assert j.partial((0, 0), (0, 1)) == 0.0
    assert j.partial((1, 0), (0, 0)) == 0.0


def test_lift_coordinate_x():
    j = lift_coordinate(SPEC2, (0.3, 0.0), (1.0, 0.0), "x", 0)
    assert j.value == 0.3
    assert j.partial((1, 0), (0, 0)) == 1.0
    assert j.partial((2, 0), (0, 0)) == 0.0  # linear function


def test_lift_errors():
    with pytest.raises(JetDomainError):
        lift_coordinate(SPEC2, (0.0, 0.0), (0.0, 0.0), "y", 0)
    with pytest.raises(JetSpecError):
        lift_coordinate(SPEC2, (0.0, 0.0), (1.0, 0.0), "y", 5)


def test_square_of_coordinate():
    j = lift_coordinate(SPEC2, (0.0, 0.0), (2.0, 1.0), "y", 0)
    sq = j * j
    assert sq.value == 4.0
    assert sq.partial((0, 0), (1, 0)) == 4.0
    assert sq.partial((0, 0), (2, 0)) == 2.0


def test_sqrt_of_norm():
    xs, ys = lift_point(SPEC2, (0.0, 0.0), (3.0, 4.0))
    norm = (ys[0] * ys[0] + ys[1] * ys[1]).sqrt()
    assert norm.value == pytest.approx(5.0, rel=1e-14)
    assert norm.partial((0, 0), (1, 0)) == pytest.approx(3.0 / 5.0, rel=1e-13)
    assert norm.partial((0, 0), (0, 1)) == pytest.approx(4.0 / 5.0, rel=1e-13)


def test_geometric_series_division():
    spec = JetSpec(1, 3, 2)
    x = lift_coordinate(spec, (0.0,), (1.0,), "x", 0)
    g = 1.0 / (1.0 - x)
    for order in range(spec.kx + 1):
        coeff = g.partial((order,), (0,)) / math.factorial(order)
        assert coeff == pytest.approx(1.0, abs=1e-14)


def test_third_partial_of_cube():
    spec = JetSpec(2, 0, 4)
    y = lift_coordinate(spec, (0.0, 0.0), (2.0, 1.0), "y", 0)
    cube = y * y * y
    assert cube.partial((0, 0), (3, 0)) == pytest.approx(6.0, rel=1e-14)


def test_mixed_partial_xy():
    x = lift_coordinate(SPEC2, (0.7, 0.0), (2.0, 1.0), "x", 0)
    y = lift_coordinate(SPEC2, (0.7, 0.0), (2.0, 1.0), "y", 0)
    prod = x * y
    assert prod.partial((1, 0), (1, 0)) == pytest.approx(1.0, rel=1e-14)


def test_partial_order_errors():
    j = lift_coordinate(SPEC2, (0.0, 0.0), (1.0, 0.0), "y", 0)
    with pytest.raises(JetSpecError):
        j.partial((3, 0), (0, 0))
    with pytest.raises(JetSpecError):
        j.partial((0, 0), (5, 0))


def test_base_mismatch_rejected():
    a = lift_coordinate(SPEC2, (0.0, 0.0), (1.0, 0.0), "y", 0)
    b = lift_coordinate(SPEC2, (0.0, 0.0), (1.0, 0.5), "y", 0)
    with pytest.raises(JetBaseMismatch):
        a + b


def test_division_by_zero_jet():
    zero = Jet.constant(SPEC2, (0.0, 0.0), (1.0, 0.0), 0.0)
    one = Jet.constant(SPEC2, (0.0, 0.0), (1.0, 0.0), 1.0)
    with pytest.raises(JetDomainError):
        one / zero


def test_sqrt_of_negative_jet():
    neg = Jet.constant(SPEC2, (0.0, 0.0), (1.0, 0.0), -2.0)
    with pytest.raises(JetDomainError):
        neg.sqrt()


def test_mixed_spec_ops_truncate_to_meet():
    x0, y0 = (0.1, 0.2), (1.0, 0.5)
    a = lift_coordinate(JetSpec(2, 2, 4), x0, y0, "y", 0)
    b = lift_coordinate(JetSpec(2, 1, 6), x0, y0, "y", 1)
    p = a * b
    assert p.spec == JetSpec(2, 1, 4)
    assert p.value == pytest.approx(0.5)


def test_differentiation_reduces_spec():
    xs, ys = lift_point(SPEC2, (0.2, 0.1), (1.0, 2.0))
    f = xs[0] * ys[1] * ys[1]
    fx = f.dx(0)
    assert fx.spec == JetSpec(2, 1, 4)
    assert fx.value == pytest.approx(4.0)  # d/dx0 (x0*y1^2) = y1^2 = 4
    fyy = f.dy(1).dy(1)
    assert fyy.value == pytest.approx(2 * 0.2)


# -- randomized algebra properties ------------------------------------------

def _random_poly_jet(rng, spec, x0, y0):
    """Jet of a random polynomial built from lifted coordinates (exact)."""
    xs, ys = lift_point(spec, x0, y0)
    coords = xs + ys
    acc = Jet.constant(spec, x0, y0, rng.uniform(-1, 1))
    for _ in range(4):
        term = Jet.constant(spec, x0, y0, rng.uniform(-1, 1))
        for _ in range(rng.integers(1, 3)):
            term = term * coords[rng.integers(0, len(coords))]
        acc = acc + term
    return acc


@given(seed=st.integers(min_value=0, max_value=10_000))
@settings(max_examples=25, deadline=None)
def test_leibniz_product_rule(seed):
    rng = np.random.default_rng(seed)
    spec = JetSpec(2, 2, 3)
    x0 = tuple(rng.uniform(-0.5, 0.5, 2))
    y0 = tuple(rng.uniform(0.5, 1.5, 2))
    a = _random_poly_jet(rng, spec, x0, y0)
    b = _random_poly_jet(rng, spec, x0, y0)
    ab = a * b
    for alpha in multi_indices(2, spec.kx):
        for beta in multi_indices(2, spec.ky):
            want = 0.0
            for a1 in multi_indices(2, sum(alpha)):
                if any(p > q for p, q in zip(a1, alpha)):
                    continue
                for b1 in multi_indices(2, sum(beta)):
                    if any(p > q for p, q in zip(b1, beta)):
                        continue
                    a2 = tuple(q - p for p, q in zip(a1, alpha))
                    b2 = tuple(q - p for p, q in zip(b1, beta))
                    binom = 1.0
                    for p, q in zip(a1 + b1, alpha + beta):
                        binom *= math.comb(q, p)
                    want += binom * a.partial(a1, b1) * b.partial(a2, b2)
            got = ab.partial(alpha, beta)
            assert got == pytest.approx(want, rel=1e-11, abs=1e-11)


@given(seed=st.integers(min_value=0, max_value=10_000))
@settings(max_examples=25, deadline=None)
def test_sqrt_squares_back(seed):
    rng = np.random.default_rng(seed)
    spec = JetSpec(2, 2, 4)
    x0 = tuple(rng.uniform(-0.5, 0.5, 2))
    y0 = tuple(rng.uniform(0.5, 1.5, 2))
    a = _random_poly_jet(rng, spec, x0, y0)
    a = a * a + 0.5  # strictly positive value
    r = a.sqrt()
    back = r * r
    scale = np.abs(a.c).max()
    assert np.abs(back.c - a.c).max() <= 1e-12 * max(1.0, scale)


@given(seed=st.integers(min_value=0, max_value=10_000))
@settings(max_examples=25, deadline=None)
def test_division_inverts_multiplication(seed):
    rng = np.random.default_rng(seed)
    spec = JetSpec(2, 1, 3)
    x0 = tuple(rng.uniform(-0.5, 0.5, 2))
    y0 = tuple(rng.uniform(0.5, 1.5, 2))
    a = _random_poly_jet(rng, spec, x0, y0)
    b = _random_poly_jet(rng, spec, x0, y0)
    b = b * b + 1.0
    q = a / b
    back = q * b
    scale = max(1.0, np.abs(a.c).max())
    assert np.abs(back.c - a.c).max() <= 1e-12 * scale


def test_rational_pow_matches_sqrt_chain():
    spec = JetSpec(2, 1, 4)
    x0, y0 = (0.1, -0.2), (0.8, 1.1)
    xs, ys = lift_point(spec, x0, y0)
    a = ys[0] * ys[0] + ys[1] * ys[1] + xs[0] * ys[1] + 2.0
    p = a.pow(3, 2)
    q = a.sqrt() * a
    assert np.abs(p.c - q.c).max() <= 1e-12 * np.abs(q.c).max()


def test_polynomial_partials_exact():
    # degree <= min(kx, ky) polynomials must come out at machine precision
    spec = JetSpec(2, 2, 2)
    x0, y0 = (0.4, -0.3), (1.2, 0.7)
    xs, ys = lift_point(spec, x0, y0)
    f = xs[0] * xs[1] * ys[0] * ys[1]  # d2x d2y mixed
    got = f.partial((1, 1), (1, 1))
    assert got == pytest.approx(1.0, rel=1e-13)
    g = (xs[0] + ys[0]) * (xs[0] + ys[0])
    assert g.partial((2, 0), (0, 0)) == pytest.approx(2.0, rel=1e-13)
    assert g.partial((1, 0), (1, 0)) == pytest.approx(2.0, rel=1e-13)


def test_extract_partial_function_alias():
    j = lift_coordinate(SPEC2, (0.0, 0.0), (1.0, 2.0), "y", 1)
    assert extract_partial(j, (0, 0), (0, 0)) == 2.0
