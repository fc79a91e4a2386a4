from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from imexstab.coeffs import (
    MAX_ORDER,
    check_order_conditions,
    check_zero_stability,
    evaluate_polynomials,
    exact_coefficients,
    generate_scheme,
    order_residuals,
    tabulated_coefficients,
)
from imexstab.errors import InvalidSchemeError, ParameterError

ORDERS = range(1, MAX_ORDER + 1)
DELTA_GRID = [round(0.05 * i, 2) for i in range(1, 21)]

# Standard BDF left-hand sides and extrapolation weights, oldest state first.
SBDF = {
    1: ([-1, 1], [1, 0]),
    2: ([Fraction(1, 2), -2, Fraction(3, 2)], [-1, 2, 0]),
    3: ([Fraction(-1, 3), Fraction(3, 2), -3, Fraction(11, 6)], [1, -3, 3, 0]),
    4: ([Fraction(1, 4), Fraction(-4, 3), 3, -4, Fraction(25, 12)], [-1, 4, -6, 4, 0]),
    5: ([Fraction(-1, 5), Fraction(5, 4), Fraction(-10, 3), 5, -5, Fraction(137, 60)], [1, -5, 10, -10, 5, 0]),
}


def _sympy_scheme(r: int):
    """Taylor expansion of ln(z) (z - 1 + delta)^r about z = 1, done by sympy."""
    z, d = sp.symbols("z delta")
    c = sp.expand((z - 1 + d) ** r)
    w = sp.symbols("w")
    f = sp.series(sp.log(1 + w) * (w + d) ** r, w, 0, r + 1).removeO()
    a = sp.expand(f.subs(w, z - 1))
    b = sp.expand(c - (z - 1) ** r)
    return z, d, [sp.Poly(p, z) for p in (a, b, c)]


@pytest.fixture(scope="module")
def sympy_schemes():
    return {r: _sympy_scheme(r) for r in ORDERS}


@pytest.mark.parametrize("r", ORDERS)
@pytest.mark.parametrize("delta", DELTA_GRID)
def test_generator_matches_closed_forms(r, delta):
    s = generate_scheme(r, delta)
    ref = tabulated_coefficients(r, delta)
    for key in ("a", "b", "c"):
        got = getattr(s, key)
        scale = np.maximum(np.abs(ref[key]), 1.0)
        assert np.all(np.abs(got - ref[key]) <= 1e-12 * scale)


@pytest.mark.parametrize("r", ORDERS)
def test_generator_matches_sympy_taylor(r, sympy_schemes):
    z, d, polys = sympy_schemes[r]
    for delta in (Fraction(1, 7), Fraction(3, 10), Fraction(1)):
        ex = exact_coefficients(r, delta)
        for key, P in zip(("a", "b", "c"), polys):
            coeffs = [sp.Rational(P.as_expr().coeff(z, j).subs(d, sp.Rational(delta.numerator, delta.denominator)))
                      for j in range(r + 1)]
            assert [Fraction(int(sp.numer(x)), int(sp.denom(x))) for x in coeffs] == ex[key]


@pytest.mark.parametrize("r", ORDERS)
def test_delta_one_is_sbdf(r):
    a_ref, b_ref = SBDF[r]
    ex = exact_coefficients(r, Fraction(1))
    assert ex["a"] == [Fraction(x) for x in a_ref]
    assert ex["b"] == [Fraction(x) for x in b_ref]
    assert ex["c"] == [Fraction(0)] * r + [Fraction(1)]
    s = generate_scheme(r, 1.0)
    assert s.is_sbdf
    np.testing.assert_array_equal(s.a, [float(x) for x in a_ref])


def test_first_order_examples():
    s = generate_scheme(1, 0.5)
    np.testing.assert_allclose(s.a, [-0.5, 0.5])
    np.testing.assert_allclose(s.c, [-0.5, 1.0])
    np.testing.assert_allclose(s.b, [0.5, 0.0])
    s2 = generate_scheme(2, 1.0)
    np.testing.assert_allclose(s2.a, [0.5, -2.0, 1.5])
    np.testing.assert_allclose(s2.b, [-1.0, 2.0, 0.0])


@given(st.floats(min_value=1e-3, max_value=1.0))
def test_order3_leading_coefficient(delta):
    s = generate_scheme(3, delta)
    assert s.a[3] == pytest.approx(3 * delta - 1.5 * delta**2 + delta**3 / 3, rel=1e-13)


@settings(max_examples=60)
@given(st.integers(1, 5), st.floats(min_value=1e-3, max_value=1.0))
def test_structural_invariants(r, delta):
    s = generate_scheme(r, delta)
    assert abs(s.a.sum()) <= 1e-13 * np.abs(s.a).sum()
    z = np.polynomial.Polynomial
    binom = (z([-1, 1]) ** r).coef
    np.testing.assert_allclose(s.c - s.b, binom, atol=1e-14)
    np.testing.assert_allclose(s.c, (z([delta - 1, 1]) ** r).coef, atol=1e-14)
    a1, b1, c1 = evaluate_polynomials(s, 1.0)
    assert abs(a1) < 1e-13
    assert c1 == pytest.approx(delta**r, rel=1e-12, abs=1e-15)
    assert b1 == pytest.approx(delta**r, rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("r", ORDERS)
@pytest.mark.parametrize("delta", DELTA_GRID)
def test_zero_stability_on_grid(r, delta):
    assert check_zero_stability(generate_scheme(r, delta))


def test_zero_stability_roots():
    s = generate_scheme(2, 1.0)
    roots = np.sort(np.roots(s.a[::-1]).real)
    np.testing.assert_allclose(roots, [1 / 3, 1.0], atol=1e-14)
    assert check_zero_stability(generate_scheme(5, 0.05))


def test_zero_stability_rejects_degenerate():
    s = generate_scheme(2, 1.0)
    bad = type(s)(order=2, delta=1.0, a=[1.0, -1.0, 0.0], b=s.b, c=s.c)
    with pytest.raises(InvalidSchemeError):
        check_zero_stability(bad)
    unstable = type(s)(order=2, delta=1.0, a=[2.0, -3.0, 1.0], b=s.b, c=s.c)  # roots 1 and 2
    assert not check_zero_stability(unstable)


@pytest.mark.parametrize("r", ORDERS)
@pytest.mark.parametrize("delta", [0.05, 0.3, 0.5, 1.0])
def test_order_conditions(r, delta):
    s = generate_scheme(r, delta)
    assert check_order_conditions(s)
    res = order_residuals(s)
    assert res["explicit"][r] == pytest.approx(0.0, abs=1e-12)


def test_backward_euler_truncation_constant():
    res = order_residuals(generate_scheme(1, 1.0), 3)
    assert res["implicit"][2] == pytest.approx(-0.5, abs=1e-15)


def test_c_roots_cluster_at_one_minus_delta():
    for delta in (0.1, 0.5):
        roots = np.roots(generate_scheme(4, delta).c[::-1])
        assert np.allclose(roots, 1 - delta, atol=1e-3)


@pytest.mark.parametrize("r, delta", [(0, 0.5), (6, 0.5), (3, 0.0), (3, 1.5), (3, float("nan"))])
def test_parameter_errors(r, delta):
    with pytest.raises(ParameterError):
        generate_scheme(r, delta)


def test_scheme_arrays_are_read_only():
    s = generate_scheme(3, 0.4)
    with pytest.raises(ValueError):
        s.a[0] = 1.0
