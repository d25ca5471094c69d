import numpy as np
import pytest

from bbm_voting.errors import DegreeMismatchError, ValidationError
from bbm_voting.poly import (
    BernsteinVector,
    Polynomial,
    bernstein_basis,
    binomial,
    format_polynomial,
    from_bernstein,
    from_roots,
    parse_polynomial,
    to_bernstein,
)


def test_evaluate_examples(fkpp, allen_cahn):
    assert fkpp(0.0) == 0.0
    assert fkpp(0.5) == pytest.approx(0.25)
    assert allen_cahn(0.25) == pytest.approx(-0.09375)


def test_evaluate_matches_factored_form(allen_cahn):
    u = np.linspace(0.0, 1.0, 101)
    np.testing.assert_allclose(allen_cahn(u), u * (1 - u) * (2 * u - 1), atol=1e-14)


def test_canonical_form_drops_trailing_zeros():
    p = Polynomial.of(0.0, 1.0, 0.0, 0.0)
    assert p.degree == 1
    assert Polynomial.of().is_zero()
    assert Polynomial.zero().degree == 0


def test_degree_cap():
    with pytest.raises(ValidationError):
        Polynomial(tuple([0.0] * 65 + [1.0]))


def test_non_finite_coefficients_rejected():
    with pytest.raises(ValidationError):
        Polynomial.of(0.0, float('nan'))


def test_binomial_examples():
    assert binomial(3, 2) == 3
    assert binomial(5, 0) == 1
    assert binomial(10, 4) == 210
    with pytest.raises(ValidationError):
        binomial(3, 4)


def test_to_bernstein_fkpp(fkpp):
    vector = to_bernstein(fkpp, 2)
    assert vector.b == pytest.approx((0.0, 0.5, 0.0))


def test_to_bernstein_matches_pointwise(allen_cahn):
    vector = to_bernstein(allen_cahn, 3)
    assert vector.b == pytest.approx((0.0, -1.0 / 3.0, 1.0 / 3.0, 0.0))
    u = np.linspace(0.0, 1.0, 100)
    rebuilt = sum(vector.b[k] * bernstein_basis(k, 3, u) for k in range(4))
    np.testing.assert_allclose(rebuilt, allen_cahn(u), atol=1e-13)


def test_to_bernstein_zero():
    assert to_bernstein(Polynomial.zero(), 4).b == (0.0,) * 5


def test_to_bernstein_order_below_degree(allen_cahn):
    with pytest.raises(DegreeMismatchError):
        to_bernstein(allen_cahn, 2)


def test_endpoints_are_exact():
    p = Polynomial.of(0.3, -1.7, 2.2, 0.9)
    vector = to_bernstein(p, 7)
    assert vector.b[0] == p(0.0)
    assert vector.b[-1] == p(1.0)


def test_partition_of_unity():
    for n in range(1, 12):
        assert to_bernstein(Polynomial.of(1.0), n).b == pytest.approx((1.0,) * (n + 1))


def test_from_bernstein_examples():
    assert from_bernstein(BernsteinVector(2, (0.0, 0.5, 0.0))).allclose(Polynomial.of(0.0, 1.0, -1.0))
    assert from_bernstein(BernsteinVector(3, (0.0, 0.0, 1.0, 1.0))).allclose(Polynomial.of(0.0, 0.0, 3.0, -2.0))
    assert from_bernstein(BernsteinVector(3, (0.0,) * 4)).is_zero()


def test_bernstein_round_trip_random():
    rng = np.random.default_rng(20240611)
    for _ in range(100):
        degree = int(rng.integers(0, 9))
        p = Polynomial(tuple(rng.uniform(-2.0, 2.0, degree + 1)))
        for order in range(max(degree, 1), max(degree, 1) + 4):
            assert from_bernstein(to_bernstein(p, order)).allclose(p, 1e-9)


def test_bernstein_vector_length_checked():
    with pytest.raises(ValidationError):
        BernsteinVector(3, (0.0, 1.0))


@pytest.mark.parametrize("text, coeffs", [
    ("u - u^2", (0.0, 1.0, -1.0)),
    ("[0, 1, -1]", (0.0, 1.0, -1.0)),
    ("u - 3u^2 + 2u^3", (0.0, 1.0, -3.0, 2.0)),
    ("1 - 0.5*u + 2*u**3", (1.0, -0.5, 0.0, 2.0)),
    ("-u + u^2", (0.0, -1.0, 1.0)),
    ("2.5e-1 u^2", (0.0, 0.0, 0.25)),
])
def test_parse_polynomial(text, coeffs):
    assert parse_polynomial(text).coeffs == pytest.approx(coeffs)


@pytest.mark.parametrize("text", ["", "u +", "u u", "[0, \"a\"]", "x^2"])
def test_parse_polynomial_errors(text):
    with pytest.raises(ValidationError):
        parse_polynomial(text)


def test_format_polynomial(allen_cahn):
    assert format_polynomial(allen_cahn) == "-u + 3*u^2 - 2*u^3"
    assert format_polynomial(Polynomial.of(0.0, 1.0, -1.0)) == "u - u^2"
    assert format_polynomial(Polynomial.zero()) == "0"
    assert format_polynomial(Polynomial.of(0.5, 0.0, 0.25)) == "0.5 + 0.25*u^2"


def test_format_then_parse_is_identity():
    p = Polynomial.of(0.125, -1.0, 0.0, 3.5)
    assert parse_polynomial(format_polynomial(p)) == p


def test_reflect_writes_in_one_minus_u(fkpp):
    # u - u^2 = v - v^2 with v = 1 - u
    assert fkpp.reflect().allclose(Polynomial.of(0.0, 1.0, -1.0))
    cubic = Polynomial.of(0.0, 1.0, 0.0, -1.0)
    v = np.linspace(0.0, 1.0, 11)
    np.testing.assert_allclose(cubic.reflect()(v), cubic(1.0 - v), atol=1e-14)


def test_arithmetic_and_roots():
    p = from_roots([0.0, 1.0], scale=-1.0)
    assert p.allclose(Polynomial.of(0.0, 1.0, -1.0))
    assert (p * Polynomial.of(1.0, 4.0)).allclose(Polynomial.of(0.0, 1.0, 3.0, -4.0))
    assert (p - p).is_zero()
    assert p.derivative().allclose(Polynomial.of(1.0, -2.0))
