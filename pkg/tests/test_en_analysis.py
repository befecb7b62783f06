import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import hyp2f1

from conftest import random_unit_vectors
from psdgroth.en_analysis import (
    arcsin_minus_linear,
    check_positive_type_matrix,
    en_integral,
    en_kernel,
    en_monte_carlo,
    f1_extract,
    positive_type_expand,
    ratio_curve,
    taylor_expand,
    v_n,
)
from psdgroth.errors import InvalidInput, NumericalError
from psdgroth.special_functions import gamma_n

# Frozen from nested adaptive quadrature (scipy.integrate.quad, tol 1e-13) of the
# same double integral, with the phi range split where the integrand changes sign.
NESTED_QUAD = {
    (2, -0.9): -0.8204363516458761,
    (2, 0.3): 0.23836406928827472,
    (2, 0.8): 0.6975511790132551,
    (3, -0.5): -0.435991124176914,
    (3, 0.8): 0.7357361601639365,
    (5, -0.5): -0.46135108497949784,
    (5, 0.3): 0.2734112809279638,
}


def series_oracle(n, t):
    """E_n(t) = gamma(n) t 2F1(1/2, 1/2; n/2 + 1; t^2), checked against nested quadrature."""
    return gamma_n(n) * t * hyp2f1(0.5, 0.5, n / 2 + 1, t * t)


@pytest.mark.parametrize("key", sorted(NESTED_QUAD))
def test_against_nested_quadrature(key):
    n, t = key
    assert en_integral(n, t) == pytest.approx(NESTED_QUAD[key], abs=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 8, 13])
def test_against_series(n):
    for t in np.linspace(-0.999, 0.999, 23):
        assert en_integral(n, t) == pytest.approx(series_oracle(n, t), abs=1e-12)


def test_series_oracle_reduces_to_arcsin():
    for t in (-0.7, 0.2, 0.95):
        assert series_oracle(1, t) == pytest.approx(2 / math.pi * math.asin(t), abs=1e-14)


def test_trivial_values():
    for n in (1, 2, 3, 7):
        assert abs(en_integral(n, 0.0)) <= 1e-15
        assert en_integral(n, 1.0) == 1.0
        assert en_integral(n, -1.0) == -1.0
    assert en_integral(1, 0.5) == pytest.approx(1 / 3, abs=1e-15)


def test_arcsin_branch():
    for t in np.linspace(-1, 1, 41):
        assert en_integral(1, t) == pytest.approx(2 / math.pi * math.asin(t), abs=1e-12)


@pytest.mark.parametrize("bad", [1.0000001, -2.0])
def test_domain(bad):
    with pytest.raises(InvalidInput):
        en_integral(2, bad)
    with pytest.raises(InvalidInput):
        en_integral(0, 0.5)


def test_convergence_gate():
    assert en_integral(3, 0.4, check=True) == pytest.approx(series_oracle(3, 0.4), abs=1e-13)
    with pytest.raises(NumericalError):
        en_integral(2, 0.4, order=3, check=True)


def test_near_endpoints():
    for n in (2, 3):
        for t in (1 - 1e-6, -1 + 1e-6, 1 - 1e-9):
            val = en_integral(n, t)
            assert abs(val) <= 1 + 1e-9
            assert val == pytest.approx(series_oracle(n, t), abs=1e-10)


@given(st.integers(2, 9), st.floats(-1, 1))
@settings(max_examples=60, deadline=None)
def test_odd_and_bounded(n, t):
    a, b = en_integral(n, t), en_integral(n, -t)
    assert abs(a + b) <= 1e-9
    assert abs(a) <= 1 + 1e-9


@pytest.mark.parametrize("n, t", [(2, 0.3), (3, -0.7)])
def test_monte_carlo_oracle(n, t):
    est, se = en_monte_carlo(n, t, 10**7, seed=7)
    assert abs(en_integral(n, t) - est) <= 4 * se


def test_monte_carlo_examples():
    assert en_monte_carlo(3, 1.0, 1000, 1) == (1.0, 0.0)
    est, se = en_monte_carlo(1, 0.0, 200000, 3)
    assert abs(est) <= 4 * se
    est, se = en_monte_carlo(1, 0.9, 200000, 4)
    assert abs(est - 2 / math.pi * math.asin(0.9)) <= 4 * se


def test_monte_carlo_deterministic():
    assert en_monte_carlo(2, 0.1, 5000, 9) == en_monte_carlo(2, 0.1, 5000, 9)
    assert en_monte_carlo(2, 0.1, 5000, 9) != en_monte_carlo(2, 0.1, 5000, 10)
    # chunking does not change the stream
    assert en_monte_carlo(2, 0.1, 5000, 9, chunk=5000) == en_monte_carlo(2, 0.1, 5000, 9, chunk=5000)


def test_f1_examples():
    assert f1_extract(1) == pytest.approx(2 / math.pi, abs=1e-10)
    assert f1_extract(2) == pytest.approx(math.pi / 4, abs=1e-6)
    assert f1_extract(3) == pytest.approx(8 / (3 * math.pi), abs=1e-6)


def test_ratio_curve():
    pts = ratio_curve(2, [-0.5, 0.0, 1.0])
    assert pts[1].ratio == pytest.approx(1.0)
    assert pts[2].ratio is None and pts[2].en_value == 1.0


@pytest.mark.parametrize(
    "n, value, t0",
    [(1, 0.8785, -0.689), (2, 0.9349, -0.617), (3, 0.9563, -0.584)],
)
def test_v_n_table(n, value, t0):
    r = v_n(n)
    # the published digits are truncated
    assert value <= r.value < value + 1e-4
    assert t0 - 1e-3 < r.minimizer <= t0
    assert not r.ambiguous


def test_v1_goemans_williamson():
    r = v_n(1)
    # min over theta of (theta/pi) / ((1 - cos theta)/2), located independently
    theta = np.linspace(0.01, math.pi, 200001)
    gw = np.min(2 * theta / (math.pi * (1 - np.cos(theta))))
    assert r.value == pytest.approx(gw, abs=1e-9)
    assert r.value == pytest.approx(0.8785, abs=5e-4)


def test_expand_linear():
    for m in (2, 3, 6):
        alpha = (m - 3) / 2
        exp = positive_type_expand(lambda t: t, m, 8)
        assert exp.coefficients[1] == pytest.approx(1 / (alpha + 1), abs=1e-10)
        others = np.delete(exp.coefficients, 1)
        assert np.all(np.abs(others) <= 1e-10)
        assert exp.residual <= 1e-10


@pytest.mark.parametrize("m", range(2, 11))
def test_expand_arcsin_minus_linear(m):
    exp = positive_type_expand(arcsin_minus_linear(m), m, 30)
    assert exp.min_coefficient >= -1e-8
    assert abs(exp.coefficients[1]) <= 1e-8
    assert exp.is_positive_type()


def test_expand_detects_overshoot():
    # one percent past c(m) the degree-one coefficient turns negative
    m = 4
    g = gamma_n(m) / 1.01
    exp = positive_type_expand(lambda t: np.arcsin(t) - t / g, m, 10)
    assert exp.coefficients[1] < -1e-3
    assert not exp.is_positive_type()


def test_expand_en3_on_s4():
    exp = positive_type_expand(en_kernel(3), 5, 12)
    assert exp.min_coefficient >= -1e-8
    assert exp.coefficients[1] > 0


def test_expand_rejects():
    with pytest.raises(InvalidInput):
        positive_type_expand(np.sin, 1, 5)
    with pytest.raises(NumericalError):
        positive_type_expand(lambda t: np.abs(t) ** 0.5, 3, 4, order=20)


def test_taylor_e1():
    exp = taylor_expand(lambda z: 2 / np.pi * np.arcsin(z), 10)
    assert exp.basis == "taylor" and exp.m is None
    for i in range(5):
        k = 2 * i + 1
        expected = 2 / math.pi * math.factorial(2 * i) / (4**i * math.factorial(i) ** 2 * (2 * i + 1))
        assert exp.coefficients[k] == pytest.approx(expected, abs=1e-8)
    assert np.all(np.abs(exp.coefficients[0::2]) <= 1e-10)
    assert exp.coefficients[1] == pytest.approx(gamma_n(1), abs=1e-12)


def test_kernel_matrix_checks():
    rng = np.random.default_rng(8)
    V = random_unit_vectors(30, 4, rng)
    assert check_positive_type_matrix(lambda t: t, V) >= -1e-10
    V3 = random_unit_vectors(40, 3, rng)
    assert check_positive_type_matrix(arcsin_minus_linear(3), V3) >= -1e-8
    # f(1) = -0.2, f(-1) = 0.2 on {e1, -e1}: eigenvalues 0 and -0.4
    bad = lambda t: t - np.arcsin(t) * (2 / np.pi) * 1.2
    lam = check_positive_type_matrix(bad, np.array([[1.0, 0.0], [-1.0, 0.0]]))
    assert lam == pytest.approx(-0.4, abs=1e-12)
    assert lam < -1e-3
