import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from betagpp.errors import DomainError
from betagpp.specfun import (expint_e1, expint_ei, log_gamma, reg_lower_gamma,
                             reg_lower_gamma_seq, reg_upper_gamma, reg_upper_gamma_seq,
                             upper_gamma)

# reference values computed with mpmath at 30 digits
REG_GAMMA = [
    (0.5, 0.1, 0.345279153981423, 0.654720846018577),
    (0.5, 2.0, 0.9544997361036416, 0.04550026389635842),
    (3.5, 1.0, 0.040159631269898445, 0.9598403687301016),
    (3.5, 10.0, 0.9944303169270544, 0.005569683072945571),
    (20.0, 15.0, 0.12478121503252482, 0.8752187849674752),
    (100.0, 120.0, 0.9721362601094793, 0.027863739890520663),
    (0.001, 0.5, 0.9994399333435292, 0.0005600666564707498),
    (7.0, 0.01, 1.96684280255335e-18, 1.0),
]

UPPER_GAMMA = [
    (-1.0, 1.0, 0.14849550677592205),
    (-3.0, 1.0, 0.08606249132456073),
    (-0.5, 0.3, 1.1503670473551644),
    (-2.5, 4.0, 8.069089045506339e-05),
    (0.0, 2.0, 0.04890051070806112),
    (1.5, 0.7, 0.6252638756351397),
    (-4.0, 0.2, 120.13145422411164),
]

E1 = [(0.01, 4.037929576538114), (1.0, 0.21938393439552029),
      (5.0, 0.0011482955912753257), (30.0, 3.0215520106888124e-15)]


@pytest.mark.parametrize("a,x,p,q", REG_GAMMA)
def test_regularized_gamma_against_reference(a, x, p, q):
    assert reg_lower_gamma(a, x) == pytest.approx(p, rel=1e-12, abs=1e-300)
    if q > 1e-3:
        assert reg_upper_gamma(a, x) == pytest.approx(q, rel=1e-12)
    else:
        assert reg_upper_gamma(a, x) == pytest.approx(q, rel=1e-10)


@pytest.mark.parametrize("s,x,ref", UPPER_GAMMA)
def test_upper_gamma_any_order(s, x, ref):
    assert upper_gamma(s, x) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("x,ref", E1)
def test_exponential_integrals(x, ref):
    assert expint_e1(x) == pytest.approx(ref, rel=1e-13)
    assert expint_ei(-x) == pytest.approx(-ref, rel=1e-13)


def test_ei_at_minus_infinity_and_domain():
    assert expint_ei(-math.inf) == 0.0
    with pytest.raises(DomainError):
        expint_ei(0.0)
    with pytest.raises(DomainError):
        expint_e1(-1.0)


def test_domain_errors():
    for bad in [(0.0, 1.0), (-1.0, 1.0), (1.0, -0.5), (math.nan, 1.0), (1.0, math.inf)]:
        with pytest.raises(DomainError):
            reg_lower_gamma(*bad)
        with pytest.raises(DomainError):
            reg_upper_gamma(*bad)
    with pytest.raises(DomainError):
        upper_gamma(-1.0, 0.0)
    with pytest.raises(DomainError):
        log_gamma(0.0)


def test_boundaries():
    assert reg_lower_gamma(2.0, 0.0) == 0.0
    assert reg_upper_gamma(2.0, 0.0) == 1.0
    assert upper_gamma(2.5, 0.0) == pytest.approx(math.gamma(2.5), rel=1e-15)
    assert reg_upper_gamma(1.0, 3.0) == pytest.approx(math.exp(-3.0), rel=1e-14)


def test_sequences_match_scalar_versions():
    for x in [0.0, 0.3, 4.0, 37.5]:
        p = reg_lower_gamma_seq(80, x)
        q = reg_upper_gamma_seq(80, x)
        for k in (1, 2, 10, 40, 80):
            assert p[k - 1] == pytest.approx(reg_lower_gamma(k, x), rel=1e-11, abs=1e-300)
            assert q[k - 1] == pytest.approx(reg_upper_gamma(k, x), rel=1e-11, abs=1e-300)
        assert np.all(np.diff(p) <= 0) and np.all(np.diff(q) >= 0)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.05, 60.0), st.floats(0.01, 80.0))
def test_complement_property(a, x):
    assert reg_lower_gamma(a, x) + reg_upper_gamma(a, x) == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.05, 30.0), st.floats(0.01, 40.0))
def test_recurrence_property(a, x):
    # P(a+1, x) = P(a, x) - x^a e^-x / Gamma(a+1)
    lead = math.exp(a * math.log(x) - x - math.lgamma(a + 1.0))
    assert reg_lower_gamma(a + 1.0, x) == pytest.approx(reg_lower_gamma(a, x) - lead, abs=1e-10)


@settings(max_examples=200, deadline=None)
@given(st.floats(-6.0, 3.0), st.floats(0.02, 30.0))
def test_upper_gamma_recurrence_property(s, x):
    if abs(s) < 1e-3:
        return
    # Gamma(s+1, x) = s Gamma(s, x) + x^s e^-x
    lhs = upper_gamma(s + 1.0, x)
    rhs = s * upper_gamma(s, x) + x**s * math.exp(-x)
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-300)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.001, 50.0))
def test_e1_is_upper_gamma_of_order_zero(x):
    assert expint_e1(x) == pytest.approx(upper_gamma(0.0, x), rel=1e-10)
