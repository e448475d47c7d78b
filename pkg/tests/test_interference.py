import math

import numpy as np
import pytest
from scipy import integrate, special

from betagpp.errors import DomainError
from betagpp.interference import (PathLoss, mean_interference, mean_interference_alpha4,
                                  mean_interference_quadrature, mean_interference_unbounded,
                                  mhcp_mean_interference, pair_term_quadrature,
                                  ppp_gap, ppp_mean_interference, second_moment_first_term,
                                  second_moment_first_term_quadrature, variance_bound_unbounded,
                                  variance_interference, variance_interference_alpha4,
                                  variance_interference_quadrature, variance_tail_bound)
from betagpp.pointproc import GppModel, MhcpModel

M111 = GppModel(1.0, 1.0)
PL4 = PathLoss(1.0, 4.0)

# reference values evaluated independently with mpmath
MEAN_111_4 = 1.2193839343955197
FIRST_TERM_111_4 = 1.2303005663604296
PPP_GAP_111_4 = 0.7806160656044802
# pair term from an independent 2-D formulation (angular integral via Bessel I0)
PAIR_111_4 = -0.3353273129


def _scipy_mean(model, pl):
    b = model.ratio

    def f(q):
        return max(pl.r0**2, q) ** (-pl.alpha / 2) * -math.expm1(-b * q)

    head = integrate.quad(f, 0, pl.r0**2, epsrel=1e-12)[0]
    mid = integrate.quad(f, pl.r0**2, pl.r0**2 + 60 / b, epsrel=1e-12, limit=200)[0]
    top = pl.r0**2 + 60 / b
    tail = top ** (1 - pl.alpha / 2) / (pl.alpha / 2 - 1)
    return model.c * (head + mid + tail)


def test_path_loss():
    pl = PathLoss(2.0, 3.0)
    assert pl(1.0) == pytest.approx(2.0**-3)
    assert pl(4.0) == pytest.approx(4.0**-3)
    assert pl.of_squared(16.0) == pytest.approx(4.0**-3)
    with pytest.raises(DomainError):
        PathLoss(-1.0, 3.0)
    with pytest.raises(DomainError):
        PathLoss(1.0, 1.0)


def test_reference_values():
    assert mean_interference(M111, PL4) == pytest.approx(MEAN_111_4, rel=1e-13)
    assert second_moment_first_term(M111, PL4) == pytest.approx(FIRST_TERM_111_4, rel=1e-12)
    assert ppp_gap(M111, PL4) == pytest.approx(PPP_GAP_111_4, rel=1e-12)


@pytest.mark.parametrize("beta", [0.25, 0.5, 1.0])
@pytest.mark.parametrize("c", [0.2, 1.0, 5.0])
@pytest.mark.parametrize("alpha", [2.5, 3.0, 4.0])
def test_mean_closed_form_against_scipy(beta, c, alpha):
    m, pl = GppModel(beta, c), PathLoss(1.0, alpha)
    assert mean_interference(m, pl) == pytest.approx(_scipy_mean(m, pl), rel=1e-9)


def test_alpha4_forms_agree():
    for beta in (0.25, 0.5, 1.0):
        for c in (0.2, 1.0, 5.0):
            m = GppModel(beta, c)
            assert mean_interference_alpha4(m, 1.3) == pytest.approx(
                mean_interference(m, PathLoss(1.3, 4.0)), rel=1e-10)
            assert variance_interference_alpha4(m, 1.3) == pytest.approx(
                variance_interference(m, PathLoss(1.3, 4.0)).variance, rel=1e-10)


def test_unbounded_mean_is_limit_of_bounded():
    m = GppModel(0.5, 1.0)
    assert mean_interference(m, PathLoss(1e-4, 3.0)) == pytest.approx(
        mean_interference_unbounded(m, 3.0), rel=1e-3)
    assert mean_interference_unbounded(M111, 3.0) == pytest.approx(2 * math.sqrt(math.pi), rel=1e-14)
    with pytest.raises(DomainError):
        mean_interference_unbounded(m, 4.0)


def test_ppp_limit_and_gap():
    pl = PathLoss(1.0, 3.0)
    m = GppModel(1.0, 2.0)
    ppp = ppp_mean_interference(2.0, pl)
    assert ppp == pytest.approx(mean_interference_quadrature(m, pl, ppp=True), rel=1e-10)
    assert ppp - mean_interference(m, pl) == pytest.approx(ppp_gap(m, pl), rel=1e-10)
    with pytest.raises(DomainError):
        ppp_gap(GppModel(0.5, 1.0), pl)


def test_variance_routes_agree():
    res = variance_interference(M111, PL4)
    assert res.variance == pytest.approx(0.8949732957162858, rel=1e-9)
    assert res.mean == pytest.approx(MEAN_111_4)
    assert second_moment_first_term_quadrature(M111, PL4) == pytest.approx(FIRST_TERM_111_4, rel=1e-10)
    assert pair_term_quadrature(M111, PL4) == pytest.approx(PAIR_111_4, rel=1e-8)
    assert variance_interference_quadrature(M111, PL4) == pytest.approx(res.variance, rel=1e-6)


def test_complete_gamma_form_poles_and_sign():
    with pytest.raises(DomainError):
        variance_interference(M111, PL4, gamma_form="complete")
    wrong = variance_interference(M111, PathLoss(1.0, 3.0), gamma_form="complete").variance
    right = variance_interference(M111, PathLoss(1.0, 3.0)).variance
    assert wrong < 0 < right


def test_tail_bound_covers_truncation():
    m, pl = GppModel(0.5, 1.0), PathLoss(1.0, 3.0)
    ref = variance_interference(m, pl, kmax=4000).variance
    for k in (20, 50, 200):
        res = variance_interference(m, pl, kmax=k)
        assert abs(res.variance - ref) <= res.truncation_bound
        assert res.truncation_bound == variance_tail_bound(m, pl, k)


def test_unbounded_variance_bound_positive():
    assert variance_bound_unbounded(GppModel(0.5, 1.0), 1.5) > 0
    with pytest.raises(DomainError):
        variance_bound_unbounded(M111, 2.5)


def test_mhcp_mean_interference():
    m = MhcpModel.matched(1 / math.pi, 0.5, "II")
    pl = PathLoss(1.0, 4.0)
    base = mhcp_mean_interference(m, pl)
    assert mhcp_mean_interference(m, pl, lower=0.1) == pytest.approx(base, rel=1e-10)
    # a hard core removes close interferers, so it sits below the PPP
    assert 0 < base < ppp_mean_interference(1.0, pl)
    with pytest.raises(DomainError):
        mhcp_mean_interference(M111, pl)


def _pair_term_bessel(model, pl, cut=30.0):
    """Pair term with the angle integrated analytically.

    Averaging the centred third-order kernel over the angle between the two
    interferers leaves ``e^{-b(r1^2+r2^2)} (1 - I0(2 b r1 r2))``.
    """
    b, lam = model.ratio, model.intensity

    def f(r2, r1):
        e = math.exp(-b * (r1 * r1 + r2 * r2)) - math.exp(-b * (r1 - r2) ** 2) * special.i0e(2 * b * r1 * r2)
        return r1 * r2 * pl(r1) * pl(r2) * e

    spans = [(0.0, pl.r0), (pl.r0, 4.0), (4.0, cut)]
    total = sum(integrate.dblquad(f, a1, b1, a2, b2, epsabs=1e-13, epsrel=1e-11)[0]
                for a1, b1 in spans for a2, b2 in spans)
    return lam**2 * (2 * math.pi) ** 2 * total


@pytest.mark.parametrize("beta,c", [(1.0, 1.0), (0.5, 1.0)])
def test_pair_term_against_bessel_formulation(beta, c):
    m = GppModel(beta, c)
    assert pair_term_quadrature(m, PL4) == pytest.approx(_pair_term_bessel(m, PL4), rel=1e-7)
