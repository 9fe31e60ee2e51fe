"""Checks for the rank-3 lift: coefficient identities against a direct
divisor-sum oracle, exact rational anchors at small n, coefficient growth,
and the balance-shift functional-equation certificate."""

import numpy as np
import pytest

from momentlab import modforms as mf
from momentlab import symsq
from momentlab.errors import PreconditionError, TableExhausted


@pytest.fixture(scope="module")
def delta_lift():
    f = mf.eigenforms(12, 2000)[0]
    return symsq.sym_square_lift(f)


def test_table_matches_divisor_sum_oracle(delta_lift):
    F = delta_lift
    c = mf.symsq_dirichlet_coeffs(F.base.lam, 44)
    assert np.max(np.abs(F.a1[:44] - c)) < 1e-14


def test_exact_rational_anchors(delta_lift):
    F = delta_lift
    assert F.coeff(1) == 1.0
    # A(p,1) = λ(p²) = λ(p)² - 1, exact dyadic rationals for p = 2
    assert F.coeff(2) == -23.0 / 32.0
    lam16 = float(F.base.lam[15])
    assert F.coeff(4) == pytest.approx(lam16 + 1.0, abs=1e-15)


def test_langlands_params(delta_lift):
    assert delta_lift.langlands_params() == (11, 0, -11)


def test_gl3_coeff_multiplicative(delta_lift):
    F = delta_lift
    assert symsq.gl3_coeff(F, 2, 3) == pytest.approx(
        F.coeff(2) * F.coeff(3), rel=1e-14
    )


def test_gl3_coeff_symmetric(delta_lift):
    F = delta_lift
    for m, n in ((6, 4), (12, 18), (8, 8), (5, 25)):
        assert symsq.gl3_coeff(F, m, n) == pytest.approx(
            symsq.gl3_coeff(F, n, m), rel=1e-12, abs=1e-14
        )


def test_gl3_hecke_relation(delta_lift):
    # rank-3 Hecke: A(m,1)A(n,1) = Σ_{d|(m,n)} A(mn/d², d)  for the lift;
    # checked in the equivalent Möbius-inverted direction at coprime pairs
    F = delta_lift
    for m, n in ((2, 9), (4, 25), (3, 8)):
        assert symsq.gl3_coeff(F, m, n) == pytest.approx(
            F.coeff(m) * F.coeff(n), rel=1e-13
        )


def test_coeff_bounds_range(delta_lift):
    with pytest.raises(TableExhausted):
        delta_lift.coeff(len(delta_lift.a1) + 1)


def test_lift_table_guard():
    f = mf.eigenforms(12, 2000)[0]
    with pytest.raises(PreconditionError):
        symsq.sym_square_lift(f, 4000)


def test_l_one_frozen(delta_lift):
    assert symsq.l_one(delta_lift) == pytest.approx(0.6317929457278753, rel=1e-11)


def test_fe_certificate(delta_lift):
    assert symsq.fe_certificate(delta_lift) < 1e-6


def test_hecke_bound(delta_lift):
    assert symsq.hecke_bound_margin(delta_lift, 2000) <= 1.0 + 1e-12


def test_higher_weight_lift():
    f = mf.eigenforms(24, 2000)[0]
    F = symsq.sym_square_lift(f)
    c = mf.symsq_dirichlet_coeffs(f.lam, 40)
    assert np.max(np.abs(F.a1[:40] - c)) < 1e-13
    assert symsq.fe_certificate(F, sigmas=(0.5,), t_values=(0.0, 2.0)) < 1e-6
