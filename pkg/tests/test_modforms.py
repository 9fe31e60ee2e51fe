"""Oracle checks for the eigenform layer.

Frozen values: τ(n) and the weight-16..26 a(2) are classical integers; the
weight-24 pair a(2) = 540 ± 12√144169 pins the quadratic Hecke field. The
sym² L-value at Δ is frozen from a run that was cross-validated against
the trace-formula diagonal to 1.3e-14 (two fully independent pipelines).
"""

import math

import numpy as np
import pytest

from momentlab import modforms as mf
from momentlab.errors import TableExhausted

TAU = [1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920]
A2_BY_WEIGHT = {16: 216, 18: -528, 20: 456, 22: -288, 26: -48}

L1_SYM2_DELTA = 0.6317929457278753
OMEGA_DELTA = 0.35207704992915173


def test_cusp_dims():
    assert [mf.cusp_dim(k) for k in (2, 4, 10, 11, 12, 14, 16, 24, 26, 28)] == [
        0, 0, 0, 0, 1, 0, 1, 2, 1, 2,
    ]
    assert mf.cusp_dim(36) == 3
    assert mf.cusp_dim(80) == 6


def test_tau_values_exact():
    basis = mf.victor_miller_basis(12, 30)
    assert len(basis) == 1
    assert [basis[0].a(n) for n in range(1, 11)] == TAU


def test_one_dimensional_a2():
    for k, a2 in A2_BY_WEIGHT.items():
        basis = mf.victor_miller_basis(k, 10)
        assert basis[0].a(2) == a2


def test_echelon_property():
    basis = mf.victor_miller_basis(36, 50)
    for i, f in enumerate(basis, start=1):
        for j in range(1, 4):
            assert f.a(j) == (1 if i == j else 0)


def test_qexpansion_bounds():
    f = mf.victor_miller_basis(12, 20)[0]
    with pytest.raises(TableExhausted):
        f.a(21)
    with pytest.raises(TableExhausted):
        f.a(0)


def test_hecke_operators_commute_exactly():
    for k in (24, 36, 48):
        t2 = mf._hecke_matrix(k, 2)
        t3 = mf._hecke_matrix(k, 3)
        assert t2 * t3 == t3 * t2


def test_crt_pipeline_matches_exact_basis():
    exact = mf.victor_miller_basis(80, 300)
    idx = np.array([2, 3, 4, 5, 7, 8, 9, 16, 81, 128, 243, 256, 289], dtype=np.int64)
    tables, n_primes = mf._crt_basis_at_indices(80, 300, idx)
    assert n_primes >= 20
    for i in range(6):
        for n in idx:
            assert tables[i][int(n)] == exact[i].a(int(n))


def test_weight24_eigenvalues():
    forms = mf.eigenforms(24, 2000)
    got = sorted(float(g.lam[1]) * 2**11.5 for g in forms)
    want = sorted([540 - 12 * math.sqrt(144169), 540 + 12 * math.sqrt(144169)])
    assert got == pytest.approx(want, rel=1e-12)
    assert all(g.field_degree == 2 for g in forms)


def test_deligne_bound():
    from sympy import primerange

    for k, n_max in ((12, 2000), (24, 2000), (80, 4000)):
        for g in mf.eigenforms(k, n_max):
            for p in primerange(2, 100):
                assert abs(g.lam[p - 1]) <= 2 + 1e-8


def test_lambda_multiplicativity():
    for g in mf.eigenforms(80, 4000):
        lam = g.lam
        assert lam[5] == pytest.approx(lam[1] * lam[2], abs=1e-12)  # λ(6)
        assert lam[11] == pytest.approx(lam[3] * lam[2], abs=1e-12)  # λ(12)
        assert lam[3] == pytest.approx(lam[1] ** 2 - 1.0, abs=1e-12)  # λ(4)
        assert lam[8] == pytest.approx(lam[2] ** 2 - 1.0, abs=1e-12)  # λ(9)


def test_hecke_lambda_extension():
    f = mf.eigenforms(12, 2000)[0]
    # 1999 * 3 > table, both prime factors inside
    n = 1999 * 3
    assert n > f.n_max
    want = float(f.lam[1998]) * float(f.lam[2])
    assert mf.hecke_lambda(f, n) == pytest.approx(want, rel=1e-14)
    assert mf.hecke_lambda(f, 100) == float(f.lam[99])
    with pytest.raises(TableExhausted):
        mf.hecke_lambda(f, 20011)  # prime beyond the table


def test_sym_square_balance_invariance():
    f = mf.eigenforms(12, 2000)[0]
    vals = [mf.sym_square_l_value(f.lam, 12, 1.0, X) for X in (0.7, 1.0, 1.4)]
    for v in vals[1:]:
        assert abs(v - vals[0]) < 1e-12 * abs(vals[0])


def test_sym_square_frozen_value():
    f = mf.eigenforms(12, 2000)[0]
    got = mf.sym_square_l_value(f.lam, 12, 1.0)
    assert abs(got.imag) < 1e-14
    assert got.real == pytest.approx(L1_SYM2_DELTA, rel=1e-11)


def test_petersson_weight_frozen():
    f = mf.eigenforms(12, 2000)[0]
    assert f.petersson_weight == pytest.approx(OMEGA_DELTA, rel=1e-11)
    assert 1.0 / f.petersson_weight == pytest.approx(2.8402873751675, rel=1e-10)


def test_sym_square_strip_guard():
    f = mf.eigenforms(12, 2000)[0]
    with pytest.raises(ValueError):
        mf.sym_square_l_value(f.lam, 12, 2.5)


def test_eigenform_cache_roundtrip():
    a = mf.eigenforms(24, 2000)
    b = mf.eigenforms(24, 2000)
    for x, y in zip(a, b):
        assert np.array_equal(x.lam, y.lam)
        assert x.field_degree == y.field_degree
