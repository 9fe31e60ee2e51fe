"""Exact-arithmetic layer: modular inverses, Kloosterman/Ramanujan sums,
rational-phase reciprocity.

The reference implementation used as oracle here is a direct complex
exponential sum with per-term pow(x, -1, c); it shares no code with the
shipped kernels.
"""

from __future__ import annotations

import cmath
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from momentlab import arith
from momentlab.errors import NotInvertible, PreconditionError


def oracle_kloosterman(m: int, n: int, c: int) -> complex:
    total = 0j
    for x in range(1, c + 1):
        if math.gcd(x, c) != 1:
            continue
        xbar = pow(x, -1, c)
        total += cmath.exp(2j * math.pi * ((m * x + n * xbar) % c) / c)
    if c == 1:
        total = 1 + 0j
    return total


# ---------------------------------------------------------------- mod_inverse


def test_mod_inverse_small():
    assert arith.mod_inverse(3, 7).value == 5
    assert arith.mod_inverse(1, 1).value == 0


def test_mod_inverse_random_roundtrip():
    rng = random.Random(7)
    for _ in range(300):
        c = rng.randrange(2, 10**6)
        a = rng.randrange(1, c)
        if math.gcd(a, c) != 1:
            with pytest.raises(NotInvertible) as err:
                arith.mod_inverse(a, c)
            assert err.value.gcd == math.gcd(a, c)
        else:
            x = arith.mod_inverse(a, c).value
            assert (a * x) % c == 1


def test_residue_invariants():
    with pytest.raises(ValueError):
        arith.Residue(3, 2)
    with pytest.raises(ValueError):
        arith.Residue(0, 0)


# ---------------------------------------------------------------- kloosterman


KNOWN_VALUES = [
    # (m, n, c): frozen from the direct pow(x,-1,c) oracle above
    (1, 1, 1, 1.0),
    (1, 1, 2, 1.0),  # single unit x=1: e((1+1)/2) = e(1)
    (1, 1, 5, 0.3819660112501051),  # 2 + 2cos(4pi/5)
    (3, 5, 7, 2.048917339522305),
    (1, 0, 9, 0.0),  # Ramanujan sum c_9(1) = mu(9) = 0
]


@pytest.mark.parametrize("m,n,c,expected", KNOWN_VALUES)
def test_kloosterman_known(m, n, c, expected):
    got = arith.kloosterman(m, n, c)
    assert got.real_part == pytest.approx(expected, abs=1e-12)


def test_kloosterman_matches_oracle():
    rng = random.Random(11)
    for _ in range(60):
        c = rng.randrange(1, 400)
        m = rng.randrange(-50, 200)
        n = rng.randrange(-50, 200)
        want = oracle_kloosterman(m, n, c)
        got = arith.kloosterman(m, n, c)
        assert got.real_part == pytest.approx(want.real, abs=1e-9)
        assert abs(want.imag) < 1e-9


def test_kernels_agree():
    from momentlab import _kloosterman_np as np_kernel

    rng = random.Random(13)
    for _ in range(40):
        c = rng.randrange(1, 2000)
        m = rng.randrange(0, c + 5)
        n = rng.randrange(0, c + 5)
        re_a, _ = np_kernel.kloosterman_sum(m, n, c)
        got = arith.kloosterman(m, n, c)
        assert got.real_part == pytest.approx(re_a, abs=1e-10)


def test_kloosterman_row_matches_pointwise():
    for c in (1, 2, 12, 97, 360):
        row = arith.kloosterman_row(5, c)
        for m in range(0, c, max(1, c // 7)):
            assert row[m] == pytest.approx(
                arith.kloosterman(m, 5, c).real_part, abs=1e-9
            )


@settings(max_examples=150, deadline=None)
@given(
    m=st.integers(min_value=-10**6, max_value=10**6),
    n=st.integers(min_value=-10**6, max_value=10**6),
    c=st.integers(min_value=1, max_value=3000),
)
def test_kloosterman_properties(m, n, c):
    val = arith.kloosterman(m, n, c)
    # Weil bound
    assert abs(val.real_part) <= val.weil_bound() + 1e-9
    # symmetry S(m,n;c) = S(n,m;c)
    sym = arith.kloosterman(n, m, c)
    assert val.real_part == pytest.approx(sym.real_part, abs=1e-9)


def test_kloosterman_crt_multiplicativity():
    rng = random.Random(17)
    for _ in range(60):
        c1 = rng.randrange(2, 80)
        c2 = rng.randrange(2, 80)
        if math.gcd(c1, c2) != 1:
            continue
        m = rng.randrange(0, 300)
        n = rng.randrange(0, 300)
        c2_bar = pow(c2, -1, c1)
        c1_bar = pow(c1, -1, c2)
        lhs = arith.kloosterman(m, n, c1 * c2).real_part
        rhs = (
            arith.kloosterman(m * c2_bar, n * c2_bar, c1).real_part
            * arith.kloosterman(m * c1_bar, n * c1_bar, c2).real_part
        )
        assert lhs == pytest.approx(rhs, abs=1e-8 * max(1.0, abs(lhs)) + 1e-8)


# ------------------------------------------------------------- ramanujan_sum


def test_ramanujan_values():
    # c_c(n) = sum over d | (n,c) of d mu(c/d)
    assert arith.ramanujan_sum(1, 1) == 1
    assert arith.ramanujan_sum(0, 12) == 4  # phi(12)
    assert arith.ramanujan_sum(6, 6) == 2  # phi(6)
    assert arith.ramanujan_sum(4, 6) == -1


def test_ramanujan_matches_kloosterman_n_zero():
    for c in (1, 4, 9, 30, 101):
        for n in (0, 1, 5, 12):
            assert arith.kloosterman(n, 0, c).real_part == pytest.approx(
                float(arith.ramanujan_sum(n, c)), abs=1e-9
            )


# ------------------------------------------------------------- reciprocity


def test_reciprocity_example():
    lhs, swap, corr = arith.reciprocity_identity(1, 1, 3, 1, 5, 1)
    assert (lhs.numerator, lhs.denominator) == (2, 3)
    assert (swap.numerator, swap.denominator) == (-2, 5)
    assert (corr.numerator, corr.denominator) == (1, 15)


def test_reciprocity_rejects_common_factor():
    with pytest.raises(PreconditionError):
        arith.reciprocity_identity(1, 1, 5, 1, 5, 1)


@settings(max_examples=300, deadline=None)
@given(
    m=st.integers(min_value=-50, max_value=50),
    r=st.integers(min_value=1, max_value=20),
    c=st.integers(min_value=1, max_value=200),
    M=st.integers(min_value=1, max_value=6),
    ell=st.integers(min_value=1, max_value=200),
    q=st.integers(min_value=1, max_value=12),
)
def test_reciprocity_exact(m, r, c, M, ell, q):
    if math.gcd(c * M, ell * q * q) != 1:
        with pytest.raises(PreconditionError):
            arith.reciprocity_identity(m, r, c, M, ell, q)
        return
    lhs, swap, corr = arith.reciprocity_identity(m, r, c, M, ell, q)
    gap = (lhs.as_fraction() - swap.as_fraction() - corr.as_fraction()) % 1
    assert gap == 0


def test_phase_complex_roundtrip():
    ph = arith.RationalPhase.of(7, 12)
    z = ph.to_complex()
    assert abs(z) == pytest.approx(1.0, abs=1e-12)
    assert z == pytest.approx(cmath.exp(2j * math.pi * 7 / 12), abs=1e-12)
