"""Symmetric-square lift of a level-1 eigenform as a rank-3 object.

Key functions
    sym_square_lift(f)       -- SymSquareForm with the A(n,1) table
    gl3_coeff(F, m, n)       -- full two-index coefficients A(m,n)
    l_one(F)                 -- L(1, F), the residue-normalized value
    fe_certificate(F, ...)   -- functional-equation self-test

Mathematics
    F = sym²f has Dirichlet series Σ A(n,1) n^{-s} = ζ(2s) Σ λ(n²) n^{-s},
    so A(n,1) = Σ_{d²m=n} λ(m²), which is multiplicative with
        A(p^e, 1) = Σ_{0<=2j<=e} λ(p^{2e-4j}).
    The two-index coefficients follow from the Möbius unfolding
        A(m,n) = Σ_{d | (m,n)} μ(d) A(m/d, 1) A(1, n/d),
    with A(1,n) = A(n,1) by self-duality. Archimedean parameters are
    (κ-1, 0, 1-κ) for an underlying form of weight κ.

    The value L(1,F) reuses the two-sided AFE evaluator; its balance
    parameter doubles as the functional-equation certificate, since only
    the true functional equation makes the result balance-independent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sympy import primerange

from .errors import PreconditionError, TableExhausted
from .modforms import (
    Newform,
    _fill_multiplicative,
    sym_square_l_value,
    symsq_dirichlet_coeffs,
)


@dataclass
class SymSquareForm:
    """sym²f with a precomputed A(n,1) table."""

    base: Newform
    a1: np.ndarray  # A(n,1) for n = 1..n_max

    @property
    def weight(self) -> int:
        return self.base.weight

    @property
    def n_max(self) -> int:
        return len(self.a1)

    def langlands_params(self) -> tuple[int, int, int]:
        k = self.base.weight
        return (k - 1, 0, 1 - k)

    def coeff(self, n: int) -> float:
        if not 1 <= n <= self.n_max:
            raise TableExhausted(f"A({n},1) beyond table ({self.n_max})")
        return float(self.a1[n - 1])


def sym_square_lift(f: Newform, n_max: int | None = None) -> SymSquareForm:
    """Build the A(n,1) table from λ at prime powers.

    λ(p^{2e}) comes from the recursion off λ(p), so only primes up to
    n_max are read from the base table.
    """
    if n_max is None:
        n_max = f.n_max
    if n_max > f.n_max:
        raise PreconditionError(
            f"lift needs λ at primes up to {n_max}, table has {f.n_max}"
        )
    a_pp: dict[int, float] = {}
    for p in primerange(2, n_max + 1):
        # λ(p^j) for j up to 2·e_max via the Hecke recursion
        e_max = 0
        pe = p
        while pe <= n_max:
            e_max += 1
            pe *= p
        lp = float(f.lam[p - 1])
        lam_pows = [1.0, lp]
        for _ in range(2 * e_max - 1):
            lam_pows.append(lp * lam_pows[-1] - lam_pows[-2])
        pe = p
        for e in range(1, e_max + 1):
            a_pp[pe] = sum(lam_pows[2 * e - 4 * j] for j in range(e // 2 + 1))
            pe *= p
    return SymSquareForm(f, _fill_multiplicative(a_pp, n_max))


def gl3_coeff(F: SymSquareForm, m: int, n: int) -> float:
    """A(m,n) = Σ_{d | (m,n)} μ(d) A(m/d,1) A(1,n/d)."""
    from sympy import divisors, mobius

    g = np.gcd(m, n)
    total = 0.0
    for d in divisors(int(g)):
        mu = int(mobius(d))
        if mu:
            total += mu * F.coeff(m // d) * F.coeff(n // d)
    return total


def l_one(F: SymSquareForm) -> float:
    """L(1, F) for F = sym²f, via the two-sided AFE."""
    val = sym_square_l_value(F.base.lam, F.base.weight, 1.0)
    if abs(val.imag) > 1e-9 * max(1.0, abs(val.real)):
        raise ArithmeticError(f"L(1,F) not real: {val}")
    return val.real


def fe_certificate(
    F: SymSquareForm,
    sigmas: tuple[float, ...] = (0.4, 0.5, 0.6),
    t_values: tuple[float, ...] = (0.0, 1.0, 2.0, -1.5),
    balances: tuple[float, float] = (0.7, 1.4),
) -> float:
    """Worst relative discrepancy of L(s0) across AFE balance points.

    Moving the balance X reshuffles weight between the s0 and 1-s0 sides;
    invariance of the value is equivalent to the functional equation
    holding, so this is a nonvacuous self-test of the whole pipeline.
    """
    worst = 0.0
    lam, k = F.base.lam, F.base.weight
    for sg in sigmas:
        for t in t_values:
            s0 = complex(sg, t)
            vals = [sym_square_l_value(lam, k, s0, X) for X in balances]
            ref = max(abs(v) for v in vals)
            if ref == 0.0:
                continue
            spread = max(abs(a - b) for a in vals for b in vals)
            worst = max(worst, spread / ref)
    return worst


def hecke_bound_margin(F: SymSquareForm, n_limit: int = 10000) -> float:
    """max_n |A(n,1)| / (τ₃(n) n^{7/32 + 0.01}) over n <= n_limit.

    Values <= 1 certify the coefficient growth expected of a self-dual
    rank-3 lift on this range.
    """
    n_limit = min(n_limit, F.n_max)
    # τ₃ by double divisor sieve: τ₃ = 1 * τ
    tau3 = np.zeros(n_limit + 1)
    tau = np.zeros(n_limit + 1)
    for d in range(1, n_limit + 1):
        tau[d::d] += 1.0
    for d in range(1, n_limit + 1):
        tau3[d::d] += tau[d]
    n = np.arange(1, n_limit + 1, dtype=np.float64)
    cap = tau3[1:] * n ** (7.0 / 32.0 + 0.01)
    return float(np.max(np.abs(F.a1[:n_limit]) / cap))
