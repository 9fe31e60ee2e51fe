"""Exact integer and modular arithmetic.

Key functions
    mod_inverse(a, c)        -- x with a·x ≡ 1 (mod c)
    kloosterman(m, n, c)     -- S(m,n;c) = Σ_{x mod c, (x,c)=1} e((mx + nx̄)/c)
    kloosterman_row(n, c)    -- S(m,n;c) for every m mod c via one DFT
    ramanujan_sum(n, c)      -- Σ_{d|(n,c)} d·μ(c/d)
    reciprocity_identity(..) -- exact rational-phase swap of moduli

Mathematics
    Kloosterman sums are real (x ↔ -x pairing), satisfy the Weil bound
    |S(m,n;c)| ≤ τ(c)·gcd(m,n,c)^{1/2}·c^{1/2}, and are multiplicative
    across coprime moduli after twisting by inverse residues. The
    reciprocity identity is the exact congruence

        a·inv(b, c)/c ≡ -a·inv(c, b)/b + a/(bc)   (mod 1),

    applied here with a = m r², b = ℓ q², c ↦ cM.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from sympy import divisors, mobius, totient

from .errors import NotInvertible, PreconditionError

try:  # compiled kernel; numpy fallback keeps the package importable without it
    from . import _kloosterman as _kernel

    BACKEND = "c-extension"
except ImportError:  # pragma: no cover - depends on build environment
    from . import _kloosterman_np as _kernel

    BACKEND = "numpy"

from . import _kloosterman_np as _kernel_fallback

# imaginary parts of Kloosterman sums must vanish; this is the certified
# per-summand slack (generous against double rounding)
IMAG_TOL_PER_TERM = 1e-12


@dataclass(frozen=True)
class Residue:
    """A residue class value mod c, stored in canonical range [0, c)."""

    value: int
    modulus: int

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError(f"modulus must be >= 1, got {self.modulus}")
        if not 0 <= self.value < self.modulus:
            raise ValueError(f"value {self.value} out of range [0, {self.modulus})")

    def __int__(self) -> int:
        return self.value


@dataclass(frozen=True)
class RationalPhase:
    """Argument t of a unit e(t) = exp(2πi t), kept exact in lowest terms."""

    numerator: int
    denominator: int

    def __post_init__(self):
        if self.denominator <= 0:
            raise ValueError("denominator must be positive")
        g = math.gcd(self.numerator, self.denominator)
        if g != 1 and not (self.numerator == 0 and self.denominator == 1):
            raise ValueError("phase must be stored in lowest terms")

    @classmethod
    def of(cls, num: int, den: int) -> "RationalPhase":
        f = Fraction(num, den)
        return cls(f.numerator, f.denominator)

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def reduced_mod_1(self) -> "RationalPhase":
        f = self.as_fraction() % 1
        return RationalPhase(f.numerator, f.denominator)

    def to_complex(self) -> complex:
        t = float(self.as_fraction() % 1)
        return complex(math.cos(2 * math.pi * t), math.sin(2 * math.pi * t))


@dataclass(frozen=True)
class KloostermanValue:
    """S(m,n;c) with the certified size of its (vanishing) imaginary part."""

    real_part: float
    certified_imag_residual: float
    m: int
    n: int
    c: int

    def weil_bound(self) -> float:
        tau = len(divisors(self.c))
        g = math.gcd(math.gcd(abs(self.m), abs(self.n)), self.c)
        if g == 0:
            g = self.c
        return tau * math.sqrt(g) * math.sqrt(self.c)


def mod_inverse(a: int, c: int) -> Residue:
    """Inverse of a mod c; modulus 1 has the unique residue 0."""
    if c < 1:
        raise ValueError("modulus must be positive")
    if c == 1:
        return Residue(0, 1)
    g = math.gcd(a, c)
    if g != 1:
        raise NotInvertible(a, c, g)
    return Residue(pow(a, -1, c), c)


def nu_index(M: int) -> int:
    """Index [Γ(1):Γ₀(M)] = M·Π_{p|M}(1 + 1/p)."""
    out = M
    for p in set(_prime_factors(M)):
        out += out // p
    return out


def _prime_factors(n: int) -> list[int]:
    from sympy import factorint

    return [p for p, _ in factorint(n).items()]


def kloosterman(m: int, n: int, c: int) -> KloostermanValue:
    """S(m,n;c) over units mod c, with imaginary residual certified small."""
    if c < 1:
        raise ValueError("modulus must be positive")
    re, im = _kernel.kloosterman_sum(m, n, c)
    n_terms = max(1, int(totient(c)))
    if abs(im) > IMAG_TOL_PER_TERM * n_terms:
        raise ArithmeticError(
            f"imaginary residual {im:.3e} exceeds certification for S({m},{n};{c})"
        )
    return KloostermanValue(re, abs(im), m, n, c)


def kloosterman_row(n: int, c: int) -> np.ndarray:
    """All S(m,n;c), m = 0..c-1, as one inverse DFT of e(n·x̄/c) on units.

    S(m,n;c) = Σ_t e(mt/c)·g(t) with g(t) = e(n·t̄/c) on units, 0 elsewhere,
    which is c·ifft(g) componentwise.
    """
    if c == 1:
        return np.array([1.0])
    x = np.arange(c, dtype=np.int64)
    mask = np.gcd(x, c) == 1
    units, inv = _kernel_fallback._unit_inverses(c)
    g = np.zeros(c, dtype=np.complex128)
    ang = (2.0 * np.pi / c) * ((n % c) * inv % c)
    g[mask] = np.cos(ang) + 1j * np.sin(ang)
    row = np.fft.ifft(g) * c
    res = float(np.max(np.abs(row.imag)))
    if res > IMAG_TOL_PER_TERM * max(1, int(mask.sum())) * 10:
        raise ArithmeticError(f"DFT Kloosterman row residual {res:.3e} too large")
    return row.real


def ramanujan_sum(n: int, c: int) -> int:
    """S(n,0;c) = Σ_{d|(n,c)} d·μ(c/d); equals φ(c) when c | n."""
    if c < 1:
        raise ValueError("modulus must be positive")
    if n == 0:
        return int(totient(c))
    g = math.gcd(abs(n), c)
    return sum(d * int(mobius(c // d)) for d in divisors(g))


def reciprocity_identity(
    m: int, r: int, c: int, M: int, ell: int, q: int
) -> tuple[RationalPhase, RationalPhase, RationalPhase]:
    """Exact phase swap e(m r² ·inv(ℓq², cM)/cM) = e(-m r²·inv(cM, ℓq²)/ℓq²)·e(m r²/(cM·ℓq²)).

    Returns (lhs, rhs_swapped, rhs_correction) and verifies the congruence
    mod 1 exactly before returning.
    """
    b = ell * q * q
    cm = c * M
    if cm < 1 or b < 1:
        raise PreconditionError("moduli must be positive")
    if math.gcd(cm, b) != 1:
        raise PreconditionError(f"moduli not coprime: gcd({cm},{b}) != 1")
    a = m * r * r
    lhs = RationalPhase.of(a * int(mod_inverse(b, cm)), cm)
    rhs_swap = RationalPhase.of(-a * int(mod_inverse(cm, b)), b)
    rhs_corr = RationalPhase.of(a, cm * b)
    gap = (lhs.as_fraction() - rhs_swap.as_fraction() - rhs_corr.as_fraction()) % 1
    if gap != 0:
        raise ArithmeticError(f"reciprocity congruence failed: residue {gap}")
    return lhs, rhs_swap, rhs_corr


def kloosterman_backend() -> str:
    return BACKEND
