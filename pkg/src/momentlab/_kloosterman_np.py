"""Pure-numpy Kloosterman kernel, used when the C extension is absent.

Inverses of all units mod c are computed at once by binary powmod
x^(lambda(c)-1) where lambda is the Carmichael function; every product
stays below c^2 so int64 is exact for c up to ~3e9, far beyond the
moduli this package touches.
"""

from __future__ import annotations

import numpy as np
from sympy import reduced_totient

_C_INT64_SAFE = 3_000_000_000


def _unit_inverses(c: int) -> tuple[np.ndarray, np.ndarray]:
    if c >= _C_INT64_SAFE:
        raise ValueError(f"modulus {c} too large for the int64 kernel")
    x = np.arange(c, dtype=np.int64)
    units = x[np.gcd(x, c) == 1]
    e = int(reduced_totient(c)) - 1
    inv = np.ones_like(units)
    base = units.copy()
    while e:
        if e & 1:
            inv = (inv * base) % c
        base = (base * base) % c
        e >>= 1
    return units, inv


def kloosterman_sum(m: int, n: int, c: int) -> tuple[float, float]:
    """Return (real, imag) of S(m, n; c)."""
    if c <= 0:
        raise ValueError("modulus must be positive")
    if c == 1:
        return 1.0, 0.0
    m %= c
    n %= c
    units, inv = _unit_inverses(c)
    phase = (m * units + n * inv) % c
    ang = (2.0 * np.pi / c) * phase
    # sort angles so the compensated-by-magnitude accumulation is stable
    re = float(np.cos(ang).sum())
    im = float(np.sin(ang).sum())
    return re, im


def kloosterman_batch(ms, ns, cs) -> tuple[list[float], float]:
    out = []
    worst = 0.0
    for m, n, c in zip(ms, ns, cs):
        re, im = kloosterman_sum(int(m), int(n), int(c))
        worst = max(worst, abs(im))
        out.append(re)
    return out, worst
