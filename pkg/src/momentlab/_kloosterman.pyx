# cython: boundscheck=False, wraparound=False, cdivision=True
"""C kernel for Kloosterman sums.

All inverses mod c are obtained with one pass of prefix products and a
single extended gcd (Montgomery's trick), so the cost per unit is two
multiplications. Phases are reduced exactly in integers before any
floating-point operation, and the real/imaginary accumulations are
compensated (Kahan) so the certified imaginary residual stays near
machine level even for large moduli.
"""

from libc.math cimport cos, sin, M_PI
from libc.stdlib cimport malloc, free


cdef long long _gcd(long long a, long long b) nogil:
    cdef long long t
    while b:
        t = a % b
        a = b
        b = t
    return a


cdef long long _inv(long long a, long long c) nogil:
    # extended gcd; caller guarantees gcd(a, c) = 1
    cdef long long old_r = a, r = c, old_s = 1, s = 0, q, t
    while r:
        q = old_r / r
        t = old_r - q * r; old_r = r; r = t
        t = old_s - q * s; old_s = s; s = t
    old_s %= c
    if old_s < 0:
        old_s += c
    return old_s


def kloosterman_sum(long long m, long long n, long long c):
    """Return (real, imag) of S(m, n; c) summed over units mod c."""
    if c <= 0:
        raise ValueError("modulus must be positive")
    if c == 1:
        return 1.0, 0.0
    m %= c
    n %= c
    if m < 0:
        m += c
    if n < 0:
        n += c

    cdef long long* units = <long long*> malloc(c * sizeof(long long))
    cdef long long* pref = <long long*> malloc(c * sizeof(long long))
    if units == NULL or pref == NULL:
        free(units); free(pref)
        raise MemoryError()

    cdef long long x, t = 0, acc = 1
    cdef long long inv_acc, inv_x
    cdef double re = 0.0, im = 0.0, cre = 0.0, cim = 0.0
    cdef double ang, y, tmp
    cdef double two_pi_over_c = 2.0 * M_PI / <double> c
    cdef long long phase

    with nogil:
        for x in range(1, c):
            if _gcd(x, c) == 1:
                units[t] = x
                acc = (acc * x) % c
                pref[t] = acc
                t += 1
        inv_acc = _inv(acc, c)
        # walk the prefix products backwards: inv(u_i) = inv(p_i) * p_{i-1}
        for x in range(t - 1, -1, -1):
            if x == 0:
                inv_x = inv_acc
            else:
                inv_x = (inv_acc * pref[x - 1]) % c
            inv_acc = (inv_acc * units[x]) % c
            phase = (m * units[x] + n * inv_x) % c
            ang = two_pi_over_c * <double> phase
            y = cos(ang) - cre
            tmp = re + y
            cre = (tmp - re) - y
            re = tmp
            y = sin(ang) - cim
            tmp = im + y
            cim = (tmp - im) - y
            im = tmp

    free(units)
    free(pref)
    return re, im


def kloosterman_batch(long long[::1] ms, long long[::1] ns, long long[::1] cs):
    """Vector of S(m_i, n_i; c_i) real parts with the max |imag| observed."""
    cdef Py_ssize_t i, k = ms.shape[0]
    out = []
    cdef double worst = 0.0
    cdef double re, im
    for i in range(k):
        re, im = kloosterman_sum(ms[i], ns[i], cs[i])
        if im < 0:
            im = -im
        if im > worst:
            worst = im
        out.append(re)
    return out, worst
