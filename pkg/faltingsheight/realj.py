"""
Double precision modular kernel on the real-j locus.

For real j the reduced preimage lies on the imaginary axis (j >= 1728), on the
line Re(tau) = 1/2 (j < 0) or on the unit arc (0 <= j < 1728). Points are found
by vectorised bisection on the q-series, which is what the census, the
quadrature and the boundary sweeps evaluate millions of times.
"""

import numpy as np

N_TERMS = 12
N_BISECT = 64
LOG_2PI = np.log(2 * np.pi)
SQRT3_2 = np.sqrt(3) / 2

_n = np.arange(1, N_TERMS + 1, dtype=float)


def _series(q: np.ndarray):
    """E4 and prod (1 - q^n)^24 for an array of nomes"""
    qn = q[..., None] ** _n
    e4 = 1 + 240 * np.sum(_n**3 * qn / (1 - qn), axis=-1)
    log_p24 = 24 * np.sum(np.log(np.abs(1 - qn)), axis=-1)
    p24 = np.prod((1 - qn) ** 24, axis=-1)
    return e4, p24, log_p24


def log_g_at(re, im) -> np.ndarray:
    """log(|Delta(tau)| Im(tau)^6) for reduced tau = re + i im"""
    re = np.asarray(re, dtype=float)
    im = np.asarray(im, dtype=float)
    q = np.exp(2j * np.pi * (re + 1j * im))
    _, _, log_p24 = _series(q)
    return 12 * LOG_2PI - 2 * np.pi * im + log_p24 + 6 * np.log(im)


def _j_real(q: np.ndarray) -> np.ndarray:
    e4, p24, _ = _series(q)
    return np.real(e4**3 / (q * p24))


def _bisect(lo, hi, above):
    """Bisect each interval; above(mid) says the root lies below mid"""
    for _ in range(N_BISECT):
        mid = (lo + hi) / 2
        go_down = above(mid)
        hi = np.where(go_down, mid, hi)
        lo = np.where(go_down, lo, mid)
    return (lo + hi) / 2


def invert_real_j(jvals):
    """
    Reduced tau with j(tau) equal to each real value in jvals.

    Returns arrays (re, im, log_g) where log_g = log(|Delta(tau)| Im(tau)^6).
    """
    jvals = np.atleast_1d(np.asarray(jvals, dtype=float))
    re = np.zeros_like(jvals)
    im = np.ones_like(jvals)

    upper = jvals >= 1728
    if np.any(upper):
        j0 = jvals[upper]
        lo = np.ones_like(j0)
        hi = np.log(j0 + 2000) / (2 * np.pi) + 1

        def above(y):
            q = np.exp(-2 * np.pi * y)
            e4, p24, _ = _series(q)
            # j(iy) increases with y; compare 1/j to stay finite
            return q * p24 / e4**3 < 1 / j0

        im[upper] = _bisect(lo, hi, above)

    negative = jvals < 0
    if np.any(negative):
        j0 = jvals[negative]
        lo = np.full_like(j0, SQRT3_2)
        hi = np.log(-j0 + 2000) / (2 * np.pi) + 1

        def above(y):
            q = -np.exp(-2 * np.pi * y)
            e4, p24, _ = _series(q)
            # j(1/2 + iy) decreases from 0 to -inf
            return e4**3 - j0 * q * p24 > 0

        re[negative] = 0.5
        im[negative] = _bisect(lo, hi, above)

    arc = ~upper & ~negative
    if np.any(arc):
        j0 = jvals[arc]
        lo = np.full_like(j0, np.pi / 3)
        hi = np.full_like(j0, np.pi / 2)

        def above(theta):
            q = np.exp(2j * np.pi * np.exp(1j * theta))
            return _j_real(q) > j0

        theta = _bisect(lo, hi, above)
        re[arc] = np.cos(theta)
        im[arc] = np.sin(theta)

    return re, im, log_g_at(re, im)


def log_g_of_j(jvals) -> np.ndarray:
    """log(|Delta(tau)| Im(tau)^6) at the reduced preimage of real j"""
    return invert_real_j(jvals)[2]
