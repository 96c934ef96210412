from faltingsheight.data import (
    BoundaryPoint,
    BoundaryTrace,
    Curve,
    CuspParameter,
    HalfPlanePoint,
    RegionConstants,
    SigmaResult,
)
from faltingsheight.exceptions import ContractError, CuspError
from faltingsheight.modfun import DEFAULT_PRECISION, log_delta_im6, mp_context
from faltingsheight.periods import tau_of_curve, tau_of_t, to_mpf
from faltingsheight.quadrature import integrate_pieces
from faltingsheight.realj import log_g_at, log_g_of_j
from scipy.optimize import brentq
from typing import List, Tuple, TypedDict
import numpy as np
import logging
import math

C_CUSP = (27 / 4) ** (1 / 3)
T_CUSP = -27 / 4
LOG_16 = math.log(16)
LOG_2PI = math.log(2 * math.pi)
NORMALIZATIONS = ["analytic", "q", "log_q"]


class MonteCarloArea(TypedDict):
    area: float
    stderr: float
    bulk: float
    bands: float
    samples: int


def _kappa(X: float, normalization: str) -> float:
    """Scale of |Delta(tau)| Im(tau)^6 in the boundary equation"""
    if not X > 0:
        raise ContractError(f"X must be positive, got {X}")
    if normalization == "analytic":
        return X
    if normalization == "q":
        return X / (2 * math.pi) ** 12
    if normalization == "log_q":
        # q prod (1 - q^n)^24 (log|q|)^6
        return X / (2 * math.pi) ** 6
    raise ContractError(
        f"normalization must be one of {', '.join(NORMALIZATIONS)}, got {normalization}"
    )


def log_f_inv2(a, b, disc_core=None) -> np.ndarray:
    """
    log f(A, B)^-2 = log(16 |4A^3 + 27B^2|) - log(|Delta(tau)| Im(tau)^6),
    vectorised in double precision. Pass disc_core when 4A^3 + 27B^2 is known
    more accurately than the floats A, B give it.
    """
    a = np.asarray(a, dtype=float)
    if disc_core is None:
        b = np.asarray(b, dtype=float)
        disc_core = 4 * a**3 + 27 * b**2
    disc_core = np.asarray(disc_core, dtype=float)
    if np.any(disc_core == 0):
        raise CuspError("4A^3 + 27B^2 = 0")
    return np.log(16 * np.abs(disc_core)) - log_g_of_j(6912 * a**3 / disc_core)


def f_of_point(a, b, bits: int = DEFAULT_PRECISION, disc_core=None):
    """f(A, B) = |Delta(tau) Im(tau)^6 / Delta_{A,B}|^(1/2), through the periods"""
    curve = Curve(a, b, disc_core=disc_core)
    if curve.disc_core == 0:
        raise CuspError(f"{curve} lies on the cusp")
    ctx = mp_context(bits)
    tau = tau_of_curve(curve, bits=bits)
    log_f2 = log_delta_im6(tau, bits=bits) - ctx.log(
        16 * abs(to_mpf(ctx, curve.disc_core))
    )
    return ctx.exp(log_f2 / 2)


def f_of_t(t, bits: int = DEFAULT_PRECISION):
    """f(t) = |Delta(tau_t) Im(tau_t)^6 / (16 (4t + 27))|^(1/2)"""
    t = CuspParameter(t).t
    ctx = mp_context(bits)
    tau = tau_of_t(t, bits=bits)
    log_f2 = log_delta_im6(tau, bits=bits) - ctx.log(16 * abs(4 * to_mpf(ctx, t) + 27))
    return ctx.exp(log_f2 / 2)


def in_region(a, b, X: float, disc_core=None) -> bool:
    """(A, B) in R_X, i.e. Delta_{A,B} != 0 and f(A, B)^-2 < X"""
    if not X > 0:
        raise ContractError(f"X must be positive, got {X}")
    if disc_core is None:
        disc_core = 4 * a**3 + 27 * b**2
    if disc_core == 0:
        return False
    return bool(log_f_inv2(a, b, disc_core=disc_core) < math.log(X))


def _g_power(jinv, denom):
    """(|Delta| Im^6 / (16 denom))^(5/6) at real j"""
    return np.exp(5 / 6 * (log_g_of_j(jinv) - np.log(16 * denom)))


def sigma_pieces(T: float = 100.0, delta: float = 0.25, s_min: float = -60.0):
    """
    The integral (2/5) int |t|^(-2/3) f(t)^(5/3) dt split into pieces, each
    with a substitution that keeps its integrand smooth and bounded:
    t = -+1/v^2 on the tails, t = -27/4 -+ e^s around the cusp and t = u^3
    around the origin.
    """
    scale = 2 / 5

    def tail_left(v):
        return scale * 2 * _g_power(6912 / (4 - 27 * v**2), 4 - 27 * v**2)

    def tail_right(v):
        return scale * 2 * _g_power(6912 / (4 + 27 * v**2), 4 + 27 * v**2)

    def direct(t):
        return scale * np.abs(t) ** (-2 / 3) * _g_power(
            6912 * t / (4 * t + 27), np.abs(4 * t + 27)
        )

    def cusp_left(s):
        e = np.exp(s)
        t = T_CUSP - e
        return scale * np.abs(t) ** (-2 / 3) * _g_power(1728 * (27 / 4 + e) / e, 4 * e) * e

    def cusp_right(s):
        e = np.exp(s)
        t = T_CUSP + e
        return scale * np.abs(t) ** (-2 / 3) * _g_power(-1728 * (27 / 4 - e) / e, 4 * e) * e

    def origin(u):
        cube = u**3
        return scale * 3 * _g_power(6912 * cube / (4 * cube + 27), np.abs(4 * cube + 27))

    v_max = 1 / math.sqrt(T)
    return [
        ("tail_left", tail_left, 0.0, v_max),
        ("left", direct, -T, T_CUSP - delta),
        ("cusp_left", cusp_left, s_min, math.log(delta)),
        ("cusp_right", cusp_right, s_min, math.log(delta)),
        ("middle", direct, T_CUSP + delta, -1.0),
        ("origin_left", origin, -1.0, 0.0),
        ("origin_right", origin, 0.0, 1.0),
        ("right", direct, 1.0, T),
        ("tail_right", tail_right, 0.0, v_max),
    ]


def sigma_area(
    tol: float = 1e-3,
    T: float = 100.0,
    delta: float = 0.25,
    s_min: float = -60.0,
    limit: int = 5000,
) -> SigmaResult:
    """Area of R_1 by adaptive Gauss-Kronrod over the pieces of sigma_pieces"""
    if not tol > 0:
        raise ContractError(f"tol must be positive, got {tol}")
    logging.info(f"integrate area of R_1 to relative tolerance {tol}")
    sigma, error, rows, intervals = integrate_pieces(
        sigma_pieces(T=T, delta=delta, s_min=s_min), tol=tol, limit=limit
    )
    return SigmaResult(sigma, error, rows, intervals=intervals, tol=tol)


def _inside(disc_core, jinv, kappa: float = 1.0):
    return np.log(16 * np.abs(disc_core)) < math.log(kappa) + log_g_of_j(jinv)


def monte_carlo_area(
    samples: int = 10**6, seed: int = 0, C: float = None, chunk: int = 10**6
) -> MonteCarloArea:
    """
    Area of R_1 by sampling the box |B| <= sqrt(C/27) directly and the two
    cusp bands |B| > sqrt(C/27) in coordinates A = -c B^(2/3) + e B^(-4/3),
    with |B| drawn from a Pareto law matching the band's B^(-4/3) width.
    """
    if C is None:
        C = bound_constants().C
    rng = np.random.default_rng(seed)
    b0 = math.sqrt(C / 27)
    a0 = (17 * C / 64) ** (1 / 3)
    e_max = C / (8 * C_CUSP**2)
    n_bulk = samples // 2
    n_band = samples - n_bulk

    hits_bulk = 0
    done = 0
    while done < n_bulk:
        size = min(chunk, n_bulk - done)
        a = rng.uniform(-a0, a0, size)
        b = rng.uniform(-b0, b0, size)
        disc_core = 4 * a**3 + 27 * b**2
        keep = disc_core != 0
        hits_bulk += int(np.sum(_inside(disc_core[keep], 6912 * a[keep] ** 3 / disc_core[keep])))
        done += size

    hits_band = 0
    done = 0
    while done < n_band:
        size = min(chunk, n_band - done)
        b = b0 * (1 - rng.random(size)) ** -3
        eps = rng.uniform(-e_max, e_max, size)
        a = -C_CUSP * b ** (2 / 3) + eps * b ** (-4 / 3)
        # 4A^3 + 27B^2 expanded in eps, free of cancellation
        disc_core = 12 * C_CUSP**2 * eps - 12 * C_CUSP * eps**2 / b**2 + 4 * eps**3 / b**4
        keep = disc_core != 0
        hits_band += int(np.sum(_inside(disc_core[keep], 6912 * a[keep] ** 3 / disc_core[keep])))
        done += size

    box = 4 * a0 * b0
    # density of |B| is (1/3) b0^(1/3) B^(-4/3); two signs of B
    band_weight = 2 * (2 * e_max) * 3 / b0 ** (1 / 3)
    p_bulk = hits_bulk / max(n_bulk, 1)
    p_band = hits_band / max(n_band, 1)
    bulk = box * p_bulk
    bands = band_weight * p_band
    stderr = math.sqrt(
        box**2 * p_bulk * (1 - p_bulk) / max(n_bulk, 1)
        + band_weight**2 * p_band * (1 - p_band) / max(n_band, 1)
    )
    return MonteCarloArea(
        area=bulk + bands, stderr=stderr, bulk=bulk, bands=bands, samples=samples
    )


def _maximise_g(grid: int, zoom_steps: int) -> Tuple[float, float, float]:
    """Grid search with zooming for the max of log(|Delta| Im^6) on the reduced domain"""
    re_lo, re_hi = 0.0, 0.5
    im_lo, im_hi = math.sqrt(3) / 2, 4.0
    best = (-math.inf, 0.0, 1.0)
    for _ in range(zoom_steps + 1):
        re = np.linspace(re_lo, re_hi, grid)
        im = np.linspace(im_lo, im_hi, grid)
        rr, ii = np.meshgrid(re, im, indexing="ij")
        values = log_g_at(rr, ii)
        values[rr**2 + ii**2 < 1 - 1e-12] = -np.inf
        k = np.unravel_index(np.argmax(values), values.shape)
        if values[k] > best[0]:
            best = (float(values[k]), float(rr[k]), float(ii[k]))
        step_re = (re_hi - re_lo) / (grid - 1)
        step_im = (im_hi - im_lo) / (grid - 1)
        re_lo, re_hi = max(0.0, best[1] - 2 * step_re), min(0.5, best[1] + 2 * step_re)
        im_lo = max(math.sqrt(3) / 2, best[2] - 2 * step_im)
        im_hi = best[2] + 2 * step_im
    return best


def epsilon0() -> float:
    """Positive root of 64 x (3c^2 + x^2) = 3/4"""
    return brentq(
        lambda x: 64 * x * (3 * C_CUSP**2 + x**2) - 0.75,
        0.0,
        1.0,
        xtol=1e-18,
    )


def cusp_window(Y: float, cusp_margin: float = 0.25) -> float:
    """
    Bound on |A| for integral points of R_Y near the cusp: with
    |4A^3 + 27B^2| >= 1 the j-invariant is at most 6912 |A|^3 and
    f^-2 < Y forces |A| < kappa Y^(1/3) log(6912 |A|^3)^2.
    """
    kappa = (2 * math.pi) ** 2 / 48 * (1 + cusp_margin)
    a = 1.0
    for _ in range(200):
        update = kappa * Y ** (1 / 3) * (3 * math.log(a) + math.log(6912)) ** 2
        if abs(update - a) <= 1e-12 * update:
            return update
        a = update
    return a


def bound_constants(
    sup_margin: float = 1e-6,
    grid: int = 200,
    zoom_steps: int = 6,
    N: float = 16.0,
    M: float = math.exp(10),
    beta0: float = 1000.0,
    cusp_margin: float = 0.25,
    validate_on: List[float] = None,
    bits: int = DEFAULT_PRECISION,
) -> RegionConstants:
    """Constants C, c, epsilon0 and the validated enumeration window N, M"""
    log_max, re_max, im_max = _maximise_g(grid, zoom_steps)
    confirmed = float(log_delta_im6(HalfPlanePoint(re_max, im_max), bits=bits))
    C_sampled = math.exp(max(log_max, confirmed))
    C = C_sampled * (1 + sup_margin)
    constants = RegionConstants(
        C=C,
        C_sampled=C_sampled,
        tau_max=HalfPlanePoint(re_max, im_max, reduced=True),
        c=C_CUSP,
        epsilon0=epsilon0(),
        N=N,
        M=M,
        beta=math.sqrt(C / 27),
        beta0=beta0,
    )
    if validate_on is None:
        validate_on = [10.0**k for k in range(-3, 11)]
    failures = [
        Y
        for Y in validate_on
        if constants.tail_window(Y) < cusp_window(Y, cusp_margin=cusp_margin)
    ]
    if failures:
        logging.warning(
            f"window N={N}, M={M} is narrower than the cusp estimate at Y={failures}"
        )
    constants.window_validated = not failures
    return constants


def boundary_function(
    a, b, X: float = 1.0, normalization: str = "analytic", disc_core=None
) -> float:
    """
    F(A, B) = Delta_{A,B} - sgn(Delta_{A,B}) kappa |Delta(tau)| Im(tau)^6,
    which vanishes exactly on the boundary of R_X.
    """
    kappa = _kappa(X, normalization)
    if disc_core is None:
        disc_core = 4 * a**3 + 27 * b**2
    if disc_core == 0:
        raise CuspError("4A^3 + 27B^2 = 0")
    g = math.exp(float(log_g_of_j(6912 * a**3 / disc_core)[0]))
    return float(-16 * disc_core + np.sign(disc_core) * kappa * g)


def _g_of(a: float, disc_core: float) -> float:
    return math.exp(float(log_g_of_j(6912 * a**3 / disc_core)[0]))


def boundary_gradient(
    a: float,
    b: float,
    X: float = 1.0,
    normalization: str = "analytic",
    disc_core: float = None,
    tol: float = 1e-6,
    locus: str = None,
) -> Tuple[float, float]:
    """
    (dF/dA, dF/dB) at a boundary point. The cubic part is differentiated
    exactly; |Delta(tau)| Im(tau)^6 by central differences, stepping 4A^3 + 27B^2
    through its exact increments.

    F is built with `normalization`; the point must lie on the boundary
    F = 0 built with `locus`, which defaults to the same normalization.
    On a boundary of its own normalization the two leading A^2 terms cancel;
    F in "q" at points of the "log_q" boundary has dF/dA ~ -(192 - 3/pi^6) A^2.
    """
    kappa = _kappa(X, normalization)
    if disc_core is None:
        disc_core = 4 * a**3 + 27 * b**2
    if disc_core == 0:
        raise CuspError("4A^3 + 27B^2 = 0")
    locus = normalization if locus is None else locus
    value = boundary_function(a, b, X, locus, disc_core=disc_core)
    if abs(value) > tol * (16 * abs(disc_core) + 1):
        raise ContractError(f"({a}, {b}) is not on the boundary of R_{X}: F = {value}")
    sign = float(np.sign(disc_core))

    if a != 0:
        h = 1e-3 * abs(disc_core) / (12 * a**2)
    else:
        h = 1e-3 * (abs(disc_core) / 4) ** (1 / 3)
    up = disc_core + 12 * a**2 * h + 12 * a * h**2 + 4 * h**3
    down = disc_core - 12 * a**2 * h + 12 * a * h**2 - 4 * h**3
    dg_da = (_g_of(a + h, up) - _g_of(a - h, down)) / (2 * h)

    if b != 0:
        k = 1e-3 * abs(disc_core) / (54 * abs(b))
    else:
        k = 1e-3 * math.sqrt(abs(disc_core) / 27)
    up = disc_core + 54 * b * k + 27 * k**2
    down = disc_core - 54 * b * k + 27 * k**2
    dg_db = (_g_of(a, up) - _g_of(a, down)) / (2 * k)

    return (
        -16 * 12 * a**2 + sign * kappa * dg_da,
        -16 * 54 * b + sign * kappa * dg_db,
    )


def _s_floor(b: float, kappa: float) -> float:
    """
    Lowest log|4A^3 + 27B^2| searched on the line B = b: far enough for
    Im(tau) to reach the value where 16 |D| = kappa |Delta(tau)| Im(tau)^6
    once |j| is large, while j = 1728 - 46656 B^2 / D stays a finite double.
    """
    b2 = 46656 * b * b + 1
    im_needed = (16 * b2 / (kappa * (2 * math.pi) ** 12)) ** (1 / 6)
    floor = max(-700.0, math.log(b2) - 690.0)
    return max(floor, min(math.log(kappa) - 150, math.log(b2) - 4 * math.pi * im_needed - 50))


def _line_roots(
    b: float, side: float, kappa: float, s_lo: float, s_hi: float, grid: int
) -> List[float]:
    """Values s = log|4A^3 + 27B^2| where the line B = b crosses the boundary"""
    b2 = 46656 * b * b

    def excess(s):
        disc_core = side * np.exp(s)
        # j = 6912 A^3 / D with 4A^3 = D - 27B^2
        jinv = 1728 - b2 / disc_core
        return LOG_16 + s - math.log(kappa) - log_g_of_j(jinv)

    s = np.linspace(s_lo, s_hi, grid)
    values = excess(s)
    finite = np.isfinite(values)
    crossing = (np.sign(values[:-1]) != np.sign(values[1:])) & finite[:-1] & finite[1:]
    roots = []
    for i in np.nonzero(crossing)[0]:
        roots.append(
            brentq(lambda x: float(excess(np.array([x]))[0]), s[i], s[i + 1], xtol=1e-14)
        )
    return roots


def boundary_samples(
    X: float = 1.0,
    n: int = 100,
    b_min: float = None,
    b_max: float = None,
    normalization: str = "analytic",
    log_spaced: bool = False,
    grid: int = 2000,
    C: float = None,
) -> BoundaryTrace:
    """
    Boundary points of R_X from a sweep over ceil(n/2) lines B = const, each
    searched on both sides of the cusp cubic by bracketing in log|4A^3 + 27B^2|.
    Lines with no bracket are skipped and listed in the trace.
    """
    if n < 2:
        raise ContractError(f"n must be at least 2, got {n}")
    kappa = _kappa(X, normalization)
    if C is None:
        C = bound_constants().C
    if b_max is None:
        b_max = 2 * math.sqrt(C * kappa / 27)
    if b_min is None:
        b_min = -b_max
    n_lines = (n + 1) // 2
    if log_spaced:
        if not b_min > 0:
            raise ContractError("log spaced sweeps need b_min > 0")
        lines = np.geomspace(b_min, b_max, n_lines)
    else:
        lines = np.linspace(b_min, b_max, n_lines)
    s_hi = math.log(C * kappa / 16) + 1

    points: List[BoundaryPoint] = []
    skipped: List[float] = []
    for b in lines:
        b = float(b)
        found = False
        for side, label in ((1.0, "positive"), (-1.0, "negative")):
            for s in _line_roots(b, side, kappa, _s_floor(b, kappa), s_hi, grid):
                disc_core = side * math.exp(s)
                a = float(np.cbrt((disc_core - 27 * b * b) / 4))
                points.append(BoundaryPoint(A=a, B=b, side=label, disc_core=disc_core))
                found = True
        if not found:
            logging.warning(f"no boundary crossing on line B = {b}")
            skipped.append(b)
    return BoundaryTrace(X, points[:n], skipped)
