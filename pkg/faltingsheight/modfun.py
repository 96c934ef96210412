from faltingsheight.data import HalfPlanePoint, UnimodularMap
from faltingsheight.exceptions import DomainError, NumericError
from typing import Tuple
import mpmath
import threading

DEFAULT_PRECISION = 64
MAX_REDUCTION_STEPS = 1000
# below this imaginary part q-series are evaluated on the reduced point instead
DIRECT_MIN_IM = 0.05

_contexts = threading.local()


def mp_context(bits: int = DEFAULT_PRECISION) -> mpmath.MPContext:
    """
    Return the calling thread's mpmath context at the given binary precision.
    mpmath raises ctx.prec in place while it works, so a context is only
    ever used by the thread that created it.
    """
    if bits < 53:
        raise ValueError(f"precision must be at least 53 bits, got {bits}")
    cache = getattr(_contexts, "by_bits", None)
    if cache is None:
        cache = _contexts.by_bits = {}
    ctx = cache.get(bits)
    if ctx is None:
        ctx = cache[bits] = mpmath.MPContext()
        ctx.prec = bits
    return ctx


def as_mpc(ctx, tau):
    """Convert a HalfPlanePoint or complex number into an mpc of ctx"""
    if isinstance(tau, HalfPlanePoint):
        z = tau.as_complex(ctx)
    else:
        z = ctx.mpc(tau)
    if not z.imag > 0:
        raise DomainError(f"imaginary part must be positive, got {z.imag}")
    return z


def nome(ctx, z):
    """q = exp(2 pi i tau)"""
    return ctx.expjpi(2 * z)


def reduce_mpc(
    ctx, z, max_steps: int = MAX_REDUCTION_STEPS
) -> Tuple[object, UnimodularMap]:
    """Reduce an mpc to the fundamental domain, return the point and the map"""
    eps = ctx.ldexp(1, -(ctx.prec - 8))
    half = ctx.mpf(1) / 2
    unimodular = UnimodularMap.identity()
    for _ in range(max_steps):
        shift = int(ctx.ceil(z.real - half))
        if shift != 0:
            z = z - shift
            unimodular = UnimodularMap.translation(-shift).compose(unimodular)
        if abs(z) ** 2 < 1 - eps:
            z = -1 / z
            unimodular = UnimodularMap.inversion().compose(unimodular)
        else:
            break
    else:
        raise NumericError(f"reduction did not terminate in {max_steps} steps")
    # on the unit circle only the right half belongs to the domain
    if abs(z) ** 2 <= 1 + eps and z.real < 0:
        z = -1 / z
        unimodular = UnimodularMap.inversion().compose(unimodular)
    return z, unimodular


def reduce_to_fundamental_domain(
    tau: HalfPlanePoint,
    bits: int = DEFAULT_PRECISION,
    max_steps: int = MAX_REDUCTION_STEPS,
) -> Tuple[HalfPlanePoint, UnimodularMap]:
    """
    Move tau into |tau| >= 1, -1/2 < Re(tau) <= 1/2 with translations and
    inversions; the returned map sends tau to the returned point.
    """
    ctx = mp_context(bits)
    z = as_mpc(ctx, tau)
    z, unimodular = reduce_mpc(ctx, z, max_steps=max_steps)
    return HalfPlanePoint(z.real, z.imag, reduced=True), unimodular


def _q_product(ctx, q):
    """prod (1 - q^n), truncated once |q^n| drops below 2^-prec"""
    tol = ctx.ldexp(1, -ctx.prec)
    product = ctx.mpc(1)
    qn = q
    while abs(qn) > tol:
        product *= 1 - qn
        qn *= q
    return product


def _eisenstein_sums(ctx, q):
    tol = ctx.ldexp(1, -ctx.prec)
    s4 = ctx.mpc(0)
    s6 = ctx.mpc(0)
    qn = q
    n = 1
    while True:
        term = qn / (1 - qn)
        t4 = n**3 * term
        t6 = n**5 * term
        s4 += t4
        s6 += t6
        if abs(t6) <= tol * (1 + abs(s6)):
            break
        n += 1
        qn *= q
    return 1 + 240 * s4, 1 - 504 * s6


def _working_point(ctx, tau):
    """Point to evaluate series on, with the map from tau to it"""
    z = as_mpc(ctx, tau)
    if z.imag >= DIRECT_MIN_IM:
        return z, z, UnimodularMap.identity()
    reduced, unimodular = reduce_mpc(ctx, z)
    return z, reduced, unimodular


def delta(tau, bits: int = DEFAULT_PRECISION):
    """Modular discriminant (2 pi)^12 q prod (1 - q^n)^24"""
    ctx = mp_context(bits)
    z, w, unimodular = _working_point(ctx, tau)
    q = nome(ctx, w)
    value = (2 * ctx.pi) ** 12 * q * _q_product(ctx, q) ** 24
    # Delta(M tau) = (c tau + d)^12 Delta(tau)
    return value / unimodular.automorphy(z) ** 12


def log_abs_delta(tau, bits: int = DEFAULT_PRECISION):
    """log|Delta(tau)|, summed term by term so that large Im(tau) cannot underflow"""
    ctx = mp_context(bits)
    z, w, unimodular = _working_point(ctx, tau)
    q = nome(ctx, w)
    value = (
        12 * ctx.log(2 * ctx.pi)
        - 2 * ctx.pi * w.imag
        + 24 * ctx.log(abs(_q_product(ctx, q)))
    )
    return value - 12 * ctx.log(abs(unimodular.automorphy(z)))


def log_delta_im6(tau, bits: int = DEFAULT_PRECISION):
    """log(|Delta(tau)| Im(tau)^6), a function on SL2(Z) orbits"""
    ctx = mp_context(bits)
    z = as_mpc(ctx, tau)
    return log_abs_delta(z, bits=bits) + 6 * ctx.log(z.imag)


def eisenstein(tau, bits: int = DEFAULT_PRECISION):
    """Normalised Eisenstein series (E4, E6)"""
    ctx = mp_context(bits)
    z, w, unimodular = _working_point(ctx, tau)
    e4, e6 = _eisenstein_sums(ctx, nome(ctx, w))
    factor = unimodular.automorphy(z)
    return e4 / factor**4, e6 / factor**6


def j(tau, bits: int = DEFAULT_PRECISION):
    """
    Absolute modular invariant 1728 E4^3 / (E4^3 - E6^2), with j(i) = 1728.

    The difference cancels to 1728 q prod (1 - q^n)^24, so the series are
    summed with the lost bits added to the precision.
    """
    ctx = mp_context(bits)
    reduced, _ = reduce_mpc(ctx, as_mpc(ctx, tau))
    q = nome(ctx, reduced)
    extra = max(0, int(ctx.ceil(-ctx.log(1728 * abs(q), 2)))) + 10
    wide = mp_context(bits + extra)
    w = wide.mpc(reduced)
    e4, e6 = _eisenstein_sums(wide, nome(wide, w))
    value = 1728 * e4**3 / (e4**3 - e6**2)
    return ctx.mpc(value)
