from faltingsheight.data import Curve, HalfPlanePoint, PeriodPair
from faltingsheight.exceptions import CuspError, NumericError, SingularCurveError
from faltingsheight.modfun import DEFAULT_PRECISION, mp_context, reduce_mpc
from fractions import Fraction

MAX_AGM_ITERATIONS = 64
MAX_ROOT_STEPS = 200


def to_mpf(ctx, x):
    """Exact-as-possible conversion of int, Fraction, float or mpf"""
    if isinstance(x, Fraction):
        return ctx.mpf(x.numerator) / x.denominator
    return ctx.mpf(x)


def agm(ctx, a, b, max_iter: int = MAX_AGM_ITERATIONS):
    """
    Complex arithmetic-geometric mean, choosing at each step the square root
    closest to the arithmetic mean.
    """
    a = ctx.mpc(a)
    b = ctx.mpc(b)
    tol = ctx.ldexp(1, -ctx.prec + 2)
    for _ in range(max_iter):
        if abs(a - b) <= tol * abs(a):
            return (a + b) / 2
        a, b = (a + b) / 2, ctx.sqrt(a * b)
        if abs(a - b) > abs(a + b):
            b = -b
    raise NumericError(f"AGM did not converge in {max_iter} iterations")


def extra_bits(ctx, jinv) -> int:
    """Guard bits for curves close to the cusp"""
    return int(ctx.ceil(ctx.log(1 + abs(jinv), 2))) + 16


def _cubic_roots(ctx, a, b):
    try:
        return ctx.polyroots([1, 0, a, b], maxsteps=MAX_ROOT_STEPS, extraprec=ctx.prec)
    except ctx.NoConvergence as exc:
        raise NumericError(f"roots of x^3 + {a} x + {b} did not converge") from exc


def _wide_context(curve: Curve, bits: int):
    if curve.disc_core == 0:
        raise SingularCurveError(f"{curve} is singular")
    ctx = mp_context(bits)
    a = to_mpf(ctx, curve.a)
    disc_core = to_mpf(ctx, curve.disc_core)
    return mp_context(bits + extra_bits(ctx, 6912 * a**3 / disc_core))


def period_lattice(curve: Curve, bits: int = DEFAULT_PRECISION) -> PeriodPair:
    """Periods of y^2 = x^3 + A x + B from the AGM of root differences"""
    ctx = _wide_context(curve, bits)
    a = to_mpf(ctx, curve.a)
    b = to_mpf(ctx, curve.b)
    roots = _cubic_roots(ctx, a, b)
    if curve.disc_core < 0:
        # three real roots
        e1, e2, e3 = sorted((ctx.re(r) for r in roots), reverse=True)
        omega1 = ctx.pi / agm(ctx, ctx.sqrt(e1 - e3), ctx.sqrt(e1 - e2))
        omega2 = ctx.j * ctx.pi / agm(ctx, ctx.sqrt(e1 - e3), ctx.sqrt(e2 - e3))
    else:
        e1 = ctx.re(min(roots, key=lambda r: abs(ctx.im(r))))
        shift = 3 * e1
        slope = ctx.sqrt(3 * e1**2 + a)
        omega1 = 2 * ctx.pi / agm(ctx, 2 * ctx.sqrt(slope), ctx.sqrt(2 * slope + shift))
        omega2 = -omega1 / 2 + ctx.j * ctx.pi / agm(
            ctx, 2 * ctx.sqrt(slope), ctx.sqrt(2 * slope - shift)
        )
    omega1 = ctx.mpc(omega1)
    omega2 = ctx.mpc(omega2)
    if (omega2 / omega1).imag < 0:
        omega2 = -omega2
    return PeriodPair(omega1, omega2)


def tau_of_curve(curve: Curve, bits: int = DEFAULT_PRECISION) -> HalfPlanePoint:
    """Reduced lattice parameter tau of the curve"""
    periods = period_lattice(curve, bits=bits)
    ctx = _wide_context(curve, bits)
    z, _ = reduce_mpc(ctx, ctx.mpc(periods.ratio))
    return HalfPlanePoint(z.real, z.imag, reduced=True)


def tau_of_t(t, bits: int = DEFAULT_PRECISION) -> HalfPlanePoint:
    """Reduced tau_t with j(tau_t) = 6912 t / (4 t + 27), via the curve (t, t)"""
    if t == 0:
        return tau_of_curve(Curve(0, 1), bits=bits)
    if t == Fraction(-27, 4):
        raise CuspError("t = -27/4 lies on the cusp")
    base = mp_context(bits)
    t_mp = to_mpf(base, t)
    ctx = mp_context(bits + int(base.ceil(base.log(1 + abs(t_mp), 2))))
    t_mp = to_mpf(ctx, t)
    # t^2 (4t + 27) without forming 4t^3 + 27t^2
    disc_core = t_mp**2 * (4 * t_mp + 27)
    if disc_core == 0:
        raise CuspError(f"t = {t} lies on the cusp")
    return tau_of_curve(Curve(t_mp, t_mp, disc_core=disc_core), bits=ctx.prec)
