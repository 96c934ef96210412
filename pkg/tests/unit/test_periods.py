from faltingsheight.data import Curve
from faltingsheight.exceptions import CuspError, NumericError, SingularCurveError
from faltingsheight.modfun import j, mp_context
from faltingsheight import periods
from faltingsheight.periods import agm, period_lattice, tau_of_curve, tau_of_t
from fractions import Fraction
import numpy as np
import math
import pytest

ctx = mp_context(64)


def random_curves(n, bound=50, seed=0):
    rng = np.random.default_rng(seed)
    curves = []
    while len(curves) < n:
        a, b = (int(x) for x in rng.integers(-bound, bound + 1, size=2))
        if 4 * a**3 + 27 * b**2 != 0:
            curves.append(Curve(a, b))
    return curves


def test_agm_gauss_constant():
    assert abs(agm(ctx, 1, ctx.sqrt(2)) - ctx.mpf("1.1981402347355922074")) < 1e-18


def test_agm_iteration_cap():
    with pytest.raises(NumericError):
        agm(ctx, 1, 1e6, max_iter=2)


def test_tau_of_square_lattice():
    tau = tau_of_curve(Curve(-1, 0))
    assert abs(tau.re) < 1e-15
    assert abs(tau.im - 1) < 1e-15


def test_tau_of_hexagonal_lattice():
    tau = tau_of_curve(Curve(0, 1))
    assert abs(tau.re - 0.5) < 1e-15
    assert abs(tau.im - math.sqrt(3) / 2) < 1e-15


def test_periods_are_a_basis():
    for curve in [Curve(-1, 0), Curve(1, 1), Curve(-7, 6), Curve(0, -2)]:
        periods = period_lattice(curve)
        assert periods.ratio.imag > 0


def test_round_trip_j():
    for curve in random_curves(200):
        tau = tau_of_curve(curve)
        jinv = curve.jinv
        expected = jinv.numerator / ctx.mpf(jinv.denominator)
        value = j(tau)
        assert abs(value - expected) / (1 + abs(expected)) < 1e-8


def test_near_cusp_curve():
    # A = -3k^2, B = 2k^3 + 1 gives 4A^3 + 27B^2 = 108k^3 + 27
    for k in [10, 100, 1000]:
        curve = Curve(-3 * k**2, 2 * k**3 + 1)
        assert curve.disc_core == 108 * k**3 + 27
        tau = tau_of_curve(curve)
        expected = curve.jinv.numerator / ctx.mpf(curve.jinv.denominator)
        assert abs(j(tau) - expected) / (1 + abs(expected)) < 1e-8


def test_singular_curve():
    with pytest.raises(SingularCurveError):
        tau_of_curve(Curve(-3, 2))


def test_tau_of_t():
    t = Fraction(1)
    tau = tau_of_t(t)
    assert abs(j(tau) - ctx.mpf(6912) / 31) < 1e-9 * 6912 / 31


def test_tau_of_t_near_cusp():
    t = -6.75 + 1e-9
    tau = tau_of_t(t)
    assert tau.im > 3
    jinv = 6912 * ctx.mpf(t) / (4 * ctx.mpf(t) + 27)
    assert abs(j(tau) - jinv) < 1e-8 * abs(jinv)


def test_tau_of_t_zero_and_cusp():
    tau = tau_of_t(0)
    assert abs(tau.re - 0.5) < 1e-15
    with pytest.raises(CuspError):
        tau_of_t(Fraction(-27, 4))


def test_root_finding_cap(monkeypatch):
    monkeypatch.setattr(periods, "MAX_ROOT_STEPS", 1)
    with pytest.raises(NumericError):
        period_lattice(Curve(1, 1))


def test_tau_of_t_grows_towards_cusp():
    heights = [
        float(tau_of_t(Fraction(-27, 4) + Fraction(1, 10**k)).im) for k in range(3, 9)
    ]
    assert heights[0] > 1
    assert all(lower < upper for lower, upper in zip(heights, heights[1:]))


def test_tau_of_t_approaches_i():
    i = ctx.mpc(0, 1)
    # |tau_t - i| shrinks like sqrt(11664 / t) / 158
    near = tau_of_t(10**10)
    assert 6.5e-6 < abs(near.as_complex(ctx) - i) < 7.2e-6
    nearer = tau_of_t(10**12)
    assert abs(nearer.as_complex(ctx) - i) < 1e-6
