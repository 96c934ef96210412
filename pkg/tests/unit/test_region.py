from faltingsheight.data import HalfPlanePoint
from faltingsheight.exceptions import ContractError, CuspError
from faltingsheight.modfun import log_delta_im6, mp_context
from faltingsheight.region import (
    C_CUSP,
    boundary_function,
    boundary_gradient,
    boundary_samples,
    bound_constants,
    cusp_window,
    epsilon0,
    f_of_point,
    f_of_t,
    in_region,
    log_f_inv2,
    monte_carlo_area,
    sigma_area,
    sigma_pieces,
)
from fractions import Fraction
import numpy as np
import math
import pytest

SIGMA = 29089
GRADIENT_LIMIT = -(192 - 3 / math.pi**6)


@pytest.fixture(scope="module")
def constants():
    return bound_constants()


@pytest.fixture(scope="module")
def sigma():
    return sigma_area(tol=1e-3)


def random_points(n, seed=0, a_max=60.0, b_max=200.0):
    rng = np.random.default_rng(seed)
    a = rng.uniform(-a_max, a_max, 4 * n)
    b = rng.uniform(-b_max, b_max, 4 * n)
    disc_core = 4 * a**3 + 27 * b**2
    # stay away from the cusp, where float A and B lose 4A^3 + 27B^2
    keep = np.abs(disc_core) > 1e-3 * (4 * np.abs(a) ** 3 + 27 * b**2)
    return a[keep][:n], b[keep][:n]


def test_cusp_constants():
    assert abs(C_CUSP - 1.889882) < 1e-6
    e0 = epsilon0()
    assert abs(64 * e0 * (3 * C_CUSP**2 + e0**2) - 0.75) < 1e-12
    assert round(e0, 4) == 0.0011


def test_membership_scales():
    a, b = random_points(100)
    rng = np.random.default_rng(1)
    for u in rng.uniform(0.5, 3.0, 5):
        shift = log_f_inv2(u**4 * a, u**6 * b) - log_f_inv2(a, b)
        assert np.allclose(shift, 12 * math.log(u), atol=1e-9)


def test_membership_scaling_of_regions():
    a, b = random_points(100, seed=2)
    for X, u in [(1.0, 2.0), (0.3, 1.5)]:
        for x, y in zip(a, b):
            assert in_region(x, y, X) == in_region(u**4 * x, u**6 * y, u**12 * X)


def test_double_and_high_precision_agree():
    for a, b in [(-1, 0), (1, 1), (-7, 6), (12, -100), (-40, 250)]:
        f = f_of_point(a, b)
        assert abs(float(log_f_inv2(a, b)[0]) + 2 * float(math.log(f))) < 1e-10


def test_f_of_t_matches_sigma_integrand():
    direct = sigma_pieces()[1][1]
    for t in [-20.0, -3.0, 2.0, 10.0]:
        expected = 0.4 * abs(t) ** (-2 / 3) * float(f_of_t(t)) ** (5 / 3)
        assert math.isclose(direct(np.array([t]))[0], expected, rel_tol=1e-9)


def test_f_of_t_cusp():
    with pytest.raises(CuspError):
        f_of_t(-27 / 4)


def test_discriminant_bound(constants):
    a, b = random_points(400, seed=3)
    for X in [0.5, 1.0, 4.0]:
        inside = log_f_inv2(a, b) < math.log(X)
        assert np.any(inside)
        disc_core = 4 * a**3 + 27 * b**2
        assert np.all(16 * np.abs(disc_core[inside]) < constants.C * X)


def test_cusp_band_has_small_discriminant():
    ctx = mp_context(256)
    c = ctx.cbrt(ctx.mpf(27) / 4)
    e0 = epsilon0()
    rng = np.random.default_rng(4)
    for _ in range(100):
        b = ctx.mpf(float(rng.uniform(1, 1e6))) * (1 if rng.random() < 0.5 else -1)
        eps = ctx.mpf(float(rng.uniform(-e0, e0)))
        a = -c * ctx.cbrt(b * b) + eps * ctx.cbrt(b * b) ** -2
        assert 16 * abs(4 * a**3 + 27 * b**2) < 1


def test_in_region_edge_cases():
    assert not in_region(-3, 2, 1.0)
    with pytest.raises(ContractError):
        in_region(1, 1, 0.0)


def test_bound_constants(constants):
    assert constants.C >= constants.C_sampled
    for tau in [HalfPlanePoint(0, 1), HalfPlanePoint(0.5, math.sqrt(3) / 2)]:
        assert constants.C >= math.exp(float(log_delta_im6(tau)))
    assert constants.tau_max.reduced
    assert constants.window_validated
    assert math.isclose(constants.beta, math.sqrt(constants.C / 27))
    rng = np.random.default_rng(5)
    for _ in range(100):
        tau = HalfPlanePoint(float(rng.uniform(0, 0.5)), float(rng.uniform(1, 3)))
        assert float(log_delta_im6(tau)) <= math.log(constants.C)


def test_cusp_window_grows():
    assert 800 < cusp_window(1.0) < 1000
    assert cusp_window(4096.0) > cusp_window(1.0)
    assert cusp_window(1.0, cusp_margin=0.5) > cusp_window(1.0)


def test_window_covers_cusp_estimate(constants):
    for Y in [1e-2, 1.0, 1e3, 6.0**12]:
        assert constants.tail_window(Y) >= cusp_window(Y)


def test_sigma(sigma):
    assert abs(sigma.sigma - SIGMA) < 0.005 * SIGMA
    assert sigma.error <= 1.01e-3 * sigma.sigma
    assert len(sigma.pieces) == 9
    assert all(piece["estimate"] > 0 for piece in sigma.pieces)
    assert math.isclose(sum(p["estimate"] for p in sigma.pieces), sigma.sigma, rel_tol=1e-12)


def test_sigma_rejects_tolerance():
    with pytest.raises(ContractError):
        sigma_area(tol=0)


def test_monte_carlo_agrees_with_quadrature(constants, sigma):
    result = monte_carlo_area(samples=400_000, seed=1, C=constants.C)
    assert result["samples"] == 400_000
    assert abs(result["area"] - sigma.sigma) < 5 * result["stderr"] + 0.01 * sigma.sigma
    assert math.isclose(result["bulk"] + result["bands"], result["area"])


def test_boundary_points_are_on_boundary(constants):
    trace = boundary_samples(X=1.0, n=40, C=constants.C)
    assert 0 < len(trace.points) <= 40
    for point in trace.points:
        value = boundary_function(point["A"], point["B"], 1.0, disc_core=point["disc_core"])
        assert abs(value) < 1e-6 * 16 * abs(point["disc_core"])
        assert point["side"] == ("positive" if point["disc_core"] > 0 else "negative")


def test_boundary_samples_rejects():
    with pytest.raises(ContractError):
        boundary_samples(n=1, C=1e7)
    with pytest.raises(ContractError):
        boundary_samples(n=10, b_min=-1.0, b_max=10.0, log_spaced=True, C=1e7)
    with pytest.raises(ContractError):
        boundary_samples(n=10, normalization="other", C=1e7)


def test_gradient_quadrants(constants):
    trace = boundary_samples(
        X=1.0, n=100, b_min=1e3, b_max=1e5, log_spaced=True, C=constants.C
    )
    assert len(trace.points) >= 50
    for point in trace.points[:50]:
        a, b, disc_core = point["A"], point["B"], point["disc_core"]
        d_a, d_b = boundary_gradient(a, b, 1.0, disc_core=disc_core)
        assert d_a < 0 and d_b < 0
        # B -> -B leaves the boundary invariant
        d_a, d_b = boundary_gradient(a, -b, 1.0, disc_core=disc_core)
        assert d_a < 0 and d_b > 0


def test_gradient_leading_coefficient(constants):
    trace = boundary_samples(
        X=1.0,
        n=100,
        b_min=1e3,
        b_max=1e5,
        normalization="log_q",
        log_spaced=True,
        C=constants.C,
    )
    assert len(trace.points) >= 50
    for point in trace.points[:50]:
        a, b, disc_core = point["A"], point["B"], point["disc_core"]
        d_a, d_b = boundary_gradient(
            a, b, 1.0, normalization="q", disc_core=disc_core, locus="log_q"
        )
        assert abs(d_a / a**2 - GRADIENT_LIMIT) < 0.05 * abs(GRADIENT_LIMIT)
        assert d_a < 0 and d_b < 0


def test_gradient_off_boundary():
    with pytest.raises(ContractError):
        boundary_gradient(1.0, 1.0, 1.0)


def test_points_beyond_the_bulk_lie_in_the_cusp_band(constants):
    X = 1.0
    rng = np.random.default_rng(12)
    b_min = math.ceil(math.sqrt(constants.C * X / 27))
    # every A within 50 of the cusp curve for small B, random A for larger B
    b_near = np.arange(b_min, 4000)
    b_far = rng.integers(4000, 20_000, size=2000)
    cusp = np.rint(-C_CUSP * b_near ** (2 / 3)).astype(np.int64)
    a = np.concatenate(
        [
            (cusp[:, None] + np.arange(-50, 51)[None, :]).ravel(),
            rng.integers(-3000, 3001, size=len(b_far) * 20),
        ]
    )
    b = np.concatenate([np.repeat(b_near, 101), np.repeat(b_far, 20)])
    disc_core = 4 * a**3 + 27 * b**2
    a, b, disc_core = a[disc_core != 0], b[disc_core != 0], disc_core[disc_core != 0]
    inside = log_f_inv2(a, b, disc_core=disc_core) < math.log(X)
    assert np.sum(inside) > 20
    b_in = b[inside].astype(float)
    eps = (a[inside] + C_CUSP * b_in ** (2 / 3)) * b_in ** (4 / 3) / X
    assert np.all(np.abs(eps) < constants.C)


def test_f_of_point_matches_f_of_t():
    rng = np.random.default_rng(13)
    checked = 0
    while checked < 40:
        a, b = (int(x) for x in rng.integers(-200, 201, size=2))
        if b == 0 or 4 * a**3 + 27 * b**2 == 0:
            continue
        on_t = f_of_t(Fraction(a**3, b**2))
        assert abs(f_of_point(a, b) * abs(b) - on_t) / on_t < 1e-9
        checked += 1


def test_f_of_t_grows_at_the_cusp():
    closer = f_of_t(Fraction(-27, 4) + Fraction(1, 10**6))
    further = f_of_t(Fraction(-27, 4) + Fraction(1, 10**3))
    assert closer > further


def test_f_of_t_at_zero():
    value = float(f_of_t(0))
    assert math.isfinite(value) and value > 0
    # tau_0 = rho, so f(0)^2 = |Delta(rho)| Im(rho)^6 / 432
    rho = HalfPlanePoint(0.5, math.sqrt(3) / 2)
    assert math.isclose(2 * math.log(value), float(log_delta_im6(rho)) - math.log(432))
