from concurrent.futures import ThreadPoolExecutor
from faltingsheight.data import HalfPlanePoint
from faltingsheight.exceptions import ContractError, SingularCurveError
from faltingsheight.heights import faltings_HF, silverman_range, silverman_ratio
from faltingsheight.minimality import is_weakly_minimal
from faltingsheight.modfun import log_delta_im6, mp_context
from fractions import Fraction
import numpy as np
import mpmath
import math
import pytest


def test_height_of_square_lattice_curve():
    height = faltings_HF(-1, 0)
    assert height.minimality.lam == 1
    assert height.min_disc == 64
    assert abs(height.tau.re) < 1e-15 and abs(height.tau.im - 1) < 1e-15
    # |Delta(i)| = Gamma(1/4)^24 / (2^12 pi^6)
    delta_i = mpmath.gamma(mpmath.mpf(1) / 4) ** 24 / (2**12 * mpmath.pi**6)
    assert abs(float(height.log_HF) - float(mpmath.log(64 / delta_i))) < 1e-12
    assert math.isclose(float(height.hF), float(height.log_HF) / 12)


def test_height_uses_minimal_discriminant():
    height = faltings_HF(0, 16)
    assert height.minimality.lam == Fraction(1, 2**12)
    assert height.min_disc == 27
    expected = math.log(27) - float(log_delta_im6(HalfPlanePoint(0.5, math.sqrt(3) / 2)))
    assert abs(float(height.log_HF) - expected) < 1e-12


def test_twists_by_squares_share_tau():
    # (A, B) and (A, -B) are isomorphic over Q(i) only, but share |Delta| and j
    first = faltings_HF(2, 3)
    second = faltings_HF(2, -3)
    assert abs(float(first.log_HF) - float(second.log_HF)) < 1e-12


def test_height_record():
    record = faltings_HF(-1, 0).to_dict()
    assert record["A"] == -1 and record["B"] == 0
    assert record["lambda"] == "1"
    assert record["min_disc"] == 64
    assert record["HN"] == 1
    assert record["disc"] == 64
    assert record["jinv"] == "1728"


def test_height_rejects():
    with pytest.raises(SingularCurveError):
        faltings_HF(-3, 2)
    with pytest.raises(ContractError):
        faltings_HF(16, 64)


def test_precision_is_respected():
    low = faltings_HF(5, -7, bits=64)
    high = faltings_HF(5, -7, bits=160)
    assert abs(float(low.log_HF) - float(high.log_HF)) < 1e-15


def test_silverman_ratio():
    ratio = silverman_ratio(-1, 0)
    height = faltings_HF(-1, 0)
    assert math.isclose(ratio, 1 / height.HF, rel_tol=1e-12)


def test_silverman_range():
    result = silverman_range(2)
    # 25 pairs minus (0, 0); none of the others is singular
    assert result["curves"] == 24
    assert result["min_ratio"] <= result["max_ratio"]
    assert silverman_ratio(*result["min_curve"]) == result["min_ratio"]


def test_height_near_cusp():
    # A = -3k^2, B = 2k^3 + 1 has j close to -1728 k^3
    for k in (10**3, 10**5):
        a, b = -3 * k**2, 2 * k**3 + 1
        height = faltings_HF(a, b)
        assert abs(height.curve.jinv) > 10**10
        assert math.isfinite(float(height.log_HF))
        assert height.tau.im > 4
        wide = faltings_HF(a, b, bits=128)
        assert abs(float(height.log_HF) - float(wide.log_HF)) < 1e-9


def _height_and_precisions(a, b):
    value = float(faltings_HF(a, b).log_HF)
    return value, [mp_context(bits).prec - bits for bits in (64, 80, 96, 112)]


def test_heights_are_thread_safe():
    rng = np.random.default_rng(9)
    curves = []
    while len(curves) < 40:
        a, b = (int(x) for x in rng.integers(-300, 301, size=2))
        if 4 * a**3 + 27 * b**2 != 0 and is_weakly_minimal(a, b):
            curves.append((a, b))
    expected = [float(faltings_HF(a, b).log_HF) for a, b in curves]
    with ThreadPoolExecutor(max_workers=8) as pool:
        results = list(pool.map(lambda pair: _height_and_precisions(*pair), curves * 4))
    for (value, drift), reference in zip(results, expected * 4):
        assert value == reference
        assert drift == [0, 0, 0, 0]
