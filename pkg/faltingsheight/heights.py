from faltingsheight.data import Curve, HalfPlanePoint, HeightValue
from faltingsheight.minimality import (
    is_weakly_minimal,
    lambda_class,
    minimal_discriminant,
    naive_height,
)
from faltingsheight.modfun import DEFAULT_PRECISION, log_delta_im6, mp_context
from faltingsheight.periods import tau_of_curve
from typing import TypedDict
import math


class SilvermanRange(TypedDict):
    bound: int
    curves: int
    min_ratio: float
    min_curve: tuple
    max_ratio: float
    max_curve: tuple


def faltings_HF(a: int, b: int, bits: int = DEFAULT_PRECISION) -> HeightValue:
    """
    Faltings height of y^2 = x^3 + A x + B, with A, B weakly minimal:
    H_F = lambda |Delta_{A,B}| / (|Delta(tau)| Im(tau)^6), summed in log space.
    """
    minimality = lambda_class(a, b)
    curve = Curve(a, b)
    tau = tau_of_curve(curve, bits=bits)
    ctx = mp_context(bits)
    lam = minimality.lam
    log_HF = (
        ctx.log(lam.numerator)
        - ctx.log(lam.denominator)
        + ctx.log(abs(curve.disc))
        - log_delta_im6(tau, bits=bits)
    )
    return HeightValue(
        log_HF,
        curve=curve,
        minimality=minimality,
        tau=HalfPlanePoint(tau.re, tau.im, reduced=True),
        min_disc=minimal_discriminant(a, b),
        naive=naive_height(a, b),
    )


def silverman_ratio(a: int, b: int, bits: int = DEFAULT_PRECISION) -> float:
    """H_N / H_F"""
    height = faltings_HF(a, b, bits=bits)
    return math.exp(math.log(naive_height(a, b)) - float(height.log_HF))


def silverman_range(bound: int, bits: int = DEFAULT_PRECISION) -> SilvermanRange:
    """Extremes of H_N / H_F over weakly minimal curves with |A|, |B| <= bound"""
    lowest = (math.inf, None)
    highest = (-math.inf, None)
    curves = 0
    for a in range(-bound, bound + 1):
        for b in range(-bound, bound + 1):
            if 4 * a**3 + 27 * b**2 == 0 or not is_weakly_minimal(a, b):
                continue
            ratio = silverman_ratio(a, b, bits=bits)
            curves += 1
            if ratio < lowest[0]:
                lowest = (ratio, (a, b))
            if ratio > highest[0]:
                highest = (ratio, (a, b))
    return SilvermanRange(
        bound=bound,
        curves=curves,
        min_ratio=lowest[0],
        min_curve=lowest[1],
        max_ratio=highest[0],
        max_curve=highest[1],
    )
