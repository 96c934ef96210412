from faltingsheight.data import LAMBDAS, MinimalityClass, ResidueClassTable
from faltingsheight.exceptions import ContractError, IntegrityError, SingularCurveError
from fractions import Fraction
from functools import lru_cache, reduce
from math import gcd
from tqdm import tqdm
from typing import Tuple
import numpy as np
import logging
import sys

NOT_WEAKLY_MINIMAL = 0
MINIMAL = 1
NOT_MINIMAL = 2  # weakly minimal, but a model with discriminant / p^12 exists

LIFT_RANGE = 1000  # lifts stay well inside int64 when cubed


def naive_height(a: int, b: int) -> int:
    return max(b * b, abs(a) ** 3)


def _twelfth_power_free(n: int) -> bool:
    p = 2
    while p**12 <= n:
        if n % p**12 == 0:
            return False
        p += 1
    return True


def is_weakly_minimal(a: int, b: int) -> bool:
    """True iff no prime p has p^4 | A and p^6 | B; (0, 0) is not"""
    if a == 0 and b == 0:
        return False
    # p^12 | gcd(A^3, B^2) exactly when p^4 | A and p^6 | B
    return _twelfth_power_free(gcd(a**3, b**2))


def minimize(a: int, b: int) -> Tuple[int, int, int]:
    """Divide out every d^4 | A, d^6 | B; return (A / d^4, B / d^6, d)"""
    if a == 0 and b == 0:
        raise ContractError("(0, 0) has no weakly minimal model")
    d = 1
    p = 2
    while p**12 <= gcd(a**3, b**2):
        while a % p**4 == 0 and b % p**6 == 0:
            a //= p**4
            b //= p**6
            d *= p
        p += 1
    return a, b, d


def _all(*conditions):
    return reduce(np.logical_and, conditions)


def local_code_array(a, b, p: int):
    """
    Local minimality code of y^2 = x^3 + A x + B at p, elementwise.

    0: not weakly minimal at p, 1: minimal at p, 2: weakly minimal but the
    model rescaled by p is integral (Kraus conditions on c4 / p^4, c6 / p^6).
    Works on numpy integer arrays and on object arrays of python ints.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    weak_fail = np.logical_and(a % p**4 == 0, b % p**6 == 0)
    disc_core = 4 * a**3 + 27 * b**2
    if p == 2:
        c4 = -3 * a
        c6 = -27 * (b // 2)
        kraus = np.logical_or(
            c6 % 4 == 3,
            np.logical_and(c4 % 16 == 0, np.logical_or(c6 % 32 == 0, c6 % 32 == 8)),
        )
        reducible = _all(b % 2 == 0, disc_core % 2**8 == 0, kraus)
    elif p == 3:
        c6 = -32 * (b // 27)
        v3_is_2 = np.logical_and(c6 % 9 == 0, c6 % 27 != 0)
        reducible = _all(
            a % 27 == 0,
            b % 27 == 0,
            disc_core % 3**12 == 0,
            np.logical_not(v3_is_2),
        )
    else:
        reducible = np.zeros(np.broadcast(a, b).shape, dtype=bool)
    return np.where(weak_fail, NOT_WEAKLY_MINIMAL, np.where(reducible, NOT_MINIMAL, MINIMAL))


def local_code(a: int, b: int, p: int) -> int:
    """Local minimality code for a single integer pair"""
    return int(
        local_code_array(np.array(a, dtype=object), np.array(b, dtype=object), p)
    )


@lru_cache(maxsize=None)
def local_code_table(p: int) -> np.ndarray:
    """Codes of all residue pairs (A mod p^6, B mod p^6), indexed [A, B]"""
    residues = np.arange(p**6, dtype=np.int64)
    table = local_code_array(residues[:, None], residues[None, :], p)
    table.setflags(write=False)
    return table


def lambda_of_codes(code2: int, code3: int) -> Fraction:
    return MinimalityClass(code2 == MINIMAL, code3 == MINIMAL).lam


def lambda_class(a: int, b: int) -> MinimalityClass:
    """Minimality at 2 and 3 of a weakly minimal integral curve"""
    if 4 * a**3 + 27 * b**2 == 0:
        raise SingularCurveError(f"curve ({a}, {b}) is singular")
    if not is_weakly_minimal(a, b):
        raise ContractError(f"curve ({a}, {b}) is not weakly minimal")
    return MinimalityClass(
        minimal_at_2=local_code(a, b, 2) == MINIMAL,
        minimal_at_3=local_code(a, b, 3) == MINIMAL,
    )


def minimal_discriminant(a: int, b: int) -> int:
    """|Delta_min| = lambda |Delta_{A,B}|"""
    lam = lambda_class(a, b).lam
    value = Fraction(16 * abs(4 * a**3 + 27 * b**2)) * lam
    if value.denominator != 1:
        raise IntegrityError(f"minimal discriminant of ({a}, {b}) is not integral")
    return value.numerator


def _check_lifts(p: int, lifts: int, rng: np.random.Generator) -> int:
    """Compare the table against random lifts of every class, return lifts checked"""
    modulus = p**6
    table = local_code_table(p)
    residues = np.arange(modulus, dtype=np.int64)
    checked = 0
    for _ in tqdm(range(lifts), desc=f"lifts mod {p}^6", disable=not sys.stderr.isatty()):
        shift_a = rng.integers(-LIFT_RANGE, LIFT_RANGE + 1, size=(modulus, modulus))
        shift_b = rng.integers(-LIFT_RANGE, LIFT_RANGE + 1, size=(modulus, modulus))
        lift_a = residues[:, None] + modulus * shift_a
        lift_b = residues[None, :] + modulus * shift_b
        codes = local_code_array(lift_a, lift_b, p)
        bad = np.argwhere(codes != table)
        if len(bad) > 0:
            i, k = bad[0]
            raise IntegrityError(
                f"residue class ({i}, {k}) mod {p}^6 is not stable",
                witness=(int(lift_a[i, k]), int(lift_b[i, k]), p),
            )
        checked += modulus * modulus
    return checked


def residue_class_census(lifts: int = 3, seed: int = 0) -> ResidueClassTable:
    """
    Sizes of the classes Cl_lambda of pairs mod 6^6, assembled prime by prime
    from the tables mod 2^6 and mod 3^6.
    """
    rng = np.random.default_rng(seed)
    local = {}
    checked = 0
    for p in (2, 3):
        logging.info(f"classify residue pairs mod {p}^6")
        table = local_code_table(p)
        local[p] = {code: int(np.sum(table == code)) for code in (0, 1, 2)}
        if lifts > 0:
            checked += _check_lifts(p, lifts, rng)
    counts = {}
    for lam in LAMBDAS:
        code2 = MINIMAL if lam.denominator % 2 else NOT_MINIMAL
        code3 = MINIMAL if lam.denominator % 3 else NOT_MINIMAL
        counts[lam] = local[2][code2] * local[3][code3]
    total = 6**12
    return ResidueClassTable(
        counts=counts,
        not_weakly_minimal=total - sum(counts.values()),
        lifts_checked=checked,
    )
