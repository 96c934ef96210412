from faltingsheight.data import (
    LAMBDAS,
    CensusReport,
    Curve,
    RegionConstants,
    RegionSpec,
    SieveTerm,
    lambda_label,
)
from faltingsheight.exceptions import ContractError, IntegrityError
from faltingsheight.minimality import MINIMAL, NOT_MINIMAL, local_code_table
from faltingsheight.modfun import DEFAULT_PRECISION, log_delta_im6, mp_context
from faltingsheight.periods import tau_of_curve
from faltingsheight.realj import log_g_of_j
from faltingsheight.region import bound_constants, cusp_window
from faltingsheight.settings import Settings
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Dict, List, Tuple
import numpy as np
import logging
import math

INT64_SAFE_A = 10**6  # 4A^3 + 27B^2 fits in int64 below this |A|
MOD2 = 2**6
MOD3 = 3**6


def _required_codes(lam: Fraction) -> Tuple[int, int]:
    """Local codes at 2 and 3 of the classes Cl_lambda"""
    code2 = NOT_MINIMAL if lam.denominator % 2 == 0 else MINIMAL
    code3 = NOT_MINIMAL if lam.denominator % 3 == 0 else MINIMAL
    return code2, code3


def _twisted_table(p: int, d: int) -> np.ndarray:
    """Table of codes of (d^4 a, d^6 b) indexed by (a, b) mod p^6"""
    modulus = p**6
    residues = np.arange(modulus, dtype=np.int64)
    table = local_code_table(p)
    return table[(d**4 % modulus) * residues % modulus][:, (d**6 % modulus) * residues % modulus]


def _crt(r2: np.ndarray, r3: np.ndarray) -> np.ndarray:
    """x mod 6^6 with x = r2 mod 2^6 and x = r3 mod 3^6"""
    return (r2 * MOD3 * pow(MOD3, -1, MOD2) + r3 * MOD2 * pow(MOD2, -1, MOD3)) % (
        MOD2 * MOD3
    )


def _ragged(starts: np.ndarray, counts: np.ndarray, step: int):
    """Row index and value of start + step * k, k < count, for every row"""
    row = np.repeat(np.arange(len(starts)), counts)
    offset = np.arange(int(counts.sum())) - np.repeat(np.cumsum(counts) - counts, counts)
    return row, starts[row] + step * offset


def _disc_core(a: np.ndarray, b: np.ndarray):
    """Exact 4A^3 + 27B^2, in int64 when it cannot overflow, else python ints"""
    if len(a) == 0 or np.max(np.abs(a)) <= INT64_SAFE_A:
        return 4 * a**3 + 27 * b**2
    return 4 * a.astype(object) ** 3 + 27 * b.astype(object) ** 2


class ScanResult:
    """Integral points of one residue-class scan of R_Y"""

    def __init__(self, count: int, near: int, a: np.ndarray = None, b: np.ndarray = None):
        self.count = count
        self.near = near
        self.a = a
        self.b = b


class CensusScanner:
    """
    Lattice points of R_Y in prescribed classes mod 6^6, with the scans cached
    per (lambda, Y, d) so that the direct and sieve paths share the d = 1 work.
    """

    def __init__(
        self,
        settings: Settings = None,
        constants: RegionConstants = None,
        threads: int = 1,
        window_scale: float = 1.0,
        bits: int = DEFAULT_PRECISION,
    ):
        self.settings = None
        self.near_threshold = 1e-9
        self.window_probe = 1.25
        self.cusp_margin = 0.25
        self.strip_rows = 4000
        if settings is not None:
            self.set_settings(settings)
        self.constants = constants if constants is not None else bound_constants()
        if threads < 1:
            raise ContractError("threads must be at least 1")
        self.threads = threads
        self.window_scale = window_scale
        self.bits = bits
        self.near_points = 0
        self._scans: Dict[tuple, ScanResult] = {}

    def set_settings(self, settings):
        """Set settings"""
        if not isinstance(settings, Settings):
            raise TypeError(f"invalid format of settings, use settings.Settings")
        settings.check_settings(
            ["near_threshold", "window_probe", "cusp_margin", "strip_rows"]
        )
        self.settings = settings
        self.near_threshold = float(settings.get_setting("near_threshold"))
        self.window_probe = float(settings.get_setting("window_probe"))
        self.cusp_margin = float(settings.get_setting("cusp_margin"))
        self.strip_rows = int(settings.get_setting("strip_rows"))

    def allowed_pairs(self, code2: int, code3: int, d: int = 1):
        """
        Residue pairs to stride over and the remaining table filters.

        Primes whose required code is NOT_MINIMAL are enumerated through
        their few allowed pairs; the others are filtered after the scan.
        """
        modulus = 1
        pairs = [(np.zeros(1, dtype=np.int64), np.zeros(1, dtype=np.int64))]
        filters = []
        for p, code in ((2, code2), (3, code3)):
            table = _twisted_table(p, d)
            if code == NOT_MINIMAL:
                a_res, b_res = np.nonzero(table == code)
                pairs.append((a_res.astype(np.int64), b_res.astype(np.int64)))
                modulus *= p**6
            else:
                filters.append((p, code, table))
        strided = pairs[1:]
        if len(strided) == 0:
            a_res, b_res = pairs[0]
        elif len(strided) == 1:
            a_res, b_res = strided[0]
        else:
            (a2, b2), (a3, b3) = strided
            a_res = _crt(np.repeat(a2, len(a3)), np.tile(a3, len(a2)))
            b_res = _crt(np.repeat(b2, len(b3)), np.tile(b3, len(b2)))
        by_a = {}
        for a0, b0 in zip(a_res.tolist(), b_res.tolist()):
            by_a.setdefault(a0, []).append(b0)
        return modulus, {k: np.array(v, dtype=np.int64) for k, v in by_a.items()}, filters

    def window(self, Y: float) -> Tuple[float, int, int]:
        """Bound K on |4A^3 + 27B^2| and the A-range of the scan of R_Y"""
        K = self.constants.C * Y * self.window_scale / 16
        a_hi = int(math.floor((K / 4) ** (1 / 3))) + 1
        a_lo = -int(math.ceil(cusp_window(Y, cusp_margin=self.cusp_margin) * self.window_scale))
        return K, a_lo, a_hi

    @staticmethod
    def _rows(by_a: dict, modulus: int, a_lo: int, a_hi: int):
        a_rows = []
        b0_rows = []
        for a0, b0s in by_a.items():
            first = a_lo + (a0 - a_lo) % modulus
            a_vals = np.arange(first, a_hi + 1, modulus, dtype=np.int64)
            a_rows.append(np.repeat(a_vals, len(b0s)))
            b0_rows.append(np.tile(b0s, len(a_vals)))
        if not a_rows:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
        a_rows = np.concatenate(a_rows)
        b0_rows = np.concatenate(b0_rows)
        order = np.argsort(a_rows, kind="stable")
        return a_rows[order], b0_rows[order]

    def _recheck(self, a: int, b: int, Y: float) -> bool:
        """High precision membership for points next to the boundary"""
        ctx = mp_context(self.bits)
        curve = Curve(a, b)
        tau = tau_of_curve(curve, bits=self.bits)
        log_ratio = (
            ctx.log(16 * abs(curve.disc_core))
            - log_delta_im6(tau, bits=self.bits)
            - ctx.log(Y)
        )
        return log_ratio < 0

    def _scan_rows(self, a_rows, b0_rows, modulus, K, Y, filters, d) -> ScanResult:
        cube = 4 * a_rows.astype(float) ** 3
        hi2 = (K - cube) / 27
        live = hi2 >= 0
        a_rows, b0_rows, cube, hi2 = a_rows[live], b0_rows[live], cube[live], hi2[live]
        lo2 = np.maximum(0.0, (-K - cube) / 27)
        b_hi = np.floor(np.sqrt(hi2)).astype(np.int64) + 1
        b_lo = np.maximum(np.ceil(np.sqrt(lo2)).astype(np.int64) - 1, 0)

        pos_first = b_lo + (b0_rows - b_lo) % modulus
        pos_count = np.where(pos_first <= b_hi, (b_hi - pos_first) // modulus + 1, 0)
        neg_top = -np.maximum(b_lo, 1)
        neg_first = -b_hi + (b0_rows + b_hi) % modulus
        neg_count = np.where(neg_first <= neg_top, (neg_top - neg_first) // modulus + 1, 0)
        rows_pos, b_pos = _ragged(pos_first, pos_count, modulus)
        rows_neg, b_neg = _ragged(neg_first, neg_count, modulus)
        a = np.concatenate([a_rows[rows_pos], a_rows[rows_neg]])
        b = np.concatenate([b_pos, b_neg])

        disc_core = _disc_core(a, b)
        keep = np.asarray((disc_core != 0) & (np.abs(disc_core) < K), dtype=bool)
        for p, code, table in filters:
            modulus_p = p**6
            index_a = np.asarray(a[keep] % modulus_p, dtype=np.int64)
            index_b = np.asarray(b[keep] % modulus_p, dtype=np.int64)
            in_class = table[index_a, index_b] == code
            kept = np.nonzero(keep)[0]
            keep[kept[~in_class]] = False
        a, b, disc_core = a[keep], b[keep], disc_core[keep]
        if len(a) == 0:
            return ScanResult(0, 0, a, b)

        disc_float = np.asarray(disc_core, dtype=float)
        jinv = 6912 * np.asarray(a, dtype=float) ** 3 / disc_float
        log_ratio = np.log(16 * np.abs(disc_float)) - log_g_of_j(jinv) - math.log(Y)
        inside = log_ratio < 0
        near = np.nonzero(np.abs(log_ratio) < self.near_threshold)[0]
        for i in near:
            inside[i] = self._recheck(int(a[i]), int(b[i]), Y)
        if len(near) > 0:
            logging.warning(f"{len(near)} points within {self.near_threshold} of the boundary of R_{Y}")
        return ScanResult(int(np.sum(inside)), len(near), a[inside], b[inside])

    def _scan(self, by_a, modulus, filters, Y: float, d: int) -> ScanResult:
        K, a_lo, a_hi = self.window(Y)
        if K < 1:
            return ScanResult(0, 0, np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64))
        a_rows, b0_rows = self._rows(by_a, modulus, a_lo, a_hi)
        chunks = [
            (a_rows[i : i + self.strip_rows], b0_rows[i : i + self.strip_rows])
            for i in range(0, len(a_rows), self.strip_rows)
        ]

        def run(chunk):
            return self._scan_rows(chunk[0], chunk[1], modulus, K, Y, filters, d)

        with ThreadPoolExecutor(max_workers=self.threads) as executor:
            results = list(executor.map(run, chunks))

        # nothing of R_Y may lie in the strip just beyond the window
        probe_lo = int(math.floor(a_lo * self.window_probe))
        probe_rows = self._rows(by_a, modulus, probe_lo, a_lo - 1)
        probe = self._scan_rows(probe_rows[0], probe_rows[1], modulus, K, Y, filters, d)
        if probe.count > 0:
            raise IntegrityError(
                f"point of R_{Y} found beyond the scan window A >= {a_lo}",
                witness=(int(probe.a[0]), int(probe.b[0])),
            )

        near = sum(r.near for r in results)
        self.near_points += near
        if not results:
            return ScanResult(0, near, np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64))
        return ScanResult(
            sum(r.count for r in results),
            near,
            np.concatenate([r.a for r in results]),
            np.concatenate([r.b for r in results]),
        )

    def scan(self, lam: Fraction, Y: float, d: int = 1) -> ScanResult:
        """Points (a, b) of R_Y with (d^4 a, d^6 b) in Cl_lambda and Delta != 0"""
        key = (lam, Y, d)
        if key not in self._scans:
            code2, code3 = _required_codes(lam)
            modulus, by_a, filters = self.allowed_pairs(code2, code3, d)
            logging.info(f"scan lambda {lambda_label(lam)}, d={d}, Y={Y:.6g}")
            self._scans[key] = self._scan(by_a, modulus, filters, Y, d)
        return self._scans[key]

    def scan_class(self, a0: int, b0: int, Y: float) -> ScanResult:
        """Points of R_Y congruent to (a0, b0) mod 6^6"""
        modulus = MOD2 * MOD3
        by_a = {a0 % modulus: np.array([b0 % modulus], dtype=np.int64)}
        return self._scan(by_a, modulus, [], Y, 1)

    def sieve_bound(self, X: float, lam: Fraction) -> int:
        """d with d^12 < X C / (16 lambda) can contribute"""
        limit = X * self.constants.C / (16 * float(lam))
        d = 1
        while (d + 1) ** 12 < limit:
            d += 1
        return d

    def count_direct(self, X: float) -> Dict[Fraction, int]:
        counts = {}
        for lam in LAMBDAS:
            result = self.scan(lam, RegionSpec(X, lam).bound, 1)
            counts[lam] = int(np.sum(weakly_minimal_mask(result.a, result.b)))
        return counts

    def count_sieve(self, X: float) -> Tuple[Dict[Fraction, int], List[SieveTerm]]:
        counts = {}
        terms = []
        for lam in LAMBDAS:
            d_max = self.sieve_bound(X, lam)
            mu = mobius(d_max)
            total = 0
            for d in range(1, d_max + 1):
                if d % 2 == 0 or d % 3 == 0 or mu[d] == 0:
                    continue
                count = self.scan(lam, RegionSpec(X / d**12, lam).bound, d).count
                terms.append(
                    SieveTerm(label=lambda_label(lam), d=d, mu=int(mu[d]), count=count)
                )
                total += int(mu[d]) * count
            counts[lam] = total
        return counts, terms


def _primes_up_to(n: int) -> List[int]:
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(n**0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.nonzero(sieve)[0].tolist()


def weakly_minimal_mask(a: np.ndarray, b: np.ndarray, start: int = 2) -> np.ndarray:
    """Vectorised weak minimality for pairs that are not both zero"""
    mask = np.ones(len(a), dtype=bool)
    if len(a) == 0:
        return mask
    a_max = int(np.max(np.abs(a)))
    b_max = int(np.max(np.abs(b)))
    bound = max(int(round(a_max ** (1 / 4))), int(round(b_max ** (1 / 6)))) + 1
    for p in _primes_up_to(bound):
        if p < start:
            continue
        bad = np.asarray((a % p**4 == 0) & (b % p**6 == 0), dtype=bool)
        mask &= ~bad
    return mask


def mobius(n: int) -> np.ndarray:
    """mu(k) for k <= n"""
    mu = np.ones(n + 1, dtype=np.int64)
    mu[0] = 0
    for p in _primes_up_to(n):
        mu[p::p] *= -1
        mu[p * p :: p * p] = 0
    return mu


def zeta10(bits: int = DEFAULT_PRECISION):
    """zeta(10) summed until the tail N^-9 / 9 is below 2^-bits"""
    ctx = mp_context(bits)
    n_max = int(ctx.ceil((9 * ctx.ldexp(1, -bits)) ** (ctx.mpf(-1) / 9))) + 1
    return ctx.fsum(ctx.mpf(n) ** -10 for n in range(n_max, 0, -1))


def mobius_partial_sum(Y: int, bits: int = DEFAULT_PRECISION):
    """sum of mu(d) d^-10 over d < Y prime to 6"""
    if Y < 1:
        raise ContractError(f"Y must be at least 1, got {Y}")
    ctx = mp_context(bits)
    mu = mobius(max(Y - 1, 1))
    return ctx.fsum(
        int(mu[d]) * ctx.mpf(d) ** -10
        for d in range(1, Y)
        if d % 2 and d % 3 and mu[d]
    )


def mobius_limit(bits: int = DEFAULT_PRECISION):
    """1 / (zeta(10) (1 - 2^-10) (1 - 3^-10))"""
    ctx = mp_context(bits)
    return 1 / (zeta10(bits) * (1 - ctx.mpf(2) ** -10) * (1 - ctx.mpf(3) ** -10))


def asymptotic_prediction(X: float, sigma: float) -> float:
    """12 sigma zeta(10)^-1 X^(5/6)"""
    if not X > 0:
        raise ContractError(f"X must be positive, got {X}")
    return float(12 * sigma / zeta10() * X ** (5 / 6))


def count_naive(X: float) -> Tuple[int, float]:
    """Weakly minimal nonsingular (A, B) with max(B^2, |A|^3) < X, and 4 X^(5/6) / zeta(10)"""
    if X < 1:
        raise ContractError(f"X must be at least 1, got {X}")
    a_lim = int(math.ceil(X ** (1 / 3)))
    b_lim = int(math.ceil(X ** (1 / 2)))
    a = np.arange(-a_lim, a_lim + 1, dtype=np.int64)
    a = a[np.abs(a) ** 3 < X]
    b = np.arange(-b_lim, b_lim + 1, dtype=np.int64)
    b = b[b * b < X]
    aa = np.repeat(a, len(b))
    bb = np.tile(b, len(a))
    keep = 4 * aa**3 + 27 * bb**2 != 0
    aa, bb = aa[keep], bb[keep]
    count = int(np.sum(weakly_minimal_mask(aa, bb)))
    return count, float(4 * X ** (5 / 6) / zeta10())


def per_class_count(a0: int, b0: int, X: float, scanner: CensusScanner = None) -> int:
    """Points of R_X congruent to (a0, b0) mod 6^6, singular ones excluded"""
    scanner = scanner if scanner is not None else CensusScanner()
    return scanner.scan_class(a0, b0, X).count


def enumerate_SX(X: float, scanner: CensusScanner = None) -> CensusReport:
    """Count S_X by scanning each R_{X / lambda} and testing weak minimality"""
    if not X > 0:
        raise ContractError(f"X must be positive, got {X}")
    scanner = scanner if scanner is not None else CensusScanner()
    counts = scanner.count_direct(X)
    return CensusReport(
        X,
        counts_by_lambda=counts,
        total_direct=sum(counts.values()),
        near_threshold=scanner.near_points,
        window_scale=scanner.window_scale,
    )


def count_SX_sieve(X: float, scanner: CensusScanner = None) -> CensusReport:
    """Count S_X through the Moebius sum over d prime to 6"""
    if not X > 0:
        raise ContractError(f"X must be positive, got {X}")
    scanner = scanner if scanner is not None else CensusScanner()
    counts, terms = scanner.count_sieve(X)
    d1_partial = sum(t["count"] for t in terms if t["d"] == 1)
    return CensusReport(
        X,
        sieve_by_lambda=counts,
        sieve_terms=terms,
        total_sieve=sum(counts.values()),
        d1_partial=d1_partial,
        near_threshold=scanner.near_points,
        window_scale=scanner.window_scale,
    )


def census(
    X: float,
    sigma: float = None,
    scanner: CensusScanner = None,
    naive: bool = False,
) -> CensusReport:
    """Both counts of S_X, checked against each other, with the asymptotic prediction"""
    scanner = scanner if scanner is not None else CensusScanner()
    direct = enumerate_SX(X, scanner=scanner)
    sieve = count_SX_sieve(X, scanner=scanner)
    if direct.total_direct != sieve.total_sieve:
        raise IntegrityError(
            f"direct count {direct.total_direct} differs from sieve count {sieve.total_sieve} at X={X}",
            witness={
                lambda_label(lam): (direct.counts_by_lambda[lam], sieve.sieve_by_lambda[lam])
                for lam in LAMBDAS
            },
        )
    report = CensusReport(
        X,
        counts_by_lambda=direct.counts_by_lambda,
        sieve_by_lambda=sieve.sieve_by_lambda,
        sieve_terms=sieve.sieve_terms,
        total_direct=direct.total_direct,
        total_sieve=sieve.total_sieve,
        d1_partial=sieve.d1_partial,
        near_threshold=scanner.near_points,
        window_scale=scanner.window_scale,
    )
    if sigma is not None:
        report.prediction = asymptotic_prediction(X, sigma)
    if naive and X >= 1:
        report.naive_count, report.naive_prediction = count_naive(X)
    return report
