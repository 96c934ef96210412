from fractions import Fraction
from typing import Dict, List, Optional, TypedDict
import math
from faltingsheight.exceptions import ContractError, CuspError, DomainError

LAMBDAS = [
    Fraction(1),
    Fraction(1, 2**12),
    Fraction(1, 3**12),
    Fraction(1, 6**12),
]
LAMBDA_LABELS = {
    Fraction(1): "1",
    Fraction(1, 2**12): "2^-12",
    Fraction(1, 3**12): "3^-12",
    Fraction(1, 6**12): "6^-12",
}


def lambda_label(lam: Fraction) -> str:
    """Short label of a lambda value, e.g. '2^-12'"""
    if lam not in LAMBDA_LABELS:
        raise ValueError(f"Invalid lambda {lam}")
    return LAMBDA_LABELS[lam]


class HalfPlanePoint:
    """Point of the complex upper half-plane"""

    def __init__(self, re, im, reduced: bool = False):
        if not im > 0:
            raise DomainError(f"imaginary part must be positive, got {im}")
        self.re = re
        self.im = im
        self.reduced: bool = reduced

    def as_complex(self, ctx):
        """Value as an mpc of the given mpmath context"""
        return ctx.mpc(ctx.mpf(self.re), ctx.mpf(self.im))

    def to_dict(self) -> dict:
        return {"re": float(self.re), "im": float(self.im), "reduced": self.reduced}

    def __repr__(self):
        return f"HalfPlanePoint({float(self.re)!r}, {float(self.im)!r})"


class UnimodularMap:
    """Integer matrix [[a, b], [c, d]] of determinant 1 acting by tau -> (a tau + b)/(c tau + d)"""

    def __init__(self, a: int, b: int, c: int, d: int):
        if a * d - b * c != 1:
            raise ContractError(f"determinant of [[{a}, {b}], [{c}, {d}]] is not 1")
        self.a, self.b, self.c, self.d = a, b, c, d

    @classmethod
    def identity(cls):
        return cls(1, 0, 0, 1)

    @classmethod
    def translation(cls, k: int = 1):
        return cls(1, k, 0, 1)

    @classmethod
    def inversion(cls):
        return cls(0, -1, 1, 0)

    def compose(self, other: "UnimodularMap") -> "UnimodularMap":
        """Map applying other first, then self"""
        return UnimodularMap(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def apply(self, tau):
        return (self.a * tau + self.b) / (self.c * tau + self.d)

    def automorphy(self, tau):
        """Factor c tau + d"""
        return self.c * tau + self.d

    def __eq__(self, other):
        if not isinstance(other, UnimodularMap):
            return NotImplemented
        return (self.a, self.b, self.c, self.d) == (other.a, other.b, other.c, other.d)

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c, "d": self.d}

    def __repr__(self):
        return f"UnimodularMap({self.a}, {self.b}, {self.c}, {self.d})"


class Curve:
    """Short Weierstrass curve y^2 = x^3 + A x + B"""

    def __init__(self, a, b, disc_core=None):
        self.a = a
        self.b = b
        # 4A^3 + 27B^2; callers near the cusp pass it in to avoid cancellation
        self.disc_core = 4 * a**3 + 27 * b**2 if disc_core is None else disc_core

    @property
    def is_integral(self) -> bool:
        return isinstance(self.a, int) and isinstance(self.b, int)

    @property
    def disc(self):
        """Discriminant -16(4A^3 + 27B^2)"""
        return -16 * self.disc_core

    @property
    def jinv(self):
        """j-invariant -1728 (4A)^3 / disc, exact for integral curves"""
        if self.disc_core == 0:
            return None
        if self.is_integral:
            return Fraction(6912 * self.a**3, self.disc_core)
        return 6912 * self.a**3 / self.disc_core

    def to_dict(self) -> dict:
        jinv = self.jinv
        return {
            "A": self.a if self.is_integral else float(self.a),
            "B": self.b if self.is_integral else float(self.b),
            "disc": self.disc if self.is_integral else float(self.disc),
            "jinv": None
            if jinv is None
            else (str(jinv) if isinstance(jinv, Fraction) else float(jinv)),
        }

    def __repr__(self):
        return f"Curve({self.a}, {self.b})"


class PeriodPair:
    """Basis of the period lattice"""

    def __init__(self, omega1, omega2):
        self.omega1 = omega1
        self.omega2 = omega2
        if not (omega2 / omega1).imag > 0:
            raise ContractError("period pair is not positively oriented")

    @property
    def ratio(self):
        return self.omega2 / self.omega1


class MinimalityClass:
    """Minimality of the short model at 2 and 3 and the resulting lambda"""

    def __init__(self, minimal_at_2: bool, minimal_at_3: bool):
        self.minimal_at_2: bool = minimal_at_2
        self.minimal_at_3: bool = minimal_at_3
        self.lam: Fraction = Fraction(1, 2 ** (0 if minimal_at_2 else 12)) * Fraction(
            1, 3 ** (0 if minimal_at_3 else 12)
        )

    def to_dict(self) -> dict:
        return {
            "lambda": lambda_label(self.lam),
            "minimal_at_2": self.minimal_at_2,
            "minimal_at_3": self.minimal_at_3,
        }


class ResidueClassTable:
    """Number of residue pairs mod 6^6 per lambda"""

    def __init__(
        self,
        counts: Dict[Fraction, int],
        not_weakly_minimal: int,
        lifts_checked: int = 0,
    ):
        self.counts = counts
        self.not_weakly_minimal = not_weakly_minimal
        self.lifts_checked = lifts_checked

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def to_dict(self) -> dict:
        return {
            "counts": {lambda_label(k): v for k, v in self.counts.items()},
            "not_weakly_minimal": self.not_weakly_minimal,
            "lifts_checked": self.lifts_checked,
            "total_weakly_minimal": self.total,
        }


class HeightValue:
    """Faltings height, kept in log space"""

    def __init__(self, log_HF, **kwargs):
        self.log_HF = log_HF
        self.curve: Curve = kwargs.get("curve")
        self.minimality: MinimalityClass = kwargs.get("minimality")
        self.tau: HalfPlanePoint = kwargs.get("tau")
        self.min_disc: int = kwargs.get("min_disc")
        self.naive: int = kwargs.get("naive")
        self.reduced_from: tuple = kwargs.get("reduced_from")  # (A, B, d) of a non-minimal input

    @property
    def HF(self):
        return math.exp(self.log_HF)

    @property
    def hF(self):
        return self.log_HF / 12

    def to_dict(self) -> dict:
        record = {
            "HF": self.HF,
            "hF": float(self.hF),
            "log_HF": float(self.log_HF),
        }
        if self.curve is not None:
            record.update(self.curve.to_dict())
        if self.minimality is not None:
            record["lambda"] = lambda_label(self.minimality.lam)
        if self.min_disc is not None:
            record["min_disc"] = self.min_disc
        if self.tau is not None:
            record["tau"] = self.tau.to_dict()
        if self.naive is not None:
            record["HN"] = self.naive
        if self.reduced_from is not None:
            a, b, d = self.reduced_from
            record["reduced_from"] = {"A": a, "B": b, "d": d}
        return record


class RegionSpec:
    """Height bound X and lambda scale of R_{X, lambda}"""

    def __init__(self, X: float, lam: Fraction = Fraction(1)):
        if not X > 0:
            raise ContractError(f"X must be positive, got {X}")
        self.X = X
        self.lam = lam

    @property
    def bound(self) -> float:
        """R_{X, lambda} = R_{X / lambda}"""
        return self.X / float(self.lam)


class RegionConstants:
    """Numerically derived constants governing the shape of R_X"""

    def __init__(self, **kwargs):
        self.C: float = kwargs.get("C")  # sup of |Delta(tau)| Im(tau)^6, inflated
        self.C_sampled: float = kwargs.get("C_sampled")
        self.tau_max: HalfPlanePoint = kwargs.get("tau_max")
        self.c: float = kwargs.get("c")
        self.epsilon0: float = kwargs.get("epsilon0")
        self.N: float = kwargs.get("N")
        self.M: float = kwargs.get("M")
        self.beta: float = kwargs.get("beta")
        self.beta0: float = kwargs.get("beta0")
        self.window_validated: bool = kwargs.get("window_validated", False)

    def x_m(self, X: float) -> float:
        return max(X, self.M)

    def tail_window(self, X: float) -> float:
        """N X_M^(1/3) (log X_M)^2"""
        x_m = self.x_m(X)
        return self.N * x_m ** (1 / 3) * math.log(x_m) ** 2

    def to_dict(self) -> dict:
        return {
            "C": self.C,
            "C_sampled": self.C_sampled,
            "tau_max": None if self.tau_max is None else self.tau_max.to_dict(),
            "c": self.c,
            "epsilon0": self.epsilon0,
            "N": self.N,
            "M": self.M,
            "beta": self.beta,
            "beta0": self.beta0,
            "window_validated": self.window_validated,
        }


class CuspParameter:
    """Parameter t = A^3 / B^2"""

    def __init__(self, t):
        if t == Fraction(-27, 4):
            raise CuspError("t = -27/4 lies on the cusp")
        self.t = t


class LambdaCount(TypedDict):
    label: str
    count_direct: int
    count_sieve: int


class SieveTerm(TypedDict):
    label: str
    d: int
    mu: int
    count: int


class QuadraturePiece(TypedDict):
    piece: str
    lo: float
    hi: float
    estimate: float
    err: float


class BoundaryPoint(TypedDict):
    A: float
    B: float
    side: str  # "positive" (4A^3 + 27B^2 > 0) or "negative"
    disc_core: float


class SigmaResult:
    """Area of R_1 with its quadrature diagnostics"""

    def __init__(self, sigma: float, error: float, pieces: List[QuadraturePiece], **kwargs):
        self.sigma = sigma
        self.error = error
        self.pieces = pieces
        self.intervals: int = kwargs.get("intervals")
        self.tol: float = kwargs.get("tol")
        self.leading_constant: float = kwargs.get("leading_constant")  # 12 sigma / zeta(10)
        self.monte_carlo: dict = kwargs.get("monte_carlo")

    def to_dict(self) -> dict:
        record = {
            "sigma": self.sigma,
            "error": self.error,
            "tol": self.tol,
            "intervals": self.intervals,
            "pieces": self.pieces,
        }
        if self.leading_constant is not None:
            record["leading_constant"] = self.leading_constant
        if self.monte_carlo is not None:
            record["monte_carlo"] = self.monte_carlo
        return record


class BoundaryTrace:
    """Boundary points of R_X from a sweep over B"""

    def __init__(self, X: float, points: List[BoundaryPoint], skipped_lines: List[float]):
        self.X = X
        self.points = points
        self.skipped_lines = skipped_lines

    def to_dict(self) -> dict:
        return {
            "X": self.X,
            "points": self.points,
            "skipped_lines": self.skipped_lines,
        }


class CensusReport:
    """Counts of S_X by lambda class from the direct and sieve paths"""

    def __init__(self, X: float, **kwargs):
        self.X = X
        self.counts_by_lambda: Dict[Fraction, int] = kwargs.get("counts_by_lambda", {})
        self.sieve_by_lambda: Dict[Fraction, int] = kwargs.get("sieve_by_lambda", {})
        self.sieve_terms: List[SieveTerm] = kwargs.get("sieve_terms", [])
        self.total_direct: Optional[int] = kwargs.get("total_direct")
        self.total_sieve: Optional[int] = kwargs.get("total_sieve")
        self.d1_partial: Optional[int] = kwargs.get("d1_partial")
        self.prediction: Optional[float] = kwargs.get("prediction")
        self.naive_count: Optional[int] = kwargs.get("naive_count")
        self.naive_prediction: Optional[float] = kwargs.get("naive_prediction")
        self.near_threshold: int = kwargs.get("near_threshold", 0)
        self.window_scale: float = kwargs.get("window_scale", 1.0)

    @property
    def ratio(self) -> Optional[float]:
        if self.prediction is None or self.total_direct is None:
            return None
        return self.total_direct / self.prediction

    def rows(self) -> List[LambdaCount]:
        """One row per lambda class"""
        return [
            LambdaCount(
                label=lambda_label(lam),
                count_direct=self.counts_by_lambda.get(lam, 0),
                count_sieve=self.sieve_by_lambda.get(lam, 0),
            )
            for lam in LAMBDAS
        ]

    def to_dict(self) -> dict:
        return {
            "X": self.X,
            "counts_by_lambda": {
                lambda_label(k): v for k, v in self.counts_by_lambda.items()
            },
            "sieve_by_lambda": {
                lambda_label(k): v for k, v in self.sieve_by_lambda.items()
            },
            "sieve_terms": self.sieve_terms,
            "total_direct": self.total_direct,
            "total_sieve": self.total_sieve,
            "d1_partial": self.d1_partial,
            "prediction": self.prediction,
            "ratio": self.ratio,
            "naive_count": self.naive_count,
            "naive_prediction": self.naive_prediction,
            "near_threshold": self.near_threshold,
            "window_scale": self.window_scale,
        }


class CliConfig:
    """Numeric and output configuration of a run"""

    def __init__(self, **kwargs):
        self.precision_bits: int = kwargs.get("precision_bits", 64)
        self.tolerance: float = kwargs.get("tolerance", 1e-10)
        self.threads: int = kwargs.get("threads", 1)
        self.format: str = kwargs.get("format", "json")
