from faltingsheight.census import CensusScanner, census, zeta10
from faltingsheight.data import (
    BoundaryTrace,
    CensusReport,
    CliConfig,
    HeightValue,
    RegionConstants,
    ResidueClassTable,
    SigmaResult,
)
from faltingsheight.exceptions import SingularCurveError
from faltingsheight.heights import faltings_HF
from faltingsheight.minimality import is_weakly_minimal, minimize, residue_class_census
from faltingsheight.region import (
    boundary_samples,
    bound_constants,
    monte_carlo_area,
    sigma_area,
)
from faltingsheight.settings import Settings
import logging

logger = logging.getLogger()
logging.basicConfig(format="%(levelname)s: %(message)s", level=logging.INFO)


class Pipeline:
    """Heights, region constants and census of S_X under one configuration"""

    def __init__(self, settings: Settings, config: CliConfig = None):
        if not isinstance(settings, Settings):
            raise TypeError(f"invalid format of settings, use settings.Settings")
        self.settings = settings
        self.config = config if config is not None else settings.numerics()
        self._constants: RegionConstants = None
        self._sigma: SigmaResult = None
        self._classes: ResidueClassTable = None

    @property
    def bits(self) -> int:
        return self.config.precision_bits

    @property
    def constants(self) -> RegionConstants:
        if self._constants is None:
            logging.info("compute region constants")
            self._constants = bound_constants(
                sup_margin=float(self.settings.get_setting("sup_margin")),
                grid=int(self.settings.get_setting("c_grid")),
                zoom_steps=int(self.settings.get_setting("c_zoom_steps")),
                N=float(self.settings.get_setting("N")),
                M=float(self.settings.get_setting("M")),
                beta0=float(self.settings.get_setting("beta0")),
                cusp_margin=float(self.settings.get_setting("cusp_margin")),
                bits=self.bits,
            )
        return self._constants

    def run_height(self, a: int, b: int) -> HeightValue:
        """Faltings height of y^2 = x^3 + A x + B, re-minimalised if needed"""
        if 4 * a**3 + 27 * b**2 == 0:
            raise SingularCurveError(f"y^2 = x^3 + {a} x + {b} is singular")
        reduced_from = None
        if not is_weakly_minimal(a, b):
            a_min, b_min, d = minimize(a, b)
            logging.warning(
                f"({a}, {b}) is not weakly minimal, using ({a_min}, {b_min}) with d={d}"
            )
            reduced_from = (a, b, d)
            a, b = a_min, b_min
        logging.info(f"compute Faltings height of ({a}, {b})")
        height = faltings_HF(a, b, bits=self.bits)
        height.reduced_from = reduced_from
        return height

    def run_sigma(self, tol: float = None, mc_samples: int = None) -> SigmaResult:
        """Area of R_1 and the leading constant 12 sigma / zeta(10)"""
        tol = tol if tol is not None else self.config.tolerance
        if self._sigma is not None and self._sigma.tol == tol and not mc_samples:
            return self._sigma
        result = sigma_area(
            tol=tol,
            T=float(self.settings.get_setting("sigma_T")),
            delta=float(self.settings.get_setting("sigma_delta")),
            s_min=float(self.settings.get_setting("sigma_s_min")),
            limit=int(self.settings.get_setting("quadrature_limit")),
        )
        result.leading_constant = float(12 * result.sigma / zeta10(self.bits))
        if mc_samples:
            logging.info(f"monte carlo area with {mc_samples} samples")
            result.monte_carlo = monte_carlo_area(
                samples=mc_samples,
                seed=int(self.settings.get_setting("mc_seed")),
                C=self.constants.C,
            )
        self._sigma = result
        return result

    def run_count(self, X: float, naive: bool = False, window_scale: float = None) -> CensusReport:
        """Both census paths for S_X, checked against each other"""
        if window_scale is None:
            window_scale = float(self.settings.get_setting("window_scale"))
        scanner = CensusScanner(
            settings=self.settings,
            constants=self.constants,
            threads=self.config.threads,
            window_scale=window_scale,
            bits=self.bits,
        )
        sigma = self.run_sigma().sigma
        logging.info(f"count S_X at X={X}")
        return census(X, sigma=sigma, scanner=scanner, naive=naive)

    def run_constants(self) -> RegionConstants:
        return self.constants

    def run_classes(self, lifts: int = None, seed: int = None) -> ResidueClassTable:
        """Sizes of the lambda classes mod 6^6"""
        if lifts is None and seed is None and self._classes is not None:
            return self._classes
        table = residue_class_census(
            lifts=lifts if lifts is not None else int(self.settings.get_setting("lifts")),
            seed=seed if seed is not None else int(self.settings.get_setting("seed")),
        )
        if lifts is None and seed is None:
            self._classes = table
        return table

    def run_boundary(
        self,
        X: float = 1.0,
        n: int = 100,
        b_min: float = None,
        b_max: float = None,
        normalization: str = "analytic",
        log_spaced: bool = False,
    ) -> BoundaryTrace:
        """Points on the boundary of R_X for replotting"""
        logging.info(f"trace boundary of R_{X} with {n} points")
        return boundary_samples(
            X=X,
            n=n,
            b_min=b_min,
            b_max=b_max,
            normalization=normalization,
            log_spaced=log_spaced,
            grid=int(self.settings.get_setting("boundary_grid")),
            C=self.constants.C,
        )
