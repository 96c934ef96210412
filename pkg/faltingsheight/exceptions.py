class ContractError(ValueError):
    """Input violates an operation's preconditions"""

    exit_code = 2


class DomainError(ContractError):
    """Point outside the upper half-plane"""


class SingularCurveError(ContractError):
    """Curve with vanishing discriminant"""


class CuspError(ContractError):
    """Parameter sits on the cubic 4A^3 + 27B^2 = 0"""


class NumericError(ArithmeticError):
    """Iteration cap hit or refinement did not converge"""

    exit_code = 3


class IntegrityError(RuntimeError):
    """Two computations that must agree do not"""

    exit_code = 4

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness
