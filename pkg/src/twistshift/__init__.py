"""Numerical experiments for twisted shifts u f(v) on the irrational rotation algebra."""

__version__ = "0.1.0"

from .circlefn import (  # noqa: E402
    EssentialZero,
    FactoredPolynomial,
    LaurentPolynomial,
    Product,
    RationalTurns,
    RealTurns,
    Scaled,
    ShiftedRational,
    evaluate,
    factored,
    fourier_abs_squared,
    lambda_plus_z,
    laurent,
    zero_set,
)
from .diophantine import Convergent, RotationAngle, convergents  # noqa: E402
from .fkdet import fk_determinant  # noqa: E402

__all__ = [
    "Convergent",
    "EssentialZero",
    "FactoredPolynomial",
    "LaurentPolynomial",
    "Product",
    "RationalTurns",
    "RealTurns",
    "RotationAngle",
    "Scaled",
    "ShiftedRational",
    "convergents",
    "evaluate",
    "factored",
    "fk_determinant",
    "fourier_abs_squared",
    "lambda_plus_z",
    "laurent",
    "zero_set",
]
