"""Exception types shared across the library.

Every error carries a short machine-readable ``code`` used by the CLI to
emit structured error records.
"""


class TmeigError(Exception):
    """Base class; ``code`` is a stable identifier for scripting."""

    code = "error"

    def __init__(self, message=""):
        super().__init__(message)
        self.message = message


# -- profile construction ----------------------------------------------------

class GapOrOverlap(TmeigError):
    code = "gap-or-overlap"


class DiscontinuousJunction(TmeigError):
    code = "discontinuous-junction"


class NonPositive(TmeigError):
    code = "non-positive"


class BadParams(TmeigError):
    code = "bad-params"


# -- ODE integration ----------------------------------------------------------

class StepFailure(TmeigError):
    code = "step-failure"


class MismatchedPoint(TmeigError):
    code = "mismatched-point"


# -- dispersion / zero search -------------------------------------------------

class ContourThroughZero(TmeigError):
    code = "contour-through-zero"


class NonIntegerWinding(TmeigError):
    code = "non-integer-winding"


# -- quadrature / coordinate maps ---------------------------------------------

class QuadratureFailure(TmeigError):
    code = "quadrature-failure"


class NonPositiveJost(TmeigError):
    code = "non-positive-jost"


# -- Riemann-Hilbert solver ----------------------------------------------------

class GridTooShort(TmeigError):
    code = "grid-too-short"


class AsymmetricJump(TmeigError):
    code = "asymmetric-jump"


class FitDegenerate(TmeigError):
    code = "fit-degenerate"


# -- Marchenko machinery --------------------------------------------------------

class ZeroDenominator(TmeigError):
    code = "zero-denominator"


class ResidueNotPositiveReal(TmeigError):
    code = "residue-not-positive-real"


class SupportLeak(TmeigError):
    code = "support-leak"


class SingularSystem(TmeigError):
    code = "singular-system"


# -- reconstruction pipelines ----------------------------------------------------

class Unsupported(TmeigError):
    """Raised for data in the a > b regime, where no reconstruction method
    is known (open problem)."""

    code = "unsupported-regime"


class Ambiguous(TmeigError):
    code = "ambiguous-regime"


class GammaZero(TmeigError):
    code = "gamma-zero"


class QZeroOutOfRange(TmeigError):
    code = "q-zero-out-of-range"
