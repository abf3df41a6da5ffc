"""Exception types shared across the workbench.

Every error that maps to a CLI exit code lives here; modules raise these
rather than bare ValueError when the failure is part of the documented
contract (precision, capacity, validator violations).
"""


class PSLabError(Exception):
    """Base class for workbench errors."""


class ConfigError(PSLabError):
    """Invalid experiment configuration (CLI exit code 2)."""


class PrecisionExhausted(PSLabError):
    """Certified-real evaluation hit the precision cap without certifying.

    Carries the integer whose power landed too close to an integer
    boundary for the floor to be decided.
    """

    def __init__(self, n, cap_bits, detail=""):
        self.n = n
        self.cap_bits = cap_bits
        msg = f"could not certify floor near n={n} within {cap_bits} bits"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class CapacityExceeded(PSLabError):
    """Requested range exceeds a configured hard limit (exit code 4)."""


class ApproximationViolation(PSLabError):
    """Sawtooth approximant exceeded its majorant at some point."""

    def __init__(self, x, lhs, rhs):
        self.x, self.lhs, self.rhs = x, lhs, rhs
        super().__init__(f"|psi - psi*| = {lhs} > majorant {rhs} at x = {x}")


class CurvatureAssumptionFailed(PSLabError):
    """Sampled second derivative left the declared [Delta/4, 4*Delta] band."""


class DegreeTooSmall(PSLabError):
    """Taylor truncation error too large for the phase to be meaningful."""


class InvalidCharacter(PSLabError):
    """Character vector pairs nontrivially with the center."""


class MajorizationViolation(PSLabError):
    """nu failed the lower bound at a prime PS point in the window."""

    def __init__(self, n, nu_value, bound):
        self.n, self.nu_value, self.bound = n, nu_value, bound
        super().__init__(f"nu({n}) = {nu_value} < required {bound}")


class SeparationViolated(PSLabError):
    """Affine forms violate the pairwise determinant separation."""


class RangeMismatch(PSLabError):
    """A form evaluated outside the precomputed weight range."""
