"""Exception types shared across the package."""


class CtIdentError(Exception):
    """Base class for errors raised by this package."""


class UnstableSystem(CtIdentError):
    """An operation that requires asymptotic stability received an unstable model."""


class NonPrincipalLog(CtIdentError):
    """The discrete-to-continuous map is ambiguous or undefined for this model.

    Raised when a discrete-time pole lies on the closed negative real axis,
    where the principal matrix logarithm either does not exist or does not
    correspond to a real continuous-time system.
    """


class SingularMap(CtIdentError):
    """The zero-order-hold input map cannot be inverted for this sampling period."""


class DegenerateMap(CtIdentError):
    """Finite-difference probing of the sampling map failed near the requested point."""


class UnstablePredictor(CtIdentError):
    """Sensitivity filtering requires a stable predictor denominator."""


class DivergedUnstable(CtIdentError):
    """The iterate left the stability region and damping could not restore descent."""


class SingularInformation(CtIdentError):
    """The information matrix is numerically singular (data not informative enough)."""


class RankDeficientRegression(CtIdentError):
    """A linear regression matrix does not have full column rank."""


class SingularCovariance(CtIdentError):
    """A covariance matrix is not invertible to working precision."""


class NotPositiveDefinite(CtIdentError):
    """A matrix that must be symmetric positive definite failed factorization."""


class NegativeRealPole(CtIdentError):
    """An estimated discrete-time pole fell on the closed negative real axis.

    Such estimates have no real continuous-time equivalent under zero-order
    hold and are normally discarded by Monte Carlo drivers.
    """


class UnsupportedRegisterLength(CtIdentError):
    """No feedback tap entry is available for the requested register length."""


class AliasedFrequency(CtIdentError):
    """A requested sinusoid lies at or above the Nyquist frequency."""
