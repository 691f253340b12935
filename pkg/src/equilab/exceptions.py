"""Exception types raised by the numerical routines."""


class EquilabError(Exception):
    """Base class for numerical failures (CLI exit code 3)."""


class UnsupportedFrequency(EquilabError):
    """Adaptive quadrature of a Fourier transform did not converge."""


class DegenerateFit(EquilabError):
    """A decay fit was requested on data that is numerically zero."""


class NonTermination(EquilabError):
    """Fundamental-domain reduction exceeded its step budget."""


class SingularDenominator(EquilabError):
    """The factor gamma + beta + (gamma - beta) e^{-2t} vanishes."""


class IllConditionedInitialData(EquilabError):
    """The 2x2 system fixing the integration constants is ill-conditioned."""


class UnboundedG(EquilabError):
    """The forcing term grows along the probe grid."""
