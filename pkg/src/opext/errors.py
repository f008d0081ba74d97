"""Exception hierarchy. ``exit_code`` is what the command line maps each failure to."""


class OpextError(Exception):
    exit_code = 3


class InvalidTupleError(OpextError, ValueError):
    """Input is not a commuting tuple of contractions (or does not parse)."""

    exit_code = 2


class NonConvergenceError(OpextError):
    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class InconsistentCertificateError(OpextError):
    """Two certificates that must agree disagree; ``artifact`` holds a reproducer."""

    def __init__(self, message, artifact=None):
        super().__init__(message)
        self.artifact = artifact


class IndeterminatePurityError(InconsistentCertificateError):
    pass


class ConstructionError(OpextError):
    """A construction produced an object violating its contract beyond tolerance."""


class NoPseudoExtensionError(OpextError):
    """The tuple has a pure product adjoint, so no pseudo-extension exists."""

    exit_code = 4

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate or {}


class NotIntertwiningError(OpextError, ValueError):
    exit_code = 2
