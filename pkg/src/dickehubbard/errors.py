"""Exception hierarchy shared by all modules."""


class DickeHubbardError(Exception):
    """Base class for domain errors raised by this package."""


class ContractViolation(DickeHubbardError, ValueError):
    """An argument breaks a documented precondition (shape, Hermiticity, ...)."""


class ModelInvalid(DickeHubbardError):
    """The couplings put the model outside its physical domain."""


class SuperradiantFrameInvalid(DickeHubbardError):
    """The displaced frame was requested while the system is in the normal phase (mu > 1)."""


class NotApplicable(DickeHubbardError):
    """A closed-form result was requested outside the regime it assumes."""


class UnstableSolution(DickeHubbardError):
    """The quadratic Hamiltonian has complex excitation energies."""


class BoundaryNotFound(DickeHubbardError):
    """A stability bracket contained no transition."""


class NoStableSamples(DickeHubbardError):
    """Every sampled wave vector was dynamically unstable."""
