"""Exception types shared across the package."""


class HopfStabError(Exception):
    """Base class for all package errors."""


class InputError(HopfStabError):
    """Bad caller input (dimension mismatch, invalid scalar, ...)."""


class ConfigurationError(HopfStabError):
    """Inconsistent system configuration (e.g. analytic tensors requested but absent)."""


class EvaluationError(HopfStabError):
    """A model evaluator produced a non-finite value."""


class SolverError(HopfStabError):
    """A nonlinear or linear solve failed; carries context in the message."""


class DegeneracyError(SolverError):
    """Singular system tied to a bifurcation degeneracy (named in the message)."""
