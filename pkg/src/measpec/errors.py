"""Exception types raised by the spectrum engine."""


class SpectrumError(Exception):
    """Base class for all errors raised by :mod:`measpec`."""


class InvalidModelError(SpectrumError, ValueError):
    """The potential or model file is malformed."""


class ConstantPotentialError(SpectrumError, ValueError):
    """An operation that needs a strictly convex pressure got a constant potential."""


class UnsupportedModelError(SpectrumError, ValueError):
    """The model lacks structure the operation needs (e.g. factor functions)."""


class InfeasibleMomentsError(SpectrumError, ValueError):
    """Requested moments lie outside the range reachable by probability vectors."""


class SolverFailure(SpectrumError, RuntimeError):
    """A numerical routine did not converge where convergence is guaranteed."""


class LimitNonconvergence(SolverFailure):
    """An endpoint limit did not stabilise within the allowed parameter range."""
