"""Exception types shared across the package."""


class FullereneCPError(Exception):
    """Base class for all package errors."""


class PerfectConductorHasNoEps(FullereneCPError):
    """A perfect conductor has no finite permittivity to evaluate."""


class RealPartUnavailable(FullereneCPError):
    """The material model defines only the imaginary part on the real axis."""


class StaticDrudeDivergence(FullereneCPError):
    """eps(i*xi) diverges at xi = 0 for a Drude conductor; use static_eps."""


class DomainError(FullereneCPError, ValueError):
    """Argument outside the mathematical domain of the operation."""


class DecompositionFailure(FullereneCPError):
    """Partial-fraction root pairing failed (non-passive rational response)."""


class QuadratureFailure(FullereneCPError):
    """A numerical integral did not reach the requested tolerance."""


class MatsubaraBudgetExceeded(FullereneCPError):
    """The frequency sum did not converge within the configured term budget."""


class NonConvergence(FullereneCPError):
    """Iterative fit exhausted its iteration budget without converging."""


class InsufficientData(FullereneCPError, ValueError):
    """Not enough data rows for the number of free parameters."""


class UnknownId(FullereneCPError, KeyError):
    """Material or molecule id not present in the database."""
