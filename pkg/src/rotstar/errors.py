"""Exception types shared across the package."""


class RotstarError(Exception):
    """Base class for all package errors."""


class ConfigError(RotstarError):
    """Bad or inconsistent run configuration."""


class SolverError(RotstarError):
    """A numerical solve failed (ODE, Newton, continuation)."""


class StiffnessError(SolverError):
    """Step-size underflow / singular right-hand side during integration."""


class NoEventError(SolverError):
    """The requested event never triggered before r_max."""


class UnboundStarError(SolverError):
    """The enthalpy never crossed zero: no compactly supported star."""


class EOSError(RotstarError):
    """Equation-of-state domain or integrability problem."""


class NonIntegrableEnthalpyError(EOSError):
    """p'(s)/s is not integrable at s=0; h(0) does not exist."""


class DegenerateOperatorError(RotstarError):
    """The linearized operator has a (near-)kernel; mass condition violated."""

    def __init__(self, msg, sigma_min=None, diagnostics=None):
        super().__init__(msg)
        self.sigma_min = sigma_min
        self.diagnostics = diagnostics or {}


class DeformationError(RotstarError):
    """Deformation too large, fold in the dilating map, or inversion failure."""
