"""Exception types shared across the package."""


class VarstabError(Exception):
    """Base class for all package-specific failures."""


class UnknownFamily(VarstabError):
    """A potential family name is not recognized."""


class InvalidParams(VarstabError):
    """Parameters of a potential family fail validation."""


class DegeneratePotential(VarstabError):
    """A stationary point of V has |V''| below tolerance."""


class StepFailure(VarstabError):
    """The ODE integrator could not complete the requested span."""


class EnergyDrift(VarstabError):
    """Pseudo-energy drifted beyond tolerance during integration."""


class TangencyAmbiguous(VarstabError):
    """A crossing is tangential within tolerance; the count is unreliable."""


class EndpointOnBoundary(VarstabError):
    """theta(a) or theta(b) sits on a min/max boundary of the potential."""


class SimultaneousZero(VarstabError):
    """theta' and V'(theta) vanish together, or f vanishes at a conjugate point."""


class NoBracket(VarstabError):
    """No sign change was found around the supplied shooting guess."""


class NoConvergence(VarstabError):
    """An iteration failed to converge within its budget."""


class NoRoot(VarstabError):
    """A required root does not exist in the searched range."""


class DivergentArc(VarstabError):
    """The arc runs into a heteroclinic connection; its length diverges."""


class NonFiniteDerivative(VarstabError):
    """dL/dE is not finite (V' vanishes at the turning abscissa)."""


class WrongIndex(VarstabError):
    """An operation requires a specific turning-point count and got another."""


class NotASolution(VarstabError):
    """A claimed constant solution does not satisfy V'(C) = 0."""


class GridMismatch(VarstabError):
    """A sampled perturbation does not cover the trajectory interval."""


class BadWidths(VarstabError):
    """Perturbation widths eps, nu are non-positive or overlap."""


class DomainError(VarstabError):
    """An argument is outside the mathematical domain of the function."""


class DegenerateProblem(VarstabError):
    """The decision is within tolerance of a degeneracy and cannot be made."""
