"""Exception hierarchy.

Domain errors (bad input regime, chart violations, non-generic energies) are
kept apart from verification failures so the CLI can map them to distinct
exit codes.
"""


class KeplerCZError(Exception):
    """Base class for every error raised by this package."""


class DomainError(KeplerCZError, ValueError):
    """An input lies outside the domain where an operation is defined."""


class ChartError(DomainError):
    """A state does not belong to the chart a Hamiltonian or map lives on."""


class CollisionError(DomainError):
    """An unregularized flow approached the origin."""


class StepLimitError(KeplerCZError, RuntimeError):
    """The integrator exhausted its step budget."""


class NorthPoleError(ChartError):
    """Stereographic projection evaluated at the projection pole."""


class AxisChartError(ChartError):
    """Spherical coordinates evaluated on the polar axis."""


class VerticalOrbitError(ChartError):
    """Delaunay Jacobian requested for a vertical orbit (zero azimuthal momentum)."""


class UnboundStateError(DomainError):
    """A bound (negative energy) state was required."""


class DegenerateConicError(DomainError):
    """Conic trace requested for a collision orbit (zero angular momentum)."""


class UnboundedConicError(DomainError):
    """Conic trace evaluated at an angle where the radius is infinite."""


class ResonantEnergyError(DomainError):
    """An index formula was evaluated at a degenerate (resonant) energy."""


class NonGenericEnergyError(DomainError):
    """The Jacobi energy coincides with a resonance or bifurcation energy."""

    def __init__(self, message, offenders=()):
        super().__init__(message)
        self.offenders = tuple(offenders)


class InconsistentInvariantsError(DomainError):
    """(E, L, A) violate A.L = 0 or |A|^2 = 2E|L|^2 + 1."""


class SingularLevelError(DomainError):
    """Level set of L3 requested at a critical value."""


class DegenerateBirthError(DomainError):
    """Bifurcation schedule requested for k <= l."""


class OffOrbitError(DomainError):
    """A frame was requested at a point that is not on the orbit."""


class UnresolvedCrossingError(KeplerCZError, RuntimeError):
    """A crossing of a symplectic path could not be isolated or classified."""


class NonSymplecticPathError(KeplerCZError, RuntimeError):
    """A path of matrices failed the symplecticity check."""


class FrameDegeneracyError(KeplerCZError, RuntimeError):
    """The linearized flow could not be expressed in the requested frame."""


class VerificationFailure(KeplerCZError):
    """An independently computed value disagreed with its closed form."""
