"""Exception types shared across the package."""


class ColombeauError(Exception):
    """Base class for all package-specific errors."""


class InsufficientSamples(ColombeauError):
    """Fewer samples than the minimum required for a log-log fit."""


class InvalidSample(ColombeauError):
    """A sample has eps outside (0, 1], a duplicate eps, or a non-finite magnitude."""


class DerivativeUnavailable(ColombeauError):
    """A partial derivative of the requested order cannot be produced."""


class DimensionMismatch(ColombeauError):
    """Operands live in different dimensions or index ranges."""


class MomentSystemSingular(ColombeauError):
    """The linear system for mollifier moment cancellation is singular."""


class QuadratureFailure(ColombeauError):
    """Numerical integration failed to reach the requested tolerance."""


class UnsupportedDistribution(ColombeauError):
    """The distribution description falls outside the supported class."""


class PartitionMismatch(ColombeauError):
    """Partition of unity members do not line up with the atlas charts."""


class CoherenceFailure(ColombeauError):
    """Chart-wise data fails the overlap compatibility check."""


class AtlasMismatch(ColombeauError):
    """Operands are defined over different atlases."""


class NotComparable(ColombeauError):
    """Two generalized points share no witness chart."""


class InvalidSlots(ColombeauError):
    """Contraction slots are out of range or of equal variance."""


class NotADerivation(ColombeauError):
    """An operator fails the linearity/Leibniz probe tests."""


class DegreeOverflow(ColombeauError):
    """A wedge product would exceed the manifold dimension."""


class InvalidDegree(ColombeauError):
    """Operation undefined for forms of this degree."""


class DomainError(ColombeauError):
    """The domain is not of the shape the operation requires."""


class StiffnessFailure(ColombeauError):
    """The ODE solver could not resolve the singular layer."""


class NoImpact(ColombeauError):
    """No impact time exists for the given initial data."""
