"""Exception hierarchy shared across the package."""


class EllipticError(Exception):
    """Base class for all errors raised by this package."""


class BadModulus(EllipticError):
    """Modular parameter outside the upper half-plane."""


class NonConvergent(EllipticError):
    """A series or product failed to meet tolerance within max_terms."""


class PoleAtLattice(EllipticError):
    """Evaluation point coincides with a lattice point (theta-1 zero)."""


class PoleHit(EllipticError):
    """A series denominator vanished."""


class NegativeTime(EllipticError):
    """Transition density requested at t < 0."""


class DimensionMismatch(EllipticError):
    """Configuration vectors of unequal length."""


class QuadratureFailure(EllipticError):
    """Quadrature failed to stabilize under refinement."""


class DomainBoundary(EllipticError):
    """Argument too close to the boundary of the open domain."""


class BadHorizon(EllipticError):
    """Simulation horizon not strictly inside [0, t_star)."""


class SubstepExhausted(EllipticError):
    """Adaptive sub-stepping hit the halving cap."""


class CollisionAtStart(EllipticError):
    """Initial particle configuration violates the alcove constraints."""


class WeightOverflow(EllipticError):
    """Log Girsanov weight exceeded the configured bound."""


class ObservableViolation(EllipticError):
    """Function handle fails the observable symmetry/periodicity conditions."""


class SeparationTooSmall(EllipticError):
    """Point configuration has a pairwise gap below the separation floor."""


class ImaginaryResidue(EllipticError):
    """A quantity that must be real carries too large an imaginary part."""


class ComplexityCap(EllipticError):
    """Requested computation exceeds the desk-scale caps."""


class ContourTooLarge(EllipticError):
    """Contour radius would enclose more than one support point."""


class ConfigInvalid(EllipticError):
    """CLI configuration failed validation."""
