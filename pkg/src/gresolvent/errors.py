"""Exception types raised across the package."""


class ResolventError(Exception):
    """Base class for all package errors."""


class UnitModulusArgument(ResolventError, ValueError):
    """A resolvent variable was (numerically) on the unit circle."""


class SingularResolvent(ResolventError, ArithmeticError):
    """The matrix to be inverted is too ill-conditioned."""


class NotCommuting(ResolventError, ValueError):
    pass


class CommutativityViolated(ResolventError, ValueError):
    """Two partial isometries violate ``V1 V2 h = V2 V1 h`` on the common domain."""


class LimitDivergence(ResolventError, ArithmeticError):
    """A sampler has no finite limit at infinity (numerically)."""


class ChartInconsistency(ResolventError, ValueError):
    """Taylor charts of a two-variable function disagree on shared moments."""


class GridMismatch(ResolventError, ValueError):
    pass


class NotAResolvent(ResolventError, ValueError):
    """A sampler fails the characterization of pair resolvents."""


class NegativeAtom(ResolventError, ValueError):
    """A recovered operator measure has an atom that is not positive semidefinite."""


class OffGridSpectrum(NegativeAtom):
    """Recovered moments are not periodic on the requested grid.

    Raised when the measure behind a sampler is not supported on the uniform
    grid; refining the grid (doubling ``n``) is the usual remedy.
    """


class NotNormalized(ResolventError, ValueError):
    pass


class NotInClass(ResolventError, ValueError):
    """A Schur parameter does not commute with the unitary as required."""


class CommutantViolation(ResolventError, ValueError):
    pass


class FrameMismatch(ResolventError, ValueError):
    """A conjugation is incompatible with the isometric/unitary pair."""


class InvalidSpec(ResolventError, ValueError):
    pass
